//! Assembly of the projected Dirac-structure operators.
//!
//! For every supported model the semi-discrete dynamics take the form
//!
//! ```text
//! M_q α̇_q =  D e_p + B u∂     (mass-side integration by parts)
//! M_p α̇_p = -Dᵀ e_q
//! ```
//!
//! or, for the momentum-side choice, with `B u∂` moved to the second row.
//! The extended interconnection `[[0, D], [-Dᵀ, 0]]` is skew-symmetric by
//! construction, which is what makes the discrete power balance exact.
//!
//! Matrices are accumulated in a fixed element-loop order, so assembly is
//! bit-reproducible run to run.

use nalgebra::DMatrix;

use crate::basis::{default_quadrature_points, eval_basis, gauss_1d, BasisFamily};
use crate::mesh::{Continuity, FeSpace, Geometry};
use crate::sparse::{CooMatrix, CsrMatrix};
use crate::{Error, Result};

/// Which conservation law was integrated by parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Partition {
    /// Mass balance integrated by parts; inputs enter the q-row.
    #[serde(rename = "mass-ibp")]
    MassIbp,
    /// Momentum balance integrated by parts; inputs enter the p-row.
    #[serde(rename = "momentum-ibp")]
    MomentumIbp,
}

/// Model families supported by the artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ModelKind {
    #[serde(rename = "swe1d")]
    Swe1d,
    #[serde(rename = "swe1d-varwidth")]
    Swe1dVarWidth,
    #[serde(rename = "swe2d")]
    Swe2d,
    #[serde(rename = "swe2d-polar")]
    Swe2dPolar,
    #[serde(rename = "beam")]
    Beam,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Swe1d => "swe1d",
            ModelKind::Swe1dVarWidth => "swe1d-varwidth",
            ModelKind::Swe2d => "swe2d",
            ModelKind::Swe2dPolar => "swe2d-polar",
            ModelKind::Beam => "beam",
        };
        f.write_str(s)
    }
}

/// Polynomial in one variable, coefficients from constant upward. Used
/// for the channel width b(z); evaluating it at quadrature points keeps
/// assembly exact whenever b is polynomial.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Poly1(pub Vec<f64>);

impl Poly1 {
    pub fn constant(c: f64) -> Self {
        Poly1(vec![c])
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    pub fn deriv_eval(&self, z: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * z + k as f64 * c)
    }
}

/// The matrices of the projected Dirac structure for one model.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    pub m_q: CsrMatrix,
    pub m_p: CsrMatrix,
    /// Interconnection matrix of the unified form above (for the beam
    /// this is the negative of the raw second-derivative pairing).
    pub d: CsrMatrix,
    /// Boundary input map; rows live in the q-space for `MassIbp` and in
    /// the p-space for `MomentumIbp`.
    pub b: CsrMatrix,
    pub m_psi: CsrMatrix,
    pub partition: Partition,
    pub model: ModelKind,
}

impl AssembledOperators {
    pub fn n_q(&self) -> usize {
        self.m_q.nrows()
    }

    pub fn n_p(&self) -> usize {
        self.m_p.nrows()
    }

    pub fn n_boundary(&self) -> usize {
        self.m_psi.nrows()
    }

    /// Export all five operators in the plain-text coordinate format.
    pub fn write_all(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, m) in [
            ("M_q", &self.m_q),
            ("M_p", &self.m_p),
            ("D", &self.d),
            ("B", &self.b),
            ("M_psi", &self.m_psi),
        ] {
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{name}.txt")))?);
            m.write_coordinate(&mut f)?;
        }
        Ok(())
    }
}

/// Physical-units basis tabulation at tensor quadrature points, shared by
/// all elements of a uniform mesh. Entry layout: (local dof, point).
pub(crate) struct Tabulation {
    pub nloc: usize,
    pub nq: usize,
    pub val: DMatrix<f64>,
    /// d/dz, d/dx or d/dr
    pub d0: DMatrix<f64>,
    /// d/dy or d/dθ (zero in 1D)
    pub d1: DMatrix<f64>,
    /// second derivative along axis 0 (1D families only)
    pub d00: DMatrix<f64>,
}

pub(crate) fn tabulate(space: &FeSpace, pts: &[f64]) -> Result<Tabulation> {
    let scales = space.dof_scales();
    let h0 = space.mesh.h0();
    if space.mesh.dim == 1 {
        let nloc = space.nloc();
        let nq = pts.len();
        let mut val = DMatrix::zeros(nloc, nq);
        let mut d0 = DMatrix::zeros(nloc, nq);
        let mut d00 = DMatrix::zeros(nloc, nq);
        for (j, &xi) in pts.iter().enumerate() {
            let v = eval_basis(space.family, xi, 0)?;
            let d = eval_basis(space.family, xi, 1)?;
            let dd = eval_basis(space.family, xi, 2)?;
            for i in 0..nloc {
                val[(i, j)] = scales[i] * v[i];
                d0[(i, j)] = scales[i] * d[i] * 2.0 / h0;
                d00[(i, j)] = scales[i] * dd[i] * (2.0 / h0) * (2.0 / h0);
            }
        }
        Ok(Tabulation {
            nloc,
            nq,
            val,
            d0,
            d1: DMatrix::zeros(nloc, nq),
            d00,
        })
    } else {
        let k = space.family.order();
        let fam1 = BasisFamily::lagrange(k, 1);
        let h1 = space.mesh.h1();
        let n1d = pts.len();
        let m = k + 1;
        let nloc = m * m;
        let nq = n1d * n1d;
        let mut v1 = vec![Vec::new(); n1d];
        let mut g1 = vec![Vec::new(); n1d];
        for (j, &xi) in pts.iter().enumerate() {
            v1[j] = eval_basis(fam1, xi, 0)?;
            g1[j] = eval_basis(fam1, xi, 1)?;
        }
        let mut val = DMatrix::zeros(nloc, nq);
        let mut d0 = DMatrix::zeros(nloc, nq);
        let mut d1 = DMatrix::zeros(nloc, nq);
        for q1 in 0..n1d {
            for q0 in 0..n1d {
                let q = q1 * n1d + q0;
                for m1 in 0..m {
                    for m0 in 0..m {
                        let i = m1 * m + m0;
                        val[(i, q)] = v1[q0][m0] * v1[q1][m1];
                        d0[(i, q)] = g1[q0][m0] * (2.0 / h0) * v1[q1][m1];
                        d1[(i, q)] = v1[q0][m0] * g1[q1][m1] * (2.0 / h1);
                    }
                }
            }
        }
        Ok(Tabulation {
            nloc,
            nq,
            val,
            d0,
            d1,
            d00: DMatrix::zeros(nloc, nq),
        })
    }
}

/// Tensor quadrature data for a uniform mesh: reference points per axis,
/// combined weights including the affine Jacobian, and a closure-friendly
/// list of physical coordinates per element.
pub(crate) struct ElementQuad {
    pub pts: Vec<f64>,
    /// combined weight × Jacobian per tensor point
    pub wj: Vec<f64>,
}

pub(crate) fn element_quad(space: &FeSpace, npts: usize) -> Result<ElementQuad> {
    let (pts, wts) = gauss_1d(npts)?;
    if space.mesh.dim == 1 {
        let j = space.mesh.h0() / 2.0;
        Ok(ElementQuad {
            wj: wts.iter().map(|w| w * j).collect(),
            pts,
        })
    } else {
        let j = (space.mesh.h0() / 2.0) * (space.mesh.h1() / 2.0);
        let mut wj = Vec::with_capacity(npts * npts);
        for w1 in &wts {
            for w0 in &wts {
                wj.push(w0 * w1 * j);
            }
        }
        Ok(ElementQuad { pts, wj })
    }
}

/// Physical coordinates of the tensor quadrature points of one element.
pub(crate) fn physical_points(space: &FeSpace, el: usize, pts: &[f64]) -> Vec<[f64; 2]> {
    let (sx, sy) = space.mesh.element_span(el);
    let map = |s: [f64; 2], xi: f64| 0.5 * (s[0] + s[1]) + 0.5 * (s[1] - s[0]) * xi;
    if space.mesh.dim == 1 {
        pts.iter().map(|&xi| [map(sx, xi), 0.0]).collect()
    } else {
        let mut out = Vec::with_capacity(pts.len() * pts.len());
        for &eta in pts {
            for &xi in pts {
                out.push([map(sx, xi), map(sy, eta)]);
            }
        }
        out
    }
}

/// Default quadrature for operators on these spaces (cubic-Hamiltonian
/// exactness rule applied to the largest order involved).
pub fn default_points(spaces: &[&FeSpace]) -> usize {
    let k = spaces.iter().map(|s| s.family.order()).max().unwrap_or(1);
    default_quadrature_points(k)
}

/// Weighted Gram matrix Mᵢⱼ = ∫ φᵢ φⱼ · weight. For two-component spaces
/// the result is block-diagonal with one copy per component. The weight
/// must be strictly positive on the quadrature set (use it for the polar
/// measure r or a physical coefficient).
pub fn assemble_mass(
    space: &FeSpace,
    weight: &dyn Fn([f64; 2]) -> f64,
    npts: usize,
) -> Result<CsrMatrix> {
    let quad = element_quad(space, npts)?;
    let tab = tabulate(space, &quad.pts)?;
    let n = space.ndof();
    let ns = space.nscalar();
    let mut coo = CooMatrix::new(n, n);
    let mut local = DMatrix::zeros(tab.nloc, tab.nloc);
    for el in 0..space.n_elements() {
        let xs = physical_points(space, el, &quad.pts);
        local.fill(0.0);
        for q in 0..tab.nq {
            let w = weight(xs[q]);
            if w <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "mass weight must be strictly positive, got {w} at {:?}",
                    xs[q]
                )));
            }
            let wq = quad.wj[q] * w;
            for i in 0..tab.nloc {
                let vi = tab.val[(i, q)] * wq;
                if vi == 0.0 {
                    continue;
                }
                for j in 0..tab.nloc {
                    local[(i, j)] += vi * tab.val[(j, q)];
                }
            }
        }
        let dofs = space.cell_dofs(el);
        for c in 0..space.components {
            let off = c * ns;
            for i in 0..tab.nloc {
                for j in 0..tab.nloc {
                    coo.push(off + dofs[i], off + dofs[j], local[(i, j)]);
                }
            }
        }
    }
    Ok(coo.to_csr())
}

/// 1D interconnection matrix for the shallow water family.
///
/// Mass-side partition: D = ∫ b(z) φ_q′ φ_pᵀ dz.
/// Momentum-side partition: D = −∫ φ_q d/dz(b φ_pᵀ) dz, which requires a
/// differentiable p-basis.
pub fn assemble_d_1d(
    space_q: &FeSpace,
    space_p: &FeSpace,
    width: &Poly1,
    partition: Partition,
    npts: usize,
) -> Result<CsrMatrix> {
    check_same_mesh(space_q, space_p)?;
    if space_q.mesh.dim != 1 {
        return Err(Error::InvalidArgument("assemble_d_1d needs a 1D mesh".into()));
    }
    if space_q.family.order() < 1 || space_q.continuity != Continuity::Continuous {
        return Err(Error::InvalidArgument(
            "the q-space must be continuous of order ≥ 1".into(),
        ));
    }
    if partition == Partition::MomentumIbp && space_p.family.order() < 1 {
        return Err(Error::InvalidArgument(
            "momentum-side integration by parts differentiates the p-basis; order ≥ 1 required"
                .into(),
        ));
    }
    let quad = element_quad(space_q, npts)?;
    let tq = tabulate(space_q, &quad.pts)?;
    let tp = tabulate(space_p, &quad.pts)?;
    let mut coo = CooMatrix::new(space_q.ndof(), space_p.ndof());
    for el in 0..space_q.n_elements() {
        let xs = physical_points(space_q, el, &quad.pts);
        let dq = space_q.cell_dofs(el);
        let dp = space_p.cell_dofs(el);
        for q in 0..tq.nq {
            let z = xs[q][0];
            let b = width.eval(z);
            let db = width.deriv_eval(z);
            if b <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "width must stay positive, got b({z}) = {b}"
                )));
            }
            let w = quad.wj[q];
            for i in 0..tq.nloc {
                for j in 0..tp.nloc {
                    let v = match partition {
                        Partition::MassIbp => w * b * tq.d0[(i, q)] * tp.val[(j, q)],
                        Partition::MomentumIbp => {
                            -w * tq.val[(i, q)] * (db * tp.val[(j, q)] + b * tp.d0[(j, q)])
                        }
                    };
                    coo.push(dq[i], dp[j], v);
                }
            }
        }
    }
    Ok(coo.to_csr())
}

/// 2D interconnection matrix (mass-side partition).
///
/// Cartesian: D = ∫ [∂ₓφ_q  ∂_yφ_q] Φ_pᵀ dx dy.
/// Polar: D = ∫ [r ∂_rφ_q  ∂_θφ_q] Φ_pᵀ dr dθ, the r-weighted form in
/// which the 1/r of the polar divergence has cancelled, so the integrand
/// stays finite for arbitrarily small inner radius.
pub fn assemble_d_2d(space_q: &FeSpace, space_p: &FeSpace, npts: usize) -> Result<CsrMatrix> {
    check_same_mesh(space_q, space_p)?;
    if space_q.mesh.dim != 2 {
        return Err(Error::InvalidArgument("assemble_d_2d needs a 2D mesh".into()));
    }
    if space_p.components != 2 {
        return Err(Error::InvalidArgument(
            "the 2D p-space must have two components".into(),
        ));
    }
    if space_q.family.order() < 1 || space_q.continuity != Continuity::Continuous {
        return Err(Error::InvalidArgument(
            "the q-space must be continuous of order ≥ 1".into(),
        ));
    }
    let polar = space_q.mesh.geometry == Geometry::Polar;
    let quad = element_quad(space_q, npts)?;
    let tq = tabulate(space_q, &quad.pts)?;
    let tp = tabulate(space_p, &quad.pts)?;
    let ns = space_p.nscalar();
    let mut coo = CooMatrix::new(space_q.ndof(), space_p.ndof());
    for el in 0..space_q.n_elements() {
        let xs = physical_points(space_q, el, &quad.pts);
        let dq = space_q.cell_dofs(el);
        let dp = space_p.cell_dofs(el);
        for q in 0..tq.nq {
            let w = quad.wj[q];
            // geometry factor per derivative component
            let (g0, g1) = if polar {
                (xs[q][0], 1.0) // [r ∂_r, ∂_θ], measure dr dθ
            } else {
                (1.0, 1.0)
            };
            for i in 0..tq.nloc {
                let a0 = w * g0 * tq.d0[(i, q)];
                let a1 = w * g1 * tq.d1[(i, q)];
                for j in 0..tp.nloc {
                    let pv = tp.val[(j, q)];
                    coo.push(dq[i], dp[j], a0 * pv);
                    coo.push(dq[i], ns + dp[j], a1 * pv);
                }
            }
        }
    }
    Ok(coo.to_csr())
}

/// Second-order pairing for the beam: D = ∫ φ₁″ φ₂ᵀ dz. The x₁-space must
/// be C¹ (Hermite cubics); element-wise second derivatives of merely C⁰
/// functions would drop the interface terms.
pub fn assemble_d_beam(space_x1: &FeSpace, space_x2: &FeSpace, npts: usize) -> Result<CsrMatrix> {
    check_same_mesh(space_x1, space_x2)?;
    if space_x1.family != BasisFamily::hermite_cubic() {
        return Err(Error::InvalidArgument(
            "the beam x1-space must use Hermite cubics".into(),
        ));
    }
    let quad = element_quad(space_x1, npts)?;
    let t1 = tabulate(space_x1, &quad.pts)?;
    let t2 = tabulate(space_x2, &quad.pts)?;
    let mut coo = CooMatrix::new(space_x1.ndof(), space_x2.ndof());
    for el in 0..space_x1.n_elements() {
        let d1 = space_x1.cell_dofs(el);
        let d2 = space_x2.cell_dofs(el);
        for q in 0..t1.nq {
            let w = quad.wj[q];
            for i in 0..t1.nloc {
                let a = w * t1.d00[(i, q)];
                for j in 0..t2.nloc {
                    coo.push(d1[i], d2[j], a * t2.val[(j, q)]);
                }
            }
        }
    }
    Ok(coo.to_csr())
}

/// 1D boundary input map `B = [b(0) φ(0), −b(L) φ(L)]` for whichever
/// space carries the ports (q-space for the mass-side partition, p-space
/// for the momentum-side one).
pub fn assemble_b_1d(space: &FeSpace, width: &Poly1) -> Result<CsrMatrix> {
    if space.mesh.dim != 1 {
        return Err(Error::InvalidArgument("assemble_b_1d needs a 1D mesh".into()));
    }
    let (v0, vl, _, _) = space.end_values_1d()?;
    let z0 = space.mesh.x[0];
    let zl = *space.mesh.x.last().unwrap();
    let mut coo = CooMatrix::new(space.ndof(), 2);
    for g in 0..space.ndof() {
        coo.push(g, 0, width.eval(z0) * v0[g]);
        coo.push(g, 1, -width.eval(zl) * vl[g]);
    }
    Ok(coo.to_csr())
}

/// Beam boundary map `B = [φ₁′(L), −φ₁′(0), −φ₁(L), φ₁(0)]`, conjugate to
/// the input (moment at L, moment at 0, shear at L, shear at 0).
pub fn assemble_b_beam(space_x1: &FeSpace) -> Result<CsrMatrix> {
    if space_x1.family != BasisFamily::hermite_cubic() {
        return Err(Error::InvalidArgument(
            "the beam boundary map needs the Hermite x1-space".into(),
        ));
    }
    let (v0, vl, d0, dl) = space_x1.end_values_1d()?;
    let mut coo = CooMatrix::new(space_x1.ndof(), 4);
    for g in 0..space_x1.ndof() {
        coo.push(g, 0, dl[g]);
        coo.push(g, 1, -d0[g]);
        coo.push(g, 2, -vl[g]);
        coo.push(g, 3, v0[g]);
    }
    Ok(coo.to_csr())
}

/// 2D boundary operators over the controlled boundary: the input map
/// B = ∫ φ_q ψᵀ ds and the boundary mass M_ψ = ∫ ψ ψᵀ ds, assembled in
/// one pass so shared entries are bit-identical. ψ is the trace of the
/// q-basis.
pub fn assemble_boundary_2d(space_q: &FeSpace, npts: usize) -> Result<(CsrMatrix, CsrMatrix)> {
    if space_q.mesh.dim != 2 {
        return Err(Error::InvalidArgument(
            "assemble_boundary_2d needs a 2D mesh".into(),
        ));
    }
    let trace = space_q.trace()?;
    if trace.is_empty() {
        return Err(Error::InvalidArgument("empty boundary".into()));
    }
    let k = space_q.family.order();
    let fam1 = BasisFamily::lagrange(k, 1);
    let (pts, wts) = gauss_1d(npts)?;
    let tab: Vec<Vec<f64>> = pts
        .iter()
        .map(|&xi| eval_basis(fam1, xi, 0))
        .collect::<Result<_>>()?;
    let nb = trace.len();
    let mut b = CooMatrix::new(space_q.ndof(), nb);
    let mut mpsi = CooMatrix::new(nb, nb);
    for edge in &trace.edges {
        let jac = edge.length / 2.0;
        for (q, w) in wts.iter().enumerate() {
            let wq = w * jac;
            for (a, &ja) in edge.psi.iter().enumerate() {
                let va = tab[q][a] * wq;
                for (c, &jc) in edge.psi.iter().enumerate() {
                    let v = va * tab[q][c];
                    b.push(trace.dofs[ja], jc, v);
                    mpsi.push(ja, jc, v);
                }
            }
        }
    }
    Ok((b.to_csr(), mpsi.to_csr()))
}

/// Boundary mass matrix. 1D interval boundaries are two isolated points
/// under the counting measure, so M_ψ is the 2×2 identity; in 2D it is
/// the perimeter (or outer-circle) mass matrix of the trace basis.
pub fn assemble_mpsi(space_q: &FeSpace, npts: usize) -> Result<CsrMatrix> {
    if space_q.mesh.dim == 1 {
        Ok(CsrMatrix::identity(2))
    } else {
        Ok(assemble_boundary_2d(space_q, npts)?.1)
    }
}

fn check_same_mesh(a: &FeSpace, b: &FeSpace) -> Result<()> {
    if !std::sync::Arc::ptr_eq(&a.mesh, &b.mesh) {
        return Err(Error::InvalidArgument(
            "spaces must be built on the same mesh".into(),
        ));
    }
    Ok(())
}
