//! Structured meshes and finite-element spaces on them.
//!
//! Three mesh kinds are supported: 1D intervals, 2D rectangles and 2D
//! polar annuli (θ-periodic). All are uniform tensor grids, so every
//! element is congruent and basis tabulations can be shared across the
//! element loop.
//!
//! A [`FeSpace`] binds a [`BasisFamily`] to a mesh with a chosen
//! continuity and component count. Scalar q-type spaces in 2D carry a
//! boundary trace: the ordered list of degrees of freedom whose basis
//! functions are nonzero on the controlled boundary, walked
//! counterclockwise, together with the boundary edges used for line
//! integrals.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::basis::{eval_basis, BasisFamily};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Cartesian,
    Polar,
}

/// Named boundary parts. 1D uses `Left`/`Right`, rectangles use the four
/// compass sides, annuli use `Outer`/`Inner` circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Down,
    Up,
    Outer,
    Inner,
}

/// Uniform structured mesh. Axis 0 is z (1D), x (rectangle) or r
/// (annulus); axis 1 is y or θ. θ is periodic on annuli.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: u8,
    pub geometry: Geometry,
    /// Axis-0 breakpoints (n0 + 1 values).
    pub x: Vec<f64>,
    /// Axis-1 breakpoints (n1 + 1 values; θ includes the 2π endpoint).
    pub y: Vec<f64>,
    pub periodic_y: bool,
}

impl Mesh {
    /// Elements along axis 0.
    pub fn n0(&self) -> usize {
        self.x.len() - 1
    }

    /// Elements along axis 1 (zero in 1D).
    pub fn n1(&self) -> usize {
        self.y.len().saturating_sub(1)
    }

    pub fn n_elements(&self) -> usize {
        if self.dim == 1 {
            self.n0()
        } else {
            self.n0() * self.n1()
        }
    }

    pub fn h0(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn h1(&self) -> f64 {
        self.y[1] - self.y[0]
    }

    /// Physical span of an element along both axes.
    pub fn element_span(&self, el: usize) -> ([f64; 2], [f64; 2]) {
        if self.dim == 1 {
            ([self.x[el], self.x[el + 1]], [0.0, 0.0])
        } else {
            let e0 = el % self.n0();
            let e1 = el / self.n0();
            (
                [self.x[e0], self.x[e0 + 1]],
                [self.y[e1], self.y[e1 + 1]],
            )
        }
    }

    /// Element measure including the polar weight r.
    pub fn element_measure(&self, el: usize) -> f64 {
        let (sx, sy) = self.element_span(el);
        match (self.dim, self.geometry) {
            (1, _) => sx[1] - sx[0],
            (_, Geometry::Cartesian) => (sx[1] - sx[0]) * (sy[1] - sy[0]),
            (_, Geometry::Polar) => 0.5 * (sx[1] * sx[1] - sx[0] * sx[0]) * (sy[1] - sy[0]),
        }
    }

    /// Total domain measure.
    pub fn measure(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.element_measure(e)).sum()
    }

    /// Boundary perimeter (1D: counting measure 2).
    pub fn perimeter(&self) -> f64 {
        match (self.dim, self.geometry) {
            (1, _) => 2.0,
            (_, Geometry::Cartesian) => {
                let lx = self.x.last().unwrap() - self.x[0];
                let ly = self.y.last().unwrap() - self.y[0];
                2.0 * (lx + ly)
            }
            (_, Geometry::Polar) => {
                // controlled boundary: the outer circle
                let r = *self.x.last().unwrap();
                let span = self.y.last().unwrap() - self.y[0];
                r * span
            }
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Uniform partition of `[0, length]` into `n` elements.
pub fn interval_mesh(length: f64, n: usize) -> Result<Mesh> {
    if length <= 0.0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "interval mesh needs positive length and element count, got L={length}, n={n}"
        )));
    }
    Ok(Mesh {
        dim: 1,
        geometry: Geometry::Cartesian,
        x: linspace(0.0, length, n),
        y: Vec::new(),
        periodic_y: false,
    })
}

/// `nx × ny` quadrilaterals on `[0, lx] × [0, ly]`.
pub fn rect_mesh(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Mesh> {
    if lx <= 0.0 || ly <= 0.0 || nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "rectangle mesh needs positive sizes and counts, got {lx}x{ly}, {nx}x{ny}"
        )));
    }
    Ok(Mesh {
        dim: 2,
        geometry: Geometry::Cartesian,
        x: linspace(0.0, lx, nx),
        y: linspace(0.0, ly, ny),
        periodic_y: false,
    })
}

/// θ-periodic structured annulus `r ∈ [r_in, r_out]`, `θ ∈ [0, 2π]`.
///
/// A full disc is handled as an annulus with a small positive inner
/// radius and zero-flux input on the inner circle; a grid node at r = 0
/// would degenerate even though the interconnection integrand itself is
/// singularity-free.
pub fn annulus_mesh(r_in: f64, r_out: f64, nr: usize, ntheta: usize) -> Result<Mesh> {
    if r_in <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "inner radius must be positive (got {r_in}); the disc center is not meshed"
        )));
    }
    if r_out <= r_in || nr == 0 || ntheta < 3 {
        return Err(Error::InvalidArgument(format!(
            "annulus needs r_in < r_out, nr ≥ 1 and nθ ≥ 3, got r=[{r_in},{r_out}], {nr}x{ntheta}"
        )));
    }
    Ok(Mesh {
        dim: 2,
        geometry: Geometry::Polar,
        x: linspace(r_in, r_out, nr),
        y: linspace(0.0, 2.0 * std::f64::consts::PI, ntheta),
        periodic_y: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Continuity {
    Continuous,
    Discontinuous,
}

/// One boundary edge: the ψ indices of its nodes in edge-parameter order
/// and the physical edge length (arc length for polar).
#[derive(Debug, Clone)]
pub struct BoundaryEdge {
    pub psi: Vec<usize>,
    pub length: f64,
    pub side: Side,
}

/// Trace of a scalar space on the controlled boundary.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    /// ψ index → scalar DOF of the parent space.
    pub dofs: Vec<usize>,
    /// ψ index → owning side (half-open assignment; each node belongs to
    /// exactly one side so signal masks partition the boundary).
    pub sides: Vec<Side>,
    pub edges: Vec<BoundaryEdge>,
    /// Whether the ψ ordering is a closed loop (2D) or isolated points (1D).
    pub closed_loop: bool,
}

impl BoundaryTrace {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }
}

/// A finite-element space bound to a mesh.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Arc<Mesh>,
    pub family: BasisFamily,
    pub continuity: Continuity,
    /// 1 for scalar q-type spaces, 2 for vector p-type spaces whose
    /// Cartesian components use decoupled copies of the scalar basis
    /// (block layout: all axis-0 components first, then axis-1).
    pub components: usize,
    nscalar: usize,
    /// Scalar DOFs per lattice direction (continuous spaces): axis 0 count.
    lat0: usize,
    /// Axis-1 lattice count (continuous 2D spaces).
    lat1: usize,
    trace: Option<BoundaryTrace>,
}

impl FeSpace {
    /// Total DOFs including components.
    pub fn ndof(&self) -> usize {
        self.components * self.nscalar
    }

    /// DOFs of one component.
    pub fn nscalar(&self) -> usize {
        self.nscalar
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    /// Local scalar functions per element.
    pub fn nloc(&self) -> usize {
        self.family.len()
    }

    /// Global scalar DOFs of an element, ordered by local DOF index
    /// (axis 0 fastest in 2D).
    pub fn cell_dofs(&self, el: usize) -> Vec<usize> {
        let k = self.family.order();
        match (self.mesh.dim, self.family, self.continuity) {
            (1, BasisFamily::HermiteCubic, _) => {
                vec![2 * el, 2 * el + 1, 2 * el + 2, 2 * el + 3]
            }
            (1, _, Continuity::Continuous) => (0..=k).map(|m| el * k + m).collect(),
            (1, _, Continuity::Discontinuous) => (0..=k).map(|m| el * (k + 1) + m).collect(),
            (2, _, Continuity::Continuous) => {
                let e0 = el % self.mesh.n0();
                let e1 = el / self.mesh.n0();
                let mut dofs = Vec::with_capacity((k + 1) * (k + 1));
                for m1 in 0..=k {
                    let mut i1 = e1 * k + m1;
                    if self.mesh.periodic_y {
                        i1 %= self.lat1;
                    }
                    for m0 in 0..=k {
                        let i0 = e0 * k + m0;
                        dofs.push(i1 * self.lat0 + i0);
                    }
                }
                dofs
            }
            (2, _, Continuity::Discontinuous) => {
                let nl = (k + 1) * (k + 1);
                (0..nl).map(|m| el * nl + m).collect()
            }
            _ => unreachable!(),
        }
    }

    /// Per-local-DOF scale mapping reference functions to physical basis
    /// functions. Hermite slope DOFs scale with the element length so the
    /// global DOF is the physical slope; everything else is 1.
    pub fn dof_scales(&self) -> Vec<f64> {
        match self.family {
            BasisFamily::HermiteCubic => {
                let h = self.mesh.h0();
                vec![1.0, h, 1.0, h]
            }
            _ => vec![1.0; self.nloc()],
        }
    }

    /// Physical coordinates of each scalar DOF (Hermite: slope DOFs share
    /// their node's coordinate).
    pub fn dof_coords(&self) -> Vec<[f64; 2]> {
        let k = self.family.order();
        let m = &self.mesh;
        match (m.dim, self.family, self.continuity) {
            (1, BasisFamily::HermiteCubic, _) => (0..self.nscalar)
                .map(|g| [m.x[0] + m.h0() * (g / 2) as f64, 0.0])
                .collect(),
            (1, _, Continuity::Continuous) => (0..self.nscalar)
                .map(|g| [m.x[0] + m.h0() * g as f64 / k as f64, 0.0])
                .collect(),
            (1, _, Continuity::Discontinuous) => {
                let nodes = self.family.nodes_1d();
                (0..self.nscalar)
                    .map(|g| {
                        let el = g / (k + 1);
                        let xi = nodes[g % (k + 1)];
                        let (sx, _) = m.element_span(el);
                        [0.5 * (sx[0] + sx[1]) + 0.5 * (sx[1] - sx[0]) * xi, 0.0]
                    })
                    .collect()
            }
            (2, _, Continuity::Continuous) => (0..self.nscalar)
                .map(|g| {
                    let i0 = g % self.lat0;
                    let i1 = g / self.lat0;
                    [
                        m.x[0] + m.h0() * i0 as f64 / k as f64,
                        m.y[0] + m.h1() * i1 as f64 / k as f64,
                    ]
                })
                .collect(),
            (2, _, Continuity::Discontinuous) => {
                let nodes = self.family.nodes_1d();
                let nl = (k + 1) * (k + 1);
                (0..self.nscalar)
                    .map(|g| {
                        let el = g / nl;
                        let loc = g % nl;
                        let (sx, sy) = m.element_span(el);
                        let xi = nodes[loc % (k + 1)];
                        let eta = nodes[loc / (k + 1)];
                        [
                            0.5 * (sx[0] + sx[1]) + 0.5 * (sx[1] - sx[0]) * xi,
                            0.5 * (sy[0] + sy[1]) + 0.5 * (sy[1] - sy[0]) * eta,
                        ]
                    })
                    .collect()
            }
            _ => unreachable!(),
        }
    }

    /// Boundary trace (scalar spaces whose basis has boundary support).
    pub fn trace(&self) -> Result<&BoundaryTrace> {
        self.trace.as_ref().ok_or_else(|| {
            Error::InvalidArgument("space has no boundary trace (vector or empty boundary)".into())
        })
    }

    /// Values and first derivatives of all scalar basis functions at the
    /// two interval ends (1D spaces only). Returns (val0, valL, d0, dL).
    pub fn end_values_1d(&self) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>)> {
        if self.mesh.dim != 1 {
            return Err(Error::InvalidArgument("end_values_1d needs a 1D mesh".into()));
        }
        let n = self.nscalar;
        let scales = self.dof_scales();
        let h = self.mesh.h0();
        let mut v0 = DVector::zeros(n);
        let mut vl = DVector::zeros(n);
        let mut d0 = DVector::zeros(n);
        let mut dl = DVector::zeros(n);
        let first = self.cell_dofs(0);
        let last = self.cell_dofs(self.n_elements() - 1);
        let ref_v0 = eval_basis(self.family, -1.0, 0)?;
        let ref_vl = eval_basis(self.family, 1.0, 0)?;
        let ref_d0 = eval_basis(self.family, -1.0, 1)?;
        let ref_dl = eval_basis(self.family, 1.0, 1)?;
        for (m, &g) in first.iter().enumerate() {
            v0[g] += scales[m] * ref_v0[m];
            d0[g] += scales[m] * ref_d0[m] * 2.0 / h;
        }
        for (m, &g) in last.iter().enumerate() {
            vl[g] += scales[m] * ref_vl[m];
            dl[g] += scales[m] * ref_dl[m] * 2.0 / h;
        }
        Ok((v0, vl, d0, dl))
    }

    /// Find the element containing a physical point and its reference
    /// coordinates (points clamped to the domain; θ wrapped on annuli).
    pub fn locate(&self, p: [f64; 2]) -> (usize, [f64; 2]) {
        let m = &self.mesh;
        let loc_axis = |v: f64, bp: &[f64], periodic: bool| -> (usize, f64) {
            let n = bp.len() - 1;
            let lo = bp[0];
            let hi = bp[n];
            let mut v = v;
            if periodic {
                let span = hi - lo;
                v = lo + (v - lo).rem_euclid(span);
            }
            let h = bp[1] - bp[0];
            let e = (((v - lo) / h).floor() as isize).clamp(0, n as isize - 1) as usize;
            let xi = 2.0 * (v - bp[e]) / h - 1.0;
            (e, xi.clamp(-1.0, 1.0))
        };
        if m.dim == 1 {
            let (e, xi) = loc_axis(p[0], &m.x, false);
            (e, [xi, 0.0])
        } else {
            let (e0, xi) = loc_axis(p[0], &m.x, false);
            let (e1, eta) = loc_axis(p[1], &m.y, m.periodic_y);
            (e1 * m.n0() + e0, [xi, eta])
        }
    }

    /// Evaluate one component of a coefficient field at a physical point.
    pub fn eval_field(&self, coeffs: &DVector<f64>, component: usize, p: [f64; 2]) -> f64 {
        let (el, xi) = self.locate(p);
        let dofs = self.cell_dofs(el);
        let scales = self.dof_scales();
        let offset = component * self.nscalar;
        let vals = match self.mesh.dim {
            1 => eval_basis(self.family, xi[0], 0).unwrap(),
            _ => {
                let k = self.family.order();
                let fx = eval_basis(BasisFamily::lagrange(k, 1), xi[0], 0).unwrap();
                let fy = eval_basis(BasisFamily::lagrange(k, 1), xi[1], 0).unwrap();
                let mut out = Vec::with_capacity(fx.len() * fy.len());
                for vy in &fy {
                    for vx in &fx {
                        out.push(vx * vy);
                    }
                }
                out
            }
        };
        dofs.iter()
            .enumerate()
            .map(|(m, &g)| scales[m] * vals[m] * coeffs[offset + g])
            .sum()
    }
}

/// Bind a basis family to a mesh.
pub fn build_space(
    mesh: &Arc<Mesh>,
    family: BasisFamily,
    continuity: Continuity,
    components: usize,
) -> Result<FeSpace> {
    if family.dim() != mesh.dim {
        return Err(Error::InvalidArgument(format!(
            "basis dimension {} does not match mesh dimension {}",
            family.dim(),
            mesh.dim
        )));
    }
    if matches!(family, BasisFamily::HermiteCubic) && mesh.dim != 1 {
        return Err(Error::InvalidArgument(
            "Hermite cubics are only available on 1D meshes".into(),
        ));
    }
    if components == 2 && mesh.dim != 2 {
        return Err(Error::InvalidArgument(
            "two-component spaces require a 2D mesh".into(),
        ));
    }
    if !(components == 1 || components == 2) {
        return Err(Error::InvalidArgument("components must be 1 or 2".into()));
    }
    if family.order() == 0 && continuity == Continuity::Continuous {
        return Err(Error::InvalidArgument(
            "order-0 spaces are discontinuous by nature".into(),
        ));
    }

    let k = family.order();
    let (nscalar, lat0, lat1) = match (mesh.dim, family, continuity) {
        (1, BasisFamily::HermiteCubic, _) => (2 * (mesh.n0() + 1), 0, 0),
        (1, _, Continuity::Continuous) => (k * mesh.n0() + 1, k * mesh.n0() + 1, 0),
        (1, _, Continuity::Discontinuous) => ((k + 1) * mesh.n0(), 0, 0),
        (2, _, Continuity::Continuous) => {
            let l0 = k * mesh.n0() + 1;
            let l1 = if mesh.periodic_y {
                k * mesh.n1()
            } else {
                k * mesh.n1() + 1
            };
            (l0 * l1, l0, l1)
        }
        (2, _, Continuity::Discontinuous) => {
            ((k + 1) * (k + 1) * mesh.n_elements(), 0, 0)
        }
        _ => unreachable!(),
    };

    let mut space = FeSpace {
        mesh: Arc::clone(mesh),
        family,
        continuity,
        components,
        nscalar,
        lat0,
        lat1,
        trace: None,
    };
    if components == 1 {
        space.trace = build_trace(&space)?;
    }
    Ok(space)
}

/// Construct the boundary trace of a scalar space.
fn build_trace(space: &FeSpace) -> Result<Option<BoundaryTrace>> {
    let m = &space.mesh;
    let k = space.family.order();
    match (m.dim, space.continuity) {
        (1, _) => {
            // point boundary: first and last scalar DOF carry the values
            let (v0, vl, _, _) = space.end_values_1d()?;
            let left = v0.iter().position(|&v| v != 0.0).unwrap_or(0);
            let right = vl
                .iter()
                .rposition(|&v| v != 0.0)
                .unwrap_or(space.nscalar - 1);
            Ok(Some(BoundaryTrace {
                dofs: vec![left, right],
                sides: vec![Side::Left, Side::Right],
                edges: Vec::new(),
                closed_loop: false,
            }))
        }
        (2, Continuity::Discontinuous) => Ok(None),
        (2, Continuity::Continuous) => {
            if m.periodic_y {
                // annulus: the controlled boundary is the outer circle
                let nth = space.lat1;
                let outer = space.lat0 - 1;
                let dofs: Vec<usize> = (0..nth).map(|j| j * space.lat0 + outer).collect();
                let sides = vec![Side::Outer; nth];
                let r_out = *m.x.last().unwrap();
                let mut edges = Vec::new();
                for e in 0..m.n1() {
                    let psi: Vec<usize> = (0..=k).map(|mm| (e * k + mm) % nth).collect();
                    edges.push(BoundaryEdge {
                        psi,
                        length: r_out * m.h1(),
                        side: Side::Outer,
                    });
                }
                Ok(Some(BoundaryTrace {
                    dofs,
                    sides,
                    edges,
                    closed_loop: true,
                }))
            } else {
                let (l0, l1) = (space.lat0, space.lat1);
                let (last0, last1) = (l0 - 1, l1 - 1);
                // counterclockwise walk; each node owned by exactly one side
                let mut lattice = Vec::new(); // (i0, i1, side)
                for i0 in 0..last0 {
                    lattice.push((i0, 0, Side::Down));
                }
                for i1 in 0..last1 {
                    lattice.push((last0, i1, Side::Right));
                }
                for i0 in (1..=last0).rev() {
                    lattice.push((i0, last1, Side::Up));
                }
                for i1 in (1..=last1).rev() {
                    lattice.push((0, i1, Side::Left));
                }
                let mut psi_of: HashMap<(usize, usize), usize> = HashMap::new();
                let mut dofs = Vec::new();
                let mut sides = Vec::new();
                for (j, &(i0, i1, side)) in lattice.iter().enumerate() {
                    psi_of.insert((i0, i1), j);
                    dofs.push(i1 * l0 + i0);
                    sides.push(side);
                }
                let mut edges = Vec::new();
                let mut push_edge = |nodes: Vec<(usize, usize)>, length: f64, side: Side| {
                    let psi = nodes.iter().map(|key| psi_of[key]).collect();
                    edges.push(BoundaryEdge { psi, length, side });
                };
                for e in 0..m.n0() {
                    push_edge((0..=k).map(|mm| (e * k + mm, 0)).collect(), m.h0(), Side::Down);
                }
                for e in 0..m.n1() {
                    push_edge(
                        (0..=k).map(|mm| (last0, e * k + mm)).collect(),
                        m.h1(),
                        Side::Right,
                    );
                }
                for e in 0..m.n0() {
                    push_edge(
                        (0..=k).map(|mm| (e * k + mm, last1)).collect(),
                        m.h0(),
                        Side::Up,
                    );
                }
                for e in 0..m.n1() {
                    push_edge(
                        (0..=k).map(|mm| (0, e * k + mm)).collect(),
                        m.h1(),
                        Side::Left,
                    );
                }
                Ok(Some(BoundaryTrace {
                    dofs,
                    sides,
                    edges,
                    closed_loop: true,
                }))
            }
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_nodes_are_uniform() {
        let m = interval_mesh(1.0, 4).unwrap();
        assert_eq!(m.x, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let m = interval_mesh(2.0, 1).unwrap();
        assert_eq!(m.x, vec![0.0, 2.0]);
        let m = interval_mesh(1.0, 3).unwrap();
        for e in 0..3 {
            assert_relative_eq!(m.element_measure(e), 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn bad_interval_arguments_are_rejected() {
        assert!(interval_mesh(-1.0, 4).is_err());
        assert!(interval_mesh(1.0, 0).is_err());
    }

    #[test]
    fn rect_counts() {
        let m = Arc::new(rect_mesh(1.0, 1.0, 2, 2).unwrap());
        assert_eq!(m.n_elements(), 4);
        let q = build_space(&m, BasisFamily::lagrange(1, 2), Continuity::Continuous, 1).unwrap();
        assert_eq!(q.ndof(), 9);
        let trace = q.trace().unwrap();
        assert_eq!(trace.edges.len(), 8);
        assert_eq!(trace.len(), 8);
        let m1 = Arc::new(rect_mesh(1.0, 1.0, 1, 1).unwrap());
        let q1 = build_space(&m1, BasisFamily::lagrange(1, 2), Continuity::Continuous, 1).unwrap();
        assert_eq!(q1.trace().unwrap().edges.len(), 4);
    }

    #[test]
    fn rect_up_side_edges() {
        let m = Arc::new(rect_mesh(1.0, 1.0, 3, 2).unwrap());
        let q = build_space(&m, BasisFamily::lagrange(1, 2), Continuity::Continuous, 1).unwrap();
        let ups: Vec<_> = q
            .trace()
            .unwrap()
            .edges
            .iter()
            .filter(|e| e.side == Side::Up)
            .collect();
        assert_eq!(ups.len(), 3);
        let coords = q.dof_coords();
        for e in &ups {
            for &j in &e.psi {
                let g = q.trace().unwrap().dofs[j];
                assert_relative_eq!(coords[g][1], 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn annulus_counts_and_periodicity() {
        let m = Arc::new(annulus_mesh(0.1, 1.0, 2, 8).unwrap());
        assert_eq!(m.n_elements(), 16);
        let q = build_space(&m, BasisFamily::lagrange(1, 2), Continuity::Continuous, 1).unwrap();
        assert_eq!(q.ndof(), 24); // (nr+1)·nθ after periodic identification
        // DOFs at θ = 0 and θ = 2π coincide: the last θ-column of elements
        // reuses the first lattice column.
        let first_col = q.cell_dofs(0);
        let last_col = q.cell_dofs(2 * 8 - 2); // element (e0=0, e1=7)
        assert_eq!(first_col[0], last_col[2]); // shared edge nodes
        assert_eq!(first_col[1], last_col[3]);
        // outer boundary: nθ arcs of length 2πR/nθ
        let trace = q.trace().unwrap();
        assert_eq!(trace.edges.len(), 8);
        for e in &trace.edges {
            assert_relative_eq!(
                e.length,
                2.0 * std::f64::consts::PI / 8.0,
                epsilon = 1e-14
            );
            assert_eq!(e.side, Side::Outer);
        }
    }

    #[test]
    fn annulus_rejects_zero_inner_radius() {
        assert!(annulus_mesh(0.0, 1.0, 2, 8).is_err());
        assert!(annulus_mesh(0.1, 1.0, 2, 2).is_err());
    }

    #[test]
    fn space_dof_counts() {
        let m = Arc::new(interval_mesh(1.0, 4).unwrap());
        let p1 = build_space(&m, BasisFamily::lagrange(1, 1), Continuity::Continuous, 1).unwrap();
        assert_eq!(p1.ndof(), 5);
        let p0 = build_space(&m, BasisFamily::lagrange(0, 1), Continuity::Discontinuous, 1).unwrap();
        assert_eq!(p0.ndof(), 4);
        let m2 = Arc::new(rect_mesh(1.0, 1.0, 2, 2).unwrap());
        let p2 = build_space(&m2, BasisFamily::lagrange(1, 2), Continuity::Continuous, 2).unwrap();
        assert_eq!(p2.ndof(), 18);
        let hermite = build_space(&m, BasisFamily::hermite_cubic(), Continuity::Continuous, 1).unwrap();
        assert_eq!(hermite.ndof(), 10);
    }

    #[test]
    fn incompatible_family_and_mesh() {
        let m2 = Arc::new(rect_mesh(1.0, 1.0, 2, 2).unwrap());
        assert!(build_space(&m2, BasisFamily::hermite_cubic(), Continuity::Continuous, 1).is_err());
        let m1 = Arc::new(interval_mesh(1.0, 2).unwrap());
        assert!(build_space(&m1, BasisFamily::lagrange(1, 2), Continuity::Continuous, 1).is_err());
        assert!(build_space(&m1, BasisFamily::lagrange(1, 1), Continuity::Continuous, 2).is_err());
        assert!(build_space(&m1, BasisFamily::lagrange(0, 1), Continuity::Continuous, 1).is_err());
    }

    #[test]
    fn dof_maps_are_bijections() {
        let cases: Vec<FeSpace> = vec![
            build_space(
                &Arc::new(interval_mesh(1.0, 5).unwrap()),
                BasisFamily::lagrange(3, 1),
                Continuity::Continuous,
                1,
            )
            .unwrap(),
            build_space(
                &Arc::new(interval_mesh(1.0, 5).unwrap()),
                BasisFamily::lagrange(2, 1),
                Continuity::Discontinuous,
                1,
            )
            .unwrap(),
            build_space(
                &Arc::new(rect_mesh(2.0, 1.0, 3, 2).unwrap()),
                BasisFamily::lagrange(2, 2),
                Continuity::Continuous,
                1,
            )
            .unwrap(),
            build_space(
                &Arc::new(annulus_mesh(0.2, 1.0, 2, 5).unwrap()),
                BasisFamily::lagrange(2, 2),
                Continuity::Continuous,
                1,
            )
            .unwrap(),
            build_space(
                &Arc::new(interval_mesh(1.0, 4).unwrap()),
                BasisFamily::hermite_cubic(),
                Continuity::Continuous,
                1,
            )
            .unwrap(),
        ];
        for s in &cases {
            let mut seen = vec![false; s.nscalar()];
            for el in 0..s.n_elements() {
                for g in s.cell_dofs(el) {
                    assert!(g < s.nscalar());
                    seen[g] = true;
                }
            }
            assert!(seen.iter().all(|&b| b), "gap in DOF map for {:?}", s.family);
        }
    }

    #[test]
    fn measures_match_analytic_values() {
        let m = interval_mesh(2.5, 7).unwrap();
        assert_relative_eq!(m.measure(), 2.5, epsilon = 1e-12);
        let m = rect_mesh(2.0, 3.0, 4, 5).unwrap();
        assert_relative_eq!(m.measure(), 6.0, epsilon = 1e-12);
        assert_relative_eq!(m.perimeter(), 10.0, epsilon = 1e-12);
        let m = annulus_mesh(0.1, 1.0, 3, 12).unwrap();
        assert_relative_eq!(
            m.measure(),
            std::f64::consts::PI * (1.0 - 0.01),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            m.perimeter(),
            2.0 * std::f64::consts::PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn field_evaluation_reproduces_nodal_interpolants() {
        let m = Arc::new(rect_mesh(1.0, 1.0, 3, 3).unwrap());
        let q = build_space(&m, BasisFamily::lagrange(2, 2), Continuity::Continuous, 1).unwrap();
        // coefficients of the bilinear field f(x, y) = 2x + 3y − 1
        let coords = q.dof_coords();
        let coeffs = DVector::from_iterator(
            q.ndof(),
            coords.iter().map(|c| 2.0 * c[0] + 3.0 * c[1] - 1.0),
        );
        for &(x, y) in &[(0.13, 0.87), (0.5, 0.5), (0.99, 0.01)] {
            assert_relative_eq!(
                q.eval_field(&coeffs, 0, [x, y]),
                2.0 * x + 3.0 * y - 1.0,
                epsilon = 1e-12
            );
        }
    }
}
