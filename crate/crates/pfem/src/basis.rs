//! Reference-element basis functions and Gauss-Legendre quadrature.
//!
//! The reference element is `[-1, 1]` in 1D and `[-1, 1]²` in 2D; meshes
//! map it affinely. Lagrange families use equispaced nodes including the
//! endpoints, so continuous spaces can share interface degrees of freedom.
//! Hermite cubics carry two value and two slope DOFs and are C¹ once the
//! slope DOFs are scaled by the element length.

use crate::{Error, Result};

/// A family of reference basis functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFamily {
    /// Nodal Lagrange polynomials of the given order on `[-1, 1]`;
    /// in 2D the tensor product of the 1D family on `[-1, 1]²`.
    Lagrange { order: usize, dim: u8 },
    /// Cubic Hermite interpolation on `[-1, 1]` (1D only). DOF order:
    /// value(-1), slope(-1), value(+1), slope(+1), slopes per unit of
    /// the normalized coordinate `s = (ξ+1)/2`.
    HermiteCubic,
}

impl BasisFamily {
    pub fn lagrange(order: usize, dim: u8) -> Self {
        BasisFamily::Lagrange { order, dim }
    }

    pub fn hermite_cubic() -> Self {
        BasisFamily::HermiteCubic
    }

    pub fn dim(&self) -> u8 {
        match self {
            BasisFamily::Lagrange { dim, .. } => *dim,
            BasisFamily::HermiteCubic => 1,
        }
    }

    /// Polynomial order along one axis.
    pub fn order(&self) -> usize {
        match self {
            BasisFamily::Lagrange { order, .. } => *order,
            BasisFamily::HermiteCubic => 3,
        }
    }

    /// Local functions per reference element.
    pub fn len(&self) -> usize {
        match self {
            BasisFamily::Lagrange { order, dim } => (order + 1).pow(*dim as u32),
            BasisFamily::HermiteCubic => 4,
        }
    }

    /// Nodes of the 1D family (Lagrange: equispaced; Hermite: element ends,
    /// repeated for the value/slope pairs).
    pub fn nodes_1d(&self) -> Vec<f64> {
        match self {
            BasisFamily::Lagrange { order: 0, .. } => vec![0.0],
            BasisFamily::Lagrange { order, .. } => (0..=*order)
                .map(|m| -1.0 + 2.0 * m as f64 / *order as f64)
                .collect(),
            BasisFamily::HermiteCubic => vec![-1.0, -1.0, 1.0, 1.0],
        }
    }
}

/// Tensor Gauss-Legendre rule on the reference element.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: u8,
    /// Reference coordinates; the second component is unused in 1D.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the Legendre polynomial from Chebyshev initial
/// guesses; converges to machine precision for any practical `n`.
pub fn gauss_1d(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "quadrature needs at least one point".into(),
        ));
    }
    let mut pts = vec![0.0; n];
    let mut wts = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        // reverse so points come out ascending
        pts[n - 1 - i] = x;
        wts[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    Ok((pts, wts))
}

/// Legendre P_n and its derivative at `x` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Build the tensor Gauss-Legendre rule with `npoints` per axis.
pub fn gauss_rule(npoints: usize, dim: u8) -> Result<QuadratureRule> {
    let (p1, w1) = gauss_1d(npoints)?;
    match dim {
        1 => Ok(QuadratureRule {
            dim: 1,
            points: p1.iter().map(|&x| [x, 0.0]).collect(),
            weights: w1,
        }),
        2 => {
            let mut points = Vec::with_capacity(npoints * npoints);
            let mut weights = Vec::with_capacity(npoints * npoints);
            for (j, &y) in p1.iter().enumerate() {
                for (i, &x) in p1.iter().enumerate() {
                    points.push([x, y]);
                    weights.push(w1[i] * w1[j]);
                }
            }
            Ok(QuadratureRule {
                dim: 2,
                points,
                weights,
            })
        }
        d => Err(Error::InvalidArgument(format!(
            "unsupported quadrature dimension {d}"
        ))),
    }
}

/// Default points per axis so that a model whose basis order is at most
/// `max_order` has its cubic Hamiltonian integrands (degree ≤ 3k + 2)
/// integrated exactly: n = ⌈(3k+2)/2⌉.
pub fn default_quadrature_points(max_order: usize) -> usize {
    (3 * max_order + 3) / 2
}

/// Evaluate all 1D functions of `family` (or their 1st/2nd ξ-derivative)
/// at a reference point, ordered by local DOF index.
pub fn eval_basis(family: BasisFamily, point: f64, deriv: u8) -> Result<Vec<f64>> {
    if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&point) {
        return Err(Error::InvalidArgument(format!(
            "point {point} outside the reference element [-1, 1]"
        )));
    }
    if deriv > 2 {
        return Err(Error::InvalidArgument("derivative order must be ≤ 2".into()));
    }
    match family {
        BasisFamily::Lagrange { order, dim: 1 } => {
            let nodes = lagrange_nodes(order);
            Ok((0..nodes.len())
                .map(|i| lagrange_eval(&nodes, i, point, deriv))
                .collect())
        }
        BasisFamily::Lagrange { .. } => Err(Error::InvalidArgument(
            "use eval_basis_2d for tensor-product families".into(),
        )),
        BasisFamily::HermiteCubic => Ok(hermite_eval(point, deriv).to_vec()),
    }
}

/// Values of a 2D tensor-product Lagrange family at `(ξ, η)`, local DOFs
/// ordered row-major in (η, ξ).
pub fn eval_basis_2d(family: BasisFamily, point: [f64; 2]) -> Result<Vec<f64>> {
    let BasisFamily::Lagrange { order, dim: 2 } = family else {
        return Err(Error::InvalidArgument(
            "eval_basis_2d expects a 2D Lagrange family".into(),
        ));
    };
    let fx = eval_basis(BasisFamily::lagrange(order, 1), point[0], 0)?;
    let fy = eval_basis(BasisFamily::lagrange(order, 1), point[1], 0)?;
    let mut out = Vec::with_capacity(fx.len() * fy.len());
    for vy in &fy {
        for vx in &fx {
            out.push(vx * vy);
        }
    }
    Ok(out)
}

pub(crate) fn lagrange_nodes(order: usize) -> Vec<f64> {
    BasisFamily::lagrange(order, 1).nodes_1d()
}

/// Lagrange basis function `i` on the given nodes, or its derivative.
pub(crate) fn lagrange_eval(nodes: &[f64], i: usize, x: f64, deriv: u8) -> f64 {
    let n = nodes.len();
    match deriv {
        0 => {
            let mut p = 1.0;
            for j in 0..n {
                if j != i {
                    p *= (x - nodes[j]) / (nodes[i] - nodes[j]);
                }
            }
            p
        }
        1 => {
            let mut sum = 0.0;
            for a in 0..n {
                if a == i {
                    continue;
                }
                let mut p = 1.0 / (nodes[i] - nodes[a]);
                for j in 0..n {
                    if j != i && j != a {
                        p *= (x - nodes[j]) / (nodes[i] - nodes[j]);
                    }
                }
                sum += p;
            }
            sum
        }
        2 => {
            let mut sum = 0.0;
            for a in 0..n {
                if a == i {
                    continue;
                }
                for b in 0..n {
                    if b == i || b == a {
                        continue;
                    }
                    let mut p = 1.0 / ((nodes[i] - nodes[a]) * (nodes[i] - nodes[b]));
                    for j in 0..n {
                        if j != i && j != a && j != b {
                            p *= (x - nodes[j]) / (nodes[i] - nodes[j]);
                        }
                    }
                    sum += p;
                }
            }
            sum
        }
        _ => unreachable!(),
    }
}

/// Hermite cubic values/ξ-derivatives at ξ, DOF order
/// (value left, slope left, value right, slope right).
fn hermite_eval(xi: f64, deriv: u8) -> [f64; 4] {
    let s = 0.5 * (xi + 1.0);
    // d/dξ = (1/2) d/ds
    let c = 0.5_f64.powi(deriv as i32);
    match deriv {
        0 => [
            2.0 * s * s * s - 3.0 * s * s + 1.0,
            s * s * s - 2.0 * s * s + s,
            -2.0 * s * s * s + 3.0 * s * s,
            s * s * s - s * s,
        ],
        1 => [
            c * (6.0 * s * s - 6.0 * s),
            c * (3.0 * s * s - 4.0 * s + 1.0),
            c * (-6.0 * s * s + 6.0 * s),
            c * (3.0 * s * s - 2.0 * s),
        ],
        2 => [
            c * (12.0 * s - 6.0),
            c * (6.0 * s - 4.0),
            c * (-12.0 * s + 6.0),
            c * (6.0 * s - 2.0),
        ],
        _ => unreachable!(),
    }
}
