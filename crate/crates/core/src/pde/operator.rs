//! Linear differential functionals of a Gaussian process on the spatial
//! domain, and their covariances under a spatial kernel.

use serde::{Deserialize, Serialize};

use super::{BoundaryKind, PdeProblem};
use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// `Σ c · ∂^α` evaluated at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOp {
    pub terms: Vec<(f64, Vec<usize>)>,
}

impl LinearOp {
    pub fn identity(dim: usize) -> Self {
        LinearOp {
            terms: vec![(1.0, vec![0; dim])],
        }
    }

    pub fn derivative(dim: usize, axis: usize) -> Self {
        let mut alpha = vec![0; dim];
        alpha[axis] = 1;
        LinearOp {
            terms: vec![(1.0, alpha)],
        }
    }
}

/// A bounded linear functional of a function on the spatial domain.
#[derive(Clone, Debug, PartialEq)]
pub enum SpatialFunctional {
    Point { x: Vec<f64>, op: LinearOp },
    /// `∫_a^b v(x) dx` on the unit interval.
    Integral { a: f64, b: f64 },
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

const PANELS: usize = 8;
const NODES_PER_PANEL: usize = 8;

/// Composite Gauss rule on [a, b].
fn quadrature(a: f64, b: f64) -> Vec<(f64, f64)> {
    let (t, w) = gauss_legendre(NODES_PER_PANEL);
    let h = (b - a) / PANELS as f64;
    let mut out = Vec::with_capacity(PANELS * NODES_PER_PANEL);
    for p in 0..PANELS {
        let mid = a + (p as f64 + 0.5) * h;
        for (ti, wi) in t.iter().zip(&w) {
            out.push((mid + 0.5 * h * ti, 0.5 * h * wi));
        }
    }
    out
}

fn op_pair(k: &Kernel, x: &[f64], y: &[f64], left: &LinearOp, right: &LinearOp) -> f64 {
    let mut total = 0.0;
    for (ca, alpha) in &left.terms {
        for (cb, beta) in &right.terms {
            if *ca != 0.0 && *cb != 0.0 {
                total += ca * cb * k.deriv_mixed_unchecked(x, y, alpha, beta);
            }
        }
    }
    total
}

/// `Cov(F₁ v, F₂ v)` for `v ~ GP(0, k)`.
pub fn cov_functional(k: &Kernel, f1: &SpatialFunctional, f2: &SpatialFunctional) -> f64 {
    use SpatialFunctional::*;
    match (f1, f2) {
        (Point { x, op: a }, Point { x: y, op: b }) => op_pair(k, x, y, a, b),
        (Point { x, op }, Integral { a, b }) => {
            let id = LinearOp::identity(1);
            quadrature(*a, *b)
                .iter()
                .map(|(s, w)| w * op_pair(k, x, &[*s], op, &id))
                .sum()
        }
        (Integral { .. }, Point { .. }) => cov_functional(k, f2, f1),
        (Integral { a, b }, Integral { a: c, b: d }) => {
            let qa = quadrature(*a, *b);
            let qb = quadrature(*c, *d);
            let mut total = 0.0;
            for (s, ws) in &qa {
                for (t, wt) in &qb {
                    total += ws * wt * k.eval_unchecked(&[*s], &[*t]);
                }
            }
            total
        }
    }
}

impl PdeProblem {
    /// `L^θ v = -e^κ (∇κ·∇v + Δv)` at `x`, which must be off κ interfaces.
    pub fn interior_operator(&self, x: &[f64], theta: &[f64]) -> Result<LinearOp> {
        if self.is_on_interface(x) {
            return Err(Error::input(format!(
                "operator point {x:?} lies on a κ interface"
            )));
        }
        let d = self.spatial_dim;
        let e = self.diffusion.kappa(x[0], theta).exp();
        let dk = self.diffusion.kappa_dx(x[0], theta);
        let mut terms = Vec::new();
        for axis in 0..d {
            let mut alpha = vec![0; d];
            alpha[axis] = 2;
            terms.push((-e, alpha));
        }
        if dk != 0.0 {
            let mut alpha = vec![0; d];
            alpha[0] = 1;
            terms.push((-e * dk, alpha));
        }
        Ok(LinearOp { terms })
    }

    /// Boundary operator at a boundary point `x`.
    pub fn boundary_operator(&self, x: &[f64]) -> Result<LinearOp> {
        let bc = self
            .condition_at(x)
            .ok_or_else(|| Error::input(format!("{x:?} is not on the boundary")))?;
        Ok(match bc.kind {
            BoundaryKind::Dirichlet => LinearOp::identity(self.spatial_dim),
            BoundaryKind::Neumann => LinearOp::derivative(self.spatial_dim, bc.segment.normal_axis()),
        })
    }
}

/// Which operators act on the two arguments of `k(x, x')`; `Right` means
/// the named operator acts on `x'` and the identity on `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorPair {
    LRight,
    LLeft,
    LL,
    BRight,
    BLeft,
    BB,
    /// `B` on `x`, `L` on `x'`.
    BL,
    /// `L` on `x`, `B` on `x'`.
    LB,
}

/// `k` with the operators of `which` applied; `theta` parametrizes an `L`
/// on `x` and `theta_prime` an `L` on `x'`.
pub fn apply_operator_to_kernel(
    problem: &PdeProblem,
    k: &Kernel,
    which: OperatorPair,
    x: &[f64],
    x_prime: &[f64],
    theta: &[f64],
    theta_prime: &[f64],
) -> Result<f64> {
    let d = problem.spatial_dim;
    if k.input_dim != d || x.len() != d || x_prime.len() != d {
        return Err(Error::input("spatial dimension mismatch"));
    }
    use OperatorPair::*;
    let id = LinearOp::identity(d);
    let (left, right) = match which {
        LRight => (id.clone(), problem.interior_operator(x_prime, theta_prime)?),
        LLeft => (problem.interior_operator(x, theta)?, id),
        LL => (
            problem.interior_operator(x, theta)?,
            problem.interior_operator(x_prime, theta_prime)?,
        ),
        BRight => (id, problem.boundary_operator(x_prime)?),
        BLeft => (problem.boundary_operator(x)?, id),
        BB => (
            problem.boundary_operator(x)?,
            problem.boundary_operator(x_prime)?,
        ),
        BL => (
            problem.boundary_operator(x)?,
            problem.interior_operator(x_prime, theta_prime)?,
        ),
        LB => (
            problem.interior_operator(x, theta)?,
            problem.boundary_operator(x_prime)?,
        ),
    };
    Ok(op_pair(k, x, x_prime, &left, &right))
}
