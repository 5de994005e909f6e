//! Stationary isotropic covariance functions with closed-form derivatives.
//!
//! Both families are radial, `k(a, b) = h(ρ)` with `ρ = |a - b|² / 2`. Any
//! mixed partial derivative of such a function is a sum over the ways of
//! grouping the differentiation axes into singletons and pairs:
//!
//! ```text
//! ∂^γ h(ρ) = Σ_partitions h^(#blocks)(ρ) · Π_singletons d_i · Π_pairs δ_ij
//! ```
//!
//! because `∂_i ρ = d_i`, `∂_i ∂_j ρ = δ_ij` and all higher derivatives of `ρ`
//! vanish. Derivatives in `b` pick up a factor `-1` per order since the kernel
//! depends on `d = a - b` only.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest total derivative order per argument.
pub const MAX_ORDER_PER_ARG: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    SquaredExponential,
    /// Matérn with smoothness ν = 5/2.
    Matern52,
}

/// Output scale `variance` (σ²) and input scale `lengthscale` (l).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelHyper {
    pub variance: f64,
    pub lengthscale: f64,
}

impl KernelHyper {
    pub fn new(variance: f64, lengthscale: f64) -> Result<Self> {
        let h = KernelHyper {
            variance,
            lengthscale,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(Error::input(format!(
                "kernel variance must be positive, got {}",
                self.variance
            )));
        }
        if !(self.lengthscale > 0.0 && self.lengthscale.is_finite()) {
            return Err(Error::input(format!(
                "kernel lengthscale must be positive, got {}",
                self.lengthscale
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub family: KernelFamily,
    pub hyper: KernelHyper,
    pub input_dim: usize,
}

impl Kernel {
    pub fn new(family: KernelFamily, hyper: KernelHyper, input_dim: usize) -> Result<Self> {
        hyper.validate()?;
        if input_dim == 0 {
            return Err(Error::input("kernel input dimension must be positive"));
        }
        Ok(Kernel {
            family,
            hyper,
            input_dim,
        })
    }

    pub fn squared_exponential(variance: f64, lengthscale: f64, input_dim: usize) -> Result<Self> {
        Self::new(
            KernelFamily::SquaredExponential,
            KernelHyper::new(variance, lengthscale)?,
            input_dim,
        )
    }

    pub fn matern52(variance: f64, lengthscale: f64, input_dim: usize) -> Result<Self> {
        Self::new(
            KernelFamily::Matern52,
            KernelHyper::new(variance, lengthscale)?,
            input_dim,
        )
    }

    pub fn variance(&self) -> f64 {
        self.hyper.variance
    }

    fn check_dims(&self, a: &[f64], b: &[f64]) -> Result<()> {
        if a.len() != self.input_dim || b.len() != self.input_dim {
            return Err(Error::input(format!(
                "kernel expects {}-d points, got {} and {}",
                self.input_dim,
                a.len(),
                b.len()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_dims(a, b)?;
        Ok(self.eval_unchecked(a, b))
    }

    pub(crate) fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.radial_derivs(r2.sqrt(), 0)[0]
    }

    /// Gradient of `k(a, b)` with respect to `a`.
    pub fn grad_a(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(a, b)?;
        let mut out = vec![0.0; a.len()];
        self.grad_a_into(a, b, &mut out);
        Ok(out)
    }

    /// `∂k/∂a` written into `out`; also returns `k(a, b)`.
    pub(crate) fn grad_a_into(&self, a: &[f64], b: &[f64], out: &mut [f64]) -> f64 {
        let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        let h = self.radial_derivs(r2.sqrt(), 1);
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = h[1] * (x - y);
        }
        h[0]
    }

    /// Mixed partial `∂^{order_a}_a ∂^{order_b}_b k(a, b)`.
    ///
    /// `order_a` and `order_b` are multi-indices of length `input_dim` with
    /// total order at most 2 each.
    pub fn deriv_mixed(
        &self,
        a: &[f64],
        b: &[f64],
        order_a: &[usize],
        order_b: &[usize],
    ) -> Result<f64> {
        self.check_dims(a, b)?;
        if order_a.len() != self.input_dim || order_b.len() != self.input_dim {
            return Err(Error::input("multi-index length must equal kernel input dimension"));
        }
        let (na, nb) = (order_a.iter().sum::<usize>(), order_b.iter().sum::<usize>());
        if na > MAX_ORDER_PER_ARG || nb > MAX_ORDER_PER_ARG {
            return Err(Error::Capability(format!(
                "derivative order ({na}, {nb}) exceeds ({MAX_ORDER_PER_ARG}, {MAX_ORDER_PER_ARG})"
            )));
        }
        Ok(self.deriv_mixed_unchecked(a, b, order_a, order_b))
    }

    pub(crate) fn deriv_mixed_unchecked(
        &self,
        a: &[f64],
        b: &[f64],
        order_a: &[usize],
        order_b: &[usize],
    ) -> f64 {
        let mut axes = [0usize; 2 * MAX_ORDER_PER_ARG];
        let mut m = 0;
        for (axis, (&oa, &ob)) in order_a.iter().zip(order_b).enumerate() {
            for _ in 0..oa + ob {
                axes[m] = axis;
                m += 1;
            }
        }
        let mut d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let mut r = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < 1e-30 * self.hyper.lengthscale {
            d.iter_mut().for_each(|v| *v = 0.0);
            r = 0.0;
        }

        let mut coef = [0.0f64; 5];
        accumulate_partitions(&axes[..m], &d, 0, 1.0, &mut coef);
        let h = self.radial_derivs(r, m);
        let value: f64 = coef
            .iter()
            .zip(h.iter())
            .take(m + 1)
            .filter(|(c, _)| **c != 0.0)
            .map(|(c, hv)| c * hv)
            .sum();
        let sign = if order_b.iter().sum::<usize>() % 2 == 1 { -1.0 } else { 1.0 };
        sign * value
    }

    /// Derivatives `h^(n)(ρ)` for `n = 0..=max_n`, evaluated at distance `r`.
    ///
    /// For Matérn-5/2 the third and fourth derivatives are singular at `r = 0`;
    /// they are only ever multiplied by monomials in `d` that vanish faster,
    /// and callers skip zero-coefficient terms.
    fn radial_derivs(&self, r: f64, max_n: usize) -> [f64; 5] {
        let KernelHyper {
            variance: s2,
            lengthscale: l,
        } = self.hyper;
        let mut h = [0.0; 5];
        match self.family {
            KernelFamily::SquaredExponential => {
                let inv_l2 = 1.0 / (l * l);
                h[0] = s2 * (-0.5 * r * r * inv_l2).exp();
                for n in 1..=max_n.min(4) {
                    h[n] = -inv_l2 * h[n - 1];
                }
            }
            KernelFamily::Matern52 => {
                let c = 5.0 / (l * l);
                let s = 5f64.sqrt() * r / l;
                let e = (-s).exp();
                h[0] = s2 * (1.0 + s + s * s / 3.0) * e;
                if max_n >= 1 {
                    h[1] = -s2 * c / 3.0 * (1.0 + s) * e;
                }
                if max_n >= 2 {
                    h[2] = s2 * c * c / 3.0 * e;
                }
                if max_n >= 3 {
                    h[3] = if s > 0.0 {
                        -s2 * c * c * c / 3.0 * e / s
                    } else {
                        f64::INFINITY
                    };
                }
                if max_n >= 4 {
                    h[4] = if s > 0.0 {
                        s2 * c.powi(4) / 3.0 * e * (1.0 + s) / (s * s * s)
                    } else {
                        f64::INFINITY
                    };
                }
            }
        }
        h
    }

    /// Gram matrix `K(P, P)`.
    pub fn gram(&self, points: &[Vec<f64>]) -> DMatrix<f64> {
        let n = points.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.eval_unchecked(&points[i], &points[j]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    /// Cross-covariance `K(A, B)`.
    pub fn cross(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> DMatrix<f64> {
        DMatrix::from_fn(a.len(), b.len(), |i, j| self.eval_unchecked(&a[i], &b[j]))
    }
}

/// Adds the monomial of every singleton/pair grouping of `axes` into
/// `coef[#blocks]`.
fn accumulate_partitions(axes: &[usize], d: &[f64], blocks: usize, mono: f64, coef: &mut [f64; 5]) {
    let Some((&first, rest)) = axes.split_first() else {
        coef[blocks] += mono;
        return;
    };
    accumulate_partitions(rest, d, blocks + 1, mono * d[first], coef);
    for j in 0..rest.len() {
        if rest[j] != first {
            continue;
        }
        let mut remaining = [0usize; 2 * MAX_ORDER_PER_ARG];
        let mut len = 0;
        for (i, &ax) in rest.iter().enumerate() {
            if i != j {
                remaining[len] = ax;
                len += 1;
            }
        }
        accumulate_partitions(&remaining[..len], d, blocks + 1, mono, coef);
    }
}
