use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One eigenpair of the exponential-covariance operator on [0, 1]:
/// `a = 8 / (ω² + 16)`, `b(x) = A (sin ωx + (ω/4) cos ωx)` with unit L² norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlMode {
    pub omega: f64,
    pub eigenvalue: f64,
    pub norm: f64,
}

impl KlMode {
    fn new(omega: f64) -> Self {
        let s2 = (2.0 * omega).sin() / (4.0 * omega);
        let q = omega * omega / 16.0;
        let integral = (0.5 - s2) + q * (0.5 + s2) + omega.sin().powi(2) / 4.0;
        KlMode {
            omega,
            eigenvalue: 8.0 / (omega * omega + 16.0),
            norm: 1.0 / integral.sqrt(),
        }
    }

    pub fn basis(&self, x: f64) -> f64 {
        let w = self.omega;
        self.norm * ((w * x).sin() + 0.25 * w * (w * x).cos())
    }

    pub fn basis_dx(&self, x: f64) -> f64 {
        let w = self.omega;
        self.norm * w * ((w * x).cos() - 0.25 * w * (w * x).sin())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct KlSpec {
    n_terms: usize,
}

/// Truncated expansion `κ(x, θ) = Σ_n √a_n θ_n b_n(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KlSpec", into = "KlSpec")]
pub struct KlExpansion {
    modes: Vec<KlMode>,
}

impl TryFrom<KlSpec> for KlExpansion {
    type Error = Error;
    fn try_from(spec: KlSpec) -> Result<Self> {
        KlExpansion::new(spec.n_terms)
    }
}

impl From<KlExpansion> for KlSpec {
    fn from(kl: KlExpansion) -> Self {
        KlSpec {
            n_terms: kl.modes.len(),
        }
    }
}

/// First `n` positive roots of `(ω² − 16) sin ω − 8ω cos ω`.
pub fn characteristic_roots(n: usize) -> Vec<f64> {
    let g = |w: f64| (w * w - 16.0) * w.sin() - 8.0 * w * w.cos();
    let mut roots = Vec::with_capacity(n);
    let step = 1e-3;
    let mut lo = step;
    let mut glo = g(lo);
    while roots.len() < n {
        let hi = lo + step;
        let ghi = g(hi);
        if glo == 0.0 || glo.signum() != ghi.signum() {
            let (mut a, mut b, mut ga) = (lo, hi, glo);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let gm = g(m);
                if gm.signum() == ga.signum() {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        lo = hi;
        glo = ghi;
    }
    roots
}

impl KlExpansion {
    pub fn new(n_terms: usize) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::input("expansion needs at least one term"));
        }
        Ok(KlExpansion {
            modes: characteristic_roots(n_terms).into_iter().map(KlMode::new).collect(),
        })
    }

    pub fn modes(&self) -> &[KlMode] {
        &self.modes
    }

    pub fn value(&self, x: f64, theta: &[f64]) -> f64 {
        self.modes
            .iter()
            .zip(theta)
            .map(|(m, t)| m.eigenvalue.sqrt() * t * m.basis(x))
            .sum()
    }

    pub fn derivative(&self, x: f64, theta: &[f64]) -> f64 {
        self.modes
            .iter()
            .zip(theta)
            .map(|(m, t)| m.eigenvalue.sqrt() * t * m.basis_dx(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::gauss_legendre;

    fn integrate(f: impl Fn(f64) -> f64) -> f64 {
        integrate_on(0.0, 1.0, f)
    }

    fn integrate_on(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (nodes, weights) = gauss_legendre(20);
        let panels = 50;
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (t, w) in nodes.iter().zip(&weights) {
                total += 0.5 * h * w * f(mid + 0.5 * h * t);
            }
        }
        total
    }

    #[test]
    fn roots_solve_characteristic_equation() {
        let roots = characteristic_roots(6);
        for w in roots.windows(2) {
            assert!(w[1] > w[0]);
        }
        for w in roots {
            let g = (w * w - 16.0) * w.sin() - 8.0 * w * w.cos();
            assert!(g.abs() < 1e-9, "residual {g} at {w}");
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        let kl = KlExpansion::new(4).unwrap();
        for (i, a) in kl.modes().iter().enumerate() {
            for (j, b) in kl.modes().iter().enumerate() {
                let ip = integrate(|x| a.basis(x) * b.basis(x));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-10, "<b{i}, b{j}> = {ip}");
            }
        }
    }

    #[test]
    fn eigenpairs_of_exponential_covariance() {
        // ∫ exp(-4|x - s|) b(s) ds = a b(x)
        let kl = KlExpansion::new(3).unwrap();
        for m in kl.modes() {
            for &x in &[0.1, 0.5, 0.83] {
                let f = |s: f64| (-4.0 * (x - s).abs()).exp() * m.basis(s);
                let lhs = integrate_on(0.0, x, f) + integrate_on(x, 1.0, f);
                assert!((lhs - m.eigenvalue * m.basis(x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let kl = KlExpansion::new(2).unwrap();
        let th = [0.4, -0.7];
        let h = 1e-6;
        for &x in &[0.2, 0.6] {
            let fd = (kl.value(x + h, &th) - kl.value(x - h, &th)) / (2.0 * h);
            assert!((fd - kl.derivative(x, &th)).abs() < 1e-7);
        }
    }
}
