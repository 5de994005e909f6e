//! Small dense/banded helpers shared by the solvers and emulators.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// Relative diagonal jitter values tried in order when a Gram matrix is not
/// numerically positive definite.
pub const JITTER_LADDER: [f64; 7] = [1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Cholesky factor of `gram + ε·diag(gram)`, stepping `ε` up from `base`
/// through [`JITTER_LADDER`]. Returns the factor and the `ε` used.
pub fn jittered_cholesky(
    gram: &DMatrix<f64>,
    base: f64,
    context: &str,
) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = gram.nrows();
    if n == 0 {
        let empty = DMatrix::<f64>::zeros(0, 0);
        return Ok((Cholesky::new(empty).expect("empty matrix factorizes"), 0.0));
    }
    let mut ladder = vec![base.max(0.0)];
    ladder.extend(JITTER_LADDER.iter().copied().filter(|&j| j > base));
    for &eps in &ladder {
        let mut m = gram.clone();
        for i in 0..n {
            let d = gram[(i, i)];
            m[(i, i)] = d + eps * d.abs().max(f64::MIN_POSITIVE);
        }
        if let Some(ch) = Cholesky::new(m) {
            let l = ch.l_dirty();
            if (0..n).all(|i| l[(i, i)].is_finite() && l[(i, i)] > 0.0) {
                return Ok((ch, eps));
            }
        }
    }
    let min_eigenvalue = gram.clone().symmetric_eigenvalues().min();
    Err(Error::Conditioning {
        context: context.to_string(),
        min_eigenvalue,
    })
}

/// `log det` of the matrix factored by `ch`.
pub fn chol_logdet(ch: &Cholesky<f64, Dyn>) -> f64 {
    let l = ch.l_dirty();
    2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
}

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[i]`
/// couples row `i+1` to column `i`; `upper[i]` couples row `i` to column
/// `i+1`.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta.abs() < f64::MIN_POSITIVE {
        return Err(Error::Numerical("singular tridiagonal system".into()));
    }
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i - 1] * c[i - 1];
        if beta.abs() < 1e-300 || !beta.is_finite() {
            return Err(Error::Numerical("singular tridiagonal system".into()));
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Symmetric positive-definite band matrix stored by lower diagonals:
/// `band[i][k]` is entry `(i, i - k)` for `k ≤ bandwidth`.
#[derive(Clone, Debug)]
pub struct BandedSpd {
    n: usize,
    bandwidth: usize,
    band: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        BandedSpd {
            n,
            bandwidth,
            band: vec![0.0; n * (bandwidth + 1)],
        }
    }

    /// Adds `v` to entry `(i, j)` with `|i - j| ≤ bandwidth`; only the
    /// lower triangle is stored so `(i, j)` and `(j, i)` alias.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        assert!(k <= self.bandwidth, "entry outside band");
        self.band[r * (self.bandwidth + 1) + k] += v;
    }

    fn at(&self, r: usize, k: usize) -> f64 {
        self.band[r * (self.bandwidth + 1) + k]
    }

    /// In-place band Cholesky followed by forward/back substitution.
    pub fn solve(mut self, rhs: &mut [f64]) -> Result<()> {
        let (n, w) = (self.n, self.bandwidth);
        let stride = w + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(w);
            for j in j0..=i {
                let mut s = self.at(i, i - j);
                let k0 = j0.max(j.saturating_sub(w));
                for k in k0..j {
                    s -= self.at(i, i - k) * self.at(j, j - k);
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::Numerical(format!(
                            "band matrix not positive definite at row {i}"
                        )));
                    }
                    self.band[i * stride] = s.sqrt();
                } else {
                    self.band[i * stride + (i - j)] = s / self.at(j, 0);
                }
            }
        }
        for i in 0..n {
            let mut s = rhs[i];
            for k in i.saturating_sub(w)..i {
                s -= self.at(i, i - k) * rhs[k];
            }
            rhs[i] = s / self.at(i, 0);
        }
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for k in i + 1..(i + w + 1).min(n) {
                s -= self.at(k, k - i) * rhs[k];
            }
            rhs[i] = s / self.at(i, 0);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn tridiagonal_matches_dense() {
        let lower = [-1.0, -1.0, -1.0];
        let diag = [2.0, 2.0, 2.0, 2.0];
        let upper = [-1.0, -1.0, -1.0];
        let mut rhs = [1.0, 0.0, 0.0, 1.0];
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs).unwrap();
        for v in rhs {
            assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn banded_matches_dense_cholesky() {
        let n = 12;
        let w = 3;
        let mut band = BandedSpd::zeros(n, w);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            band.add(i, i, 10.0);
            dense[(i, i)] = 10.0;
            for k in 1..=w.min(i) {
                let v = -1.0 / (k as f64 + 0.5);
                band.add(i, i - k, v);
                dense[(i, i - k)] = v;
                dense[(i - k, i)] = v;
            }
        }
        let b = DVector::from_fn(n, |i, _| (i as f64).sin());
        let expect = dense.cholesky().unwrap().solve(&b);
        let mut x: Vec<f64> = b.iter().copied().collect();
        band.solve(&mut x).unwrap();
        for i in 0..n {
            assert_relative_eq!(x[i], expect[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn jitter_rescues_rank_deficient_gram() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (_, eps) = jittered_cholesky(&m, 0.0, "test").unwrap();
        assert!(eps > 0.0 && eps <= 1e-6);
    }

    #[test]
    fn indefinite_gram_reports_min_eigenvalue() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match jittered_cholesky(&m, 0.0, "test") {
            Err(Error::Conditioning { min_eigenvalue, .. }) => {
                assert_relative_eq!(min_eigenvalue, -1.0, max_relative = 1e-12)
            }
            other => panic!("expected conditioning error, got {other:?}"),
        }
    }
}
