//! Gaussian-process emulators of the forward map `θ ↦ G_X(θ)` and of the
//! potential `θ ↦ Φ(θ)`.
//!
//! Every emulator here has a covariance of the form
//! `Cov(F_a u(θ_a), F_b u(θ_b)) = k_p(θ_a, θ_b) · S(F_a, F_b)` where the `F`
//! are spatial functionals. Two representations are used:
//!
//! * `Separable`: all training variables are the observation functionals at
//!   `N` parameter points, so the Gram matrix is `K_p ⊗ S` and only the
//!   `N × N` factor `K_p` is ever solved.
//! * `Joint`: a general Gram matrix `K̃` over `M` variables grouped by their
//!   `T` distinct parameter points. With `D_g` the test-to-variable spatial
//!   covariances of group `g`, the cross-covariance to a test point is
//!   `K(θ, Θ) = [k_p(θ, θ_g) D_g]_g`.
//!
//! Predictive covariances are formed as `k_p(θ, θ') S − VᵀV'` with
//! `V = L⁻¹ K(Θ, θ)`, never through `K̃⁻¹`, which keeps the error near
//! `ε √cond(K̃)` for the ill-conditioned PDE-constrained Grams.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::design::TrainingSet;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{chol_logdet, jittered_cholesky};
use crate::pde::{cov_functional, LinearOp, ObservationOperator, PdeProblem, SpatialFunctional, SyntheticData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Independent outputs, `k_p(θ, θ') I`.
    Baseline,
    /// `k_p(θ, θ') K_s(X, X)`.
    SpatiallyCorrelated,
    /// Joint prior over `(u, f, g)` linked by the PDE operators.
    PdeConstrained,
    /// Scalar GP on the potential `Φ`.
    Potential,
}

/// No jitter unless the plain Cholesky factorization fails.
fn default_jitter() -> f64 {
    0.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmulatorModel {
    pub family: Family,
    pub k_p: Kernel,
    #[serde(default)]
    pub k_s: Option<Kernel>,
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

impl EmulatorModel {
    pub fn new(family: Family, k_p: Kernel, k_s: Option<Kernel>) -> Self {
        EmulatorModel {
            family,
            k_p,
            k_s,
            jitter: default_jitter(),
        }
    }

    fn spatial_kernel(&self) -> Result<&Kernel> {
        self.k_s.as_ref().ok_or_else(|| {
            Error::input(format!("{:?} emulator needs a spatial kernel k_s", self.family))
        })
    }
}

/// Predictive covariance at `(θ, θ)` with its θ-gradient.
#[derive(Clone, Debug)]
pub enum PredictiveCov {
    /// `scale · S` for the fixed spatial matrix `S` of a separable emulator.
    Scaled { scale: f64, grad: Vec<f64> },
    Dense { cov: DMatrix<f64>, grad: Vec<DMatrix<f64>> },
}

#[derive(Clone, Debug)]
pub struct Prediction {
    pub mean: DVector<f64>,
    /// `d_out × d_θ`
    pub mean_grad: DMatrix<f64>,
    pub cov: Option<PredictiveCov>,
}

#[derive(Clone, Debug)]
struct Separable {
    thetas: Vec<Vec<f64>>,
    chol: Cholesky<f64, Dyn>,
    /// `K_p⁻¹ G`, `N × d_out`
    alpha: DMatrix<f64>,
}

#[derive(Clone, Debug)]
struct Joint {
    groups: Vec<Vec<f64>>,
    starts: Vec<usize>,
    sizes: Vec<usize>,
    /// Column `g` is `D_g α_g`.
    mu: DMatrix<f64>,
    /// `[D_1 … D_T]`, `d_y × M`
    cs: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

impl Joint {
    /// `K(Θ, θ)`, `M × d_y`.
    fn cross(&self, k: &DVector<f64>) -> DMatrix<f64> {
        let m = self.cs.ncols();
        let mut r = DMatrix::zeros(m, self.cs.nrows());
        for (g, (&st, &sz)) in self.starts.iter().zip(&self.sizes).enumerate() {
            let dg = self.cs.columns(st, sz);
            r.rows_mut(st, sz).copy_from(&(dg.transpose() * k[g]));
        }
        r
    }

    /// `V = L⁻¹ K(Θ, θ)`.
    fn whitened(&self, k: &DVector<f64>) -> DMatrix<f64> {
        let l = self.chol.l_dirty();
        l.solve_lower_triangular(&self.cross(k))
            .expect("Cholesky factor has a positive diagonal")
    }
}

#[derive(Clone, Debug)]
enum Inner {
    Separable(Separable),
    Joint(Joint),
}

/// A conditioned emulator; immutable and safe to share across threads.
#[derive(Clone, Debug)]
pub struct ConditionedGP {
    model: EmulatorModel,
    d_theta: usize,
    d_out: usize,
    /// Prior spatial covariance of the outputs (`I` for baseline).
    ks: DMatrix<f64>,
    ks_eigen: SymmetricEigen<f64, Dyn>,
    jitter_used: f64,
    lml: f64,
    inner: Inner,
}

/// Gram factor and weights of a conditioned emulator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GpSidecar {
    pub config_hash: String,
    pub family: Family,
    pub jitter_used: f64,
    pub dim: usize,
    /// Lower Cholesky factor, column-major.
    pub chol_l: Vec<f64>,
    /// Row-major weights.
    pub alpha: Vec<f64>,
    pub log_marginal_likelihood: f64,
}

fn add_scaled(dst: &mut DMatrix<f64>, a: f64, src: &DMatrix<f64>) {
    dst.zip_apply(src, |d, s| *d += a * s);
}

fn whiten(chol: &Cholesky<f64, Dyn>, k: &DVector<f64>) -> DVector<f64> {
    chol.l_dirty()
        .solve_lower_triangular(k)
        .expect("Cholesky factor has a positive diagonal")
}

fn spatial_gram(k: &Kernel, a: &[SpatialFunctional], b: &[SpatialFunctional]) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| cov_functional(k, &a[i], &b[j]))
}

/// `½‖G(θ) − y‖² / σ²` for every training row.
pub fn potential_values(training: &TrainingSet, data: &SyntheticData) -> Result<Vec<f64>> {
    if training.d_y() != data.y.len() {
        return Err(Error::input("training outputs and data have different lengths"));
    }
    Ok(training
        .gx
        .iter()
        .map(|g| {
            0.5 * g
                .iter()
                .zip(&data.y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / data.noise_var
        })
        .collect())
}

impl ConditionedGP {
    /// Conditions a forward-map emulator (`Baseline`, `SpatiallyCorrelated`,
    /// `PdeConstrained`) on `training`. Separable families use the Kronecker
    /// route.
    pub fn condition(
        model: &EmulatorModel,
        problem: &PdeProblem,
        obs: &ObservationOperator,
        training: &TrainingSet,
    ) -> Result<Self> {
        match model.family {
            Family::Baseline | Family::SpatiallyCorrelated => {
                let ks = Self::output_covariance(model, obs)?;
                let g = Self::gx_matrix(training, obs.d_y())?;
                Self::separable(model, problem.dim_theta(), &training.theta, g, ks)
            }
            Family::PdeConstrained => Self::pde_constrained(model, problem, obs, training),
            Family::Potential => Err(Error::input(
                "potential emulators are conditioned with ConditionedGP::condition_potential",
            )),
        }
    }

    /// Same predictive distribution as [`condition`](Self::condition) but the
    /// separable families assemble and factor the full `N d_y × N d_y` Gram
    /// `K_p ⊗ S` instead of exploiting its structure.
    pub fn condition_dense(
        model: &EmulatorModel,
        problem: &PdeProblem,
        obs: &ObservationOperator,
        training: &TrainingSet,
    ) -> Result<Self> {
        match model.family {
            Family::Baseline | Family::SpatiallyCorrelated => {
                let ks = Self::output_covariance(model, obs)?;
                let g = Self::gx_matrix(training, obs.d_y())?;
                let d_y = obs.d_y();
                let n = training.n();
                let m = n * d_y;
                let mut gram = DMatrix::zeros(m, m);
                for a in 0..n {
                    for b in 0..n {
                        let kp = model.k_p.eval(&training.theta[a], &training.theta[b])?;
                        gram.view_mut((a * d_y, b * d_y), (d_y, d_y))
                            .copy_from(&(&ks * kp));
                    }
                }
                let mut cs = DMatrix::zeros(d_y, m);
                for a in 0..n {
                    cs.view_mut((0, a * d_y), (d_y, d_y)).copy_from(&ks);
                }
                let y = DVector::from_iterator(m, g.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()));
                let sizes = vec![d_y; n];
                Self::joint(model, problem.dim_theta(), training.theta.clone(), &sizes, gram, cs, y, ks)
            }
            _ => Self::condition(model, problem, obs, training),
        }
    }

    /// Scalar emulator of `Φ(θ) = ½‖G(θ) − y‖²/σ²` trained on the same
    /// forward solves.
    pub fn condition_potential(
        model: &EmulatorModel,
        problem: &PdeProblem,
        training: &TrainingSet,
        data: &SyntheticData,
    ) -> Result<Self> {
        if model.family != Family::Potential {
            return Err(Error::input("condition_potential needs a Potential model"));
        }
        let phi = potential_values(training, data)?;
        let g = DMatrix::from_column_slice(phi.len(), 1, &phi);
        Self::separable(
            model,
            problem.dim_theta(),
            &training.theta,
            g,
            DMatrix::identity(1, 1),
        )
    }

    fn gx_matrix(training: &TrainingSet, d_y: usize) -> Result<DMatrix<f64>> {
        if training.gx.iter().any(|r| r.len() != d_y) {
            return Err(Error::input("training rows do not match the observation count"));
        }
        Ok(DMatrix::from_fn(training.n(), d_y, |i, j| training.gx[i][j]))
    }

    fn output_covariance(model: &EmulatorModel, obs: &ObservationOperator) -> Result<DMatrix<f64>> {
        Ok(match model.family {
            Family::Baseline => DMatrix::identity(obs.d_y(), obs.d_y()),
            _ => {
                let fs = obs.functionals();
                spatial_gram(model.spatial_kernel()?, &fs, &fs)
            }
        })
    }

    fn check_kp(model: &EmulatorModel, d_theta: usize) -> Result<()> {
        if model.k_p.input_dim != d_theta {
            return Err(Error::input(format!(
                "k_p has input dimension {} but θ has dimension {d_theta}",
                model.k_p.input_dim
            )));
        }
        Ok(())
    }

    fn finish(
        model: &EmulatorModel,
        d_theta: usize,
        ks: DMatrix<f64>,
        jitter_used: f64,
        lml: f64,
        inner: Inner,
    ) -> Self {
        let ks_eigen = ks.clone().symmetric_eigen();
        ConditionedGP {
            model: model.clone(),
            d_theta,
            d_out: ks.nrows(),
            ks,
            ks_eigen,
            jitter_used,
            lml,
            inner,
        }
    }

    fn separable(
        model: &EmulatorModel,
        d_theta: usize,
        thetas: &[Vec<f64>],
        g: DMatrix<f64>,
        ks: DMatrix<f64>,
    ) -> Result<Self> {
        Self::check_kp(model, d_theta)?;
        let n = thetas.len();
        let d_out = ks.nrows();
        let kp = model.k_p.gram(thetas);
        let (chol, eps) = jittered_cholesky(&kp, model.jitter, "parameter Gram K_p(Θ, Θ)")?;
        let alpha = chol.solve(&g);
        // log N(vec G; 0, K_p ⊗ S) = -½ tr(K_p⁻¹ G S⁻¹ Gᵀ) - ½ (d logdet K_p
        // + N logdet S) - ½ N d log 2π
        let lml = if n == 0 {
            0.0
        } else {
            let (ks_chol, _) = jittered_cholesky(&ks, model.jitter, "spatial Gram K_s(X, X)")?;
            let quad = (g.transpose() * &alpha)
                .component_mul(&ks_chol.inverse())
                .sum();
            -0.5 * quad
                - 0.5 * (d_out as f64 * chol_logdet(&chol) + n as f64 * chol_logdet(&ks_chol))
                - 0.5 * (n * d_out) as f64 * (2.0 * std::f64::consts::PI).ln()
        };
        let inner = Inner::Separable(Separable {
            thetas: thetas.to_vec(),
            chol,
            alpha,
        });
        Ok(Self::finish(model, d_theta, ks, eps, lml, inner))
    }

    #[allow(clippy::too_many_arguments)]
    fn joint(
        model: &EmulatorModel,
        d_theta: usize,
        groups: Vec<Vec<f64>>,
        sizes: &[usize],
        gram: DMatrix<f64>,
        cs: DMatrix<f64>,
        y: DVector<f64>,
        ks: DMatrix<f64>,
    ) -> Result<Self> {
        Self::check_kp(model, d_theta)?;
        let m = gram.nrows();
        let t = groups.len();
        let (chol, eps) = jittered_cholesky(&gram, model.jitter, "joint training Gram")?;
        let alpha = chol.solve(&y);
        let lml = -0.5 * y.dot(&alpha)
            - 0.5 * chol_logdet(&chol)
            - 0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln();
        let starts: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let st = *acc;
                *acc += s;
                Some(st)
            })
            .collect();
        let d_y = cs.nrows();
        let mut mu = DMatrix::zeros(d_y, t);
        for g in 0..t {
            let dg = cs.columns(starts[g], sizes[g]);
            mu.set_column(g, &(dg * alpha.rows(starts[g], sizes[g])));
        }
        let inner = Inner::Joint(Joint {
            groups,
            starts,
            sizes: sizes.to_vec(),
            mu,
            cs,
            chol,
            alpha,
        });
        Ok(Self::finish(model, d_theta, ks, eps, lml, inner))
    }

    fn pde_constrained(
        model: &EmulatorModel,
        problem: &PdeProblem,
        obs: &ObservationOperator,
        training: &TrainingSet,
    ) -> Result<Self> {
        if !training.has_pde_blocks() {
            return Err(Error::input(
                "PDE-constrained emulator needs f and g training blocks (n_bar > 0)",
            ));
        }
        let k_s = model.spatial_kernel()?;
        if k_s.input_dim != problem.spatial_dim {
            return Err(Error::input("k_s dimension differs from the spatial dimension"));
        }
        let obs_f = obs.functionals();
        let d = problem.spatial_dim;
        // Functionals of each θ̄ group: L^θ̄ at X_f, then B at X_g.
        let mut pde_f: Vec<Vec<SpatialFunctional>> = Vec::new();
        for tb in &training.theta_bar {
            let mut fs = Vec::with_capacity(training.xf.len() + training.xg.len());
            for x in &training.xf {
                fs.push(SpatialFunctional::Point {
                    x: x.clone(),
                    op: problem.interior_operator(x, tb)?,
                });
            }
            for x in &training.xg {
                fs.push(SpatialFunctional::Point {
                    x: x.clone(),
                    op: problem.boundary_operator(x)?,
                });
            }
            pde_f.push(fs);
        }
        debug_assert!(obs_f.iter().all(|f| match f {
            SpatialFunctional::Point { op, .. } => *op == LinearOp::identity(d),
            SpatialFunctional::Integral { .. } => true,
        }));

        let n = training.n();
        let nb = training.theta_bar.len();
        let mut groups = training.theta.clone();
        groups.extend(training.theta_bar.iter().cloned());
        let mut sizes = vec![obs_f.len(); n];
        sizes.extend(pde_f.iter().map(Vec::len));
        let m: usize = sizes.iter().sum();
        let starts: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let st = *acc;
                *acc += s;
                Some(st)
            })
            .collect();

        // Spatial blocks between the distinct functional sets.
        let ks = spatial_gram(k_s, &obs_f, &obs_f);
        let obs_pde: Vec<DMatrix<f64>> = pde_f.iter().map(|fs| spatial_gram(k_s, &obs_f, fs)).collect();
        let set = |g: usize| if g < n { None } else { Some(g - n) };
        let mut gram = DMatrix::zeros(m, m);
        let mut cs = DMatrix::zeros(obs_f.len(), m);
        for a in 0..groups.len() {
            let block_cs = match set(a) {
                None => ks.clone(),
                Some(j) => obs_pde[j].clone(),
            };
            cs.view_mut((0, starts[a]), (obs_f.len(), sizes[a])).copy_from(&block_cs);
            for b in a..groups.len() {
                let s = match (set(a), set(b)) {
                    (None, None) => ks.clone(),
                    (None, Some(j)) => obs_pde[j].clone(),
                    (Some(i), None) => obs_pde[i].transpose(),
                    (Some(i), Some(j)) => spatial_gram(k_s, &pde_f[i], &pde_f[j]),
                };
                let kp = model.k_p.eval(&groups[a], &groups[b])?;
                let blk = s * kp;
                gram.view_mut((starts[a], starts[b]), (sizes[a], sizes[b])).copy_from(&blk);
                if a != b {
                    gram.view_mut((starts[b], starts[a]), (sizes[b], sizes[a]))
                        .copy_from(&blk.transpose());
                }
            }
        }
        let mut y = Vec::with_capacity(m);
        for row in &training.gx {
            if row.len() != obs_f.len() {
                return Err(Error::input("training rows do not match the observation count"));
            }
            y.extend_from_slice(row);
        }
        for j in 0..nb {
            y.extend_from_slice(&training.f_vals[j]);
            y.extend_from_slice(&training.g_vals[j]);
        }
        Self::joint(
            model,
            problem.dim_theta(),
            groups,
            &sizes,
            gram,
            cs,
            DVector::from_vec(y),
            ks,
        )
    }

    pub fn model(&self) -> &EmulatorModel {
        &self.model
    }

    pub fn family(&self) -> Family {
        self.model.family
    }

    pub fn d_theta(&self) -> usize {
        self.d_theta
    }

    /// `d_y` for forward-map emulators, 1 for the potential.
    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Prior covariance `S` shared by the outputs of a separable emulator.
    pub fn output_cov(&self) -> &DMatrix<f64> {
        &self.ks
    }

    /// Eigendecomposition of [`output_cov`](Self::output_cov).
    pub fn output_cov_eigen(&self) -> &SymmetricEigen<f64, Dyn> {
        &self.ks_eigen
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// Gaussian log-evidence of the training values under the prior Gram.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.lml
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.d_theta {
            return Err(Error::input(format!(
                "θ has dimension {}, emulator expects {}",
                theta.len(),
                self.d_theta
            )));
        }
        Ok(())
    }

    fn training_points(&self) -> &[Vec<f64>] {
        match &self.inner {
            Inner::Separable(s) => &s.thetas,
            Inner::Joint(j) => &j.groups,
        }
    }

    /// `k_p(θ, Θ)` and, if requested, its gradient rows `∇_θ k_p(θ, θ_i)`.
    fn kp_row(&self, theta: &[f64], grad: bool) -> (DVector<f64>, DMatrix<f64>) {
        let pts = self.training_points();
        let mut k = DVector::zeros(pts.len());
        let mut gk = DMatrix::zeros(if grad { pts.len() } else { 0 }, self.d_theta);
        let mut buf = vec![0.0; self.d_theta];
        for (i, p) in pts.iter().enumerate() {
            if grad {
                k[i] = self.model.k_p.grad_a_into(theta, p, &mut buf);
                for (l, v) in buf.iter().enumerate() {
                    gk[(i, l)] = *v;
                }
            } else {
                k[i] = self.model.k_p.eval_unchecked(theta, p);
            }
        }
        (k, gk)
    }

    pub fn predict_mean(&self, theta: &[f64]) -> Result<DVector<f64>> {
        self.check_theta(theta)?;
        let (k, _) = self.kp_row(theta, false);
        Ok(match &self.inner {
            Inner::Separable(s) => s.alpha.tr_mul(&k),
            Inner::Joint(j) => &j.mu * k,
        })
    }

    /// `K_N(θ, θ')`.
    pub fn predict_cov(&self, theta: &[f64], theta_prime: &[f64]) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        self.check_theta(theta_prime)?;
        let (k1, _) = self.kp_row(theta, false);
        let (k2, _) = self.kp_row(theta_prime, false);
        let prior = self.model.k_p.eval_unchecked(theta, theta_prime);
        Ok(match &self.inner {
            Inner::Separable(s) => &self.ks * (prior - whiten(&s.chol, &k1).dot(&whiten(&s.chol, &k2))),
            Inner::Joint(j) => &self.ks * prior - j.whitened(&k1).tr_mul(&j.whitened(&k2)),
        })
    }

    /// Scalar `k_{N,p}(θ, θ')` of a separable emulator, for which
    /// `K_N(θ, θ') = k_{N,p}(θ, θ') S`.
    pub fn scalar_cov(&self, theta: &[f64], theta_prime: &[f64]) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_theta(theta_prime)?;
        match &self.inner {
            Inner::Separable(s) => {
                let (k1, _) = self.kp_row(theta, false);
                let (k2, _) = self.kp_row(theta_prime, false);
                Ok(self.model.k_p.eval_unchecked(theta, theta_prime)
                    - whiten(&s.chol, &k1).dot(&whiten(&s.chol, &k2)))
            }
            Inner::Joint(_) => Err(Error::Capability(
                "scalar covariance exists only for separable emulators".into(),
            )),
        }
    }

    /// Jacobian of the predictive mean, `d_out × d_θ`.
    pub fn predict_mean_grad(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.predict(theta, false)?.mean_grad)
    }

    /// `∂K_N(θ, θ)/∂θ_l` for each `l`. For stationary `k_p` this is
    /// `-2 sym(∂_l K(θ, Θ) K(Θ, Θ)⁻¹ K(Θ, θ))`.
    pub fn predict_cov_grad(&self, theta: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let pred = self.predict(theta, true)?;
        Ok(match pred.cov.expect("requested") {
            PredictiveCov::Scaled { grad, .. } => grad.iter().map(|g| &self.ks * *g).collect(),
            PredictiveCov::Dense { grad, .. } => grad,
        })
    }

    /// Mean, mean Jacobian and optionally the covariance at `(θ, θ)` with
    /// its gradient, sharing the kernel evaluations.
    pub fn predict(&self, theta: &[f64], with_cov: bool) -> Result<Prediction> {
        self.check_theta(theta)?;
        let (k, gk) = self.kp_row(theta, true);
        // The prior term k_p(θ, θ) is constant for stationary kernels.
        let prior = self.model.k_p.variance();
        match &self.inner {
            Inner::Separable(s) => {
                let mean = s.alpha.tr_mul(&k);
                let mean_grad = s.alpha.tr_mul(&gk);
                let cov = with_cov.then(|| {
                    let v = whiten(&s.chol, &k);
                    let scale = prior - v.dot(&v);
                    let w = s
                        .chol
                        .l_dirty()
                        .tr_solve_lower_triangular(&v)
                        .expect("Cholesky factor has a positive diagonal");
                    let grad = gk.tr_mul(&w).iter().map(|g| -2.0 * g).collect();
                    PredictiveCov::Scaled { scale, grad }
                });
                Ok(Prediction {
                    mean,
                    mean_grad,
                    cov,
                })
            }
            Inner::Joint(j) => {
                let mean = &j.mu * &k;
                let mean_grad = &j.mu * &gk;
                let cov = with_cov.then(|| {
                    let d = self.d_out;
                    let v = j.whitened(&k);
                    let cov = &self.ks * prior - v.tr_mul(&v);
                    // ∂_l K_N = -(∂_l K(θ, Θ) W + transpose), W = K̃⁻¹ K(Θ, θ)
                    let w = j
                        .chol
                        .l_dirty()
                        .tr_solve_lower_triangular(&v)
                        .expect("Cholesky factor has a positive diagonal");
                    let dw: Vec<DMatrix<f64>> = j
                        .starts
                        .iter()
                        .zip(&j.sizes)
                        .map(|(&st, &sz)| j.cs.columns(st, sz) * w.rows(st, sz))
                        .collect();
                    let grad = (0..self.d_theta)
                        .map(|l| {
                            let mut a = DMatrix::zeros(d, d);
                            for (g, dwg) in dw.iter().enumerate() {
                                add_scaled(&mut a, gk[(g, l)], dwg);
                            }
                            -(&a + a.transpose())
                        })
                        .collect();
                    PredictiveCov::Dense { cov, grad }
                });
                Ok(Prediction {
                    mean,
                    mean_grad,
                    cov,
                })
            }
        }
    }

    pub fn sidecar(&self, config_hash: &str) -> GpSidecar {
        let (chol, alpha): (&Cholesky<f64, Dyn>, Vec<f64>) = match &self.inner {
            Inner::Separable(s) => (
                &s.chol,
                s.alpha.transpose().iter().copied().collect(),
            ),
            Inner::Joint(j) => (&j.chol, j.alpha.iter().copied().collect()),
        };
        let l = chol.l();
        GpSidecar {
            config_hash: config_hash.to_string(),
            family: self.model.family,
            jitter_used: self.jitter_used,
            dim: l.nrows(),
            chol_l: l.as_slice().to_vec(),
            alpha,
            log_marginal_likelihood: self.lml,
        }
    }
}

/// Picks the `(ℓ_p, ℓ_s)` pair maximizing the log marginal likelihood over
/// the given candidates; `ℓ_s` candidates are ignored without a spatial
/// kernel.
pub fn select_lengthscales(
    model: &EmulatorModel,
    problem: &PdeProblem,
    obs: &ObservationOperator,
    training: &TrainingSet,
    lp_grid: &[f64],
    ls_grid: &[f64],
) -> Result<(EmulatorModel, f64)> {
    let mut best: Option<(EmulatorModel, f64)> = None;
    let ls_values: Vec<Option<f64>> = match model.k_s {
        Some(_) => ls_grid.iter().map(|v| Some(*v)).collect(),
        None => vec![None],
    };
    for &lp in lp_grid {
        for ls in &ls_values {
            let mut m = model.clone();
            m.k_p.hyper.lengthscale = lp;
            if let (Some(k), Some(v)) = (m.k_s.as_mut(), ls) {
                k.hyper.lengthscale = *v;
            }
            let Ok(gp) = ConditionedGP::condition(&m, problem, obs, training) else {
                continue;
            };
            let v = gp.log_marginal_likelihood();
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((m, v));
            }
        }
    }
    best.ok_or_else(|| Error::Numerical("no candidate hyperparameters could be conditioned".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{build_training, DesignSpec};
    use crate::pde::DiffusionField;

    fn setup_1d(n: usize) -> (PdeProblem, ObservationOperator, TrainingSet) {
        let p = PdeProblem::constant_diffusion();
        let obs = ObservationOperator::uniform_points(5);
        let t = build_training(
            &p,
            &obs,
            &DesignSpec {
                n,
                n_bar: 10,
                d_f: 5,
                d_g: 2,
                mesh_n: 256,
            },
        )
        .unwrap();
        (p, obs, t)
    }

    fn models(d_theta: usize, d_x: usize) -> Vec<EmulatorModel> {
        let kp = Kernel::squared_exponential(1.0, 0.5, d_theta).unwrap();
        let ks = Kernel::squared_exponential(1.0, 0.3, d_x).unwrap();
        vec![
            EmulatorModel::new(Family::Baseline, kp.clone(), None),
            EmulatorModel::new(Family::SpatiallyCorrelated, kp.clone(), Some(ks.clone())),
            EmulatorModel::new(Family::PdeConstrained, kp, Some(ks)),
        ]
    }

    #[test]
    fn interpolates_training_points() {
        let (p, obs, t) = setup_1d(4);
        for m in models(1, 1) {
            let gp = ConditionedGP::condition(&m, &p, &obs, &t).unwrap();
            for (th, g) in t.theta.iter().zip(&t.gx) {
                let mean = gp.predict_mean(th).unwrap();
                let err = mean
                    .iter()
                    .zip(g)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-10, "{:?}: mean error {err}", m.family);
                let cov = gp.predict_cov(th, th).unwrap();
                assert!(cov.amax() < 1e-8, "{:?}: variance {}", m.family, cov.amax());
            }
        }
    }

    #[test]
    fn dense_and_kronecker_routes_agree() {
        let (p, obs, t) = setup_1d(4);
        for m in &models(1, 1)[..2] {
            let a = ConditionedGP::condition(m, &p, &obs, &t).unwrap();
            let b = ConditionedGP::condition_dense(m, &p, &obs, &t).unwrap();
            for th in [-0.83, -0.2, 0.314, 0.9] {
                let th = [th];
                assert!((a.predict_mean(&th).unwrap() - b.predict_mean(&th).unwrap()).amax() < 1e-9);
                assert!(
                    (a.predict_cov(&th, &[0.1]).unwrap() - b.predict_cov(&th, &[0.1]).unwrap()).amax()
                        < 1e-9
                );
            }
            let rel = (a.log_marginal_likelihood() - b.log_marginal_likelihood()).abs()
                / a.log_marginal_likelihood().abs();
            assert!(rel < 1e-8, "{:?}: lml rel diff {rel}", m.family);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = PdeProblem::linear_source_1d(DiffusionField::four_cell());
        let obs = ObservationOperator::uniform_points(6);
        let t = build_training(
            &p,
            &obs,
            &DesignSpec {
                n: 4,
                n_bar: 6,
                d_f: 5,
                d_g: 2,
                mesh_n: 128,
            },
        )
        .unwrap();
        for m in models(2, 1) {
            let gp = ConditionedGP::condition(&m, &p, &obs, &t).unwrap();
            let th = [0.21, -0.37];
            let jac = gp.predict_mean_grad(&th).unwrap();
            let cg = gp.predict_cov_grad(&th).unwrap();
            let h = 1e-6;
            for l in 0..2 {
                let mut tp = th;
                let mut tm = th;
                tp[l] += h;
                tm[l] -= h;
                let fd = (gp.predict_mean(&tp).unwrap() - gp.predict_mean(&tm).unwrap()) / (2.0 * h);
                let err = (&fd - jac.column(l)).amax();
                assert!(err <= 1e-5 * fd.amax().max(1e-3), "{:?} mean {err}", m.family);
                let fdc = (gp.predict_cov(&tp, &tp).unwrap() - gp.predict_cov(&tm, &tm).unwrap())
                    / (2.0 * h);
                let err = (&fdc - &cg[l]).amax();
                assert!(err <= 1e-4 * fdc.amax().max(1e-3), "{:?} cov {err}", m.family);
            }
        }
    }

    #[test]
    fn empty_training_gives_prior() {
        let p = PdeProblem::constant_diffusion();
        let obs = ObservationOperator::uniform_points(3);
        let mut t = setup_1d(1).2;
        t.theta.clear();
        t.gx.clear();
        let m = &models(1, 1)[1];
        let gp = ConditionedGP::condition(m, &p, &obs, &t).unwrap();
        let c = gp.predict_cov(&[0.2], &[0.5]).unwrap();
        let kp = m.k_p.eval(&[0.2], &[0.5]).unwrap();
        assert!((c - gp.output_cov() * kp).amax() < 1e-15);
        assert!(gp.predict_mean(&[0.2]).unwrap().amax() == 0.0);
    }

    #[test]
    fn far_field_reverts_to_zero_mean() {
        let (p, obs, t) = setup_1d(4);
        let m = &models(1, 1)[0];
        let gp = ConditionedGP::condition(m, &p, &obs, &t).unwrap();
        assert!(gp.predict_mean(&[20.0]).unwrap().amax() < 1e-3);
    }

    #[test]
    fn log_marginal_likelihood_standard_normal() {
        let p = PdeProblem::constant_diffusion();
        let obs = ObservationOperator::uniform_points(1);
        let mut t = setup_1d(1).2;
        t.gx = vec![vec![0.0]];
        let m = &models(1, 1)[0];
        let gp = ConditionedGP::condition(m, &p, &obs, &t).unwrap();
        let expect = -0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((gp.log_marginal_likelihood() - expect).abs() < 1e-10);
        t.gx = vec![vec![10.0]];
        let worse = ConditionedGP::condition(m, &p, &obs, &t).unwrap();
        assert!(worse.log_marginal_likelihood() < gp.log_marginal_likelihood());
    }

    #[test]
    fn pde_emulator_beats_baseline_at_small_n() {
        let (p, obs, t) = setup_1d(2);
        let truth: Vec<f64> = (1..=5)
            .map(|j| {
                let x = j as f64 / 6.0;
                (x - x * x) / (2.0 * 0.314f64.exp())
            })
            .collect();
        let err = |m: &EmulatorModel| {
            let gp = ConditionedGP::condition(m, &p, &obs, &t).unwrap();
            let mean = gp.predict_mean(&[0.314]).unwrap();
            mean.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let ms = models(1, 1);
        assert!(err(&ms[2]) < err(&ms[0]));
    }

    #[test]
    fn potential_emulator_interpolates_phi() {
        let (p, _, t) = setup_1d(4);
        let data = SyntheticData {
            y: vec![0.1; 5],
            theta_dagger: vec![0.0],
            noise_var: 1e-2,
            seed: 0,
            mesh_n: 64,
        };
        let m = EmulatorModel::new(Family::Potential, Kernel::squared_exponential(1.0, 0.5, 1).unwrap(), None);
        let gp = ConditionedGP::condition_potential(&m, &p, &t, &data).unwrap();
        let phi = potential_values(&t, &data).unwrap();
        assert_eq!(gp.d_out(), 1);
        for (th, v) in t.theta.iter().zip(&phi) {
            assert!((gp.predict_mean(th).unwrap()[0] - v).abs() < 1e-8 * v.abs().max(1.0));
        }
    }
}
