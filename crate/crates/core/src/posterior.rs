//! Unnormalized posterior log-densities with analytic gradients.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::emulator::{ConditionedGP, Family, PredictiveCov};
use crate::error::{Error, Result};
use crate::metrics::GridDensity;
use crate::pde::{ClosedFormConstantDiffusion, ForwardModel, ObservationOperator, PdeProblem, SolverForward, SyntheticData, ThetaBox};

/// Anything MALA can sample.
pub trait LogDensity: Send + Sync {
    fn dim(&self) -> usize;

    fn log_density(&self, theta: &[f64]) -> Result<f64>;

    fn grad_log_density(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(self.log_density_and_grad(theta)?.1)
    }

    fn log_density_and_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// Moreau–Yoshida envelope of the uniform prior on a box:
/// `log π₀(θ) = -dist(θ, box)² / (2λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothedUniformPrior {
    pub theta_box: ThetaBox,
    pub lambda: f64,
}

impl SmoothedUniformPrior {
    pub const DEFAULT_LAMBDA: f64 = 1e-3;

    pub fn new(theta_box: ThetaBox, lambda: f64) -> Result<Self> {
        theta_box.validate()?;
        if !(lambda > 0.0) {
            return Err(Error::input("Moreau–Yoshida λ must be positive"));
        }
        Ok(SmoothedUniformPrior { theta_box, lambda })
    }

    pub fn log_density(&self, theta: &[f64]) -> f64 {
        let proj = self.theta_box.project(theta);
        let d2: f64 = theta.iter().zip(&proj).map(|(t, p)| (t - p) * (t - p)).sum();
        -d2 / (2.0 * self.lambda)
    }

    pub fn grad(&self, theta: &[f64]) -> Vec<f64> {
        let proj = self.theta_box.project(theta);
        theta
            .iter()
            .zip(&proj)
            .map(|(t, p)| -(t - p) / self.lambda)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PosteriorKind {
    /// Emulator mean plugged into the likelihood.
    MeanForward,
    /// Likelihood averaged over the emulator's predictive distribution.
    MarginalForward,
    /// `exp(-m_N^Φ(θ))`
    MeanPotential,
    /// `exp(-m_N^Φ(θ) + ½ k_N(θ, θ))`
    MarginalPotential,
    /// Exact likelihood through a closed-form forward map.
    TrueClosedForm,
    /// Exact likelihood through the reference solver.
    TrueViaSolver,
}

impl PosteriorKind {
    pub fn uses_emulator(self) -> bool {
        !matches!(self, PosteriorKind::TrueClosedForm | PosteriorKind::TrueViaSolver)
    }

    pub fn is_potential(self) -> bool {
        matches!(self, PosteriorKind::MeanPotential | PosteriorKind::MarginalPotential)
    }
}

#[derive(Clone)]
enum Source {
    Emulator(Arc<ConditionedGP>),
    Forward(Arc<dyn ForwardModel>),
}

#[derive(Clone)]
pub struct ApproxPosterior {
    kind: PosteriorKind,
    source: Source,
    y: DVector<f64>,
    noise_var: f64,
    prior: SmoothedUniformPrior,
}

impl std::fmt::Debug for ApproxPosterior {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ApproxPosterior")
            .field("kind", &self.kind)
            .field("noise_var", &self.noise_var)
            .field("prior", &self.prior)
            .finish_non_exhaustive()
    }
}

impl ApproxPosterior {
    /// Emulator-based posterior; potential kinds need a `Potential` emulator
    /// and forward kinds a forward-map emulator.
    pub fn emulated(
        kind: PosteriorKind,
        gp: Arc<ConditionedGP>,
        data: &SyntheticData,
        prior: SmoothedUniformPrior,
    ) -> Result<Self> {
        if !kind.uses_emulator() {
            return Err(Error::input(format!("{kind:?} does not use an emulator")));
        }
        if kind.is_potential() != (gp.family() == Family::Potential) {
            return Err(Error::input(format!(
                "{kind:?} cannot use a {:?} emulator",
                gp.family()
            )));
        }
        if !kind.is_potential() && gp.d_out() != data.y.len() {
            return Err(Error::input("emulator output size differs from the data size"));
        }
        Self::check_common(gp.d_theta(), data, &prior)?;
        Ok(ApproxPosterior {
            kind,
            source: Source::Emulator(gp),
            y: data.y_vector(),
            noise_var: data.noise_var,
            prior,
        })
    }

    /// Exact posterior through a forward model.
    pub fn exact(
        forward: Arc<dyn ForwardModel>,
        kind: PosteriorKind,
        data: &SyntheticData,
        prior: SmoothedUniformPrior,
    ) -> Result<Self> {
        if kind.uses_emulator() {
            return Err(Error::input(format!("{kind:?} needs an emulator")));
        }
        if forward.d_y() != data.y.len() {
            return Err(Error::input("forward model output size differs from the data size"));
        }
        Self::check_common(forward.dim_theta(), data, &prior)?;
        Ok(ApproxPosterior {
            kind,
            source: Source::Forward(forward),
            y: data.y_vector(),
            noise_var: data.noise_var,
            prior,
        })
    }

    /// Exact posterior using the closed form when the problem admits one
    /// and the reference solver otherwise.
    pub fn truth(
        problem: &PdeProblem,
        obs: &ObservationOperator,
        data: &SyntheticData,
        prior: SmoothedUniformPrior,
        mesh_n: usize,
    ) -> Result<Self> {
        match ClosedFormConstantDiffusion::new(problem, obs) {
            Ok(cf) => Self::exact(Arc::new(cf), PosteriorKind::TrueClosedForm, data, prior),
            Err(_) => Self::exact(
                Arc::new(SolverForward {
                    problem: problem.clone(),
                    observation: obs.clone(),
                    mesh_n,
                }),
                PosteriorKind::TrueViaSolver,
                data,
                prior,
            ),
        }
    }

    fn check_common(d_theta: usize, data: &SyntheticData, prior: &SmoothedUniformPrior) -> Result<()> {
        if prior.theta_box.dim() != d_theta {
            return Err(Error::input("prior box dimension differs from θ dimension"));
        }
        if !(data.noise_var > 0.0) {
            return Err(Error::input("noise variance must be positive"));
        }
        Ok(())
    }

    pub fn kind(&self) -> PosteriorKind {
        self.kind
    }

    pub fn prior(&self) -> &SmoothedUniformPrior {
        &self.prior
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::input(format!(
                "θ has dimension {}, posterior expects {}",
                theta.len(),
                self.dim()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::input("θ must be finite"));
        }
        Ok(())
    }

    /// Log-likelihood part and its gradient (if `grad`).
    fn likelihood(&self, theta: &[f64], grad: bool) -> Result<(f64, Option<DVector<f64>>)> {
        let s2 = self.noise_var;
        match (&self.source, self.kind) {
            (Source::Forward(f), _) => {
                let r = f.eval(theta)? - &self.y;
                let ll = -0.5 * r.norm_squared() / s2;
                let g = if grad {
                    Some(-(f.jacobian(theta)?.tr_mul(&r)) / s2)
                } else {
                    None
                };
                Ok((ll, g))
            }
            (Source::Emulator(gp), PosteriorKind::MeanForward) => {
                let pred = gp.predict(theta, false)?;
                let r = &pred.mean - &self.y;
                let g = grad.then(|| -(pred.mean_grad.tr_mul(&r)) / s2);
                Ok((-0.5 * r.norm_squared() / s2, g))
            }
            (Source::Emulator(gp), PosteriorKind::MarginalForward) => {
                let pred = gp.predict(theta, true)?;
                let r = &pred.mean - &self.y;
                match pred.cov.expect("requested") {
                    PredictiveCov::Scaled { scale, grad: kgrad } => {
                        // A = scale·S + σ²I is diagonal in the eigenbasis of S.
                        let eig = gp.output_cov_eigen();
                        let rt = eig.eigenvectors.tr_mul(&r);
                        let mut quad = 0.0;
                        let mut logdet = 0.0;
                        let mut dquad = 0.0;
                        let mut dtrace = 0.0;
                        let mut ainv_rt = DVector::zeros(rt.len());
                        for i in 0..rt.len() {
                            let lam = eig.eigenvalues[i].max(0.0);
                            let a = scale * lam + s2;
                            if !(a > 0.0) {
                                return Err(Error::Numerical(
                                    "K_N + σ²I is not positive definite".into(),
                                ));
                            }
                            quad += rt[i] * rt[i] / a;
                            logdet += a.ln();
                            dquad += lam * rt[i] * rt[i] / (a * a);
                            dtrace += lam / a;
                            ainv_rt[i] = rt[i] / a;
                        }
                        let ll = -0.5 * quad - 0.5 * logdet;
                        let g = grad.then(|| {
                            let ainv_r = &eig.eigenvectors * ainv_rt;
                            let mut g = -(pred.mean_grad.tr_mul(&ainv_r));
                            for (l, kg) in kgrad.iter().enumerate() {
                                g[l] += 0.5 * kg * (dquad - dtrace);
                            }
                            g
                        });
                        Ok((ll, g))
                    }
                    PredictiveCov::Dense { cov, grad: cgrad } => {
                        let mut a = cov;
                        for i in 0..a.nrows() {
                            a[(i, i)] += s2;
                        }
                        let a = (&a + a.transpose()) * 0.5;
                        let ch = a.cholesky().ok_or_else(|| {
                            Error::Numerical("K_N + σ²I is not positive definite".into())
                        })?;
                        let ainv_r = ch.solve(&r);
                        let logdet = crate::linalg::chol_logdet(&ch);
                        let ll = -0.5 * r.dot(&ainv_r) - 0.5 * logdet;
                        let g = if grad {
                            let ainv: DMatrix<f64> = ch.inverse();
                            let mut g = -(pred.mean_grad.tr_mul(&ainv_r));
                            for (l, dk) in cgrad.iter().enumerate() {
                                let q = ainv_r.dot(&(dk * &ainv_r));
                                let tr = ainv.component_mul(dk).sum();
                                g[l] += 0.5 * q - 0.5 * tr;
                            }
                            Some(g)
                        } else {
                            None
                        };
                        Ok((ll, g))
                    }
                }
            }
            (Source::Emulator(gp), kind) => {
                let marginal = kind == PosteriorKind::MarginalPotential;
                let pred = gp.predict(theta, marginal)?;
                let mut ll = -pred.mean[0];
                let mut g: DVector<f64> = -pred.mean_grad.row(0).transpose();
                if let Some(PredictiveCov::Scaled { scale, grad: kg }) = pred.cov {
                    ll += 0.5 * scale;
                    for (gl, k) in g.iter_mut().zip(&kg) {
                        *gl += 0.5 * k;
                    }
                }
                Ok((ll, grad.then_some(g)))
            }
        }
    }
}

impl LogDensity for ApproxPosterior {
    fn dim(&self) -> usize {
        self.prior.theta_box.dim()
    }

    fn log_density(&self, theta: &[f64]) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(self.likelihood(theta, false)?.0 + self.prior.log_density(theta))
    }

    fn log_density_and_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_theta(theta)?;
        let (ll, g) = self.likelihood(theta, true)?;
        let g = g.expect("requested");
        let pg = self.prior.grad(theta);
        Ok((
            ll + self.prior.log_density(theta),
            g.iter().zip(&pg).map(|(a, b)| a + b).collect(),
        ))
    }
}

/// Rectangular evaluation grid over the parameter box (at most 2-d).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn axes(&self, b: &ThetaBox) -> Result<Vec<Vec<f64>>> {
        if b.dim() > 2 {
            return Err(Error::Capability(format!(
                "grid densities support d_θ ≤ 2, got {}",
                b.dim()
            )));
        }
        if self.points_per_axis < 2 {
            return Err(Error::input("grid needs at least two points per axis"));
        }
        let n = self.points_per_axis;
        Ok((0..b.dim())
            .map(|k| {
                (0..n)
                    .map(|i| b.lower[k] + (b.upper[k] - b.lower[k]) * i as f64 / (n - 1) as f64)
                    .collect()
            })
            .collect())
    }
}

/// Normalized density of `target` on the grid over its prior box.
pub fn grid_density(target: &dyn LogDensity, theta_box: &ThetaBox, grid: &GridSpec) -> Result<GridDensity> {
    use rayon::prelude::*;
    let axes = grid.axes(theta_box)?;
    let points = GridDensity::lattice(&axes);
    let logs = points
        .par_iter()
        .map(|p| target.log_density(p))
        .collect::<Result<Vec<_>>>()?;
    GridDensity::from_log_values(axes, logs)
}

/// Normalized exact posterior on a grid; uses the closed form when the
/// problem admits one.
pub fn true_posterior_grid(
    problem: &PdeProblem,
    obs: &ObservationOperator,
    data: &SyntheticData,
    prior: &SmoothedUniformPrior,
    grid: &GridSpec,
    mesh_n: usize,
) -> Result<GridDensity> {
    if problem.dim_theta() > 2 {
        return Err(Error::Capability(format!(
            "grid posteriors support d_θ ≤ 2, got {}",
            problem.dim_theta()
        )));
    }
    let ap = ApproxPosterior::truth(problem, obs, data, prior.clone(), mesh_n)?;
    grid_density(&ap, &prior.theta_box, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{build_training, DesignSpec};
    use crate::emulator::EmulatorModel;
    use crate::kernels::Kernel;
    use crate::pde::make_data;

    fn setup() -> (PdeProblem, ObservationOperator, SyntheticData, SmoothedUniformPrior) {
        let p = PdeProblem::constant_diffusion();
        let obs = ObservationOperator::uniform_points(5);
        let data = make_data(&p, &obs, &[0.314], 1e-5, 1, 512).unwrap();
        let prior = SmoothedUniformPrior::new(p.theta_box.clone(), 1e-3).unwrap();
        (p, obs, data, prior)
    }

    #[test]
    fn prior_envelope() {
        let pr = SmoothedUniformPrior::new(ThetaBox::symmetric(2, 1.0), 1e-3).unwrap();
        assert_eq!(pr.log_density(&[0.3, -0.9]), 0.0);
        assert_eq!(pr.grad(&[0.3, -0.9]), vec![0.0, 0.0]);
        assert!((pr.log_density(&[1.1, 0.0]) + 0.01 / 2e-3).abs() < 1e-12);
        assert!((pr.grad(&[1.1, 0.0])[0] + 100.0).abs() < 1e-9);
    }

    #[test]
    fn marginal_equals_mean_where_variance_vanishes() {
        let (p, obs, data, prior) = setup();
        let t = build_training(&p, &obs, &DesignSpec { n: 4, n_bar: 0, d_f: 0, d_g: 0, mesh_n: 512 }).unwrap();
        let m = EmulatorModel::new(Family::Baseline, Kernel::squared_exponential(1.0, 0.5, 1).unwrap(), None);
        let gp = Arc::new(ConditionedGP::condition(&m, &p, &obs, &t).unwrap());
        let mean = ApproxPosterior::emulated(PosteriorKind::MeanForward, gp.clone(), &data, prior.clone()).unwrap();
        let marg = ApproxPosterior::emulated(PosteriorKind::MarginalForward, gp, &data, prior).unwrap();
        let th = &t.theta[2];
        let shift = -0.5 * 5.0 * data.noise_var.ln();
        let diff = marg.log_density(th).unwrap() - (mean.log_density(th).unwrap() + shift);
        assert!(diff.abs() < 1e-4, "diff {diff}");
    }

    #[test]
    fn truth_grid_is_normalized_and_centred() {
        let (p, obs, data, prior) = setup();
        let g = true_posterior_grid(&p, &obs, &data, &prior, &GridSpec { points_per_axis: 2048 }, 512).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-8);
        assert!((g.argmax()[0] - 0.314).abs() < 0.05);
    }

    #[test]
    fn kind_and_family_must_agree() {
        let (p, obs, data, prior) = setup();
        let t = build_training(&p, &obs, &DesignSpec { n: 2, n_bar: 0, d_f: 0, d_g: 0, mesh_n: 64 }).unwrap();
        let m = EmulatorModel::new(Family::Baseline, Kernel::squared_exponential(1.0, 0.5, 1).unwrap(), None);
        let gp = Arc::new(ConditionedGP::condition(&m, &p, &obs, &t).unwrap());
        assert!(ApproxPosterior::emulated(PosteriorKind::MeanPotential, gp, &data, prior).is_err());
    }
}
