//! Hellinger distance between the exact posterior and the mean-based and
//! marginal approximations as the number of training solves grows.
//!
//!     cargo run --release --example hellinger_study

use std::sync::Arc;

use pdegp::design::{build_training, DesignSpec};
use pdegp::emulator::{ConditionedGP, EmulatorModel, Family};
use pdegp::kernels::Kernel;
use pdegp::metrics::hellinger;
use pdegp::pde::{make_data, ObservationOperator, PdeProblem};
use pdegp::posterior::{grid_density, true_posterior_grid, ApproxPosterior, GridSpec, PosteriorKind, SmoothedUniformPrior};

fn main() -> pdegp::Result<()> {
    let problem = PdeProblem::constant_diffusion();
    let obs = ObservationOperator::uniform_points(5);
    let data = make_data(&problem, &obs, &[0.314], 1e-5, 1, 1024)?;
    let prior = SmoothedUniformPrior::new(problem.theta_box.clone(), 1e-3)?;
    let grid = GridSpec { points_per_axis: 2048 };
    let truth = true_posterior_grid(&problem, &obs, &data, &prior, &grid, 1024)?;
    println!("exact posterior mode {:.4}", truth.argmax()[0]);

    let k_p = Kernel::squared_exponential(0.1, 1.0, 1)?;
    let k_s = Kernel::squared_exponential(1.0, 0.3, 1)?;
    let models = [
        EmulatorModel::new(Family::Baseline, k_p.clone(), None),
        EmulatorModel::new(Family::SpatiallyCorrelated, k_p.clone(), Some(k_s.clone())),
        EmulatorModel::new(Family::PdeConstrained, k_p, Some(k_s)),
    ];
    println!("{:<22} {:>3} {:>10} {:>10}", "family", "N", "mean", "marginal");
    for n in [1, 2, 4, 8] {
        let training = build_training(&problem, &obs, &DesignSpec { n, n_bar: 10, d_f: 5, d_g: 2, mesh_n: 1024 })?;
        for m in &models {
            let gp = Arc::new(ConditionedGP::condition(m, &problem, &obs, &training)?);
            let mut h = [0.0; 2];
            for (slot, kind) in h.iter_mut().zip([PosteriorKind::MeanForward, PosteriorKind::MarginalForward]) {
                let ap = ApproxPosterior::emulated(kind, gp.clone(), &data, prior.clone())?;
                *slot = hellinger(&truth, &grid_density(&ap, &prior.theta_box, &grid)?)?;
            }
            println!("{:<22} {n:>3} {:>10.4} {:>10.4}", format!("{:?}", m.family), h[0], h[1]);
        }
    }
    Ok(())
}
