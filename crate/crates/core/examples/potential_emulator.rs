//! A scalar GP on the potential Φ, trained on the same solves as the
//! forward-map emulators, and the two posteriors built from it.
//!
//!     cargo run --release --example potential_emulator

use std::sync::Arc;

use pdegp::design::{build_training, DesignSpec};
use pdegp::emulator::{potential_values, ConditionedGP, EmulatorModel, Family};
use pdegp::kernels::Kernel;
use pdegp::metrics::hellinger;
use pdegp::pde::{make_data, DiffusionField, ObservationOperator, PdeProblem};
use pdegp::posterior::{grid_density, true_posterior_grid, ApproxPosterior, GridSpec, PosteriorKind, SmoothedUniformPrior};

fn main() -> pdegp::Result<()> {
    let problem = PdeProblem::linear_source_1d(DiffusionField::four_cell());
    let obs = ObservationOperator::uniform_points(6);
    let data = make_data(&problem, &obs, &[0.098, 0.430], 1e-4, 1, 1024)?;
    let prior = SmoothedUniformPrior::new(problem.theta_box.clone(), 1e-3)?;
    let grid = GridSpec { points_per_axis: 128 };
    let truth = true_posterior_grid(&problem, &obs, &data, &prior, &grid, 1024)?;
    println!("exact posterior mode {:.3?}", truth.argmax());

    for n in [4, 10, 20] {
        let training = build_training(&problem, &obs, &DesignSpec { n, n_bar: 0, d_f: 0, d_g: 2, mesh_n: 1024 })?;
        let phi = potential_values(&training, &data)?;
        let (lo, hi) = phi.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        let model = EmulatorModel::new(Family::Potential, Kernel::squared_exponential(1e6, 0.5, 2)?, None);
        let gp = Arc::new(ConditionedGP::condition_potential(&model, &problem, &training, &data)?);
        println!(
            "N = {n}: Φ on the design in [{lo:.1}, {hi:.1}], log marginal likelihood {:.2}",
            gp.log_marginal_likelihood()
        );
        for kind in [PosteriorKind::MeanPotential, PosteriorKind::MarginalPotential] {
            let ap = ApproxPosterior::emulated(kind, gp.clone(), &data, prior.clone())?;
            let g = grid_density(&ap, &prior.theta_box, &grid)?;
            println!(
                "  {kind:?}: mode {:.3?}, Hellinger to exact {:.4}",
                g.argmax(),
                hellinger(&truth, &g)?
            );
        }
    }
    Ok(())
}
