//! How collocation points shrink the PDE-constrained emulator's variance on
//! the four-cell problem, with the baseline for scale.
//!
//!     cargo run --release --example pde_constrained

use pdegp::design::{build_training, halton, DesignSpec};
use pdegp::emulator::{ConditionedGP, EmulatorModel, Family};
use pdegp::kernels::Kernel;
use pdegp::metrics::{avg_emulator_variance, emulator_rmse};
use pdegp::pde::{DiffusionField, ObservationOperator, PdeProblem, SolverForward};

fn main() -> pdegp::Result<()> {
    let problem = PdeProblem::linear_source_1d(DiffusionField::four_cell());
    let obs = ObservationOperator::uniform_points(6);
    let oracle = SolverForward { problem: problem.clone(), observation: obs.clone(), mesh_n: 1024 };
    let theta_true = [0.098, 0.430];
    let points: Vec<Vec<f64>> = halton(200, 2, 1000)?.iter().map(|u| problem.theta_box.from_unit(u)).collect();
    let k_p = Kernel::squared_exponential(0.1, 1.0, 2)?;
    let k_s = Kernel::matern52(1.0, 0.3, 1)?;

    let base = build_training(&problem, &obs, &DesignSpec { n: 4, n_bar: 0, d_f: 0, d_g: 2, mesh_n: 1024 })?;
    let gp = ConditionedGP::condition(&EmulatorModel::new(Family::Baseline, k_p.clone(), None), &problem, &obs, &base)?;
    println!(
        "baseline N=4: avg variance {:.3e}, rmse at θ† {:.3e}",
        avg_emulator_variance(&gp, &points)?,
        emulator_rmse(&gp, &theta_true, &oracle)?
    );

    let model = EmulatorModel::new(Family::PdeConstrained, k_p, Some(k_s));
    println!("{:>4} {:>4} {:>14} {:>14} {:>8}", "N̄", "d_f", "avg variance", "rmse at θ†", "jitter");
    for (n_bar, d_f) in [(10, 2), (10, 5), (10, 10), (10, 20), (2, 20), (40, 20)] {
        let t = build_training(&problem, &obs, &DesignSpec { n: 4, n_bar, d_f, d_g: 2, mesh_n: 1024 })?;
        let gp = ConditionedGP::condition(&model, &problem, &obs, &t)?;
        println!(
            "{n_bar:>4} {d_f:>4} {:>14.3e} {:>14.3e} {:>8.0e}",
            avg_emulator_variance(&gp, &points)?,
            emulator_rmse(&gp, &theta_true, &oracle)?,
            gp.jitter_used()
        );
    }
    Ok(())
}
