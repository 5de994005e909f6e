//! Condition the three forward-map emulators on four solves of the
//! constant-diffusion problem and compare their predictions with the
//! closed-form forward map.
//!
//!     cargo run --release --example gp_emulator

use pdegp::design::{build_training, DesignSpec};
use pdegp::emulator::{ConditionedGP, EmulatorModel, Family};
use pdegp::kernels::Kernel;
use pdegp::pde::{ClosedFormConstantDiffusion, ForwardModel, ObservationOperator, PdeProblem};

fn main() -> pdegp::Result<()> {
    let problem = PdeProblem::constant_diffusion();
    let obs = ObservationOperator::uniform_points(5);
    let spec = DesignSpec { n: 4, n_bar: 10, d_f: 5, d_g: 2, mesh_n: 1024 };
    let training = build_training(&problem, &obs, &spec)?;
    let exact = ClosedFormConstantDiffusion::new(&problem, &obs)?;

    let k_p = Kernel::squared_exponential(0.1, 1.0, 1)?;
    let k_s = Kernel::squared_exponential(1.0, 0.3, 1)?;
    let models = [
        EmulatorModel::new(Family::Baseline, k_p.clone(), None),
        EmulatorModel::new(Family::SpatiallyCorrelated, k_p.clone(), Some(k_s.clone())),
        EmulatorModel::new(Family::PdeConstrained, k_p, Some(k_s)),
    ];

    println!("training θ: {:?}", training.theta.iter().map(|t| t[0]).collect::<Vec<_>>());
    println!("{:<22} {:>10} {:>12} {:>12} {:>10}", "family", "θ", "max |m - G|", "max sd", "jitter");
    for m in &models {
        let gp = ConditionedGP::condition(m, &problem, &obs, &training)?;
        for theta in [-0.75, 0.0, 0.314, 0.9] {
            let g = exact.eval(&[theta])?;
            let err = (gp.predict_mean(&[theta])? - g).amax();
            let sd = gp.predict_cov(&[theta], &[theta])?.diagonal().amax().max(0.0).sqrt();
            println!(
                "{:<22} {theta:>10.3} {err:>12.3e} {sd:>12.3e} {:>10.0e}",
                format!("{:?}", m.family),
                gp.jitter_used()
            );
        }
    }
    Ok(())
}
