//! MALA on the marginal posterior of a PDE-constrained emulator for the
//! four-cell problem, with chain diagnostics.
//!
//!     cargo run --release --example mala_sampling [samples] [out.csv]

use std::sync::Arc;

use pdegp::design::{build_training, DesignSpec};
use pdegp::emulator::{ConditionedGP, EmulatorModel, Family};
use pdegp::kernels::Kernel;
use pdegp::mcmc::{diagnostics, mala_run, MalaConfig};
use pdegp::pde::{make_data, DiffusionField, ObservationOperator, PdeProblem};
use pdegp::posterior::{ApproxPosterior, PosteriorKind, SmoothedUniformPrior};

fn main() -> pdegp::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples: usize = args.next().map_or(20_000, |s| s.parse().expect("samples is an integer"));
    let out = args.next();

    let problem = PdeProblem::linear_source_1d(DiffusionField::four_cell());
    let obs = ObservationOperator::uniform_points(6);
    let theta_true = [0.098, 0.430];
    let data = make_data(&problem, &obs, &theta_true, 1e-4, 1, 1024)?;
    let training = build_training(&problem, &obs, &DesignSpec { n: 4, n_bar: 10, d_f: 20, d_g: 2, mesh_n: 1024 })?;
    let model = EmulatorModel::new(
        Family::PdeConstrained,
        Kernel::squared_exponential(0.1, 1.0, 2)?,
        Some(Kernel::matern52(1.0, 0.3, 1)?),
    );
    let gp = Arc::new(ConditionedGP::condition(&model, &problem, &obs, &training)?);
    let prior = SmoothedUniformPrior::new(problem.theta_box.clone(), 1e-3)?;
    let target = ApproxPosterior::emulated(PosteriorKind::MarginalForward, gp, &data, prior)?;

    let cfg = MalaConfig { step: 1.28e-2, n_samples: samples, burn_in: samples / 10, seed: 1, init: vec![0.0, 0.0] };
    let chain = mala_run(&target, &cfg, "mala_sampling example")?;
    let diag = diagnostics(&chain)?;
    println!("acceptance {:.3}, {:.1} µs per sample", chain.acceptance_rate, chain.per_sample_seconds * 1e6);
    for (k, c) in diag.coords.iter().enumerate() {
        println!(
            "θ{}: mean {:.4} (true {:.3}), sd {:.4}, τ {:.1}, ESS {:.0}",
            k + 1,
            c.mean,
            theta_true[k],
            c.sd,
            c.tau,
            c.ess
        );
    }
    if let Some(path) = out {
        chain.write_samples(std::fs::File::create(&path)?)?;
        println!("samples written to {path}");
    }
    Ok(())
}
