//! Pilot runs that pick a MALA step per posterior so the acceptance rate
//! lands near 0.57, printed as a `[sampler.overrides]` table.
//!
//!     cargo run --release --example tune_mala_step -- crates/core/configs/piecewise_kappa.toml [pilot_len]

use std::sync::Arc;

use pdegp::config::ExperimentConfig;
use pdegp::experiment::{variants, RunOptions, Setup};
use pdegp::mcmc::{mala_run, MalaConfig};
use pdegp::posterior::LogDensity;

const TARGET: f64 = 0.57;

fn tune(target: &dyn LogDensity, init: &[f64], start: f64, pilot: usize) -> (f64, f64) {
    // Warm up so the pilots start near the mode.
    let warm = MalaConfig {
        step: start,
        n_samples: pilot,
        burn_in: pilot - 1,
        seed: 3,
        init: init.to_vec(),
    };
    let init = mala_run(target, &warm, "warm-up").map_or(init.to_vec(), |c| c.samples[0].clone());
    let (mut lo, mut hi) = (f64::NAN, f64::NAN);
    let mut step = start;
    let mut best = (step, f64::INFINITY);
    for _ in 0..12 {
        let cfg = MalaConfig {
            step,
            n_samples: pilot,
            burn_in: 0,
            seed: 7,
            init: init.clone(),
        };
        let rate = mala_run(target, &cfg, "pilot").map_or(0.0, |c| c.acceptance_rate);
        if (rate - TARGET).abs() < (best.1 - TARGET).abs() {
            best = (step, rate);
        }
        if (rate - TARGET).abs() < 0.04 {
            break;
        }
        if rate > TARGET {
            lo = step;
        } else {
            hi = step;
        }
        step = match (lo.is_nan(), hi.is_nan()) {
            (false, false) => (lo * hi).sqrt(),
            (false, true) => step * 4.0,
            _ => step / 4.0,
        };
    }
    best
}

fn main() -> pdegp::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let path = args.get(1).expect("usage: tune_mala_step <config> [pilot_len]");
    let pilot: usize = args.get(2).map_or(4000, |s| s.parse().expect("pilot_len is an integer"));
    let cfg = ExperimentConfig::load(path.as_ref())?;
    let setup = Setup::new(&cfg, &RunOptions::default())?;
    let base = cfg.sampler.as_ref().map_or(1e-4, |s| s.step);

    println!("[sampler.overrides]");
    if let Some(r) = setup.reference()? {
        let (s, a) = tune(&r, &setup.mala_config("reference")?.init, base, pilot);
        println!("\"reference\" = {{ step = {s:.2e} }}  # acceptance {a:.2}");
    }
    for v in variants(&cfg) {
        let gp = Arc::new(setup.emulator(&v)?);
        for &form in &cfg.posterior.kinds {
            let ap = setup.posterior(gp.clone(), form)?;
            let key = format!("{}/{}", v.id, form.as_str());
            let (s, a) = tune(&ap, &setup.mala_config(&key)?.init, base, pilot);
            println!("\"{key}\" = {{ step = {s:.2e} }}  # acceptance {a:.2}");
        }
    }
    Ok(())
}
