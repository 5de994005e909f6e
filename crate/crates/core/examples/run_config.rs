//! Run a TOML experiment and build its figures, the library route behind
//! `pdegp run`.
//!
//!     cargo run --release --example run_config -- crates/core/configs/constant_diffusion_hellinger.toml

use std::path::Path;

use pdegp::config::ExperimentConfig;
use pdegp::experiment::{run, RunOptions};
use pdegp::report::report;

fn main() -> pdegp::Result<()> {
    let path = std::env::args().nth(1).expect("usage: run_config <config.toml>");
    let cfg = ExperimentConfig::load(Path::new(&path))?;
    cfg.validate()?;
    for (field, value) in cfg.defaults_applied() {
        println!("default {field} = {value}");
    }
    let rep = run(&cfg, &RunOptions::default())?;
    println!("config hash {}", rep.config_hash);
    for m in &rep.metrics {
        if ["hellinger", "distance_to_truth", "avg_variance", "acceptance_rate"].contains(&m.metric.as_str()) {
            println!("{:<40} {:<9} {:<18} {:.4e}", m.variant, m.form, m.metric, m.value);
        }
    }
    let figures = report(&rep.out_dir, cfg.svg())?;
    println!("{} files in {}, {} figure files", rep.files.len(), rep.out_dir.display(), figures.len());
    Ok(())
}
