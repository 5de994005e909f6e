//! Per-call costs: reference solve, emulator mean, offline weights and one
//! MALA step per posterior.
//!
//!     cargo run --release --example timings -- crates/core/configs/timings.toml

use std::path::Path;

use pdegp::config::ExperimentConfig;
use pdegp::experiment::{timings, RunOptions};

fn main() -> pdegp::Result<()> {
    let path = std::env::args().nth(1).expect("usage: timings <config.toml>");
    let cfg = ExperimentConfig::load(Path::new(&path))?;
    cfg.validate()?;
    let table = timings(&cfg, &RunOptions::default())?;
    let solve = table.get("reference", "G_X").unwrap_or(f64::NAN);
    println!("{:<48} {:<11} {:>12} {:>10}", "item", "quantity", "seconds", "solve / t");
    for r in &table.rows {
        println!("{:<48} {:<11} {:>12.3e} {:>10.1}", r.item, r.quantity, r.seconds, solve / r.seconds);
    }
    Ok(())
}
