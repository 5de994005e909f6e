use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pdegp::config::{ExperimentConfig, Overrides};
use pdegp::experiment::{run, timings, RunOptions};
use pdegp::report::report;

#[derive(Parser)]
#[command(name = "pdegp", version, about = "GP-emulated Bayesian inversion of PDE parameters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the data and sampler seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Training-set cache directory (also read from PDEGP_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Reference solver resolution.
    #[arg(long, global = true)]
    mesh_n: Option<usize>,
    /// Number of MALA iterations per chain.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Skip SVG output.
    #[arg(long, global = true)]
    no_svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its figure bundle.
    Run { config: PathBuf },
    /// Measure per-call costs for an experiment's emulators.
    Timings { config: PathBuf },
    /// Regenerate figures from a finished run directory.
    Report { dir: PathBuf },
}

fn load(cli: &Cli, path: &PathBuf) -> pdegp::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(&Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        mesh_n: cli.mesh_n,
        samples: cli.samples,
        no_svg: cli.no_svg,
    });
    cfg.validate()?;
    Ok(cfg)
}

fn main_inner(cli: &Cli) -> pdegp::Result<()> {
    let opts = RunOptions {
        cache_dir: cli.cache_dir.clone(),
    };
    match &cli.command {
        Command::Run { config } => {
            let cfg = load(cli, config)?;
            let rep = run(&cfg, &opts)?;
            let figs = report(&rep.out_dir, cfg.svg())?;
            println!("config {}", rep.config_hash);
            println!("wrote {} files and {} figures to {}", rep.files.len(), figs.len(), rep.out_dir.display());
        }
        Command::Timings { config } => {
            let cfg = load(cli, config)?;
            let t = timings(&cfg, &opts)?;
            println!("{:<48} {:<12} {:>12}", "item", "quantity", "seconds");
            for r in &t.rows {
                println!("{:<48} {:<12} {:>12.3e}", r.item, r.quantity, r.seconds);
            }
        }
        Command::Report { dir } => {
            for f in report(dir, !cli.no_svg)? {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
