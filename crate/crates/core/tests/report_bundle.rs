use std::fs;
use std::path::{Path, PathBuf};

use pdegp::config::ExperimentConfig;
use pdegp::experiment::{run, RunOptions};
use pdegp::report::report;
use pdegp::Error;

fn config(out: &Path, body: &str) -> ExperimentConfig {
    let text = format!("{body}\n[output]\ndir = \"{}\"\nsvg = false\n", out.display());
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    cfg.validate().unwrap();
    cfg
}

const ONE_D: &str = r#"
name = "bundle-1d"
mesh_n = 256
[problem]
preset = "constant_diffusion"
[observation]
kind = "uniform_points"
d_y = 5
[data]
theta_true = [0.314]
noise_var = 1e-5
[emulator]
families = ["baseline"]
n = [1, 2, 4]
k_p = { family = "squared_exponential", variance = 0.1, lengthscale = 1.0 }
[posterior]
method = "grid"
kinds = ["mean", "marginal"]
[grid]
points_per_axis = 257
"#;

const TWO_D: &str = r#"
name = "bundle-2d"
mesh_n = 128
[problem]
preset = "linear_source"
diffusion = { kind = "pinned_cells", cells = 4 }
[observation]
kind = "uniform_points"
d_y = 6
[data]
theta_true = [0.098, 0.430]
noise_var = 1e-4
[emulator]
families = ["baseline", "potential"]
n = [4]
k_p = { family = "squared_exponential", variance = 0.1, lengthscale = 1.0 }
potential_k_p = { family = "squared_exponential", variance = 1e6, lengthscale = 0.5 }
[posterior]
method = "grid"
kinds = ["mean"]
[grid]
points_per_axis = 21
"#;

fn read_all(dir: &Path, files: &[PathBuf]) -> Vec<Vec<u8>> {
    files.iter().map(|f| fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn one_dimensional_grid_run_gives_four_figure_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), ONE_D);
    let rep = run(&cfg, &RunOptions { cache_dir: Some(tmp.path().join("cache")) }).unwrap();
    let mut files = report(&rep.out_dir, false).unwrap();
    files.sort();
    let names: Vec<String> = files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["avg_variance.csv", "densities_marginal.csv", "densities_mean.csv", "hellinger.csv"]);

    let first = read_all(&rep.out_dir, &files);
    let again = report(&rep.out_dir, false).unwrap();
    assert_eq!(first, read_all(&rep.out_dir, &again));
}

#[test]
fn svg_output_is_optional() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), ONE_D);
    let rep = run(&cfg, &RunOptions { cache_dir: Some(tmp.path().join("cache")) }).unwrap();
    let files = report(&rep.out_dir, true).unwrap();
    let svgs: Vec<_> = files.iter().filter(|f| f.extension().is_some_and(|e| e == "svg")).collect();
    assert_eq!(svgs.len(), 4);
    for f in svgs {
        let text = fs::read_to_string(rep.out_dir.join(f)).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn contour_csvs_are_rectangular_and_complete() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), TWO_D);
    let rep = run(&cfg, &RunOptions { cache_dir: Some(tmp.path().join("cache")) }).unwrap();
    let files = report(&rep.out_dir, false).unwrap();
    let contours: Vec<_> = files
        .iter()
        .filter(|f| f.file_name().unwrap().to_string_lossy().starts_with("contour_"))
        .collect();
    // Reference plus two posteriors.
    assert_eq!(contours.len(), 3);
    for f in contours {
        let mut rdr = csv::Reader::from_path(rep.out_dir.join(f)).unwrap();
        assert_eq!(rdr.headers().unwrap(), vec!["theta1", "theta2", "density"]);
        let rows: Vec<Vec<f64>> = rdr
            .records()
            .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 21 * 21);
        for (k, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), 3);
            assert!(r[2].is_finite() && r[2] >= 0.0);
            assert_eq!(r[0], rows[(k / 21) * 21][0]);
            assert_eq!(r[1], rows[k % 21][1]);
        }
    }
}

#[test]
fn identical_configs_reproduce_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run(&config(&tmp.path().join("a"), ONE_D), &RunOptions { cache_dir: Some(tmp.path().join("cache")) }).unwrap();
    let b = run(&config(&tmp.path().join("b"), ONE_D), &RunOptions::default()).unwrap();
    assert_eq!(a.files, b.files);
    assert_eq!(a.config_hash, b.config_hash);
    for f in &a.files {
        let name = f.to_string_lossy();
        if name.ends_with("timing.csv") || name.ends_with("provenance.json") || name.ends_with("config.json") {
            continue;
        }
        assert_eq!(fs::read(a.out_dir.join(f)).unwrap(), fs::read(b.out_dir.join(f)).unwrap(), "{name}");
    }
}

#[test]
fn report_without_a_run_names_the_missing_file() {
    let tmp = tempfile::tempdir().unwrap();
    match report(tmp.path(), false) {
        Err(Error::MissingArtifact(msg)) => assert!(msg.contains("manifest.json"), "{msg}"),
        other => panic!("expected a missing-artifact error, got {other:?}"),
    }
}
