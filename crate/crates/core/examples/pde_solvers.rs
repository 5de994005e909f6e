//! The reference solvers: P1 finite elements in 1D and vertex-centred
//! finite volumes on the flow cell.
//!
//!     cargo run --release --example pde_solvers [out_dir]
//!
//! With `out_dir`, the solutions are also written there as CSV.

use std::fs::File;
use std::path::PathBuf;

use pdegp::pde::{boundary_flux_x1, DiffusionField, KlExpansion, ObservationOperator, PdeProblem, Segment};

fn main() -> pdegp::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir)?;
    }

    // u(x) = (x - x²) / (2 e^θ) for constant diffusion.
    let p = PdeProblem::constant_diffusion();
    let theta = 0.314;
    println!("constant diffusion, θ = {theta}: max nodal error by mesh size");
    for n in [16, 64, 256, 1024] {
        let sol = p.solve_reference(&[theta], n)?;
        let err = (0..=200)
            .map(|i| {
                let x = i as f64 / 200.0;
                (sol.eval(&[x]) - (x - x * x) / (2.0 * theta.exp())).abs()
            })
            .fold(0.0, f64::max);
        println!("  n = {n:>5}  {err:.3e}");
    }

    let cases = [
        ("four_cell", PdeProblem::linear_source_1d(DiffusionField::four_cell()), vec![0.098, 0.430]),
        (
            "expansion",
            PdeProblem::linear_source_1d(DiffusionField::Expansion(KlExpansion::new(2)?)),
            vec![0.5, -0.5],
        ),
    ];
    let obs = ObservationOperator::uniform_points(6);
    for (name, p, theta) in &cases {
        let sol = p.solve_reference(theta, 1024)?;
        println!("{name}, θ = {theta:?}: G(θ) = {:.4?}", obs.observe(&sol)?);
        if let Some(dir) = &out {
            sol.write_csv(File::create(dir.join(format!("{name}.csv")))?)?;
        }
    }

    let p = PdeProblem::flow_cell(DiffusionField::four_cell());
    let theta = [0.098, 0.430];
    let sol = p.solve_reference(&theta, 64)?;
    let inflow = boundary_flux_x1(&p, &theta, &sol, Segment::Left)?;
    let outflow = boundary_flux_x1(&p, &theta, &sol, Segment::Right)?;
    println!("flow cell, θ = {theta:?}: u(0.5, 0.5) = {:.4}", sol.eval(&[0.5, 0.5]));
    println!("  flux through x₁ = 0: {inflow:.6}, through x₁ = 1: {outflow:.6}");
    if let Some(dir) = &out {
        sol.write_csv(File::create(dir.join("flow_cell.csv"))?)?;
    }
    Ok(())
}
