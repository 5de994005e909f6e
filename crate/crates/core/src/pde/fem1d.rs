//! P1 finite elements on (0, 1) with κ interfaces inserted as mesh nodes.

use super::{BoundaryKind, DiscreteSolution, PdeProblem, Segment};
use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

pub(super) fn mesh(problem: &PdeProblem, n: usize) -> Vec<f64> {
    let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    for &b in problem.diffusion.interfaces() {
        if nodes.iter().all(|x| (x - b).abs() > 1e-12) {
            nodes.push(b);
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes
}

pub(super) fn solve(problem: &PdeProblem, theta: &[f64], n: usize) -> Result<DiscreteSolution> {
    let nodes = mesh(problem, n);
    let m = nodes.len();
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m - 1];
    let mut rhs = vec![0.0; m];
    // Two-point Gauss is exact for the affine source times a hat function.
    let g = 1.0 / 3f64.sqrt();
    for e in 0..m - 1 {
        let (x0, x1) = (nodes[e], nodes[e + 1]);
        let h = x1 - x0;
        let stiff = problem.diffusion.integrate_exp(x0, x1, theta, 1.0) / (h * h);
        diag[e] += stiff;
        diag[e + 1] += stiff;
        off[e] -= stiff;
        for t in [-g, g] {
            let s = 0.5 * (1.0 + t);
            let f = problem.source.eval(&[x0 + s * h]);
            rhs[e] += 0.5 * h * f * (1.0 - s);
            rhs[e + 1] += 0.5 * h * f * s;
        }
    }

    let left = problem.condition_on(Segment::Left);
    let right = problem.condition_on(Segment::Right);
    if left.kind == BoundaryKind::Neumann && right.kind == BoundaryKind::Neumann {
        return Err(Error::Numerical(
            "pure Neumann data leaves the 1D solution undetermined".into(),
        ));
    }
    // Natural boundary terms: [e^κ u' v] evaluated at the ends.
    if left.kind == BoundaryKind::Neumann {
        rhs[0] -= problem.diffusion.kappa(0.0, theta).exp() * left.value;
    }
    if right.kind == BoundaryKind::Neumann {
        rhs[m - 1] += problem.diffusion.kappa(1.0, theta).exp() * right.value;
    }

    let mut values = vec![0.0; m];
    let lo = usize::from(left.kind == BoundaryKind::Dirichlet);
    let hi = m - usize::from(right.kind == BoundaryKind::Dirichlet);
    if lo == 1 {
        values[0] = left.value;
        rhs[1] -= off[0] * left.value;
    }
    if hi == m - 1 {
        values[m - 1] = right.value;
        rhs[m - 2] -= off[m - 2] * right.value;
    }
    let mut b = rhs[lo..hi].to_vec();
    let sub = &off[lo..hi - 1];
    solve_tridiagonal(sub, &diag[lo..hi], sub, &mut b).map_err(|e| e.context("1D solve"))?;
    values[lo..hi].copy_from_slice(&b);
    Ok(DiscreteSolution::OneD { nodes, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{BoundaryCondition, DiffusionField};

    #[test]
    fn interfaces_become_nodes() {
        let p = PdeProblem::linear_source_1d(DiffusionField::pinned_cells(12));
        let nodes = mesh(&p, 20);
        for k in 1..12 {
            let b = k as f64 / 12.0;
            assert!(nodes.iter().any(|x| (x - b).abs() < 1e-12));
        }
    }

    #[test]
    fn piecewise_flux_is_constant_without_source() {
        // -(e^κ u')' = 0 gives e^κ u' constant, so u is exact on the mesh.
        let mut p = PdeProblem::linear_source_1d(DiffusionField::four_cell());
        p.source.gradient = vec![0.0];
        let th = [0.5, -0.3];
        let sol = p.solve_reference(&th, 16).unwrap();
        let resist = p.diffusion.integrate_exp(0.0, 1.0, &th, -1.0);
        let q = 2.0 / resist;
        let x = 0.6;
        let exact = q * p.diffusion.integrate_exp(0.0, x, &th, -1.0);
        assert!((sol.eval(&[x]) - exact).abs() < 1e-12);
    }

    #[test]
    fn neumann_end_matches_closed_form() {
        // -(u')' = 1, u(0) = 0, u'(1) = 0  ->  u = x - x²/2
        let mut p = PdeProblem::constant_diffusion();
        p.boundary[1] = BoundaryCondition {
            segment: Segment::Right,
            kind: BoundaryKind::Neumann,
            value: 0.0,
        };
        let sol = p.solve_reference(&[0.0], 64).unwrap();
        for &x in &[0.25, 0.5, 1.0] {
            assert!((sol.eval(&[x]) - (x - 0.5 * x * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_neumann_is_numerical_error() {
        let mut p = PdeProblem::constant_diffusion();
        for bc in &mut p.boundary {
            bc.kind = BoundaryKind::Neumann;
        }
        assert!(p.solve_reference(&[0.0], 32).is_err());
    }
}
