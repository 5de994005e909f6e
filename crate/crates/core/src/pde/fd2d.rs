//! Vertex-centred finite volumes on the unit square. κ depends on x₁ only,
//! so x₁-faces use the harmonic mean of e^κ along the face normal and
//! x₂-faces the arithmetic mean across the face.

use super::{BoundaryKind, DiscreteSolution, PdeProblem, Segment};
use crate::error::{Error, Result};
use crate::linalg::BandedSpd;

struct Grid {
    n: usize,
    h: f64,
}

impl Grid {
    fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    fn coord(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Control-volume extent around grid line `i`.
    fn extent(&self, i: usize) -> (f64, f64) {
        let c = self.coord(i);
        ((c - 0.5 * self.h).max(0.0), (c + 0.5 * self.h).min(1.0))
    }

    /// Conductance between `(i, j)` and `(i + 1, j)`.
    fn east(&self, p: &PdeProblem, theta: &[f64], i: usize, j: usize) -> f64 {
        let (y0, y1) = self.extent(j);
        let resist = p
            .diffusion
            .integrate_exp(self.coord(i), self.coord(i + 1), theta, -1.0);
        (y1 - y0) / resist
    }

    /// Conductance between `(i, j)` and `(i, j + 1)`.
    fn north(&self, p: &PdeProblem, theta: &[f64], i: usize) -> f64 {
        let (x0, x1) = self.extent(i);
        p.diffusion.integrate_exp(x0, x1, theta, 1.0) / self.h
    }
}

pub(super) fn solve(problem: &PdeProblem, theta: &[f64], n: usize) -> Result<DiscreteSolution> {
    if problem
        .boundary
        .iter()
        .all(|b| b.kind == BoundaryKind::Neumann)
    {
        return Err(Error::Numerical(
            "pure Neumann data leaves the 2D solution undetermined".into(),
        ));
    }
    let grid = Grid {
        n,
        h: 1.0 / n as f64,
    };
    let size = (n + 1) * (n + 1);
    let mut dirichlet: Vec<Option<f64>> = vec![None; size];
    for j in 0..=n {
        for i in 0..=n {
            let x = [grid.coord(i), grid.coord(j)];
            if let Some(bc) = problem.condition_at(&x) {
                if bc.kind == BoundaryKind::Dirichlet {
                    dirichlet[grid.idx(i, j)] = Some(bc.value);
                }
            }
        }
    }

    let mut a = BandedSpd::zeros(size, n + 1);
    let mut rhs = vec![0.0; size];
    let couple = |a: &mut BandedSpd, rhs: &mut [f64], p: usize, q: usize, c: f64| {
        match (dirichlet[p], dirichlet[q]) {
            (None, None) => {
                a.add(p, p, c);
                a.add(q, q, c);
                a.add(p, q, -c);
            }
            (None, Some(g)) => {
                a.add(p, p, c);
                rhs[p] += c * g;
            }
            (Some(g), None) => {
                a.add(q, q, c);
                rhs[q] += c * g;
            }
            (Some(_), Some(_)) => {}
        }
    };
    for j in 0..=n {
        for i in 0..=n {
            let p = grid.idx(i, j);
            if i < n {
                let c = grid.east(problem, theta, i, j);
                couple(&mut a, &mut rhs, p, grid.idx(i + 1, j), c);
            }
            if j < n {
                let c = grid.north(problem, theta, i);
                couple(&mut a, &mut rhs, p, grid.idx(i, j + 1), c);
            }
        }
    }

    for j in 0..=n {
        for i in 0..=n {
            let p = grid.idx(i, j);
            if let Some(g) = dirichlet[p] {
                a.add(p, p, 1.0);
                rhs[p] = g;
                continue;
            }
            let (x0, x1) = grid.extent(i);
            let (y0, y1) = grid.extent(j);
            let centroid = [0.5 * (x0 + x1), 0.5 * (y0 + y1)];
            rhs[p] += (x1 - x0) * (y1 - y0) * problem.source.eval(&centroid);
            // Prescribed normal derivatives g enter through the boundary
            // faces as ∓ g ∫ e^κ, with the sign of the outward normal.
            let x = [grid.coord(i), grid.coord(j)];
            for seg in problem.segments() {
                if !seg.contains(&x) {
                    continue;
                }
                let bc = problem.condition_on(*seg);
                if bc.kind != BoundaryKind::Neumann {
                    continue;
                }
                let flux = match seg {
                    Segment::Left => problem.diffusion.kappa(0.0, theta).exp() * (y1 - y0),
                    Segment::Right => problem.diffusion.kappa(1.0, theta).exp() * (y1 - y0),
                    Segment::Bottom | Segment::Top => {
                        problem.diffusion.integrate_exp(x0, x1, theta, 1.0)
                    }
                };
                let outward = match seg {
                    Segment::Left | Segment::Bottom => -1.0,
                    Segment::Right | Segment::Top => 1.0,
                };
                rhs[p] += outward * bc.value * flux;
            }
        }
    }

    a.solve(&mut rhs).map_err(|e| e.context("2D solve"))?;
    Ok(DiscreteSolution::TwoD { n, values: rhs })
}

/// Discrete flux `-∫ e^κ ∂u/∂x₁ dx₂` through the first column of faces
/// next to the `Left` or `Right` side.
pub fn boundary_flux_x1(
    problem: &PdeProblem,
    theta: &[f64],
    sol: &DiscreteSolution,
    side: Segment,
) -> Result<f64> {
    let DiscreteSolution::TwoD { n, values } = sol else {
        return Err(Error::input("boundary flux needs a 2D solution"));
    };
    let n = *n;
    let grid = Grid {
        n,
        h: 1.0 / n as f64,
    };
    let i = match side {
        Segment::Left => 0,
        Segment::Right => n - 1,
        _ => return Err(Error::input("x₁-flux is defined on Left or Right")),
    };
    Ok((0..=n)
        .map(|j| {
            grid.east(problem, theta, i, j)
                * (values[grid.idx(i, j)] - values[grid.idx(i + 1, j)])
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{BoundaryCondition, DiffusionField, Source};

    #[test]
    fn homogeneous_flow_cell_is_linear() {
        let p = PdeProblem::flow_cell(DiffusionField::Constant);
        let sol = p.solve_reference(&[0.0], 64).unwrap();
        for &(x1, x2) in &[(0.1, 0.2), (0.5, 0.5), (0.73, 0.91)] {
            assert!((sol.eval(&[x1, x2]) - (1.0 - x1)).abs() < 1e-10);
        }
    }

    #[test]
    fn flux_is_conserved_across_the_cell() {
        let p = PdeProblem::flow_cell(DiffusionField::four_cell());
        let th = [0.4, -0.6];
        let sol = p.solve_reference(&th, 40).unwrap();
        let fl = boundary_flux_x1(&p, &th, &sol, Segment::Left).unwrap();
        let fr = boundary_flux_x1(&p, &th, &sol, Segment::Right).unwrap();
        assert!(fl > 0.0);
        assert!((fl - fr).abs() < 1e-9 * fl.abs());
        // Layered medium: effective conductance is the harmonic mean.
        let expect = 1.0 / p.diffusion.integrate_exp(0.0, 1.0, &th, -1.0);
        assert!((fl - expect).abs() < 1e-10);
    }

    #[test]
    fn layered_medium_matches_one_dimensional_profile() {
        let p = PdeProblem::flow_cell(DiffusionField::four_cell());
        let th = [0.4, -0.6];
        let sol = p.solve_reference(&th, 40).unwrap();
        let total = p.diffusion.integrate_exp(0.0, 1.0, &th, -1.0);
        for &(x1, x2) in &[(0.1, 0.3), (0.375, 0.0), (0.6, 1.0), (0.9, 0.55)] {
            let exact = 1.0 - p.diffusion.integrate_exp(0.0, x1, &th, -1.0) / total;
            assert!((sol.eval(&[x1, x2]) - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn neumann_data_and_source_are_consistent() {
        // -Δu = 1 with u = 0 at x₂ = 0, ∂u/∂x₂ = 0.5 at x₂ = 1 and no flux
        // on the sides: u = 1.5 x₂ - x₂²/2.
        let mut p = PdeProblem::flow_cell(DiffusionField::Constant);
        p.source = Source::constant(1.0);
        let bc = |segment, kind, value| BoundaryCondition {
            segment,
            kind,
            value,
        };
        p.boundary = vec![
            bc(Segment::Left, BoundaryKind::Neumann, 0.0),
            bc(Segment::Right, BoundaryKind::Neumann, 0.0),
            bc(Segment::Bottom, BoundaryKind::Dirichlet, 0.0),
            bc(Segment::Top, BoundaryKind::Neumann, 0.5),
        ];
        let sol = p.solve_reference(&[0.0], 32).unwrap();
        for &(x1, x2) in &[(0.25, 0.25), (0.5, 0.5), (0.0, 1.0)] {
            let exact = 1.5 * x2 - 0.5 * x2 * x2;
            assert!((sol.eval(&[x1, x2]) - exact).abs() < 1e-10, "{x1} {x2}");
        }
    }
}
