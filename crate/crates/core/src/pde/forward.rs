use nalgebra::{DMatrix, DVector};

use super::{BoundaryKind, DiffusionField, ObservationOperator, PdeProblem};
use crate::error::{Error, Result};

/// Parameter-to-observation map `G(θ)` with its Jacobian.
pub trait ForwardModel: Send + Sync {
    fn dim_theta(&self) -> usize;
    fn d_y(&self) -> usize;
    fn eval(&self, theta: &[f64]) -> Result<DVector<f64>>;
    /// `d_y × d_θ` Jacobian.
    fn jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>>;
}

/// `G` through the reference solver; the Jacobian uses central differences.
#[derive(Clone, Debug)]
pub struct SolverForward {
    pub problem: PdeProblem,
    pub observation: ObservationOperator,
    pub mesh_n: usize,
}

impl ForwardModel for SolverForward {
    fn dim_theta(&self) -> usize {
        self.problem.dim_theta()
    }

    fn d_y(&self) -> usize {
        self.observation.d_y()
    }

    fn eval(&self, theta: &[f64]) -> Result<DVector<f64>> {
        super::forward_map(&self.problem, &self.observation, theta, self.mesh_n)
    }

    fn jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.dim_theta();
        let mut jac = DMatrix::zeros(self.d_y(), d);
        let b = &self.problem.theta_box;
        for i in 0..d {
            let h = 1e-6;
            let mut tp = theta.to_vec();
            let mut tm = theta.to_vec();
            tp[i] = (theta[i] + h).min(b.upper[i]);
            tm[i] = (theta[i] - h).max(b.lower[i]);
            let col = (self.eval(&tp)? - self.eval(&tm)?) / (tp[i] - tm[i]);
            jac.set_column(i, &col);
        }
        Ok(jac)
    }
}

/// Exact `G` for `-(e^θ u')' = 1`, `u(0) = u(1) = 0`:
/// `u(x) = (x - x²) / (2 e^θ)`.
#[derive(Clone, Debug)]
pub struct ClosedFormConstantDiffusion {
    base: DVector<f64>,
}

impl ClosedFormConstantDiffusion {
    pub fn new(problem: &PdeProblem, observation: &ObservationOperator) -> Result<Self> {
        let matches = problem.spatial_dim == 1
            && problem.diffusion == DiffusionField::Constant
            && problem.source.constant == 1.0
            && problem.source.gradient.iter().all(|g| *g == 0.0)
            && problem
                .boundary
                .iter()
                .all(|b| b.kind == BoundaryKind::Dirichlet && b.value == 0.0);
        if !matches {
            return Err(Error::Capability(
                "closed-form forward map needs -(e^θ u')' = 1 with zero Dirichlet data".into(),
            ));
        }
        observation.validate(problem)?;
        let q = |x: f64| 0.5 * x * x - x * x * x / 3.0;
        let base = match observation {
            ObservationOperator::Pointwise { points } => {
                DVector::from_iterator(points.len(), points.iter().map(|p| 0.5 * (p[0] - p[0] * p[0])))
            }
            ObservationOperator::LocalAverage { intervals } => DVector::from_iterator(
                intervals.len(),
                intervals.iter().map(|iv| 0.5 * (q(iv[1]) - q(iv[0]))),
            ),
        };
        Ok(ClosedFormConstantDiffusion { base })
    }
}

impl ForwardModel for ClosedFormConstantDiffusion {
    fn dim_theta(&self) -> usize {
        1
    }

    fn d_y(&self) -> usize {
        self.base.len()
    }

    fn eval(&self, theta: &[f64]) -> Result<DVector<f64>> {
        Ok(&self.base * (-theta[0]).exp())
    }

    fn jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::from_column_slice(
            self.base.len(),
            1,
            (&self.base * -(-theta[0]).exp()).as_slice(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_agrees_with_solver() {
        let p = PdeProblem::constant_diffusion();
        for obs in [
            ObservationOperator::uniform_points(5),
            ObservationOperator::uniform_intervals(4),
        ] {
            let cf = ClosedFormConstantDiffusion::new(&p, &obs).unwrap();
            let sv = SolverForward {
                problem: p.clone(),
                observation: obs,
                mesh_n: 1024,
            };
            let th = [0.314];
            assert!((cf.eval(&th).unwrap() - sv.eval(&th).unwrap()).amax() < 1e-6);
            assert!((cf.jacobian(&th).unwrap() - sv.jacobian(&th).unwrap()).amax() < 1e-5);
        }
    }

    #[test]
    fn closed_form_refuses_other_problems() {
        let p = PdeProblem::linear_source_1d(DiffusionField::four_cell());
        let obs = ObservationOperator::uniform_points(3);
        assert!(ClosedFormConstantDiffusion::new(&p, &obs).is_err());
    }
}
