use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ObservationOperator, PdeProblem};
use crate::error::{Error, Result};

/// `G(θ) = O(u(θ))` via the reference solver.
pub fn forward_map(
    problem: &PdeProblem,
    observation: &ObservationOperator,
    theta: &[f64],
    mesh_n: usize,
) -> Result<DVector<f64>> {
    let sol = problem.solve_reference(theta, mesh_n)?;
    Ok(DVector::from_vec(observation.observe(&sol)?))
}

/// Noisy observations `y = G(θ†) + η`, `η ~ N(0, σ² I)`, with everything
/// needed to regenerate them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub y: Vec<f64>,
    pub theta_dagger: Vec<f64>,
    pub noise_var: f64,
    pub seed: u64,
    pub mesh_n: usize,
}

pub fn make_data(
    problem: &PdeProblem,
    observation: &ObservationOperator,
    theta_dagger: &[f64],
    noise_var: f64,
    seed: u64,
    mesh_n: usize,
) -> Result<SyntheticData> {
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::input("noise variance must be positive"));
    }
    observation.validate(problem)?;
    let clean = forward_map(problem, observation, theta_dagger, mesh_n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = noise_var.sqrt();
    let y = clean
        .iter()
        .map(|g| {
            let z: f64 = StandardNormal.sample(&mut rng);
            g + sd * z
        })
        .collect();
    Ok(SyntheticData {
        y,
        theta_dagger: theta_dagger.to_vec(),
        noise_var,
        seed,
        mesh_n,
    })
}

impl SyntheticData {
    pub fn y_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.y)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "y"])?;
        for (i, v) in self.y.iter().enumerate() {
            w.write_record([i.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::DiffusionField;

    #[test]
    fn same_seed_same_data() {
        let p = PdeProblem::linear_source_1d(DiffusionField::four_cell());
        let obs = ObservationOperator::uniform_points(6);
        let a = make_data(&p, &obs, &[0.098, 0.430], 1e-4, 7, 128).unwrap();
        let b = make_data(&p, &obs, &[0.098, 0.430], 1e-4, 7, 128).unwrap();
        let c = make_data(&p, &obs, &[0.098, 0.430], 1e-4, 8, 128).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.y, c.y);
    }

    #[test]
    fn noise_has_requested_variance() {
        let p = PdeProblem::constant_diffusion();
        let obs = ObservationOperator::Pointwise {
            points: (1..=2000).map(|i| vec![i as f64 / 2001.0]).collect(),
        };
        let clean = forward_map(&p, &obs, &[0.0], 64).unwrap();
        let d = make_data(&p, &obs, &[0.0], 0.01, 3, 64).unwrap();
        let r = d.y_vector() - clean;
        let var = r.dot(&r) / r.len() as f64;
        assert!((var - 0.01).abs() < 0.0015, "sample variance {var}");
    }
}
