//! Halton designs and emulator training sets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::{forward_map, ObservationOperator, PdeProblem, Segment};

const PRIMES: [u64; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Elements `skip .. skip + n` of the Halton sequence in `[0, 1]^dim`.
pub fn halton(n: usize, dim: usize, skip: usize) -> Result<Vec<Vec<f64>>> {
    if dim == 0 || dim > PRIMES.len() {
        return Err(Error::input(format!(
            "Halton dimension must be in 1..={}",
            PRIMES.len()
        )));
    }
    Ok((skip..skip + n)
        .map(|i| {
            PRIMES[..dim]
                .iter()
                .map(|&b| radical_inverse(i as u64, b))
                .collect()
        })
        .collect())
}

/// Sizes of a training design; `n_bar`, `d_f`, `d_g` only matter for the
/// PDE-constrained emulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub n: usize,
    #[serde(default)]
    pub n_bar: usize,
    #[serde(default)]
    pub d_f: usize,
    #[serde(default)]
    pub d_g: usize,
    pub mesh_n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub design: String,
    pub halton_skip: usize,
    pub mesh_n: usize,
}

/// Forward-model training values plus the PDE-side design
/// `f(Θ_f, X_f)`, `g(Θ_g, X_g)` with `Θ_f = Θ_g = theta_bar`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub theta: Vec<Vec<f64>>,
    /// `N × d_y`, row `i` is `G_X(θ^i)`.
    pub gx: Vec<Vec<f64>>,
    pub theta_bar: Vec<Vec<f64>>,
    pub xf: Vec<Vec<f64>>,
    pub xg: Vec<Vec<f64>>,
    /// `N̄ × d_f`
    pub f_vals: Vec<Vec<f64>>,
    /// `N̄ × d_g`
    pub g_vals: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl TrainingSet {
    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn d_y(&self) -> usize {
        self.gx.first().map_or(0, Vec::len)
    }

    pub fn has_pde_blocks(&self) -> bool {
        !self.theta_bar.is_empty() && (!self.xf.is_empty() || !self.xg.is_empty())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `d_f` collocation points strictly inside κ cells.
pub fn collocation_points(
    problem: &PdeProblem,
    d_f: usize,
    skip: usize,
) -> Result<Vec<Vec<f64>>> {
    let interfaces = problem.diffusion.interfaces();
    let (raw, delta): (Vec<Vec<f64>>, f64) = if problem.spatial_dim == 1 {
        let h = 1.0 / (d_f + 1) as f64;
        ((1..=d_f).map(|j| vec![j as f64 * h]).collect(), 0.5 * h)
    } else {
        let side = (d_f as f64).sqrt().ceil();
        (halton(d_f, 2, skip)?, 0.5 / (side + 1.0))
    };
    let mut out = raw;
    for x in &mut out {
        for &b in interfaces {
            if (x[0] - b).abs() < delta {
                x[0] = if x[0] >= b { b + delta } else { b - delta };
            }
        }
        if interfaces.iter().any(|b| (x[0] - b).abs() < 1e-3) {
            return Err(Error::input(format!(
                "cannot place collocation point {x:?} away from κ interfaces; reduce d_f"
            )));
        }
    }
    Ok(out)
}

/// Boundary points: both endpoints in 1D; `d_g / 4` equally spaced
/// interior points per side in 2D.
pub fn boundary_points(problem: &PdeProblem, d_g: usize) -> Result<Vec<Vec<f64>>> {
    if problem.spatial_dim == 1 {
        if d_g != 2 {
            return Err(Error::config(
                "emulator.d_g",
                "the 1D boundary has exactly two points; d_g must be 2",
            ));
        }
        return Ok(vec![vec![0.0], vec![1.0]]);
    }
    if d_g == 0 || d_g % 4 != 0 {
        return Err(Error::config(
            "emulator.d_g",
            "in 2D d_g must be a positive multiple of the 4 boundary sides",
        ));
    }
    let per = d_g / 4;
    let mut out = Vec::with_capacity(d_g);
    for seg in [Segment::Left, Segment::Right, Segment::Bottom, Segment::Top] {
        for j in 1..=per {
            let t = j as f64 / (per + 1) as f64;
            out.push(match seg {
                Segment::Left => vec![0.0, t],
                Segment::Right => vec![1.0, t],
                Segment::Bottom => vec![t, 0.0],
                Segment::Top => vec![t, 1.0],
            });
        }
    }
    Ok(out)
}

/// Θ is Halton elements `1..=N` mapped to the parameter box; `Θ_f = Θ_g`
/// are the following `N̄` elements.
pub fn build_training(
    problem: &PdeProblem,
    obs: &ObservationOperator,
    spec: &DesignSpec,
) -> Result<TrainingSet> {
    problem.validate()?;
    obs.validate(problem)?;
    if spec.n == 0 {
        return Err(Error::config("emulator.n", "need at least one training point"));
    }
    let d = problem.dim_theta();
    let skip = 1;
    let unit = halton(spec.n + spec.n_bar, d, skip)?;
    let mapped: Vec<Vec<f64>> = unit.iter().map(|u| problem.theta_box.from_unit(u)).collect();
    let (theta, theta_bar) = mapped.split_at(spec.n);
    let gx = theta
        .par_iter()
        .map(|t| forward_map(problem, obs, t, spec.mesh_n).map(|v| v.as_slice().to_vec()))
        .collect::<Result<Vec<_>>>()?;

    let (mut xf, mut xg, mut f_vals, mut g_vals) = (vec![], vec![], vec![], vec![]);
    if spec.n_bar > 0 {
        let obs_count = if problem.spatial_dim == 2 { obs.d_y() } else { 0 };
        xf = collocation_points(problem, spec.d_f, skip + obs_count)?;
        xg = boundary_points(problem, spec.d_g)?;
        for _ in theta_bar {
            f_vals.push(xf.iter().map(|x| problem.source.eval(x)).collect());
            g_vals.push(
                xg.iter()
                    .map(|x| problem.condition_at(x).map_or(0.0, |bc| bc.value))
                    .collect(),
            );
        }
    }
    Ok(TrainingSet {
        theta: theta.to_vec(),
        gx,
        theta_bar: theta_bar.to_vec(),
        xf,
        xg,
        f_vals,
        g_vals,
        provenance: Provenance {
            design: "halton".into(),
            halton_skip: skip,
            mesh_n: spec.mesh_n,
        },
    })
}

/// 2D observation points: the first `d_y` Halton points of the square.
pub fn halton_observation_points(d_y: usize) -> Result<ObservationOperator> {
    Ok(ObservationOperator::Pointwise {
        points: halton(d_y, 2, 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::DiffusionField;

    #[test]
    fn halton_examples() {
        let h = halton(4, 1, 1).unwrap();
        let flat: Vec<f64> = h.into_iter().flatten().collect();
        assert_eq!(flat, vec![0.5, 0.25, 0.75, 0.125]);
        let h = halton(2, 2, 1).unwrap();
        assert_eq!(h[0][0], 0.5);
        assert!((h[0][1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(h[1][0], 0.25);
        assert!((h[1][1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(halton(1, 3, 0).unwrap()[0], vec![0.0; 3]);
        assert!(halton(1, 21, 1).is_err());
    }

    #[test]
    fn single_point_is_box_centre() {
        let p = PdeProblem::constant_diffusion();
        let obs = ObservationOperator::uniform_points(5);
        let spec = DesignSpec {
            n: 1,
            n_bar: 0,
            d_f: 0,
            d_g: 0,
            mesh_n: 64,
        };
        let t = build_training(&p, &obs, &spec).unwrap();
        assert_eq!(t.theta, vec![vec![0.0]]);
    }

    #[test]
    fn pde_blocks_and_determinism() {
        let p = PdeProblem::linear_source_1d(DiffusionField::four_cell());
        let obs = ObservationOperator::uniform_points(6);
        let spec = DesignSpec {
            n: 4,
            n_bar: 10,
            d_f: 7,
            d_g: 2,
            mesh_n: 128,
        };
        let a = build_training(&p, &obs, &spec).unwrap();
        let b = build_training(&p, &obs, &spec).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.theta.len(), 4);
        assert_eq!(a.theta_bar.len(), 10);
        for t in a.theta.iter().chain(&a.theta_bar) {
            assert!(p.theta_box.contains(t));
        }
        for i in 0..a.theta.len() {
            for j in 0..i {
                assert_ne!(a.theta[i], a.theta[j]);
            }
        }
        for x in &a.xf {
            for b in p.diffusion.interfaces() {
                assert!((x[0] - b).abs() >= 1e-3);
            }
        }
        assert_eq!(a.g_vals[0], vec![0.0, 2.0]);
        assert!((a.f_vals[3][1] - 4.0 * a.xf[1][0]).abs() < 1e-15);
        let back = TrainingSet::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn d_g_must_match_the_boundary() {
        let p = PdeProblem::constant_diffusion();
        assert!(matches!(boundary_points(&p, 3), Err(Error::Config { .. })));
        let p = PdeProblem::flow_cell(DiffusionField::four_cell());
        assert_eq!(boundary_points(&p, 8).unwrap().len(), 8);
        assert!(boundary_points(&p, 6).is_err());
    }
}
