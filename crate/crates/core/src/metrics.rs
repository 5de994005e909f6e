//! Grid densities, Hellinger distances and emulator accuracy summaries.

use serde::{Deserialize, Serialize};

use crate::emulator::ConditionedGP;
use crate::error::{Error, Result};
use crate::pde::ForwardModel;

/// Density values on a rectangular lattice (1-d or 2-d). Values are stored
/// with the first axis varying slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub normalized: bool,
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { axis[0] } else { axis[i - 1] };
            let hi = if i + 1 == n { axis[n - 1] } else { axis[i + 1] };
            0.5 * (hi - lo)
        })
        .collect()
}

impl GridDensity {
    /// All lattice points in storage order.
    pub fn lattice(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
        match axes.len() {
            1 => axes[0].iter().map(|x| vec![*x]).collect(),
            2 => axes[0]
                .iter()
                .flat_map(|a| axes[1].iter().map(move |b| vec![*a, *b]))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Unnormalized density from values on the lattice.
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::Capability("grid densities are 1-d or 2-d".into()));
        }
        let size: usize = axes.iter().map(Vec::len).product();
        if values.len() != size {
            return Err(Error::input("grid values do not match the lattice size"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::input("grid density values must be finite and non-negative"));
        }
        Ok(GridDensity {
            axes,
            values,
            normalized: false,
        })
    }

    /// Normalized density from unnormalized log values.
    pub fn from_log_values(axes: Vec<Vec<f64>>, logs: Vec<f64>) -> Result<Self> {
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Numerical("log density is not finite anywhere on the grid".into()));
        }
        let values = logs.iter().map(|l| (l - max).exp()).collect();
        let mut g = GridDensity::new(axes, values)?;
        g.normalize()?;
        Ok(g)
    }

    pub fn weights(&self) -> Vec<f64> {
        let w: Vec<Vec<f64>> = self.axes.iter().map(|a| trapezoid_weights(a)).collect();
        match w.len() {
            1 => w[0].clone(),
            _ => w[0]
                .iter()
                .flat_map(|a| w[1].iter().map(move |b| a * b))
                .collect(),
        }
    }

    /// Trapezoid integral.
    pub fn integral(&self) -> f64 {
        self.weights().iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let z = self.integral();
        if !(z > 0.0) {
            return Err(Error::Numerical("grid density has zero mass".into()));
        }
        for v in &mut self.values {
            *v /= z;
        }
        self.normalized = true;
        Ok(())
    }

    pub fn argmax(&self) -> Vec<f64> {
        let i = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map_or(0, |(i, _)| i);
        Self::lattice(&self.axes).swap_remove(i)
    }

    /// Mean and standard deviation of each coordinate.
    pub fn moments(&self) -> Vec<(f64, f64)> {
        let pts = Self::lattice(&self.axes);
        let w = self.weights();
        let z = self.integral();
        (0..self.axes.len())
            .map(|k| {
                let m: f64 = pts.iter().zip(&w).zip(&self.values).map(|((p, w), v)| p[k] * w * v).sum::<f64>() / z;
                let var: f64 = pts
                    .iter()
                    .zip(&w)
                    .zip(&self.values)
                    .map(|((p, w), v)| (p[k] - m).powi(2) * w * v)
                    .sum::<f64>()
                    / z;
                (m, var.sqrt())
            })
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.axes.len()).map(|k| format!("theta{}", k + 1)).collect();
        header.push("density".into());
        w.write_record(&header)?;
        for (p, v) in Self::lattice(&self.axes).iter().zip(&self.values) {
            let mut row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            row.push(v.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `sqrt(½ ∫ (√p − √q)²)` by the trapezoid rule on the shared grid.
pub fn hellinger(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    if p.axes != q.axes {
        return Err(Error::input("Hellinger distance needs identical grids"));
    }
    if !p.normalized || !q.normalized {
        return Err(Error::input("Hellinger distance needs normalized densities"));
    }
    let s: f64 = p
        .weights()
        .iter()
        .zip(p.values.iter().zip(&q.values))
        .map(|(w, (a, b))| w * (a.sqrt() - b.sqrt()).powi(2))
        .sum();
    Ok((0.5 * s).sqrt().min(1.0))
}

/// Mean over `points` of `trace(K_N(θ, θ)) / d_out`.
pub fn avg_emulator_variance(gp: &ConditionedGP, points: &[Vec<f64>]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::input("average variance needs at least one point"));
    }
    let mut total = 0.0;
    for p in points {
        total += gp.predict_cov(p, p)?.trace() / gp.d_out() as f64;
    }
    Ok(total / points.len() as f64)
}

/// Root-mean-square difference between the emulator mean and `oracle`.
pub fn emulator_rmse(gp: &ConditionedGP, theta: &[f64], oracle: &dyn ForwardModel) -> Result<f64> {
    let d = gp.predict_mean(theta)? - oracle.eval(theta)?;
    Ok((d.norm_squared() / d.len() as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    /// Samples outside `[edges[0], edges[bins]]`, excluded from the density.
    pub outside: usize,
}

/// Normalized histogram of one coordinate of `samples` over `[lo, hi]`.
pub fn marginal_hist(samples: &[Vec<f64>], coord: usize, bins: usize, lo: f64, hi: f64) -> Result<Histogram> {
    if bins < 10 {
        return Err(Error::input("histograms need at least 10 bins"));
    }
    if !(hi > lo) {
        return Err(Error::input("histogram range must satisfy lo < hi"));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut outside = 0;
    for s in samples {
        let v = *s
            .get(coord)
            .ok_or_else(|| Error::input(format!("sample has no coordinate {coord}")))?;
        if v < lo || v > hi || !v.is_finite() {
            outside += 1;
            continue;
        }
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let inside = samples.len() - outside;
    if inside == 0 {
        return Err(Error::input("no samples inside the histogram range"));
    }
    Ok(Histogram {
        edges: (0..=bins).map(|i| lo + i as f64 * width).collect(),
        density: counts
            .iter()
            .map(|c| *c as f64 / (inside as f64 * width))
            .collect(),
        outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(mu: f64, n: usize) -> GridDensity {
        let axis: Vec<f64> = (0..n).map(|i| -8.0 + 17.0 * i as f64 / (n - 1) as f64).collect();
        let logs = axis.iter().map(|x| -0.5 * (x - mu) * (x - mu)).collect();
        GridDensity::from_log_values(vec![axis], logs).unwrap()
    }

    #[test]
    fn hellinger_of_unit_gaussians() {
        let h = hellinger(&gaussian(0.0, 20001), &gaussian(1.0, 20001)).unwrap();
        let exact = (1.0 - (-1.0f64 / 8.0).exp()).sqrt();
        assert!((h - exact).abs() < 1e-6, "{h} vs {exact}");
    }

    #[test]
    fn hellinger_identity_and_disjoint() {
        let g = gaussian(0.3, 501);
        assert_eq!(hellinger(&g, &g).unwrap(), 0.0);
        let axis: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let a: Vec<f64> = axis.iter().map(|x| if *x < 0.5 { 1.0 } else { 0.0 }).collect();
        let b: Vec<f64> = axis.iter().map(|x| if *x > 0.5 { 1.0 } else { 0.0 }).collect();
        let mut p = GridDensity::new(vec![axis.clone()], a).unwrap();
        let mut q = GridDensity::new(vec![axis], b).unwrap();
        p.normalize().unwrap();
        q.normalize().unwrap();
        assert!((hellinger(&p, &q).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grid_mismatch_rejected() {
        assert!(hellinger(&gaussian(0.0, 101), &gaussian(0.0, 103)).is_err());
    }

    #[test]
    fn two_dimensional_normalization() {
        let ax: Vec<f64> = (0..=50).map(|i| -1.0 + i as f64 / 25.0).collect();
        let axes = vec![ax.clone(), ax];
        let logs = GridDensity::lattice(&axes).iter().map(|p| -(p[0] * p[0] + 2.0 * p[1] * p[1])).collect();
        let g = GridDensity::from_log_values(axes, logs).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-12);
        assert_eq!(g.argmax(), vec![0.0, 0.0]);
    }

    #[test]
    fn histogram_normalization_and_mode() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let d = Normal::new(0.3, 0.1).unwrap();
        let s: Vec<Vec<f64>> = (0..20000).map(|_| vec![d.sample(&mut rng)]).collect();
        let h = marginal_hist(&s, 0, 40, -1.0, 1.0).unwrap();
        let w = h.edges[1] - h.edges[0];
        assert!((h.density.iter().sum::<f64>() * w - 1.0).abs() < 1e-10);
        let mode = h
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(h.edges[mode] <= 0.3 + w && h.edges[mode + 1] >= 0.3 - w);
        assert!(marginal_hist(&s, 0, 5, -1.0, 1.0).is_err());
    }
}
