//! Metropolis-adjusted Langevin sampling and chain diagnostics.

use std::io::{BufRead, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::LogDensity;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MalaConfig {
    /// Time step γ.
    pub step: f64,
    /// Total number of iterations, burn-in included.
    pub n_samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub init: Vec<f64>,
}

impl MalaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::input("MALA step must be positive"));
        }
        if self.n_samples <= self.burn_in {
            return Err(Error::input("n_samples must exceed burn_in"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    /// Post burn-in states, one row per iteration.
    pub samples: Vec<Vec<f64>>,
    pub accepted: usize,
    pub proposed: usize,
    /// accepted / proposed over all iterations.
    pub acceptance_rate: f64,
    /// Proposals rejected because the target was not finite there.
    pub non_finite: usize,
    pub per_sample_seconds: f64,
    pub provenance: String,
}

/// Non-finite proposals beyond this fraction abort the run.
const MAX_NON_FINITE_FRACTION: f64 = 0.5;

fn log_q(to: &[f64], from: &[f64], grad_from: &[f64], step: f64) -> f64 {
    let s: f64 = to
        .iter()
        .zip(from)
        .zip(grad_from)
        .map(|((t, f), g)| {
            let d = t - f - step * g;
            d * d
        })
        .sum();
    -s / (4.0 * step)
}

/// Runs MALA: propose `θ' = θ + γ∇log π(θ) + √(2γ) ξ` and accept with
/// probability `min(1, π(θ')q(θ|θ') / π(θ)q(θ'|θ))`.
pub fn mala_run(target: &dyn LogDensity, cfg: &MalaConfig, provenance: &str) -> Result<Chain> {
    cfg.validate()?;
    if cfg.init.len() != target.dim() {
        return Err(Error::input(format!(
            "initial state has dimension {}, target has {}",
            cfg.init.len(),
            target.dim()
        )));
    }
    let (mut lp, mut grad) = target.log_density_and_grad(&cfg.init)?;
    if !lp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Sampler("log density or gradient not finite at the initial state".into()));
    }
    let d = cfg.init.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut theta = cfg.init.clone();
    let mut proposal = vec![0.0; d];
    let noise = (2.0 * cfg.step).sqrt();
    let mut samples = Vec::with_capacity(cfg.n_samples - cfg.burn_in);
    let (mut accepted, mut non_finite) = (0usize, 0usize);
    let start = Instant::now();
    for it in 0..cfg.n_samples {
        for k in 0..d {
            let xi: f64 = rng.sample(StandardNormal);
            proposal[k] = theta[k] + cfg.step * grad[k] + noise * xi;
        }
        let u: f64 = rng.random();
        match target.log_density_and_grad(&proposal) {
            Ok((lp_new, g_new)) if lp_new.is_finite() && g_new.iter().all(|g| g.is_finite()) => {
                let log_alpha = lp_new - lp + log_q(&theta, &proposal, &g_new, cfg.step)
                    - log_q(&proposal, &theta, &grad, cfg.step);
                if u.ln() <= log_alpha {
                    theta.copy_from_slice(&proposal);
                    lp = lp_new;
                    grad = g_new;
                    accepted += 1;
                }
            }
            _ => {
                non_finite += 1;
                let proposed = it + 1;
                if proposed >= 100 && non_finite as f64 > MAX_NON_FINITE_FRACTION * proposed as f64 {
                    return Err(Error::Sampler(format!(
                        "{non_finite} of {proposed} proposals had a non-finite target; \
                         reduce the step size or check the posterior"
                    )));
                }
            }
        }
        if it >= cfg.burn_in {
            samples.push(theta.clone());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(Chain {
        samples,
        accepted,
        proposed: cfg.n_samples,
        acceptance_rate: accepted as f64 / cfg.n_samples as f64,
        non_finite,
        per_sample_seconds: elapsed / cfg.n_samples as f64,
        provenance: provenance.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordSummary {
    pub mean: f64,
    pub sd: f64,
    /// Integrated autocorrelation time (initial positive sequence).
    pub tau: f64,
    pub ess: f64,
    /// Set when the coordinate never moved; `ess` is then 1.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n: usize,
    pub acceptance_rate: f64,
    pub coords: Vec<CoordSummary>,
}

/// Normalized autocorrelation of `x` at all lags, via FFT.
fn autocorrelation(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in &mut buf {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    buf[..n].iter().map(|c| c.re / c0).collect()
}

/// Geyer's initial positive sequence estimate of the autocorrelation time.
fn ips_tau(rho: &[f64]) -> f64 {
    let mut tau = -1.0;
    let mut k = 0;
    while 2 * k + 1 < rho.len() {
        let pair = rho[2 * k] + rho[2 * k + 1];
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 1;
    }
    tau.max(1.0 / rho.len() as f64)
}

pub fn diagnostics(chain: &Chain) -> Result<Diagnostics> {
    let n = chain.samples.len();
    if n < 100 {
        return Err(Error::input("diagnostics need at least 100 samples"));
    }
    let d = chain.samples[0].len();
    let coords = (0..d)
        .map(|k| {
            let x: Vec<f64> = chain.samples.iter().map(|s| s[k]).collect();
            let mean = x.iter().sum::<f64>() / n as f64;
            let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            if !(var > 0.0) {
                return CoordSummary {
                    mean,
                    sd: 0.0,
                    tau: n as f64,
                    ess: 1.0,
                    degenerate: true,
                };
            }
            let tau = ips_tau(&autocorrelation(&x));
            CoordSummary {
                mean,
                sd: var.sqrt(),
                tau,
                ess: n as f64 / tau,
                degenerate: false,
            }
        })
        .collect();
    Ok(Diagnostics {
        n,
        acceptance_rate: chain.acceptance_rate,
        coords,
    })
}

impl Chain {
    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.samples.len() as f64;
        (0..self.dim())
            .map(|k| self.samples.iter().map(|s| s[k]).sum::<f64>() / n)
            .collect()
    }

    /// Writes `# d_theta=<d> provenance=<hash>` followed by a CSV table with
    /// one row per sample.
    pub fn write_samples<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# d_theta={} provenance={}", self.dim(), self.provenance)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record((1..=self.dim()).map(|k| format!("theta{k}")))?;
        for s in &self.samples {
            w.write_record(s.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the samples written by [`write_samples`](Self::write_samples).
    pub fn read_samples<R: BufRead>(input: R) -> Result<Vec<Vec<f64>>> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            out.push(
                rec.iter()
                    .map(|v| v.parse::<f64>().map_err(|e| Error::input(format!("bad sample value: {e}"))))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    struct StdNormal(usize);

    impl LogDensity for StdNormal {
        fn dim(&self) -> usize {
            self.0
        }
        fn log_density(&self, t: &[f64]) -> Result<f64> {
            Ok(-0.5 * t.iter().map(|v| v * v).sum::<f64>())
        }
        fn log_density_and_grad(&self, t: &[f64]) -> Result<(f64, Vec<f64>)> {
            Ok((self.log_density(t)?, t.iter().map(|v| -v).collect()))
        }
    }

    fn chain_of(x: Vec<f64>) -> Chain {
        Chain {
            samples: x.into_iter().map(|v| vec![v]).collect(),
            accepted: 0,
            proposed: 0,
            acceptance_rate: 0.0,
            non_finite: 0,
            per_sample_seconds: 0.0,
            provenance: String::new(),
        }
    }

    #[test]
    fn same_seed_same_chain() {
        let cfg = MalaConfig {
            step: 0.5,
            n_samples: 2000,
            burn_in: 100,
            seed: 11,
            init: vec![0.5, -0.5],
        };
        let a = mala_run(&StdNormal(2), &cfg, "h").unwrap();
        let b = mala_run(&StdNormal(2), &cfg, "h").unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.accepted, b.accepted);
        assert_eq!(a.samples.len(), 1900);
    }

    #[test]
    fn tiny_step_accepts_everything() {
        let cfg = MalaConfig {
            step: 1e-12,
            n_samples: 5000,
            burn_in: 0,
            seed: 2,
            init: vec![0.1, 0.2],
        };
        let c = mala_run(&StdNormal(2), &cfg, "").unwrap();
        assert!(c.acceptance_rate > 0.999);
    }

    #[test]
    fn non_finite_targets_abort() {
        struct Cliff;
        impl LogDensity for Cliff {
            fn dim(&self) -> usize {
                1
            }
            fn log_density(&self, t: &[f64]) -> Result<f64> {
                Ok(if t[0].abs() < 1e-3 { 0.0 } else { f64::NAN })
            }
            fn log_density_and_grad(&self, t: &[f64]) -> Result<(f64, Vec<f64>)> {
                Ok((self.log_density(t)?, vec![0.0]))
            }
        }
        let cfg = MalaConfig {
            step: 1.0,
            n_samples: 1000,
            burn_in: 0,
            seed: 0,
            init: vec![0.0],
        };
        assert!(matches!(mala_run(&Cliff, &cfg, ""), Err(Error::Sampler(_))));
    }

    #[test]
    fn iid_chain_has_high_ess() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = Normal::new(3.0, 1.0).unwrap();
        let x: Vec<f64> = (0..10000).map(|_| n.sample(&mut rng)).collect();
        let d = diagnostics(&chain_of(x)).unwrap();
        assert!(d.coords[0].ess / 10000.0 > 0.8);
        assert!((d.coords[0].mean - 3.0).abs() < 0.05);
    }

    #[test]
    fn constant_chain_is_flagged() {
        let d = diagnostics(&chain_of(vec![1.5; 500])).unwrap();
        assert!(d.coords[0].degenerate);
        assert_eq!(d.coords[0].ess, 1.0);
        assert!(diagnostics(&chain_of(vec![0.0; 50])).is_err());
    }

    #[test]
    fn ar1_autocorrelation_time() {
        // AR(1) with coefficient φ has τ = (1 + φ) / (1 − φ).
        let phi: f64 = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut x = vec![0.0];
        for _ in 0..200_000 {
            let e: f64 = rng.sample(StandardNormal);
            x.push(phi * x.last().unwrap() + e);
        }
        let d = diagnostics(&chain_of(x)).unwrap();
        assert!((d.coords[0].tau - 9.0).abs() < 0.6, "tau {}", d.coords[0].tau);
    }

    #[test]
    fn sample_file_round_trip() {
        let c = chain_of(vec![0.25, -1.0, 3.5]);
        let mut buf = Vec::new();
        c.write_samples(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("# d_theta=1"));
        let back = Chain::read_samples(&buf[..]).unwrap();
        assert_eq!(back, c.samples);
    }
}
