//! Config-driven pipeline: reference solves, design, conditioning, grid
//! densities or MALA chains, and metrics.
//!
//! A run writes into its output directory:
//!
//! | file | contents |
//! |---|---|
//! | `provenance.json` | config hash, seeds, crate version, defaults applied |
//! | `config.json` | the resolved config |
//! | `manifest.json` | variants, forms, method, θ† and grid axes |
//! | `data.csv` | observation vector |
//! | `metrics.csv` | `experiment,variant,form,metric,value` |
//! | `timing.csv` | wall-clock times (not reproducible) |
//! | `reference/` | reference density or chain |
//! | `variants/<id>/` | `gp.json` sidecar plus `<form>/density.csv` or `<form>/chain.csv` |

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ApproxForm, ExperimentConfig, Method, ReferenceSpec};
use crate::design::{build_training, halton, DesignSpec, TrainingSet};
use crate::emulator::{ConditionedGP, EmulatorModel, Family};
use crate::error::{Error, Result};
use crate::mcmc::{diagnostics, mala_run, Chain, MalaConfig};
use crate::metrics::{avg_emulator_variance, emulator_rmse, hellinger, GridDensity};
use crate::pde::{forward_map, make_data, ClosedFormConstantDiffusion, ForwardModel, ObservationOperator, PdeProblem, SolverForward, SyntheticData};
use crate::posterior::{grid_density, ApproxPosterior, LogDensity, PosteriorKind, SmoothedUniformPrior};

/// Environment variable overriding the training-set cache directory.
pub const CACHE_ENV: &str = "PDEGP_CACHE_DIR";

/// Sidecars are skipped for Gram matrices larger than this.
const SIDECAR_MAX_DIM: usize = 600;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub cache_dir: Option<PathBuf>,
}

/// One emulator of a sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub id: String,
    pub family: Family,
    pub n: usize,
    pub n_bar: usize,
    pub d_f: usize,
}

pub fn family_name(f: Family) -> &'static str {
    match f {
        Family::Baseline => "baseline",
        Family::SpatiallyCorrelated => "spatially_correlated",
        Family::PdeConstrained => "pde_constrained",
        Family::Potential => "potential",
    }
}

/// Cartesian product of families and sizes, in config order.
pub fn variants(cfg: &ExperimentConfig) -> Vec<Variant> {
    let mut out = Vec::new();
    for &family in &cfg.emulator.families {
        for &n in &cfg.emulator.n {
            if family == Family::PdeConstrained {
                for &n_bar in &cfg.n_bar_values() {
                    for &d_f in &cfg.d_f_values() {
                        out.push(Variant {
                            id: format!("{}_n{n}_nbar{n_bar}_df{d_f}", family_name(family)),
                            family,
                            n,
                            n_bar,
                            d_f,
                        });
                    }
                }
            } else {
                out.push(Variant {
                    id: format!("{}_n{n}", family_name(family)),
                    family,
                    n,
                    n_bar: 0,
                    d_f: 0,
                });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub experiment: String,
    pub variant: String,
    pub form: String,
    pub metric: String,
    pub value: f64,
}

/// Everything derived from a config before any emulator is built.
pub struct Setup {
    pub cfg: ExperimentConfig,
    pub problem: PdeProblem,
    pub obs: ObservationOperator,
    pub data: SyntheticData,
    pub prior: SmoothedUniformPrior,
    pub mesh_n: usize,
    pub hash: String,
    pub cache_dir: PathBuf,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Self> {
        cfg.validate()?;
        let problem = cfg.problem()?;
        let obs = cfg.observation()?;
        let mesh_n = cfg.mesh_n();
        let data = make_data(
            &problem,
            &obs,
            &cfg.data.theta_true,
            cfg.data.noise_var,
            cfg.data_seed(),
            mesh_n,
        )
        .map_err(|e| e.context("synthetic data"))?;
        let prior = SmoothedUniformPrior::new(problem.theta_box.clone(), cfg.prior_lambda())?;
        let cache_dir = opts
            .cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .unwrap_or_else(|| cfg.output_dir().join("cache"));
        Ok(Setup {
            cfg: cfg.clone(),
            problem,
            obs,
            data,
            prior,
            mesh_n,
            hash: cfg.hash(),
            cache_dir,
        })
    }

    pub fn design(&self, v: &Variant) -> DesignSpec {
        let pde = v.family == Family::PdeConstrained;
        DesignSpec {
            n: v.n,
            n_bar: v.n_bar,
            d_f: v.d_f,
            d_g: if pde { self.cfg.d_g() } else { 0 },
            mesh_n: self.mesh_n,
        }
    }

    pub fn training(&self, spec: &DesignSpec) -> Result<TrainingSet> {
        cached_training(&self.problem, &self.obs, spec, Some(&self.cache_dir))
    }

    pub fn model(&self, family: Family) -> Result<EmulatorModel> {
        let e = &self.cfg.emulator;
        let d = self.problem.dim_theta();
        let kp = match family {
            Family::Potential => e.potential_k_p.as_ref().unwrap_or(&e.k_p),
            _ => &e.k_p,
        }
        .build(d)?;
        let ks = match family {
            Family::SpatiallyCorrelated | Family::PdeConstrained => Some(
                e.k_s
                    .as_ref()
                    .ok_or_else(|| Error::config("emulator.k_s", "required by the listed families"))?
                    .build(self.problem.spatial_dim)?,
            ),
            _ => None,
        };
        Ok(EmulatorModel::new(family, kp, ks))
    }

    pub fn condition(&self, family: Family, training: &TrainingSet) -> Result<ConditionedGP> {
        let model = self.model(family)?;
        match family {
            Family::Potential => ConditionedGP::condition_potential(&model, &self.problem, training, &self.data),
            _ => ConditionedGP::condition(&model, &self.problem, &self.obs, training),
        }
    }

    pub fn emulator(&self, v: &Variant) -> Result<ConditionedGP> {
        let t = self.training(&self.design(v)).map_err(|e| e.context(&v.id))?;
        self.condition(v.family, &t).map_err(|e| e.context(&v.id))
    }

    pub fn posterior(&self, gp: Arc<ConditionedGP>, form: ApproxForm) -> Result<ApproxPosterior> {
        let kind = form.kind_for(gp.family());
        ApproxPosterior::emulated(kind, gp, &self.data, self.prior.clone())
    }

    /// Exact forward model: closed form when available.
    pub fn exact_forward(&self) -> Arc<dyn ForwardModel> {
        match ClosedFormConstantDiffusion::new(&self.problem, &self.obs) {
            Ok(cf) => Arc::new(cf),
            Err(_) => Arc::new(SolverForward {
                problem: self.problem.clone(),
                observation: self.obs.clone(),
                mesh_n: self.mesh_n,
            }),
        }
    }

    /// The reference target, if any.
    pub fn reference(&self) -> Result<Option<ApproxPosterior>> {
        match self.cfg.reference() {
            ReferenceSpec::None => Ok(None),
            ReferenceSpec::Exact => {
                let kind = if ClosedFormConstantDiffusion::new(&self.problem, &self.obs).is_ok() {
                    PosteriorKind::TrueClosedForm
                } else {
                    PosteriorKind::TrueViaSolver
                };
                ApproxPosterior::exact(self.exact_forward(), kind, &self.data, self.prior.clone()).map(Some)
            }
            ReferenceSpec::Emulator { n } => {
                let v = Variant {
                    id: "reference".into(),
                    family: Family::Baseline,
                    n,
                    n_bar: 0,
                    d_f: 0,
                };
                let gp = Arc::new(self.emulator(&v)?);
                self.posterior(gp, ApproxForm::Mean).map(Some)
            }
        }
    }

    /// Points over which the average emulator variance is taken.
    pub fn variance_points(&self) -> Result<Vec<Vec<f64>>> {
        let b = &self.problem.theta_box;
        Ok(match b.dim() {
            1 | 2 => {
                let per = if b.dim() == 1 { 101 } else { 41 };
                GridDensity::lattice(&crate::posterior::GridSpec { points_per_axis: per }.axes(b)?)
            }
            d => halton(256, d, 1000)?.iter().map(|u| b.from_unit(u)).collect(),
        })
    }

    pub fn mala_config(&self, key: &str) -> Result<MalaConfig> {
        let s = self
            .cfg
            .sampler
            .as_ref()
            .ok_or_else(|| Error::config("sampler", "required for mala"))?;
        let ov = s.overrides.get(key).cloned().unwrap_or_default();
        let n_samples = ov.samples.unwrap_or(s.samples);
        let burn_in = self.cfg.burn_in().min(n_samples / 2);
        let b = &self.problem.theta_box;
        Ok(MalaConfig {
            step: ov.step.unwrap_or(s.step),
            n_samples,
            burn_in,
            seed: self.cfg.sampler_seed(),
            init: s
                .init
                .clone()
                .unwrap_or_else(|| b.lower.iter().zip(&b.upper).map(|(l, u)| 0.5 * (l + u)).collect()),
        })
    }
}

fn training_key(problem: &PdeProblem, obs: &ObservationOperator, spec: &DesignSpec) -> Result<String> {
    let json = serde_json::to_string(&(problem, obs, spec))?;
    Ok(hex::encode(Sha256::digest(json.as_bytes())))
}

/// Builds a training set or loads it from `cache_dir`. New entries are
/// written to a temporary file and renamed into place.
pub fn cached_training(
    problem: &PdeProblem,
    obs: &ObservationOperator,
    spec: &DesignSpec,
    cache_dir: Option<&Path>,
) -> Result<TrainingSet> {
    let Some(dir) = cache_dir else {
        return build_training(problem, obs, spec);
    };
    let key = training_key(problem, obs, spec)?;
    let path = dir.join(format!("training-{}.json", &key[..24]));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(t) = TrainingSet::from_json(&text) {
            return Ok(t);
        }
    }
    let t = build_training(problem, obs, spec)?;
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".training-{}.{}.{:?}.tmp",
        &key[..24],
        std::process::id(),
        std::thread::current().id()
    ));
    fs::write(&tmp, t.to_json()?)?;
    fs::rename(&tmp, &path)?;
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub method: Method,
    pub d_theta: usize,
    pub theta_true: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub forms: Vec<ApproxForm>,
    pub variants: Vec<Variant>,
    pub has_reference: bool,
    pub histogram_bins: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub crate_version: String,
    pub data_seed: u64,
    pub sampler_seed: Option<u64>,
    pub mesh_n: usize,
    pub defaults_applied: std::collections::BTreeMap<String, String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub config_hash: String,
    pub metrics: Vec<MetricRow>,
    /// Paths relative to `out_dir`, sorted.
    pub files: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn metric(&self, variant: &str, form: &str, metric: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|r| r.variant == variant && r.form == form && r.metric == metric)
            .map(|r| r.value)
    }
}

struct Outcome {
    metrics: Vec<MetricRow>,
    timing: Vec<(String, String, f64)>,
    files: Vec<PathBuf>,
    notes: Vec<String>,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Samples or grids one target and returns `(metrics, files, seconds)`.
fn evaluate_target(
    setup: &Setup,
    target: &dyn LogDensity,
    key: &str,
    dir: &Path,
    rel: &Path,
    reference: Option<&GridDensity>,
) -> Result<(Vec<(String, f64)>, Vec<PathBuf>, f64, Option<GridDensity>)> {
    let mut m = Vec::new();
    let mut files = Vec::new();
    let start = Instant::now();
    match setup.cfg.posterior.method {
        Method::Grid => {
            let g = grid_density(target, &setup.problem.theta_box, &setup.cfg.grid())?;
            if let Some(r) = reference {
                m.push(("hellinger".into(), hellinger(&g, r)?));
            }
            for (k, (mean, sd)) in g.moments().into_iter().enumerate() {
                m.push((format!("mean_{}", k + 1), mean));
                m.push((format!("sd_{}", k + 1), sd));
            }
            for (k, a) in g.argmax().into_iter().enumerate() {
                m.push((format!("argmax_{}", k + 1), a));
            }
            g.write_csv(create(&dir.join("density.csv"))?)?;
            files.push(rel.join("density.csv"));
            Ok((m, files, start.elapsed().as_secs_f64(), Some(g)))
        }
        Method::Mala => {
            let cfg = setup.mala_config(key)?;
            let chain = mala_run(target, &cfg, &setup.hash).map_err(|e| e.context(key))?;
            let diag = diagnostics(&chain)?;
            m.push(("acceptance_rate".into(), chain.acceptance_rate));
            m.push(("non_finite".into(), chain.non_finite as f64));
            let mean = chain.mean();
            for (k, c) in diag.coords.iter().enumerate() {
                m.push((format!("mean_{}", k + 1), c.mean));
                m.push((format!("sd_{}", k + 1), c.sd));
                m.push((format!("ess_{}", k + 1), c.ess));
            }
            let dist = mean
                .iter()
                .zip(&setup.cfg.data.theta_true)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            m.push(("distance_to_truth".into(), dist));
            chain.write_samples(create(&dir.join("chain.csv"))?)?;
            let mut d = create(&dir.join("diagnostics.json"))?;
            serde_json::to_writer_pretty(&mut d, &diag)?;
            d.flush()?;
            files.push(rel.join("chain.csv"));
            files.push(rel.join("diagnostics.json"));
            Ok((m, files, chain.per_sample_seconds, None))
        }
    }
}

fn run_variant(setup: &Setup, v: &Variant, out: &Path, reference: Option<&GridDensity>) -> Result<Outcome> {
    let exp = &setup.cfg.name;
    let row = |form: &str, metric: &str, value: f64| MetricRow {
        experiment: exp.clone(),
        variant: v.id.clone(),
        form: form.into(),
        metric: metric.into(),
        value,
    };
    let rel = PathBuf::from("variants").join(&v.id);
    let dir = out.join(&rel);
    let mut o = Outcome {
        metrics: Vec::new(),
        timing: Vec::new(),
        files: Vec::new(),
        notes: Vec::new(),
    };
    let training = setup.training(&setup.design(v)).map_err(|e| e.context(&v.id))?;
    let t0 = Instant::now();
    let gp = Arc::new(setup.condition(v.family, &training).map_err(|e| e.context(&v.id))?);
    o.timing.push((v.id.clone(), "condition".into(), t0.elapsed().as_secs_f64()));

    o.metrics.push(row("", "log_marginal_likelihood", gp.log_marginal_likelihood()));
    o.metrics.push(row("", "jitter", gp.jitter_used()));
    o.metrics.push(row("", "avg_variance", avg_emulator_variance(&gp, &setup.variance_points()?)?));
    if v.family != Family::Potential {
        let rmse = emulator_rmse(&gp, &setup.cfg.data.theta_true, setup.exact_forward().as_ref())?;
        o.metrics.push(row("", "rmse_at_truth", rmse));
    }
    let side = gp.sidecar(&setup.hash);
    if side.dim <= SIDECAR_MAX_DIM {
        let mut f = create(&dir.join("gp.json"))?;
        serde_json::to_writer(&mut f, &side)?;
        f.flush()?;
        o.files.push(rel.join("gp.json"));
    } else {
        o.notes.push(format!("{}: sidecar skipped (Gram dimension {})", v.id, side.dim));
    }

    for &form in &setup.cfg.posterior.kinds {
        let ap = setup.posterior(gp.clone(), form)?;
        let key = format!("{}/{}", v.id, form.as_str());
        let frel = rel.join(form.as_str());
        let (m, files, secs, _) = evaluate_target(setup, &ap, &key, &out.join(&frel), &frel, reference)?;
        o.metrics.extend(m.into_iter().map(|(k, val)| row(form.as_str(), &k, val)));
        o.files.extend(files);
        o.timing.push((key, "evaluate".into(), secs));
    }
    Ok(o)
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, v)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Runs every variant of `cfg` and writes the artifacts listed in the
/// module docs.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    let setup = Setup::new(cfg, opts)?;
    let out = cfg.output_dir();
    fs::create_dir_all(&out)?;
    let vs = variants(cfg);

    let reference = setup.reference()?;
    let (ref_metrics, ref_files, ref_secs, ref_grid) = match &reference {
        Some(r) => {
            let rel = PathBuf::from("reference");
            let (m, f, s, g) = evaluate_target(&setup, r, "reference", &out.join(&rel), &rel, None)
                .map_err(|e| e.context("reference"))?;
            (m, f, s, g)
        }
        None => (Vec::new(), Vec::new(), 0.0, None),
    };

    let outcomes = vs
        .par_iter()
        .map(|v| run_variant(&setup, v, &out, ref_grid.as_ref()))
        .collect::<Result<Vec<_>>>()?;

    let mut metrics: Vec<MetricRow> = ref_metrics
        .into_iter()
        .map(|(k, v)| MetricRow {
            experiment: cfg.name.clone(),
            variant: "reference".into(),
            form: String::new(),
            metric: k,
            value: v,
        })
        .collect();
    let mut files = ref_files;
    let mut timing = vec![("reference".to_string(), "evaluate".to_string(), ref_secs)];
    let mut notes = Vec::new();
    for o in outcomes {
        metrics.extend(o.metrics);
        files.extend(o.files);
        timing.extend(o.timing);
        notes.extend(o.notes);
    }

    let mut w = csv::Writer::from_writer(create(&out.join("metrics.csv"))?);
    for r in &metrics {
        w.serialize(r)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(create(&out.join("timing.csv"))?);
    w.write_record(["item", "stage", "seconds"])?;
    for (a, b, s) in &timing {
        w.write_record([a.as_str(), b.as_str(), &s.to_string()])?;
    }
    w.flush()?;
    setup.data.write_csv(create(&out.join("data.csv"))?)?;

    let b = &setup.problem.theta_box;
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            experiment: cfg.name.clone(),
            method: cfg.posterior.method,
            d_theta: b.dim(),
            theta_true: cfg.data.theta_true.clone(),
            lower: b.lower.clone(),
            upper: b.upper.clone(),
            forms: cfg.posterior.kinds.clone(),
            variants: vs,
            has_reference: reference.is_some(),
            histogram_bins: cfg.histogram_bins(),
        },
    )?;
    write_json(&out.join("config.json"), cfg)?;
    write_json(
        &out.join("provenance.json"),
        &Provenance {
            config_hash: setup.hash.clone(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            data_seed: cfg.data_seed(),
            sampler_seed: cfg.sampler.as_ref().map(|_| cfg.sampler_seed()),
            mesh_n: setup.mesh_n,
            defaults_applied: cfg.defaults_applied(),
            notes,
        },
    )?;
    files.extend(
        ["metrics.csv", "timing.csv", "data.csv", "manifest.json", "config.json", "provenance.json"]
            .iter()
            .map(PathBuf::from),
    );
    files.sort();
    Ok(ExperimentReport {
        out_dir: out,
        config_hash: setup.hash,
        metrics,
        files,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub item: String,
    pub quantity: String,
    pub seconds: f64,
    pub reps: usize,
}

#[derive(Clone, Debug, Default)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
}

impl TimingTable {
    pub fn get(&self, item: &str, quantity: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.item == item && r.quantity == quantity)
            .map(|r| r.seconds)
    }
}

fn time_avg(reps: usize, mut f: impl FnMut(usize) -> Result<()>) -> Result<f64> {
    let start = Instant::now();
    for i in 0..reps {
        f(i)?;
    }
    Ok(start.elapsed().as_secs_f64() / reps as f64)
}

/// Average per-call costs: the reference solve `G_X(θ)`, the emulator mean
/// `m_N(θ)`, the offline weights α, and one MALA step for every posterior
/// form. Runs sequentially so the variants do not compete for cores.
pub fn timings(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<TimingTable> {
    let setup = Setup::new(cfg, opts)?;
    let reps = cfg.timing_reps().max(100);
    let alpha_reps = cfg.alpha_reps().max(1);
    let b = &setup.problem.theta_box;
    let thetas: Vec<Vec<f64>> = halton(reps, b.dim(), 500)?.iter().map(|u| b.from_unit(u)).collect();
    let mut rows = Vec::new();

    let solve = time_avg(reps, |i| {
        std::hint::black_box(forward_map(&setup.problem, &setup.obs, &thetas[i], setup.mesh_n)?);
        Ok(())
    })?;
    rows.push(TimingRow {
        item: "reference".into(),
        quantity: "G_X".into(),
        seconds: solve,
        reps,
    });

    for v in variants(cfg) {
        let training = setup.training(&setup.design(&v))?;
        let alpha = time_avg(alpha_reps, |_| {
            std::hint::black_box(setup.condition(v.family, &training)?);
            Ok(())
        })?;
        let gp = Arc::new(setup.condition(v.family, &training)?);
        let mean = time_avg(reps, |i| {
            std::hint::black_box(gp.predict_mean(&thetas[i])?);
            Ok(())
        })?;
        rows.push(TimingRow {
            item: v.id.clone(),
            quantity: "alpha".into(),
            seconds: alpha,
            reps: alpha_reps,
        });
        rows.push(TimingRow {
            item: v.id.clone(),
            quantity: "m_N".into(),
            seconds: mean,
            reps,
        });
        for &form in &cfg.posterior.kinds {
            let ap = setup.posterior(gp.clone(), form)?;
            let key = format!("{}/{}", v.id, form.as_str());
            let mut mc = match cfg.sampler {
                Some(_) => setup.mala_config(&key)?,
                None => MalaConfig {
                    step: 1e-4,
                    n_samples: reps,
                    burn_in: 0,
                    seed: cfg.data_seed(),
                    init: cfg.data.theta_true.clone(),
                },
            };
            mc.n_samples = reps;
            mc.burn_in = 0;
            let chain: Chain = mala_run(&ap, &mc, &setup.hash)?;
            rows.push(TimingRow {
                item: key,
                quantity: "per_sample".into(),
                seconds: chain.per_sample_seconds,
                reps,
            });
        }
    }

    let out = cfg.output_dir();
    let mut w = csv::Writer::from_writer(create(&out.join("timings.csv"))?);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(TimingTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path) -> ExperimentConfig {
        let text = format!(
            r#"
            name = "small"
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
            families = ["baseline", "pde_constrained", "potential"]
            n = [2]
            n_bar = [10]
            d_f = [5]
            k_p = {{ family = "squared_exponential", variance = 0.1, lengthscale = 1.0 }}
            k_s = {{ family = "squared_exponential", variance = 1.0, lengthscale = 0.3 }}
            potential_k_p = {{ family = "squared_exponential", variance = 1e6, lengthscale = 0.5 }}
            [posterior]
            method = "grid"
            kinds = ["mean", "marginal"]
            [grid]
            points_per_axis = 201
            [output]
            dir = "{}"
            "#,
            dir.display()
        );
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn variant_ids() {
        let dir = tempfile::tempdir().unwrap();
        let ids: Vec<String> = variants(&config(dir.path())).into_iter().map(|v| v.id).collect();
        assert_eq!(ids, ["baseline_n2", "pde_constrained_n2_nbar10_df5", "potential_n2"]);
    }

    #[test]
    fn cache_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = PdeProblem::constant_diffusion();
        let obs = ObservationOperator::uniform_points(5);
        let spec = DesignSpec {
            n: 3,
            n_bar: 4,
            d_f: 5,
            d_g: 2,
            mesh_n: 64,
        };
        let fresh = build_training(&p, &obs, &spec).unwrap();
        let a = cached_training(&p, &obs, &spec, Some(dir.path())).unwrap();
        let b = cached_training(&p, &obs, &spec, Some(dir.path())).unwrap();
        assert_eq!(fresh.to_json().unwrap(), a.to_json().unwrap());
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn run_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path());
        let a = run(&cfg, &RunOptions::default()).unwrap();
        let first = fs::read(dir.path().join("metrics.csv")).unwrap();
        let b = run(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(first, fs::read(dir.path().join("metrics.csv")).unwrap());
        assert_eq!(a.files, b.files);
        assert!(a.metric("baseline_n2", "mean", "hellinger").is_some());
        assert!(a.metric("potential_n2", "marginal", "hellinger").is_some());
        assert!(dir.path().join("variants/pde_constrained_n2_nbar10_df5/marginal/density.csv").exists());
    }
}
