//! Experiment configuration: a TOML tree with a fixed schema.
//!
//! ```toml
//! name = "constant-diffusion"
//! mesh_n = 1024                       # optional; 1024 in 1D, 64 in 2D
//!
//! [problem]
//! preset = "linear_source"            # constant_diffusion | linear_source | flow_cell
//! diffusion = { kind = "pinned_cells", cells = 4 }   # or constant, expansion { terms }
//!
//! [observation]
//! kind = "uniform_points"             # uniform_points | uniform_intervals | halton_points | points
//! d_y = 6
//!
//! [data]
//! theta_true = [0.098, 0.430]
//! noise_var = 1e-4
//! seed = 1                            # optional
//!
//! [emulator]
//! families = ["baseline", "spatially_correlated", "pde_constrained", "potential"]
//! n = [4]                             # every entry is a separate variant
//! n_bar = [10]                        # PDE-constrained only
//! d_f = [20]                          # PDE-constrained only
//! d_g = 2                             # optional; 2 in 1D, 8 in 2D
//! k_p = { family = "squared_exponential", variance = 0.1, lengthscale = 1.0 }
//! k_s = { family = "matern52", variance = 1.0, lengthscale = 0.3 }
//! potential_k_p = { ... }             # optional; defaults to k_p
//!
//! [posterior]
//! method = "mala"                     # grid | mala
//! kinds = ["mean", "marginal"]
//! prior_lambda = 1e-3                 # optional
//! reference = { kind = "emulator", n = 100 }   # optional; exact for grids
//!
//! [grid]                              # optional
//! points_per_axis = 2048
//!
//! [sampler]                           # required for method = "mala"
//! step = 1e-3
//! samples = 100000
//! burn_in = 10000                     # optional; samples / 10
//! overrides = { "pde_constrained_n4_nbar10_df20/marginal" = { step = 5e-4 } }
//!
//! [timings]                           # optional
//! reps = 1000
//!
//! [output]                            # optional
//! dir = "out/constant-diffusion"
//! svg = true
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::design::halton_observation_points;
use crate::emulator::Family;
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelFamily};
use crate::pde::{DiffusionField, KlExpansion, ObservationOperator, PdeProblem};
use crate::posterior::{GridSpec, PosteriorKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub mesh_n: Option<usize>,
    pub problem: ProblemSpec,
    pub observation: ObservationSpec,
    pub data: DataSpec,
    pub emulator: EmulatorSpec,
    pub posterior: PosteriorSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub sampler: Option<SamplerSpec>,
    #[serde(default)]
    pub timings: Option<TimingSpec>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    ConstantDiffusion,
    LinearSource { diffusion: DiffusionSpec },
    FlowCell { diffusion: DiffusionSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiffusionSpec {
    Constant,
    /// Equal cells with κ pinned to 0 and 1 at the ends.
    PinnedCells { cells: usize },
    Expansion { terms: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservationSpec {
    /// `x_j = j / (d_y + 1)` in 1D.
    UniformPoints { d_y: usize },
    /// Local integrals over `d_y` equal sub-intervals of (0, 1).
    UniformIntervals { d_y: usize },
    /// First `d_y` Halton points of the unit square.
    HaltonPoints { d_y: usize },
    Points { points: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub theta_true: Vec<f64>,
    pub noise_var: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub variance: f64,
    pub lengthscale: f64,
}

impl KernelSpec {
    pub fn build(&self, input_dim: usize) -> Result<Kernel> {
        match self.family {
            KernelFamily::SquaredExponential => Kernel::squared_exponential(self.variance, self.lengthscale, input_dim),
            KernelFamily::Matern52 => Kernel::matern52(self.variance, self.lengthscale, input_dim),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmulatorSpec {
    pub families: Vec<Family>,
    pub n: Vec<usize>,
    #[serde(default)]
    pub n_bar: Option<Vec<usize>>,
    #[serde(default)]
    pub d_f: Option<Vec<usize>>,
    #[serde(default)]
    pub d_g: Option<usize>,
    pub k_p: KernelSpec,
    #[serde(default)]
    pub k_s: Option<KernelSpec>,
    #[serde(default)]
    pub potential_k_p: Option<KernelSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Grid,
    Mala,
}

/// Mean-based or marginal approximation; mapped to a [`PosteriorKind`]
/// according to the emulator family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxForm {
    Mean,
    Marginal,
}

impl ApproxForm {
    pub fn kind_for(self, family: Family) -> PosteriorKind {
        match (self, family == Family::Potential) {
            (ApproxForm::Mean, false) => PosteriorKind::MeanForward,
            (ApproxForm::Marginal, false) => PosteriorKind::MarginalForward,
            (ApproxForm::Mean, true) => PosteriorKind::MeanPotential,
            (ApproxForm::Marginal, true) => PosteriorKind::MarginalPotential,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ApproxForm::Mean => "mean",
            ApproxForm::Marginal => "marginal",
        }
    }
}

/// What the approximate posteriors are compared against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// Closed form when available, the reference solver otherwise.
    Exact,
    /// Mean-based posterior of a baseline emulator with `n` training points.
    Emulator { n: usize },
    /// No reference; samples are only compared with θ†.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosteriorSpec {
    pub method: Method,
    pub kinds: Vec<ApproxForm>,
    #[serde(default)]
    pub prior_lambda: Option<f64>,
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerOverride {
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub step: f64,
    pub samples: usize,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub init: Option<Vec<f64>>,
    #[serde(default)]
    pub histogram_bins: Option<usize>,
    /// Keyed by `<variant id>/<mean|marginal>` or `reference`.
    #[serde(default)]
    pub overrides: BTreeMap<String, SamplerOverride>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSpec {
    #[serde(default)]
    pub reps: Option<usize>,
    #[serde(default)]
    pub alpha_reps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub svg: Option<bool>,
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub mesh_n: Option<usize>,
    pub samples: Option<usize>,
    pub no_svg: bool,
}

const REQUIRED: &[&str] = &[
    "name",
    "problem.preset",
    "observation.kind",
    "data.theta_true",
    "data.noise_var",
    "emulator.families",
    "emulator.n",
    "emulator.k_p",
    "posterior.method",
    "posterior.kinds",
];

fn lookup<'a>(v: &'a toml::Value, path: &str) -> Option<&'a toml::Value> {
    path.split('.').try_fold(v, |node, key| node.get(key))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read config: {e}")))?;
        Self::from_toml(&text)
    }

    /// Parses and validates; a missing required field is reported together
    /// with every other missing one.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: toml::Value = toml::from_str(text).map_err(|e| Error::config("<root>", e.to_string()))?;
        let mut missing: Vec<&str> = REQUIRED.iter().copied().filter(|p| lookup(&raw, p).is_none()).collect();
        if lookup(&raw, "posterior.method").and_then(|v| v.as_str()) == Some("mala") {
            missing.extend(["sampler.step", "sampler.samples"].iter().filter(|p| lookup(&raw, p).is_none()));
        }
        if !missing.is_empty() {
            return Err(Error::config(
                "<root>",
                format!("missing required fields: {}", missing.join(", ")),
            ));
        }
        let cfg: ExperimentConfig = raw.try_into().map_err(|e: toml::de::Error| {
            Error::config("<root>", e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.data.seed = Some(s);
            if let Some(smp) = self.sampler.as_mut() {
                smp.seed = Some(s);
            }
        }
        if let Some(m) = o.mesh_n {
            self.mesh_n = Some(m);
        }
        if let Some(n) = o.samples {
            if let Some(smp) = self.sampler.as_mut() {
                smp.samples = n;
                smp.burn_in = smp.burn_in.map(|b| b.min(n / 2));
                for ov in smp.overrides.values_mut() {
                    ov.samples = None;
                }
            }
        }
        if o.out.is_some() || o.no_svg {
            let out = self.output.get_or_insert(OutputSpec { dir: None, svg: None });
            if let Some(d) = &o.out {
                out.dir = Some(d.clone());
            }
            if o.no_svg {
                out.svg = Some(false);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let problem = self.problem()?;
        problem.validate().map_err(|e| e.context("problem"))?;
        let obs = self.observation()?;
        obs.validate(&problem).map_err(|e| e.context("observation"))?;
        let d = problem.dim_theta();
        if self.data.theta_true.len() != d {
            return Err(Error::config(
                "data.theta_true",
                format!("has {} entries, the problem has {d} parameters", self.data.theta_true.len()),
            ));
        }
        if !(self.data.noise_var > 0.0) {
            return Err(Error::config("data.noise_var", "must be positive"));
        }
        let e = &self.emulator;
        if e.families.is_empty() {
            return Err(Error::config("emulator.families", "list is empty"));
        }
        if e.n.is_empty() || e.n.contains(&0) {
            return Err(Error::config("emulator.n", "needs positive training sizes"));
        }
        e.k_p.build(d).map_err(|err| Error::config("emulator.k_p", err.to_string()))?;
        let needs_ks = e
            .families
            .iter()
            .any(|f| matches!(f, Family::SpatiallyCorrelated | Family::PdeConstrained));
        match &e.k_s {
            Some(k) => {
                k.build(problem.spatial_dim)
                    .map_err(|err| Error::config("emulator.k_s", err.to_string()))?;
            }
            None if needs_ks => {
                return Err(Error::config("emulator.k_s", "required by the listed families"));
            }
            None => {}
        }
        if let Some(k) = &e.potential_k_p {
            k.build(d).map_err(|err| Error::config("emulator.potential_k_p", err.to_string()))?;
        }
        if e.families.contains(&Family::PdeConstrained) {
            let ok = |v: &Option<Vec<usize>>| v.as_ref().is_some_and(|v| !v.is_empty() && !v.contains(&0));
            if !ok(&e.n_bar) {
                return Err(Error::config("emulator.n_bar", "PDE-constrained emulators need positive n_bar values"));
            }
            if !ok(&e.d_f) {
                return Err(Error::config("emulator.d_f", "PDE-constrained emulators need positive d_f values"));
            }
        }
        if self.posterior.kinds.is_empty() {
            return Err(Error::config("posterior.kinds", "list is empty"));
        }
        if let Some(l) = self.posterior.prior_lambda {
            if !(l > 0.0) {
                return Err(Error::config("posterior.prior_lambda", "must be positive"));
            }
        }
        match self.posterior.method {
            Method::Grid if d > 2 => {
                return Err(Error::config("posterior.method", format!("grid needs d_θ ≤ 2, got {d}")));
            }
            Method::Mala => {
                let s = self.sampler.as_ref().ok_or_else(|| Error::config("sampler", "required for mala"))?;
                if !(s.step > 0.0) {
                    return Err(Error::config("sampler.step", "must be positive"));
                }
                if s.samples <= self.burn_in() {
                    return Err(Error::config("sampler.samples", "must exceed burn_in"));
                }
                if let Some(init) = &s.init {
                    if init.len() != d {
                        return Err(Error::config("sampler.init", format!("needs {d} entries")));
                    }
                }
                if self.histogram_bins() < 10 {
                    return Err(Error::config("sampler.histogram_bins", "needs at least 10"));
                }
            }
            _ => {}
        }
        if let Some(g) = &self.grid {
            if g.points_per_axis < 2 {
                return Err(Error::config("grid.points_per_axis", "needs at least 2"));
            }
        }
        if let Some(ReferenceSpec::Emulator { n: 0 }) = self.posterior.reference {
            return Err(Error::config("posterior.reference.n", "must be positive"));
        }
        self.mesh_n_checked()?;
        Ok(())
    }

    pub fn problem(&self) -> Result<PdeProblem> {
        let diffusion = |d: &DiffusionSpec| -> Result<DiffusionField> {
            Ok(match d {
                DiffusionSpec::Constant => DiffusionField::Constant,
                DiffusionSpec::PinnedCells { cells } => {
                    if *cells < 3 {
                        return Err(Error::config("problem.diffusion.cells", "needs at least 3 cells"));
                    }
                    DiffusionField::pinned_cells(*cells)
                }
                DiffusionSpec::Expansion { terms } => DiffusionField::Expansion(
                    KlExpansion::new(*terms).map_err(|e| Error::config("problem.diffusion.terms", e.to_string()))?,
                ),
            })
        };
        Ok(match &self.problem {
            ProblemSpec::ConstantDiffusion => PdeProblem::constant_diffusion(),
            ProblemSpec::LinearSource { diffusion: d } => PdeProblem::linear_source_1d(diffusion(d)?),
            ProblemSpec::FlowCell { diffusion: d } => PdeProblem::flow_cell(diffusion(d)?),
        })
    }

    pub fn spatial_dim(&self) -> usize {
        match self.problem {
            ProblemSpec::FlowCell { .. } => 2,
            _ => 1,
        }
    }

    pub fn observation(&self) -> Result<ObservationOperator> {
        Ok(match &self.observation {
            ObservationSpec::UniformPoints { d_y } => ObservationOperator::uniform_points(*d_y),
            ObservationSpec::UniformIntervals { d_y } => ObservationOperator::uniform_intervals(*d_y),
            ObservationSpec::HaltonPoints { d_y } => halton_observation_points(*d_y)?,
            ObservationSpec::Points { points } => ObservationOperator::Pointwise { points: points.clone() },
        })
    }

    fn mesh_n_checked(&self) -> Result<usize> {
        let m = self.mesh_n();
        if m < 8 {
            return Err(Error::config("mesh_n", "must be at least 8"));
        }
        Ok(m)
    }

    pub fn mesh_n(&self) -> usize {
        self.mesh_n.unwrap_or(if self.spatial_dim() == 2 { 64 } else { 1024 })
    }

    pub fn data_seed(&self) -> u64 {
        self.data.seed.unwrap_or(1)
    }

    pub fn d_g(&self) -> usize {
        self.emulator.d_g.unwrap_or(if self.spatial_dim() == 2 { 8 } else { 2 })
    }

    pub fn n_bar_values(&self) -> Vec<usize> {
        self.emulator.n_bar.clone().unwrap_or_default()
    }

    pub fn d_f_values(&self) -> Vec<usize> {
        self.emulator.d_f.clone().unwrap_or_default()
    }

    pub fn prior_lambda(&self) -> f64 {
        self.posterior.prior_lambda.unwrap_or(1e-3)
    }

    pub fn reference(&self) -> ReferenceSpec {
        self.posterior.reference.clone().unwrap_or(match self.posterior.method {
            Method::Grid => ReferenceSpec::Exact,
            Method::Mala => ReferenceSpec::Emulator { n: 100 },
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid.clone().unwrap_or(GridSpec {
            points_per_axis: if self.data.theta_true.len() == 1 { 2048 } else { 256 },
        })
    }

    pub fn burn_in(&self) -> usize {
        self.sampler
            .as_ref()
            .map_or(0, |s| s.burn_in.unwrap_or(s.samples / 10))
    }

    pub fn sampler_seed(&self) -> u64 {
        self.sampler
            .as_ref()
            .and_then(|s| s.seed)
            .unwrap_or_else(|| self.data_seed())
    }

    pub fn histogram_bins(&self) -> usize {
        self.sampler.as_ref().and_then(|s| s.histogram_bins).unwrap_or(50)
    }

    pub fn timing_reps(&self) -> usize {
        self.timings.as_ref().and_then(|t| t.reps).unwrap_or(1000)
    }

    pub fn alpha_reps(&self) -> usize {
        self.timings.as_ref().and_then(|t| t.alpha_reps).unwrap_or(100)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .as_ref()
            .and_then(|o| o.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    pub fn svg(&self) -> bool {
        self.output.as_ref().and_then(|o| o.svg).unwrap_or(true)
    }

    /// Optional fields left unset, with the value used in their place.
    pub fn defaults_applied(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut note = |cond: bool, k: &str, v: String| {
            if cond {
                m.insert(k.to_string(), v);
            }
        };
        note(self.mesh_n.is_none(), "mesh_n", self.mesh_n().to_string());
        note(self.data.seed.is_none(), "data.seed", self.data_seed().to_string());
        note(self.emulator.d_g.is_none(), "emulator.d_g", self.d_g().to_string());
        note(
            self.emulator.potential_k_p.is_none() && self.emulator.families.contains(&Family::Potential),
            "emulator.potential_k_p",
            "emulator.k_p".into(),
        );
        note(self.posterior.prior_lambda.is_none(), "posterior.prior_lambda", self.prior_lambda().to_string());
        note(
            self.posterior.reference.is_none(),
            "posterior.reference",
            format!("{:?}", self.reference()),
        );
        if self.posterior.method == Method::Grid {
            note(self.grid.is_none(), "grid.points_per_axis", self.grid().points_per_axis.to_string());
        }
        if let Some(s) = &self.sampler {
            note(s.burn_in.is_none(), "sampler.burn_in", self.burn_in().to_string());
            note(s.seed.is_none(), "sampler.seed", self.sampler_seed().to_string());
            note(s.init.is_none(), "sampler.init", "centre of the parameter box".into());
            note(s.histogram_bins.is_none(), "sampler.histogram_bins", self.histogram_bins().to_string());
        }
        m
    }

    /// SHA-256 of the canonical JSON form, ignoring the output section.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        name = "t"
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
        n = [1, 2]
        k_p = { family = "squared_exponential", variance = 0.1, lengthscale = 1.0 }
        [posterior]
        method = "grid"
        kinds = ["mean", "marginal"]
    "#;

    #[test]
    fn empty_config_lists_required_fields() {
        let err = ExperimentConfig::from_toml("").unwrap_err().to_string();
        for f in REQUIRED {
            assert!(err.contains(f), "{f} missing from: {err}");
        }
    }

    #[test]
    fn mala_needs_sampler_fields() {
        let text = MINIMAL.replace("method = \"grid\"", "method = \"mala\"");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("sampler.step") && err.contains("sampler.samples"));
    }

    #[test]
    fn minimal_config_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.mesh_n(), 1024);
        assert_eq!(c.d_g(), 2);
        assert_eq!(c.grid().points_per_axis, 2048);
        assert_eq!(c.reference(), ReferenceSpec::Exact);
        let d = c.defaults_applied();
        assert!(d.contains_key("mesh_n") && d.contains_key("posterior.prior_lambda"));
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let text = MINIMAL.replace("theta_true = [0.314]", "theta_true = [0.3, 0.1]");
        match ExperimentConfig::from_toml(&text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "data.theta_true"),
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replace("[\"baseline\"]", "[\"pde_constrained\"]");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = MINIMAL.replace("d_y = 5", "d_y = 5\nbogus = 1");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn hash_ignores_output_but_not_seed() {
        let a = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let mut b = a.clone();
        b.apply(&Overrides {
            out: Some("elsewhere".into()),
            no_svg: true,
            ..Default::default()
        });
        assert_eq!(a.hash(), b.hash());
        assert!(!b.svg());
        b.apply(&Overrides {
            seed: Some(9),
            ..Default::default()
        });
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn form_maps_to_kind() {
        assert_eq!(ApproxForm::Marginal.kind_for(Family::Potential), PosteriorKind::MarginalPotential);
        assert_eq!(ApproxForm::Mean.kind_for(Family::PdeConstrained), PosteriorKind::MeanForward);
    }
}
