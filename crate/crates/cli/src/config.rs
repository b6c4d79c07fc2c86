//! Run configuration: the problem, the stage list and the named estimates
//! and sweeps the stages refer to.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use fracg::funcspace::lattice::point;
use fracg::funcspace::{Ball, ExteriorModel, Kernel, Point, Region};
use fracg::nfunction::{GrowthFunction, NFunction};
use fracg::regularity::{CutoffProfile, EstimateBounds, Sign};
use fracg::solver::{DataFn, NonlocalProblem, ProblemSpec, SolveOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{CorpusSpec, SmoothField};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl DomainConfig {
    pub fn region(&self, dim: usize) -> Result<Region, CliError> {
        let check = |name: &str, v: &[f64]| {
            if v.len() != dim {
                Err(CliError::schema(format!("omega.{name} needs {dim} coordinates, got {}", v.len())))
            } else {
                Ok(())
            }
        };
        match self {
            DomainConfig::Box { lo, hi } => {
                check("lo", lo)?;
                check("hi", hi)?;
                if lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
                    return Err(CliError::schema("omega.lo must not exceed omega.hi"));
                }
                Ok(Region::Box { lo: point(lo), hi: point(hi) })
            }
            DomainConfig::Ball { center, radius } => {
                check("center", center)?;
                Ok(Region::Ball(Ball::new(center, *radius)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    #[default]
    Pure,
    /// `a(x, y) = mean + amplitude cos(2 pi (|x| + |y|) / wavelength)`.
    Cosine { mean: f64, amplitude: f64, wavelength: f64 },
}

impl KernelConfig {
    pub fn build(&self) -> Result<Kernel, CliError> {
        Ok(match self {
            KernelConfig::Pure => Kernel::Pure,
            KernelConfig::Cosine { mean, amplitude, wavelength } => Kernel::cosine(*mean, *amplitude, *wavelength)?,
        })
    }
}

/// Datum on the halo nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataConfig {
    /// The exterior model itself.
    #[default]
    Model,
    /// `below` where `x[axis] < at`, `above` elsewhere.
    Step { axis: usize, at: f64, below: f64, above: f64 },
    /// `offset + amplitude sin(frequency x[0]) exp(-|x|^2 / envelope)`.
    Wave { amplitude: f64, frequency: f64, envelope: f64, offset: f64 },
    /// Seeded sum of random cosine modes.
    RandomSmooth {
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "unit")]
        amplitude: f64,
    },
}

fn default_modes() -> usize {
    4
}

fn unit() -> f64 {
    1.0
}

impl DataConfig {
    pub fn is_random(&self) -> bool {
        matches!(self, DataConfig::RandomSmooth { .. })
    }

    fn build(&self, dim: usize, seed: Option<u64>) -> Result<Option<DataFn>, CliError> {
        Ok(match *self {
            DataConfig::Model => None,
            DataConfig::Step { axis, at, below, above } => {
                if axis >= dim {
                    return Err(CliError::schema(format!("step axis {axis} out of range for dimension {dim}")));
                }
                Some(Arc::new(move |x: &Point| if x[axis] < at { below } else { above }))
            }
            DataConfig::Wave { amplitude, frequency, envelope, offset } => {
                if !(envelope > 0.0) {
                    return Err(CliError::schema("wave envelope must be positive"));
                }
                Some(Arc::new(move |x: &Point| {
                    let r2: f64 = x.iter().map(|c| c * c).sum();
                    offset + amplitude * (frequency * x[0]).sin() * (-r2 / envelope).exp()
                }))
            }
            DataConfig::RandomSmooth { modes, amplitude } => {
                let seed = seed.ok_or_else(|| CliError::schema("random_smooth data needs a seed"))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let field = SmoothField::sample(&mut rng, dim, modes, amplitude, 2.0);
                Some(Arc::new(move |x: &Point| field.eval(x)))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dim: usize,
    pub h: f64,
    pub omega: DomainConfig,
    pub s: f64,
    pub g: GrowthFunction,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default = "zero_model")]
    pub exterior: ExteriorModel,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
}

fn zero_model() -> ExteriorModel {
    ExteriorModel::Zero
}

impl ProblemConfig {
    pub fn nfunction(&self) -> Result<NFunction, CliError> {
        Ok(NFunction::new(self.g.clone())?)
    }

    pub fn build(&self, seed: Option<u64>) -> Result<NonlocalProblem, CliError> {
        let omega = self.omega.region(self.dim)?;
        Ok(NonlocalProblem::new(ProblemSpec {
            dim: self.dim,
            h: self.h,
            omega,
            s: self.s,
            nf: self.nfunction()?,
            kernel: self.kernel.build()?,
            exterior: self.exterior.clone(),
            data: self.data.build(self.dim, seed)?,
            truncation_radius: self.truncation_radius,
        })?)
    }
}

/// A named estimate referenced by `verify:<name>` and by sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimateConfig {
    Boundedness {
        center: Vec<f64>,
        radius: f64,
    },
    Caccioppoli {
        center: Vec<f64>,
        radius: f64,
        level: f64,
        inner: f64,
        outer: f64,
        #[serde(default = "hat")]
        profile: CutoffProfile,
        #[serde(default = "plus")]
        sign: Sign,
    },
    Logarithmic {
        center: Vec<f64>,
        r: f64,
        big_r: f64,
        d: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncation: Option<[f64; 2]>,
    },
    SobolevPoincare {
        center: Vec<f64>,
        radius: f64,
        theta: f64,
        /// Also evaluated on every corpus function, on the corpus lattice.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        corpus: Option<CorpusSpec>,
    },
    Holder {
        center: Vec<f64>,
        r0: f64,
        /// Defaults to the schedule's admissible ratio.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
        #[serde(default = "default_levels")]
        levels: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_b: Option<f64>,
    },
    /// Extremal iteration sequences: the dyadic case plus `cases` random
    /// at-threshold parameter sets.
    DeGiorgi {
        #[serde(default = "default_cases")]
        cases: usize,
        #[serde(default = "default_steps")]
        steps: usize,
    },
    /// Structural inequalities of the problem's N-function on random samples.
    Nfunction {
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    /// Luxemburg norm contract on a corpus.
    Luxemburg {
        corpus: CorpusSpec,
    },
}

fn hat() -> CutoffProfile {
    CutoffProfile::Hat
}

fn plus() -> Sign {
    Sign::Plus
}

fn default_levels() -> usize {
    8
}

fn default_cases() -> usize {
    1000
}

fn default_steps() -> usize {
    40
}

fn default_samples() -> usize {
    10_000
}

fn default_eps() -> f64 {
    0.25
}

impl EstimateConfig {
    /// Estimates evaluated on the minimizer.
    pub fn needs_solution(&self) -> bool {
        matches!(
            self,
            EstimateConfig::Boundedness { .. }
                | EstimateConfig::Caccioppoli { .. }
                | EstimateConfig::Logarithmic { .. }
                | EstimateConfig::SobolevPoincare { .. }
                | EstimateConfig::Holder { .. }
        )
    }

    pub fn is_random(&self) -> bool {
        matches!(
            self,
            EstimateConfig::DeGiorgi { .. }
                | EstimateConfig::Nfunction { .. }
                | EstimateConfig::Luxemburg { .. }
                | EstimateConfig::SobolevPoincare { corpus: Some(_), .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EstimateConfig::Boundedness { .. } => "boundedness",
            EstimateConfig::Caccioppoli { .. } => "caccioppoli",
            EstimateConfig::Logarithmic { .. } => "logarithmic",
            EstimateConfig::SobolevPoincare { .. } => "sobolev_poincare",
            EstimateConfig::Holder { .. } => "holder",
            EstimateConfig::DeGiorgi { .. } => "de_giorgi",
            EstimateConfig::Nfunction { .. } => "nfunction",
            EstimateConfig::Luxemburg { .. } => "luxemburg",
        }
    }
}

/// Cartesian grid of overrides applied to the fields of one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub estimate: String,
    pub grid: BTreeMap<String, Vec<Value>>,
}

/// Parameter overrides of one sweep point and the resulting estimate.
pub type SweepPoint = (BTreeMap<String, Value>, EstimateConfig);

impl SweepConfig {
    /// Every grid point as `(overrides, estimate)`, in lexicographic order of
    /// the parameter indices with parameters sorted by name.
    pub fn points(&self, base: &EstimateConfig) -> Result<Vec<SweepPoint>, CliError> {
        let base = serde_json::to_value(base).map_err(|e| CliError::schema(e.to_string()))?;
        let keys: Vec<&String> = self.grid.keys().collect();
        if let Some(k) = keys.iter().find(|k| k.as_str() == "kind") {
            return Err(CliError::schema(format!("sweep cannot vary {k:?}")));
        }
        if let Some((k, _)) = self.grid.iter().find(|(_, v)| v.is_empty()) {
            return Err(CliError::schema(format!("sweep parameter {k:?} has no values")));
        }
        let mut idx = vec![0usize; keys.len()];
        let mut out = Vec::new();
        loop {
            let mut overrides = BTreeMap::new();
            let mut obj = base.clone();
            for (k, &i) in keys.iter().zip(&idx) {
                let v = self.grid[*k][i].clone();
                obj[k.as_str()] = v.clone();
                overrides.insert((*k).clone(), v);
            }
            let est: EstimateConfig =
                serde_json::from_value(obj).map_err(|e| CliError::schema(format!("sweep point {overrides:?}: {e}")))?;
            out.push((overrides, est));
            let mut axis = keys.len();
            loop {
                if axis == 0 {
                    return Ok(out);
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < self.grid[keys[axis]].len() {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stage {
    Solve,
    /// Compare the minimizer with the direct linear solve.
    Oracle,
    Verify(String),
    Sweep(String),
}

impl Stage {
    pub fn parse(s: &str) -> Result<Stage, CliError> {
        match s.split_once(':') {
            None if s == "solve" => Ok(Stage::Solve),
            None if s == "oracle" => Ok(Stage::Oracle),
            Some(("verify", name)) if !name.is_empty() => Ok(Stage::Verify(name.to_string())),
            Some(("sweep", name)) if !name.is_empty() => Ok(Stage::Sweep(name.to_string())),
            _ => Err(CliError::schema(format!("unknown stage {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolveOptions,
    pub pipeline: Vec<String>,
    #[serde(default)]
    pub estimates: BTreeMap<String, EstimateConfig>,
    #[serde(default)]
    pub sweeps: BTreeMap<String, SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Overrides keyed by `solve`, `oracle` or an estimate name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub bounds: EstimateBounds,
}

/// Default sup-norm tolerance of the oracle stage.
pub const ORACLE_TOL: f64 = 1e-8;

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn stages(&self) -> Result<Vec<Stage>, CliError> {
        self.pipeline.iter().map(|s| Stage::parse(s)).collect()
    }

    /// Checks stage references, seeds and tolerance keys.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.pipeline.is_empty() {
            return Err(CliError::schema("pipeline is empty"));
        }
        let mut random = self.problem.data.is_random();
        for stage in self.stages()? {
            match stage {
                Stage::Solve | Stage::Oracle => {}
                Stage::Verify(name) => random |= self.estimate(&name)?.is_random(),
                Stage::Sweep(name) => {
                    let sweep =
                        self.sweeps.get(&name).ok_or_else(|| CliError::schema(format!("unknown sweep {name:?}")))?;
                    let base = self.estimate(&sweep.estimate)?;
                    random |= sweep.points(base)?.iter().any(|(_, e)| e.is_random());
                }
            }
        }
        if random && self.seed.is_none() {
            return Err(CliError::schema("a stage samples randomly but no seed is given"));
        }
        for (key, tol) in &self.tolerances {
            if key != "solve" && key != "oracle" && !self.estimates.contains_key(key) {
                return Err(CliError::schema(format!("tolerance for unknown stage {key:?}")));
            }
            if !(*tol > 0.0 && tol.is_finite()) {
                return Err(CliError::schema(format!("tolerance {key:?} must be positive")));
            }
        }
        Ok(())
    }

    pub fn estimate(&self, name: &str) -> Result<&EstimateConfig, CliError> {
        self.estimates.get(name).ok_or_else(|| CliError::schema(format!("unknown estimate {name:?}")))
    }

    pub fn solve_options(&self) -> SolveOptions {
        let mut opts = self.solver;
        if let Some(&tol) = self.tolerances.get("solve") {
            opts.tol = tol;
        }
        opts
    }

    pub fn oracle_tol(&self) -> f64 {
        self.tolerances.get("oracle").copied().unwrap_or(ORACLE_TOL)
    }
}
