//! Run configuration. Every field is optional; the defaults reproduce the
//! standard suite on `T²` with the antiperiodic spin structure.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use susy_core::homotopy::{Interpolation, MetricFamily};
use susy_core::linalg::RMatrix;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub backend: Backend,
    pub geometry: GeometryConfig,
    /// List of chains in the chain DSL, or `{"file": path}` naming a JSON
    /// file with such a list (relative to the config file).
    pub chains: Option<Value>,
    pub tolerances: Tolerances,
    pub budgets: Budgets,
    pub algebra: AlgebraConfig,
    pub cocycles: CocycleConfig,
    pub sweep: SweepConfig,
    pub diffeo: DiffeoConfig,
    pub h2: H2Config,
    pub lemma: LemmaConfig,
    pub oracle: OracleConfig,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: None,
            backend: Backend::Exact,
            geometry: GeometryConfig::default(),
            chains: None,
            tolerances: Tolerances::default(),
            budgets: Budgets::default(),
            algebra: AlgebraConfig::default(),
            cocycles: CocycleConfig::default(),
            sweep: SweepConfig::default(),
            diffeo: DiffeoConfig::default(),
            h2: H2Config::default(),
            lemma: LemmaConfig::default(),
            oracle: OracleConfig::default(),
            base_dir: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub n: usize,
    /// Metric for single-metric commands; defaults to the family start.
    pub g: Option<Vec<Vec<f64>>>,
    pub family: FamilyConfig,
    pub spin_offsets: Option<Vec<f64>>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { n: 2, g: None, family: FamilyConfig::default(), spin_offsets: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    pub g0: Option<Vec<Vec<f64>>>,
    pub g1: Option<Vec<Vec<f64>>>,
    pub interpolation: InterpolationName,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig { g0: None, g1: None, interpolation: InterpolationName::LogGeodesic }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpolationName {
    Linear,
    LogGeodesic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Certified truncation tail of each evaluation.
    pub eval_tol: f64,
    /// `|J(δw)| ≤ cocycle_tol (1 + ‖w‖)`.
    pub cocycle_tol: f64,
    /// Absolute deviation of cocycle values along the sweep.
    pub sweep_tol: f64,
    /// Relative agreement with the dense oracle.
    pub oracle_tol: f64,
    /// Relative agreement for localization when `|rhs| > localization_floor`.
    pub localization_tol: f64,
    pub localization_floor: f64,
    pub diffeo_tol: f64,
    /// Minimal relative variation of the control chain along the sweep.
    pub control_min_variation: f64,
    /// Relative change of the H2 supremum under cutoff doubling.
    pub h2_refinement_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eval_tol: 1e-14,
            cocycle_tol: 1e-8,
            sweep_tol: 1e-7,
            oracle_tol: 1e-6,
            localization_tol: 1e-6,
            localization_floor: 1e-6,
            diffeo_tol: 1e-10,
            control_min_variation: 1e-3,
            h2_refinement_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Elementary trace terms per evaluation.
    pub trace_terms: u64,
    /// Basis words of the exhaustive algebra check.
    pub algebra_words: u64,
    /// Basis words of the cocycle solver.
    pub cocycle_words: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { trace_terms: 100_000_000, algebra_words: 50_000_000, cocycle_words: 20_000 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgebraConfig {
    pub exhaustive: bool,
    pub max_length: usize,
    pub mode_box: i64,
    /// Negative control: flips one term of `B`.
    pub broken_connes: bool,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        AlgebraConfig { exhaustive: true, max_length: 3, mode_box: 1, broken_connes: false }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CocycleConfig {
    /// `[max_length, mode_box]` pairs; the cocycles of all of them are used.
    pub truncations: Vec<[i64; 2]>,
}

impl Default for CocycleConfig {
    fn default() -> Self {
        CocycleConfig { truncations: vec![[1, 1], [2, 0]] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub samples: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { samples: 11 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffeoConfig {
    pub chains: usize,
    pub max_length: usize,
}

impl Default for DiffeoConfig {
    fn default() -> Self {
        DiffeoConfig { chains: 10, max_length: 3 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct H2Config {
    pub cutoff: f64,
    pub directions: usize,
}

impl Default for H2Config {
    fn default() -> Self {
        H2Config { cutoff: 4.0, directions: 720 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaConfig {
    pub trials: usize,
    pub max_dim: usize,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig { trials: 500, max_dim: 32 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub mode_cutoff: i32,
    pub quad_points: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { mode_cutoff: 3, quad_points: 32 }
    }
}

fn matrix(rows: &[Vec<f64>], n: usize, what: &str) -> Result<RMatrix, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("{what} must be a {n}x{n} matrix")));
    }
    Ok(RMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!("config schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        let n = self.geometry.n;
        if let Some(e) = &self.geometry.spin_offsets {
            if e.len() != n {
                return Err(CliError::Config(format!("{} spin offsets for n = {n}", e.len())));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("eval_tol", t.eval_tol),
            ("cocycle_tol", t.cocycle_tol),
            ("sweep_tol", t.sweep_tol),
            ("oracle_tol", t.oracle_tol),
            ("localization_tol", t.localization_tol),
            ("diffeo_tol", t.diffeo_tol),
        ] {
            if !(v > 0.0) {
                return Err(CliError::Config(format!("tolerance {name} = {v} must be positive")));
            }
        }
        if self.cocycles.truncations.iter().any(|t| t[0] < 0 || t[1] < 0) {
            return Err(CliError::Config("cocycle truncations must be non-negative".into()));
        }
        if self.sweep.samples < 2 {
            return Err(CliError::Config("the sweep needs at least two samples".into()));
        }
        self.metric()?;
        self.family()?;
        Ok(())
    }

    pub fn spin_offsets(&self) -> Vec<f64> {
        self.geometry.spin_offsets.clone().unwrap_or_else(|| vec![0.5; self.geometry.n])
    }

    fn g0(&self) -> Result<RMatrix, CliError> {
        let n = self.geometry.n;
        match &self.geometry.family.g0 {
            Some(m) => matrix(m, n, "geometry.family.g0"),
            None => Ok(RMatrix::identity(n, n)),
        }
    }

    pub fn metric(&self) -> Result<RMatrix, CliError> {
        match &self.geometry.g {
            Some(m) => matrix(m, self.geometry.n, "geometry.g"),
            None => self.g0(),
        }
    }

    pub fn family(&self) -> Result<MetricFamily, CliError> {
        let n = self.geometry.n;
        let g1 = match &self.geometry.family.g1 {
            Some(m) => matrix(m, n, "geometry.family.g1")?,
            None => {
                let mut g = RMatrix::identity(n, n);
                g[(0, 0)] = 4.0;
                g
            }
        };
        let interp = match self.geometry.family.interpolation {
            InterpolationName::Linear => Interpolation::Linear,
            InterpolationName::LogGeodesic => Interpolation::LogGeodesic,
        };
        Ok(MetricFamily::new(self.g0()?, g1, interp)?)
    }

    pub fn require_seed(&self, what: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Config(format!("{what} is randomized: give a seed in the config or with --seed")))
    }

    /// The configured chain documents, each in the chain DSL.
    pub fn chain_docs(&self) -> Result<Option<Vec<Value>>, CliError> {
        let Some(v) = &self.chains else { return Ok(None) };
        let list = match v {
            Value::Object(obj) if obj.contains_key("file") => {
                let f = obj.get("file").and_then(Value::as_str).ok_or_else(|| CliError::Config("chains.file must be a path".into()))?;
                let mut p = PathBuf::from(f);
                if p.is_relative() {
                    if let Some(b) = &self.base_dir {
                        p = b.join(p);
                    }
                }
                let text = std::fs::read_to_string(&p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            other => other.clone(),
        };
        match list {
            Value::Array(items) => Ok(Some(items)),
            _ => Err(CliError::Config("chains must be a list of chains".into())),
        }
    }
}
