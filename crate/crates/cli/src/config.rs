//! Experiment configuration: one JSON document, dotted-path overrides,
//! validation, and construction of the core objects.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use frontlab_core::drift::{DriftTerm, TRACE_CONSTANT};
use frontlab_core::nonlinearity::{make_cubic_with_tails, Nonlinearity, DEFAULT_TAIL_WIDTH};
use frontlab_core::simulator::RunOptions;
use frontlab_core::supersolution::{BvpOptions, ContinuationOptions};
use frontlab_core::wave::WaveOptions;

/// A user error in the configuration: bad JSON, a bad field, or values the
/// core constructors reject.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Cubic {
        theta: f64,
        #[serde(default = "default_tail_width")]
        tail_width: f64,
    },
    /// Samples `(u, f(u))` covering `[0, 1]`.
    Table {
        u: Vec<f64>,
        f: Vec<f64>,
        #[serde(default = "default_tail_width")]
        tail_width: f64,
    },
}

fn default_tail_width() -> f64 {
    DEFAULT_TAIL_WIDTH
}

impl Default for NonlinearitySpec {
    fn default() -> Self {
        NonlinearitySpec::Cubic {
            theta: 0.25,
            tail_width: DEFAULT_TAIL_WIDTH,
        }
    }
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<Nonlinearity, ConfigError> {
        let nl = match self {
            NonlinearitySpec::Cubic { theta, tail_width } => make_cubic_with_tails(*theta, *tail_width),
            NonlinearitySpec::Table { u, f, tail_width } => Nonlinearity::from_table(u.clone(), f.clone(), *tail_width),
        };
        nl.map_err(|e| ConfigError(format!("nonlinearity: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftSpec {
    Zero {
        #[serde(default = "default_x0")]
        x0: f64,
    },
    MollifiedIndicator {
        #[serde(rename = "K")]
        amplitude: f64,
        eps: f64,
        smoothing: f64,
    },
    SharpIndicator {
        #[serde(rename = "K")]
        amplitude: f64,
        eps: f64,
    },
    GaussianBump {
        amplitude: f64,
        x0: f64,
        #[serde(default)]
        center: Option<f64>,
        #[serde(default)]
        width: Option<f64>,
    },
    /// Samples `(x, k(x))` running from `-x0` to 0.
    Table { x: Vec<f64>, k: Vec<f64> },
}

fn default_x0() -> f64 {
    1.0
}

impl Default for DriftSpec {
    fn default() -> Self {
        DriftSpec::Zero { x0: 1.0 }
    }
}

impl DriftSpec {
    pub fn build(&self) -> Result<DriftTerm, ConfigError> {
        let d = match self {
            DriftSpec::Zero { x0 } => DriftTerm::zero(*x0),
            DriftSpec::MollifiedIndicator {
                amplitude,
                eps,
                smoothing,
            } => DriftTerm::mollified_indicator(*amplitude, *eps, *smoothing),
            DriftSpec::SharpIndicator { amplitude, eps } => DriftTerm::sharp_indicator(*amplitude, *eps),
            DriftSpec::GaussianBump {
                amplitude,
                x0,
                center,
                width,
            } => DriftTerm::gaussian_bump(*amplitude, *x0, *center, *width),
            DriftSpec::Table { x, k } => DriftTerm::from_table(x.clone(), k.clone()),
        };
        let d = d.map_err(|e| ConfigError(format!("drift: {e}")))?;
        if d.k_plus() < 0.0 || (0..=200).any(|i| d.k(-d.x0() * i as f64 / 200.0) < 0.0) {
            return Err(ConfigError("drift: k must be non-negative".into()));
        }
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriterionConfig {
    pub trace_constant: f64,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        Self {
            trace_constant: TRACE_CONSTANT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupersolutionConfig {
    pub bvp: BvpOptions,
    pub continuation: ContinuationOptions,
    /// Tolerance of the a posteriori check.
    pub verify_tol: f64,
    /// Right endpoint `a`; the optimal `a` of the criterion when absent.
    pub a: Option<f64>,
}

impl Default for SupersolutionConfig {
    fn default() -> Self {
        Self {
            bvp: BvpOptions::default(),
            continuation: ContinuationOptions::default(),
            verify_tol: 1e-6,
            a: None,
        }
    }
}

/// A `(K, ε)` grid over the mollified indicator family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "K")]
    pub amplitudes: Vec<f64>,
    pub eps: Vec<f64>,
    /// Mollification width as a fraction of `ε`.
    pub smoothing_ratio: f64,
    /// Also classify each point by simulation.
    pub simulate: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            amplitudes: vec![1.0, 5.0, 10.0, 20.0],
            eps: vec![1e-4, 1e-2, 1.0],
            smoothing_ratio: 0.01,
            simulate: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nonlinearity: NonlinearitySpec,
    pub drift: DriftSpec,
    pub wave: WaveOptions,
    pub criterion: CriterionConfig,
    pub supersolution: SupersolutionConfig,
    pub run: RunOptions,
    pub sweep: SweepConfig,
    /// Where artifacts go unless `--out` is given.
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            nonlinearity: NonlinearitySpec::default(),
            drift: DriftSpec::default(),
            wave: WaveOptions::default(),
            criterion: CriterionConfig::default(),
            supersolution: SupersolutionConfig::default(),
            run: RunOptions::default(),
            sweep: SweepConfig::default(),
            output_dir: PathBuf::from("frontlab-out"),
        }
    }
}

/// Sets `path` (dot separated) in `root` to `raw`, read as JSON when it
/// parses and as a string otherwise. Missing objects along the path are
/// created.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("override `{assignment}` is not of the form key=value")))?;
    let path = path.trim();
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(ConfigError(format!("override `{assignment}` has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (depth, key) in keys.iter().enumerate() {
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Default::default());
            } else {
                return Err(ConfigError(format!(
                    "override `{path}`: `{}` is not an object",
                    keys[..depth].join(".")
                )));
            }
        }
        let map = node.as_object_mut().expect("checked above");
        if depth + 1 == keys.len() {
            map.insert((*key).to_string(), value);
            return Ok(());
        }
        node = map.entry((*key).to_string()).or_insert(Value::Null);
    }
    unreachable!("the loop returns at the last key")
}

/// Parses `text`, applies the overrides and validates the result.
pub fn load(text: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| ConfigError(format!("config is not valid JSON (line {}, column {}): {e}", e.line(), e.column())))?;
    if !value.is_object() {
        return Err(ConfigError("config must be a JSON object".into()));
    }
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ConfigError(format!("field `{path}`: {}", e.inner()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError(format!("field `{name}` must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    /// Checks every tolerance and step is positive and the grid is usable.
    /// Constructor-level checks happen when the objects are built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("wave.Z", self.wave.z_max)?;
        positive("wave.tol", self.wave.tol)?;
        positive("wave.dz", self.wave.dz)?;
        positive("criterion.trace_constant", self.criterion.trace_constant)?;
        let s = &self.supersolution;
        positive("supersolution.bvp.tol", s.bvp.tol)?;
        positive("supersolution.bvp.grid.h_max", s.bvp.grid.h_max)?;
        positive("supersolution.continuation.tol", s.continuation.tol)?;
        positive("supersolution.verify_tol", s.verify_tol)?;
        if !(s.continuation.r_start < 0.0) {
            return Err(ConfigError("field `supersolution.continuation.r_start` must be negative".into()));
        }
        if let Some(a) = s.a {
            positive("supersolution.a", a)?;
        }
        let r = &self.run;
        positive("run.dt", r.dt)?;
        positive("run.duration", r.duration)?;
        positive("run.monitor_every", r.monitor_every)?;
        positive("run.tol_env", r.tol_env)?;
        positive("run.front_start", r.front_start)?;
        if !(r.grid.x_min < r.grid.x_max) || r.grid.n < 3 {
            return Err(ConfigError(format!(
                "field `run.grid`: need x_min < x_max and n >= 3, got [{}, {}] with n = {}",
                r.grid.x_min, r.grid.x_max, r.grid.n
            )));
        }
        if let Some(m) = r.cutoff_speed {
            positive("run.cutoff_speed", m)?;
        }
        positive("sweep.smoothing_ratio", self.sweep.smoothing_ratio)?;
        if self.sweep.smoothing_ratio >= 0.25 {
            return Err(ConfigError("field `sweep.smoothing_ratio` must be below 0.25".into()));
        }
        for &e in &self.sweep.eps {
            positive("sweep.eps", e)?;
        }
        if self.sweep.amplitudes.iter().any(|k| !(*k >= 0.0)) {
            return Err(ConfigError("field `sweep.K` must hold non-negative values".into()));
        }
        Ok(())
    }
}
