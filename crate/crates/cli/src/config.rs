//! Network configuration files.
//!
//! A config is TOML with top-level keys and an optional `[tolerances]`
//! section:
//!
//! ```toml
//! group = "symmetric(4)"
//! reps = ["tensor_identity(defining, 3)", "tensor_identity(defining, 3)", "trivial(3)"]
//! activation = "relu"        # default "relu"
//! bias = "uniform"           # or "fixed"; default "uniform"
//! seed = 1                   # default 0
//! task = "center-of-mass"    # optional
//!
//! [tolerances]
//! solve = 1e-9               # nullspace pivot tolerance
//! check = 1e-8               # equivariance residual tolerance
//! ```

use std::fmt;
use std::str::FromStr;

use equinet::group::NamedGroup;
use equinet::{ActivationSpec, BiasSpace, RepSpec};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    CenterOfMass,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "center-of-mass" => Ok(Self::CenterOfMass),
            _ => Err(format!("unknown task `{s}` (expected center-of-mass)")),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CenterOfMass => f.write_str("center-of-mass"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub solve: f64,
    pub check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solve: equinet::numerics::DEFAULT_TOL,
            check: equinet::network::DEFAULT_CHECK_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub group: NamedGroup,
    pub reps: Vec<RepSpec>,
    pub activation: ActivationSpec,
    pub bias_space: BiasSpace,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub task: Option<Task>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    group: String,
    reps: Vec<String>,
    activation: Option<String>,
    bias: Option<String>,
    seed: Option<u64>,
    task: Option<String>,
    #[serde(default)]
    tolerances: RawTolerances,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    solve: Option<f64>,
    check: Option<f64>,
}

fn positive(path: &str, value: Option<f64>, default: f64) -> Result<f64, String> {
    match value {
        None => Ok(default),
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(format!("{path}: must be a positive number, got {t}")),
    }
}

impl Config {
    /// Parses a config. Errors start with the offending field path, or
    /// `config:` plus the TOML line and column for syntax errors.
    pub fn parse(text: &str) -> Result<Self, String> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| format!("config: {}", e.to_string().trim_end()))?;
        let field = |path: &str, e: &dyn fmt::Display| format!("{path}: {e}");
        let group = raw.group.parse().map_err(|e| field("group", &e))?;
        if raw.reps.len() < 2 {
            return Err(format!("reps: need at least two representations, got {}", raw.reps.len()));
        }
        let reps = raw
            .reps
            .iter()
            .enumerate()
            .map(|(i, r)| r.parse().map_err(|e| field(&format!("reps[{i}]"), &e)))
            .collect::<Result<_, _>>()?;
        let activation = match raw.activation {
            Some(a) => a.parse().map_err(|e| field("activation", &e))?,
            None => ActivationSpec::Relu,
        };
        let bias_space = match raw.bias {
            Some(b) => b.parse().map_err(|e| field("bias", &e))?,
            None => BiasSpace::default(),
        };
        let task = raw.task.map(|t| t.parse().map_err(|e| field("task", &e))).transpose()?;
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            solve: positive("tolerances.solve", raw.tolerances.solve, defaults.solve)?,
            check: positive("tolerances.check", raw.tolerances.check, defaults.check)?,
        };
        Ok(Self {
            group,
            reps,
            activation,
            bias_space,
            seed: raw.seed.unwrap_or(0),
            tolerances,
            task,
        })
    }
}
