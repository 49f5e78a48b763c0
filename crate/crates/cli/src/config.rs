//! Scenario configuration: a versioned TOML document with the field
//! selection and one block per subcommand. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use axiflow_core::scan::ScanParams;
use axiflow_core::FieldSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Either an explicit list of values or an inclusive linspace.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Linspace { start: f64, stop: f64, count: usize },
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Linspace { start, stop, count } => {
                let n = (*count).max(2);
                (0..n)
                    .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub field: FieldSpec,
    #[serde(default)]
    pub fields: Option<FieldsBlock>,
    #[serde(default)]
    pub trace: Option<TraceBlock>,
    #[serde(default)]
    pub atlas: Option<AtlasBlock>,
    #[serde(default)]
    pub frames: Option<FramesBlock>,
    #[serde(default)]
    pub identities: Option<IdentitiesBlock>,
    #[serde(default)]
    pub scan: Option<ScanParams>,
}

/// Sampling block of the `fields` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldsBlock {
    pub r_grid: GridSpec,
    pub z_grid: GridSpec,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TraceBlock {
    /// Seeds as (r, theta, z).
    pub seeds: Vec<[f64; 3]>,
    pub t_span: [f64; 2],
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtlasBlock {
    pub t: f64,
    pub rbar0_grid: GridSpec,
    pub z_grid: GridSpec,
    /// Inflow station; omitted means the field's default.
    #[serde(default)]
    pub z_in: Option<f64>,
    /// Probe points of the rates table (defaults to the grids).
    #[serde(default)]
    pub rates_rbar0: Option<GridSpec>,
    #[serde(default)]
    pub rates_z: Option<GridSpec>,
    #[serde(default = "default_lt_dt")]
    pub lt_dt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FramesBlock {
    pub seed: [f64; 3],
    pub t_span: [f64; 2],
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesBlock {
    pub seed: [f64; 3],
    pub t_span: [f64; 2],
    pub probes: Vec<f64>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    /// Override of the frame-derivative FD step (defaults to the
    /// curvature-scaled rule).
    #[serde(default)]
    pub fd_step: Option<f64>,
}

fn default_rel_tol() -> f64 {
    1e-10
}

fn default_lt_dt() -> f64 {
    1e-3
}

fn default_n_samples() -> usize {
    20
}

#[derive(Debug)]
pub enum ConfigError {
    Parse(String),
    Validation(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Validation(m) => write!(f, "config validation error: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Validation(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::Validation(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        if let Some(t) = &self.trace {
            positive("trace.rel_tol", t.rel_tol)?;
            if t.seeds.is_empty() {
                return Err(ConfigError::Validation("trace.seeds is empty".into()));
            }
        }
        if let Some(a) = &self.atlas {
            positive("atlas.lt_dt", a.lt_dt)?;
        }
        if let Some(f) = &self.frames {
            positive("frames.rel_tol", f.rel_tol)?;
        }
        if let Some(i) = &self.identities {
            positive("identities.rel_tol", i.rel_tol)?;
            if let Some(h) = i.fd_step {
                positive("identities.fd_step", h)?;
            }
        }
        Ok(())
    }
}
