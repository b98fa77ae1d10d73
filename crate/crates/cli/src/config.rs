//! Run configuration file.

use std::path::{Path, PathBuf};

use optolaser::dynamics::IntegratorConfig;
use optolaser::model::SystemParams;
use optolaser::stochastic::NoiseConfig;
use optolaser::sweep::{Map2DSpec, SweepMode, SweepSpec};
use serde::Deserialize;

/// One run, as read from a TOML file. Unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output path prefix; `--out` overrides it.
    pub output: Option<PathBuf>,
    /// RNG seed for noise ensembles and oracle starts; replaces `noise.base_seed`.
    pub seed: Option<u64>,
    pub params: SystemParams,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub sweep: Option<SweepSection>,
    pub map2d: Option<MapSection>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub steps: usize,
    #[serde(default = "fresh")]
    pub mode: SweepMode,
}

fn fresh() -> SweepMode {
    SweepMode::Fresh
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_steps: usize,
    pub delta_omega1_min: f64,
    pub delta_omega1_max: f64,
    pub delta_omega1_steps: usize,
    #[serde(default = "default_offset")]
    pub offset: f64,
}

fn default_offset() -> f64 {
    2e-3
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
            .map_err(|ConfigError(msg)| ConfigError(format!("{}: {msg}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))?;
        cfg.params
            .validate()
            .map_err(|e| ConfigError(format!("[params] {e}")))?;
        cfg.integrator
            .validate()
            .map_err(|e| ConfigError(format!("[integrator] {e}")))?;
        cfg.noise()
            .validate()
            .map_err(|e| ConfigError(format!("[noise] {e}")))?;
        Ok(cfg)
    }

    pub fn noise(&self) -> NoiseConfig {
        NoiseConfig {
            base_seed: self.seed.unwrap_or(self.noise.base_seed),
            ..self.noise
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let s = self
            .sweep
            .ok_or_else(|| ConfigError("missing [sweep] section".into()))?;
        let spec = SweepSpec {
            omega_min: s.omega_min,
            omega_max: s.omega_max,
            steps: s.steps,
            mode: s.mode,
            integrator: self.integrator,
        };
        spec.validate()
            .map_err(|e| ConfigError(format!("[sweep] {e}")))?;
        Ok(spec)
    }

    pub fn map_spec(&self) -> Result<Map2DSpec, ConfigError> {
        let m = self
            .map2d
            .ok_or_else(|| ConfigError("missing [map2d] section".into()))?;
        let spec = Map2DSpec {
            omega_min: m.omega_min,
            omega_max: m.omega_max,
            omega_steps: m.omega_steps,
            delta_omega1_min: m.delta_omega1_min,
            delta_omega1_max: m.delta_omega1_max,
            delta_omega1_steps: m.delta_omega1_steps,
            offset: m.offset,
            integrator: self.integrator,
        };
        spec.validate()
            .map_err(|e| ConfigError(format!("[map2d] {e}")))?;
        Ok(spec)
    }
}
