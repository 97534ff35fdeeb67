//! File-backed run configuration.
//!
//! One TOML file drives the whole pipeline: solver hyperparameters, data
//! generation, directory layout, and evaluation settings. `print-config`
//! emits the defaults in the same format this module parses.

use std::path::{Path, PathBuf};

use disagg_core::datagen::{DeviceRole, DeviceSpec, Household, SignatureShape};
use disagg_core::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Score the active/passive split only.
    Activity,
    /// Score every predicted channel against per-device truth.
    Multichannel,
}

/// One `[[device]]` table; mirrors [`DeviceSpec`] with plain-text enums.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub name: String,
    /// One of `rectangular`, `spiked_cycle`, `ramp`, `double_pulse`.
    pub shape: String,
    /// Only meaningful for `spiked_cycle`.
    #[serde(default = "default_spike_fraction")]
    pub spike_fraction: f64,
    pub duration_minutes: [u32; 2],
    pub amplitude: [f64; 2],
    pub activations_per_day: f64,
    #[serde(default)]
    pub amplitude_jitter: f64,
    #[serde(default)]
    pub duration_jitter: f64,
    /// `active` or `passive`.
    pub role: String,
}

fn default_spike_fraction() -> f64 {
    0.8
}

impl DeviceConfig {
    fn to_spec(&self) -> Result<DeviceSpec, CliError> {
        let shape = match self.shape.as_str() {
            "rectangular" => SignatureShape::Rectangular,
            "spiked_cycle" => SignatureShape::SpikedCycle {
                spike_fraction: self.spike_fraction,
            },
            "ramp" => SignatureShape::Ramp,
            "double_pulse" => SignatureShape::DoublePulse,
            other => {
                return Err(usage(format!(
                    "device {}: unknown shape {other:?} (expected rectangular, \
                     spiked_cycle, ramp, or double_pulse)",
                    self.name
                )))
            }
        };
        let role = match self.role.as_str() {
            "active" => DeviceRole::Active,
            "passive" => DeviceRole::Passive,
            other => {
                return Err(usage(format!(
                    "device {}: unknown role {other:?} (expected active or passive)",
                    self.name
                )))
            }
        };
        Ok(DeviceSpec {
            name: self.name.clone(),
            shape,
            duration_minutes: (self.duration_minutes[0], self.duration_minutes[1]),
            amplitude: (self.amplitude[0], self.amplitude[1]),
            activations_per_day: self.activations_per_day,
            amplitude_jitter: self.amplitude_jitter,
            duration_jitter: self.duration_jitter,
            role,
        })
    }

    fn from_spec(spec: &DeviceSpec) -> Self {
        let (shape, spike_fraction) = match spec.shape {
            SignatureShape::Rectangular => ("rectangular", default_spike_fraction()),
            SignatureShape::SpikedCycle { spike_fraction } => ("spiked_cycle", spike_fraction),
            SignatureShape::Ramp => ("ramp", default_spike_fraction()),
            SignatureShape::DoublePulse => ("double_pulse", default_spike_fraction()),
        };
        DeviceConfig {
            name: spec.name.clone(),
            shape: shape.to_string(),
            spike_fraction,
            duration_minutes: [spec.duration_minutes.0, spec.duration_minutes.1],
            amplitude: [spec.amplitude.0, spec.amplitude.1],
            activations_per_day: spec.activations_per_day,
            amplitude_jitter: spec.amplitude_jitter,
            duration_jitter: spec.duration_jitter,
            role: match spec.role {
                DeviceRole::Active => "active".to_string(),
                DeviceRole::Passive => "passive".to_string(),
            },
        }
    }
}

/// Everything a pipeline run needs, loaded from one TOML file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // Solver.
    pub lambda_passive: f64,
    pub lambda_active: f64,
    pub num_channels: usize,
    pub half_width: usize,
    pub epsilon: f64,
    pub alpha_bar: [f64; 2],
    pub beta_bar: [f64; 2],
    pub alpha_step: f64,
    pub beta_step: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub step_scale: f64,

    // Directory layout.
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,

    // Data generation.
    pub days: u32,
    pub sample_period_seconds: u32,
    /// Empty means the built-in four-device household.
    #[serde(default, rename = "device")]
    pub devices: Vec<DeviceConfig>,

    // Evaluation.
    pub mode: Mode,
    pub radius: usize,
    pub threshold_fraction: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        RunConfig {
            lambda_passive: solver.lambda_passive,
            lambda_active: solver.lambda_active,
            num_channels: solver.num_channels,
            half_width: solver.half_width,
            epsilon: solver.epsilon,
            alpha_bar: [solver.alpha_bar.0, solver.alpha_bar.1],
            beta_bar: [solver.beta_bar.0, solver.beta_bar.1],
            alpha_step: solver.alpha_step,
            beta_step: solver.beta_step,
            rel_tol: solver.rel_tol,
            max_iter: solver.max_iter,
            seed: solver.seed,
            step_scale: solver.step_scale,
            input_dir: PathBuf::from("data"),
            output_dir: PathBuf::from("data"),
            days: 28,
            sample_period_seconds: 60,
            devices: Vec::new(),
            mode: Mode::Activity,
            radius: 7,
            threshold_fraction: 0.01,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| usage(format!("bad config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.solver_config()
            .validate()
            .map_err(|e| usage(e.to_string()))?;
        if self.input_dir.as_os_str().is_empty() || self.output_dir.as_os_str().is_empty() {
            return Err(usage("input_dir and output_dir must be nonempty"));
        }
        if !(self.threshold_fraction.is_finite() && (0.0..1.0).contains(&self.threshold_fraction))
        {
            return Err(usage("threshold_fraction must lie in [0, 1)"));
        }
        for device in &self.devices {
            device
                .to_spec()?
                .validate()
                .map_err(|e| usage(e.to_string()))?;
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            lambda_passive: self.lambda_passive,
            lambda_active: self.lambda_active,
            num_channels: self.num_channels,
            half_width: self.half_width,
            epsilon: self.epsilon,
            alpha_bar: (self.alpha_bar[0], self.alpha_bar[1]),
            beta_bar: (self.beta_bar[0], self.beta_bar[1]),
            alpha_step: self.alpha_step,
            beta_step: self.beta_step,
            rel_tol: self.rel_tol,
            max_iter: self.max_iter,
            seed: self.seed,
            step_scale: self.step_scale,
        }
    }

    pub fn household(&self) -> Result<Household, CliError> {
        let devices = if self.devices.is_empty() {
            disagg_core::datagen::default_devices()
        } else {
            self.devices
                .iter()
                .map(|d| d.to_spec())
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(Household {
            devices,
            days: self.days,
            sample_period_seconds: self.sample_period_seconds,
            seed: self.seed,
        })
    }

    /// The defaults as a TOML document, with the built-in devices spelled
    /// out so they can be copied and edited.
    pub fn default_toml() -> String {
        let mut config = RunConfig::default();
        config.devices = disagg_core::datagen::default_devices()
            .iter()
            .map(DeviceConfig::from_spec)
            .collect();
        toml::to_string_pretty(&config).expect("default config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_toml_round_trips() {
        let text = RunConfig::default_toml();
        let parsed: RunConfig = toml::from_str(&text).unwrap();
        parsed.validate().unwrap();
        assert_eq!(parsed.num_channels, RunConfig::default().num_channels);
        assert_eq!(parsed.devices.len(), 4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = RunConfig::default_toml();
        text.push_str("\nmystery_knob = 3\n");
        assert!(toml::from_str::<RunConfig>(&text).is_err());
    }

    #[test]
    fn bad_shape_is_rejected() {
        let mut config = RunConfig::default();
        config.devices.push(DeviceConfig {
            name: "x".into(),
            shape: "triangle".into(),
            spike_fraction: 0.8,
            duration_minutes: [1, 2],
            amplitude: [0.5, 1.0],
            activations_per_day: 1.0,
            amplitude_jitter: 0.0,
            duration_jitter: 0.0,
            role: "active".into(),
        });
        assert!(config.validate().is_err());
    }

    #[test]
    fn empty_device_list_uses_builtin_household() {
        let config = RunConfig::default();
        let household = config.household().unwrap();
        assert_eq!(household.devices.len(), 4);
    }
}
