use crate::diagnostics::DiagnosticsSpec;
use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelParams};
use crate::spectral::{FourierGrid, Mode, ModeKind, SpectralField};
use crate::timestepper::StepControl;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

fn default_period() -> f64 {
    2.0 * PI
}

fn default_snapshots() -> usize {
    10
}

/// Physical parameters as written in the config; the model is named at the
/// top level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub epsilon: f64,
    pub alpha_o: f64,
    pub beta: f64,
    #[serde(default)]
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    #[serde(default = "default_period")]
    pub period: f64,
}

/// Seeded random band-limited initial profile, added to the listed modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomData {
    pub seed: u64,
    pub n_modes: usize,
    pub max_wavenumber: u32,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run_id: String,
    pub model: ModelKind,
    pub t_final: f64,
    /// Spacing of diagnostics rows; defaults to `t_final / 100`.
    #[serde(default)]
    pub output_stride: f64,
    /// Number of profile snapshots after the initial one, uniform in time.
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    pub params: ParamsSection,
    pub grid: GridSection,
    /// Initial profile: `f` for the bidirectional and f-form models, `u` for
    /// the u-form model.
    #[serde(default)]
    pub initial_data: Vec<Mode>,
    /// Initial `f_t`, bidirectional models only.
    #[serde(default)]
    pub initial_velocity: Vec<Mode>,
    #[serde(default)]
    pub random: Option<RandomData>,
    #[serde(default)]
    pub step: StepControl,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
}

impl RunConfig {
    pub fn model_params(&self) -> ModelParams {
        ModelParams::new(self.model, self.params.epsilon, self.params.alpha_o, self.params.beta)
            .with_mu(self.params.mu)
    }

    pub fn grid(&self) -> Result<Arc<FourierGrid>> {
        FourierGrid::new(self.grid.n_points, self.grid.period)
            .map_err(|e| Error::validation("grid", e.to_string()))
    }

    /// Fills defaults and checks every field; returns the normalized config.
    pub fn validated(mut self) -> Result<Self> {
        if self.run_id.is_empty()
            || !self
                .run_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(Error::validation(
                "run_id",
                "must be non-empty and use only letters, digits, '-', '_' or '.'",
            ));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::validation("t_final", "must be finite and > 0"));
        }
        if self.output_stride == 0.0 {
            self.output_stride = self.t_final / 100.0;
        }
        if !(self.output_stride > 0.0) || !self.output_stride.is_finite() {
            return Err(Error::validation("output_stride", "must be finite and > 0"));
        }
        if self.output_stride > self.t_final {
            return Err(Error::validation("output_stride", "must not exceed t_final"));
        }
        if self.snapshots == 0 {
            return Err(Error::validation("snapshots", "must be >= 1"));
        }
        if !self.grid.n_points.is_power_of_two() || self.grid.n_points < 8 {
            return Err(Error::validation(
                "grid.n_points",
                format!("{} is not a power of two >= 8", self.grid.n_points),
            ));
        }
        if !(self.grid.period > 0.0) || !self.grid.period.is_finite() {
            return Err(Error::validation("grid.period", "must be finite and > 0"));
        }
        self.model_params().validate()?;
        self.step.validate()?;
        let band = (self.grid.n_points / 2) as u32;
        for (field, modes) in [("initial_data", &self.initial_data), ("initial_velocity", &self.initial_velocity)] {
            for m in modes {
                if m.wavenumber >= band {
                    return Err(Error::validation(
                        field,
                        format!("wavenumber {} is outside the grid band |k| < {band}", m.wavenumber),
                    ));
                }
                if !m.amplitude.is_finite() {
                    return Err(Error::validation(field, "amplitudes must be finite"));
                }
            }
        }
        if let Some(r) = &self.random {
            if r.max_wavenumber == 0 || r.max_wavenumber >= band {
                return Err(Error::validation(
                    "random.max_wavenumber",
                    format!("must lie in 1..{band}"),
                ));
            }
            if !r.amplitude.is_finite() {
                return Err(Error::validation("random.amplitude", "must be finite"));
            }
        }
        if !self.model.is_bidirectional() && !self.initial_velocity.is_empty() {
            return Err(Error::validation(
                "initial_velocity",
                "only bidirectional models take an initial velocity",
            ));
        }
        if self.model == ModelKind::UnidirectionalU
            && self
                .initial_data
                .iter()
                .any(|m| m.wavenumber == 0 && m.kind == ModeKind::Cosine && m.amplitude != 0.0)
        {
            return Err(Error::validation(
                "initial_data",
                "the u-form model needs mean-zero data (u = Λf)",
            ));
        }
        if self.diagnostics.sobolev_orders.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::validation("diagnostics.sobolev_orders", "orders must be >= 0"));
        }
        if self.diagnostics.wiener_weights.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::validation("diagnostics.wiener_weights", "weights must be >= 0"));
        }
        Ok(self)
    }

    /// Initial profile and, for bidirectional models, initial velocity.
    pub fn initial_fields(&self, grid: &Arc<FourierGrid>) -> Result<(SpectralField, SpectralField)> {
        let mut data = SpectralField::from_modes(grid, &self.initial_data)?;
        if let Some(r) = &self.random {
            let noise =
                SpectralField::random_band_limited(grid, r.n_modes, r.max_wavenumber, r.amplitude, r.seed)?;
            data = &data + &noise;
        }
        let velocity = SpectralField::from_modes(grid, &self.initial_velocity)?;
        Ok((data, velocity))
    }

    /// Multiplies every initial amplitude by `factor`.
    pub fn scale_amplitude(&mut self, factor: f64) {
        for m in self.initial_data.iter_mut().chain(self.initial_velocity.iter_mut()) {
            m.amplitude *= factor;
        }
        if let Some(r) = &mut self.random {
            r.amplitude *= factor;
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable as TOML")
    }
}

/// Parses a config from TOML text; `origin` names the source in errors.
pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig> {
    let raw: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    raw.validated()
}

/// Reads, parses and validates a run config.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}
