//! Layered run configuration: built-in defaults, then an optional TOML
//! file, then command-line flags, with later layers winning field by
//! field. The resolved values are echoed verbatim into every output so
//! a run can be reproduced from its own artifacts.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use cv_damp_core::params::{ChannelParams, GaussianStateParams};
use num_complex::Complex64;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub state: StateSection,
    pub channel: ChannelSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateSection {
    pub preset: Option<String>,
    pub r: Option<f64>,
    pub n0: Option<f64>,
    pub a10: Option<f64>,
    pub a20: Option<f64>,
    pub b0_re: Option<f64>,
    pub b0_im: Option<f64>,
}

/// Scalar keys apply to both modes; the per-mode keys win over them.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub gamma_amp: Option<f64>,
    pub gamma_amp_1: Option<f64>,
    pub gamma_amp_2: Option<f64>,
    pub gamma_phase: Option<f64>,
    pub gamma_phase_1: Option<f64>,
    pub gamma_phase_2: Option<f64>,
    pub nbar: Option<f64>,
    pub nbar_1: Option<f64>,
    pub nbar_2: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub t: Option<f64>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub grid: Option<usize>,
    pub eps_trace: Option<f64>,
    pub eps_series: Option<f64>,
    pub root_tol: Option<f64>,
    pub cutoff: Option<usize>,
    pub dt_max: Option<f64>,
    pub m_max: Option<usize>,
}

pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Flag values collected by clap; `None` means the flag was absent.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub state: StateSection,
    pub channel: ChannelSection,
    pub run: RunSection,
}

/// Fully resolved parameters for one invocation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub preset: String,
    pub r: f64,
    pub n0: f64,
    pub a10: f64,
    pub a20: f64,
    pub b0_re: f64,
    pub b0_im: f64,
    pub gamma_amp: [f64; 2],
    pub gamma_phase: [f64; 2],
    pub nbar: [f64; 2],
    pub t: f64,
    pub t_max: f64,
    pub steps: usize,
    pub grid: usize,
    pub eps_trace: f64,
    pub eps_series: f64,
    pub root_tol: f64,
    pub cutoff: usize,
    pub dt_max: f64,
}

fn pick<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn in_unit_interval(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must lie in (0,1), got {v}")))
    }
}

pub fn resolve(flags: &Overrides, file: &FileConfig) -> Result<Resolved, CliError> {
    let preset = flags
        .state
        .preset
        .clone()
        .or_else(|| file.state.preset.clone())
        .unwrap_or_else(|| "squeezed_vacuum".into());
    if !matches!(preset.as_str(), "squeezed_vacuum" | "squeezed_thermal" | "explicit") {
        return Err(CliError::Usage(format!(
            "unknown preset {preset:?}; expected squeezed_vacuum, squeezed_thermal, or explicit"
        )));
    }

    // Per-mode channel rates: mode key, then scalar key, then zero.
    let rate = |f1: Option<f64>, f_all: Option<f64>, c1: Option<f64>, c_all: Option<f64>| {
        f1.or(f_all).or(c1).or(c_all).unwrap_or(0.0)
    };
    let ch_f = &flags.channel;
    let ch_c = &file.channel;

    let resolved = Resolved {
        preset,
        r: pick(flags.state.r, file.state.r, 0.5),
        n0: pick(flags.state.n0, file.state.n0, 0.0),
        a10: pick(flags.state.a10, file.state.a10, 1.0),
        a20: pick(flags.state.a20, file.state.a20, 1.0),
        b0_re: pick(flags.state.b0_re, file.state.b0_re, 0.0),
        b0_im: pick(flags.state.b0_im, file.state.b0_im, 0.0),
        gamma_amp: [
            rate(ch_f.gamma_amp_1, ch_f.gamma_amp, ch_c.gamma_amp_1, ch_c.gamma_amp),
            rate(ch_f.gamma_amp_2, ch_f.gamma_amp, ch_c.gamma_amp_2, ch_c.gamma_amp),
        ],
        gamma_phase: [
            rate(ch_f.gamma_phase_1, ch_f.gamma_phase, ch_c.gamma_phase_1, ch_c.gamma_phase),
            rate(ch_f.gamma_phase_2, ch_f.gamma_phase, ch_c.gamma_phase_2, ch_c.gamma_phase),
        ],
        nbar: [
            rate(ch_f.nbar_1, ch_f.nbar, ch_c.nbar_1, ch_c.nbar),
            rate(ch_f.nbar_2, ch_f.nbar, ch_c.nbar_2, ch_c.nbar),
        ],
        t: pick(flags.run.t, file.run.t, 1.0),
        t_max: pick(flags.run.t_max, file.run.t_max, 3.0),
        steps: pick(flags.run.steps, file.run.steps, 300),
        grid: pick(flags.run.grid, file.run.grid, 200),
        eps_trace: pick(flags.run.eps_trace, file.run.eps_trace, 1e-10),
        eps_series: pick(flags.run.eps_series, file.run.eps_series, 1e-12),
        root_tol: pick(flags.run.root_tol, file.run.root_tol, 1e-10),
        cutoff: pick(flags.run.cutoff, file.run.cutoff, 14),
        dt_max: pick(flags.run.dt_max, file.run.dt_max, 0.02),
    };

    in_unit_interval("eps_trace", resolved.eps_trace)?;
    in_unit_interval("eps_series", resolved.eps_series)?;
    in_unit_interval("root_tol", resolved.root_tol)?;
    if resolved.steps < 2 {
        return Err(CliError::Usage(format!("steps must be >= 2, got {}", resolved.steps)));
    }
    if resolved.grid < 2 {
        return Err(CliError::Usage(format!("grid must be >= 2, got {}", resolved.grid)));
    }
    if resolved.cutoff < 2 {
        return Err(CliError::Usage(format!("cutoff must be >= 2, got {}", resolved.cutoff)));
    }
    if !(resolved.dt_max.is_finite() && resolved.dt_max > 0.0) {
        return Err(CliError::Usage(format!("dt_max must be > 0, got {}", resolved.dt_max)));
    }
    Ok(resolved)
}

impl Resolved {
    pub fn state(&self) -> Result<GaussianStateParams, CliError> {
        let s = match self.preset.as_str() {
            "squeezed_vacuum" => GaussianStateParams::squeezed_vacuum(self.r),
            "squeezed_thermal" => GaussianStateParams::squeezed_thermal(self.r, self.n0),
            _ => GaussianStateParams::explicit(
                self.a10,
                self.a20,
                Complex64::new(self.b0_re, self.b0_im),
            ),
        };
        s.map_err(CliError::Core)
    }

    pub fn channel(&self) -> Result<ChannelParams, CliError> {
        ChannelParams::new(self.gamma_amp, self.gamma_phase, self.nbar).map_err(CliError::Core)
    }

    /// Every resolved numeric (and the preset) for the metadata echo;
    /// the map keeps keys sorted, so output order is stable.
    pub fn metadata(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("preset".into(), json!(self.preset));
        match self.preset.as_str() {
            "squeezed_vacuum" => {
                m.insert("r".into(), json!(self.r));
            }
            "squeezed_thermal" => {
                m.insert("r".into(), json!(self.r));
                m.insert("n0".into(), json!(self.n0));
            }
            _ => {
                m.insert("a10".into(), json!(self.a10));
                m.insert("a20".into(), json!(self.a20));
                m.insert("b0_re".into(), json!(self.b0_re));
                m.insert("b0_im".into(), json!(self.b0_im));
            }
        }
        m.insert("gamma_amp_1".into(), json!(self.gamma_amp[0]));
        m.insert("gamma_amp_2".into(), json!(self.gamma_amp[1]));
        m.insert("gamma_phase_1".into(), json!(self.gamma_phase[0]));
        m.insert("gamma_phase_2".into(), json!(self.gamma_phase[1]));
        m.insert("nbar_1".into(), json!(self.nbar[0]));
        m.insert("nbar_2".into(), json!(self.nbar[1]));
        m.insert("eps_trace".into(), json!(self.eps_trace));
        m.insert("eps_series".into(), json!(self.eps_series));
        m.insert("root_tol".into(), json!(self.root_tol));
        m
    }
}
