//! Run configuration: a flat JSON document, overridable from the command
//! line, with the experimental operating point as defaults.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::delay::DelayParams;
use crate::error::{check_non_negative, check_unit, Error, Result};
use crate::monte_carlo::{DelayTiming, ReceiverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Bounds,
    Sweep,
    DelaySweep,
    EfficiencySweep,
    StagesSweep,
    Enumerate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Bounds => "bounds",
            Mode::Sweep => "sweep",
            Mode::DelaySweep => "delay-sweep",
            Mode::EfficiencySweep => "efficiency-sweep",
            Mode::StagesSweep => "stages-sweep",
            Mode::Enumerate => "enumerate",
        }
    }

    /// Signal grid used when the configuration does not give one.
    pub fn default_alpha_grid(self) -> Grid {
        match self {
            Mode::Bounds => Grid::linear(0.0, 10.0, 41),
            Mode::DelaySweep => Grid::linear(3.3, 9.4, 2),
            Mode::StagesSweep => Grid::linear(4.0, 4.0, 1),
            _ => Grid::linear(0.5, 12.0, 24),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::Config(format!("unknown mode `{s}`")))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// `points` values from `start` to `stop` inclusive. Written as
/// `start:stop:points[:log]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        Self {
            start,
            stop,
            points,
            spacing: Spacing::Linear,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let f = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => {
                        if i == self.points - 1 {
                            self.stop
                        } else {
                            self.start + (self.stop - self.start) * f
                        }
                    }
                    Spacing::Log => {
                        if i == self.points - 1 {
                            self.stop
                        } else {
                            self.start * (self.stop / self.start).powf(f)
                        }
                    }
                }
            })
            .collect()
    }

    fn validate(&self, field: &'static str) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParameter { field, reason });
        if self.points == 0 {
            return bad("grid needs at least one point".into());
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return bad("grid bounds must be finite".into());
        }
        if self.spacing == Spacing::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return bad("log spacing needs positive bounds".into());
        }
        Ok(())
    }
}

impl FromStr for Grid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("grid `{s}` is not start:stop:points[:log]"));
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let spacing = match parts.get(3) {
            None | Some(&"lin") | Some(&"linear") => Spacing::Linear,
            Some(&"log") => Spacing::Log,
            Some(_) => return Err(bad()),
        };
        Ok(Self {
            start: parts[0].trim().parse().map_err(|_| bad())?,
            stop: parts[1].trim().parse().map_err(|_| bad())?,
            points: parts[2].trim().parse().map_err(|_| bad())?,
            spacing,
        })
    }
}

impl TryFrom<String> for Grid {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.points)?;
        if self.spacing == Spacing::Log {
            f.write_str(":log")?;
        }
        Ok(())
    }
}

/// Everything a run needs. Times are in microseconds, `nu` is dark counts per
/// signal state, `eta_t` the optical transmittance and `eta_spd` the detector
/// efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_sq_grid: Option<Grid>,
    pub m: usize,
    pub trials: u64,
    pub seed: u64,
    pub eta_t: f64,
    pub eta_spd: f64,
    pub xi: f64,
    pub nu: f64,
    pub t_us: f64,
    pub delta_t_us: f64,
    pub t_hold_us: f64,
    pub t_swing_us: f64,
    pub discard_loss: bool,
    pub truth_delay: bool,
    pub eta_spd_grid: Vec<f64>,
    pub dt_grid: Grid,
    pub m_min: usize,
    pub m_max: usize,
    /// Output path; not echoed into result headers.
    #[serde(skip_serializing)]
    pub out: Option<String>,
    #[serde(skip_serializing)]
    pub json: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let delay = DelayParams::default();
        Self {
            mode: Mode::Sweep,
            alpha_sq_grid: None,
            m: 10,
            trials: 1_000_000,
            seed: 1,
            eta_t: 0.90,
            eta_spd: 0.73,
            xi: 0.996,
            nu: 9.1e-3,
            t_us: 200.0,
            delta_t_us: 1.1,
            t_hold_us: delay.t_hold,
            t_swing_us: delay.t_swing,
            discard_loss: true,
            truth_delay: false,
            eta_spd_grid: vec![0.73, 0.80, 0.90, 1.00],
            dt_grid: Grid::linear(0.0, 3.0, 13),
            m_min: 3,
            m_max: 30,
            out: None,
            json: false,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub alpha_sq_grid: Option<Grid>,
    pub m: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub eta_t: Option<f64>,
    pub eta_spd: Option<f64>,
    pub xi: Option<f64>,
    pub nu: Option<f64>,
    pub delta_t_us: Option<f64>,
    pub truth_delay: Option<bool>,
    pub discard_loss: Option<bool>,
    pub eta_spd_grid: Option<Vec<f64>>,
    pub dt_grid: Option<Grid>,
    pub m_min: Option<usize>,
    pub m_max: Option<usize>,
    pub out: Option<String>,
    pub json: Option<bool>,
}

macro_rules! apply {
    ($cfg:ident, $ov:ident, $($field:ident),*) => {
        $( if let Some(v) = $ov.$field.clone() { $cfg.$field = v; } )*
    };
}

impl RunConfig {
    /// Parses a JSON document, or the echoed configuration in the header of
    /// a CSV result file.
    pub fn from_text(text: &str) -> Result<Self> {
        let json = if text.trim_start().starts_with('#') {
            let header = text.lines().next().unwrap_or_default();
            match header.find(" config=") {
                Some(i) => &header[i + " config=".len()..],
                None => return Err(Error::Config("result header carries no config".into())),
            }
        } else {
            text
        };
        if json.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn apply(&mut self, ov: &Overrides) {
        apply!(
            self,
            ov,
            mode,
            m,
            trials,
            seed,
            eta_t,
            eta_spd,
            xi,
            nu,
            delta_t_us,
            truth_delay,
            discard_loss,
            eta_spd_grid,
            dt_grid,
            m_min,
            m_max,
            json
        );
        if ov.alpha_sq_grid.is_some() {
            self.alpha_sq_grid = ov.alpha_sq_grid;
        }
        if ov.out.is_some() {
            self.out = ov.out.clone();
        }
    }

    /// Fills mode-dependent defaults so the echoed configuration is complete.
    pub fn resolve(&mut self) {
        if self.alpha_sq_grid.is_none() {
            self.alpha_sq_grid = Some(self.mode.default_alpha_grid());
        }
    }

    pub fn alpha_grid(&self) -> Grid {
        self.alpha_sq_grid
            .unwrap_or_else(|| self.mode.default_alpha_grid())
    }

    pub fn eta_total(&self) -> f64 {
        self.eta_t * self.eta_spd
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha_grid().validate("alpha_sq_grid")?;
        if self.alpha_grid().values().iter().any(|&a| a < 0.0) {
            return Err(Error::InvalidParameter {
                field: "alpha_sq_grid",
                reason: "mean photon numbers must be non-negative".into(),
            });
        }
        check_unit("eta_t", self.eta_t)?;
        check_unit("eta_spd", self.eta_spd)?;
        check_unit("xi", self.xi)?;
        check_non_negative("nu", self.nu)?;
        check_non_negative("t_us", self.t_us)?;
        check_non_negative("delta_t_us", self.delta_t_us)?;
        check_non_negative("t_hold_us", self.t_hold_us)?;
        check_non_negative("t_swing_us", self.t_swing_us)?;
        if self.t_us == 0.0 {
            return Err(Error::InvalidParameter {
                field: "t_us",
                reason: "state duration must be positive".into(),
            });
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter {
                field: "m",
                reason: "stage count must be at least 1".into(),
            });
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter {
                field: "trials",
                reason: "trial count must be at least 1".into(),
            });
        }
        if self.m_min == 0 || self.m_min > self.m_max {
            return Err(Error::InvalidParameter {
                field: "m_min",
                reason: format!("stage range {}..={} is empty", self.m_min, self.m_max),
            });
        }
        if self.eta_spd_grid.is_empty() {
            return Err(Error::InvalidParameter {
                field: "eta_spd_grid",
                reason: "needs at least one efficiency".into(),
            });
        }
        for &e in &self.eta_spd_grid {
            check_unit("eta_spd_grid", e)?;
        }
        self.dt_grid.validate("dt_grid")?;
        if self.dt_grid.values().iter().any(|&d| d < 0.0) {
            return Err(Error::InvalidParameter {
                field: "dt_grid",
                reason: "discard times must be non-negative".into(),
            });
        }
        Ok(())
    }

    /// Receiver operating point at one signal level and stage count.
    pub fn receiver(&self, alpha_sq: f64, stages: usize) -> ReceiverConfig {
        ReceiverConfig {
            alpha_sq,
            stages,
            eta_total: self.eta_total(),
            xi: self.xi,
            nu_per_state: self.nu,
            t_state_us: self.t_us,
            delta_t_us: self.delta_t_us,
            discard_loss: self.discard_loss,
            delay: self.truth_delay.then_some(DelayTiming {
                t_hold_us: self.t_hold_us,
                t_swing_us: self.t_swing_us,
            }),
        }
    }

    /// Compact JSON of every computation-relevant field.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("plain data serialises")
    }
}

/// Reads the optional file, applies overrides, fills defaults and validates.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_text(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    cfg.apply(overrides);
    cfg.resolve();
    cfg.validate()?;
    Ok(cfg)
}
