//! QPSK alphabet, displacement arithmetic and on/off click probabilities of a
//! displaced coherent state on a threshold detector.
//!
//! Two click models live here:
//!
//! * [`off_probability`] takes an arbitrary displacement `beta` and ignores
//!   interference visibility: `p(off) = exp(-nu - eta |gamma - beta|^2)`.
//! * [`off_probability_visibility`] assumes the displacement magnitude is
//!   calibrated to the signal (`|beta| = |gamma|`) and degrades the nulling by
//!   the visibility `xi`: `p(off) = exp(-nu - 2 eta (1 - xi cos theta) |gamma|^2)`.
//!
//! The receiver itself only ever uses relative phases that are whole multiples
//! of a quarter turn, so [`off_probability_quarter`] evaluates the second model
//! with an exact cosine table. That keeps symmetric hypotheses bitwise equal.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_unit, Error, Result};

/// Number of symbols in the QPSK alphabet.
pub const SYMBOLS: usize = 4;

/// A coherent-state amplitude in phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexAmplitude {
    pub re: f64,
    pub im: f64,
}

impl ComplexAmplitude {
    pub const ZERO: Self = Self { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "amplitude",
                reason: format!("({re}, {im}) is not finite"),
            });
        }
        Ok(Self { re, im })
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Self {
        let (s, c) = phase.sin_cos();
        Self {
            re: magnitude * c,
            im: magnitude * s,
        }
    }

    /// `|gamma|^2`, the mean photon number of the coherent state.
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn magnitude(self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Phase angle reduced to `[0, 2pi)`.
    pub fn phase(self) -> f64 {
        let p = self.im.atan2(self.re).rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if p >= TAU {
            0.0
        } else {
            p
        }
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            re: self.re * k,
            im: self.im * k,
        }
    }
}

impl Add for ComplexAmplitude {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for ComplexAmplitude {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Neg for ComplexAmplitude {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

/// The four QPSK coherent states `|alpha| exp(i (2m+1) pi/4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpskAlphabet {
    magnitude: f64,
}

impl QpskAlphabet {
    pub fn new(magnitude: f64) -> Result<Self> {
        check_non_negative("alpha", magnitude)?;
        Ok(Self { magnitude })
    }

    /// Builds the alphabet from the signal mean photon number `|alpha|^2`.
    pub fn from_mean_photon_number(alpha_sq: f64) -> Result<Self> {
        check_non_negative("alpha_sq", alpha_sq)?;
        Ok(Self {
            magnitude: alpha_sq.sqrt(),
        })
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.magnitude * self.magnitude
    }

    /// Phase of symbol `m`, `(2m+1) pi/4`.
    pub fn phase(m: usize) -> Result<f64> {
        check_symbol(m)?;
        Ok((2 * m + 1) as f64 * FRAC_PI_4)
    }

    /// Full-state amplitude of symbol `m`.
    pub fn symbol(&self, m: usize) -> Result<ComplexAmplitude> {
        Ok(ComplexAmplitude::from_polar(
            self.magnitude,
            Self::phase(m)?,
        ))
    }
}

/// Single-photon detector: efficiency and dark counts per full signal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub eta: f64,
    pub nu_per_state: f64,
}

impl DetectorModel {
    pub fn new(eta: f64, nu_per_state: f64) -> Result<Self> {
        check_unit("eta", eta)?;
        check_non_negative("nu_per_state", nu_per_state)?;
        Ok(Self { eta, nu_per_state })
    }

    pub fn ideal() -> Self {
        Self {
            eta: 1.0,
            nu_per_state: 0.0,
        }
    }
}

/// Combined transmittance-times-efficiency and displacement visibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub eta_total: f64,
    pub xi: f64,
}

impl ChannelModel {
    pub fn new(eta_total: f64, xi: f64) -> Result<Self> {
        check_unit("eta_total", eta_total)?;
        check_unit("xi", xi)?;
        Ok(Self { eta_total, xi })
    }

    pub fn ideal() -> Self {
        Self {
            eta_total: 1.0,
            xi: 1.0,
        }
    }
}

pub(crate) fn check_symbol(m: usize) -> Result<()> {
    if m < SYMBOLS {
        Ok(())
    } else {
        Err(Error::InvalidSymbol(m))
    }
}

/// Per-bin amplitude `alpha_m / sqrt(M)` of symbol `m` when the state is
/// split into `stages` temporal bins.
pub fn symbol_amplitude(
    alphabet: &QpskAlphabet,
    m: usize,
    stages: usize,
) -> Result<ComplexAmplitude> {
    if stages == 0 {
        return Err(Error::InvalidParameter {
            field: "m",
            reason: "stage count must be at least 1".into(),
        });
    }
    Ok(alphabet.symbol(m)?.scale(1.0 / (stages as f64).sqrt()))
}

/// Off probability for a coherent state `gamma` displaced by `-beta`.
/// Visibility is not modelled here.
pub fn off_probability(
    gamma: ComplexAmplitude,
    beta: ComplexAmplitude,
    det: &DetectorModel,
    nu_per_bin: f64,
) -> f64 {
    (-nu_per_bin - det.eta * (gamma - beta).norm_sqr()).exp()
}

/// Off probability with visibility-limited nulling at relative phase `theta`
/// between signal and displacement direction.
pub fn off_probability_visibility(
    theta: f64,
    gamma_sq: f64,
    ch: &ChannelModel,
    nu_per_bin: f64,
) -> f64 {
    (-mean_clicks(theta.cos(), gamma_sq, ch, nu_per_bin)).exp()
}

/// `cos(k pi/2)` without rounding.
pub fn quarter_cos(k: i64) -> f64 {
    match k.rem_euclid(4) {
        0 => 1.0,
        2 => -1.0,
        _ => 0.0,
    }
}

/// `sin(k pi/2)` without rounding.
pub fn quarter_sin(k: i64) -> f64 {
    match k.rem_euclid(4) {
        1 => 1.0,
        3 => -1.0,
        _ => 0.0,
    }
}

/// Mean click number for a relative phase of `quarter_turns * pi/2`.
pub fn mean_clicks_quarter(
    quarter_turns: i64,
    gamma_sq: f64,
    ch: &ChannelModel,
    nu_per_bin: f64,
) -> f64 {
    mean_clicks(quarter_cos(quarter_turns), gamma_sq, ch, nu_per_bin)
}

/// [`off_probability_visibility`] at `theta = quarter_turns * pi/2`.
pub fn off_probability_quarter(
    quarter_turns: i64,
    gamma_sq: f64,
    ch: &ChannelModel,
    nu_per_bin: f64,
) -> f64 {
    (-mean_clicks_quarter(quarter_turns, gamma_sq, ch, nu_per_bin)).exp()
}

fn mean_clicks(cos_theta: f64, gamma_sq: f64, ch: &ChannelModel, nu_per_bin: f64) -> f64 {
    nu_per_bin + 2.0 * ch.eta_total * (1.0 - ch.xi * cos_theta) * gamma_sq
}

/// Relative phase of symbol `m` with respect to the nulled symbol `target`.
pub fn relative_phase(m: usize, target: usize) -> f64 {
    (m as i64 - target as i64).rem_euclid(4) as f64 * FRAC_PI_2
}

/// Detector outcome of one bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Off = 0,
    On = 1,
}

impl Outcome {
    pub fn bit(self) -> u8 {
        self as u8
    }

    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Self::Off),
            1 => Some(Self::On),
            _ => None,
        }
    }
}

/// Threshold rule turning a uniform variate into a click: off iff `draw < p_off`.
pub fn sample_click(p_off: f64, draw: f64) -> Outcome {
    if draw < p_off {
        Outcome::Off
    } else {
        Outcome::On
    }
}
