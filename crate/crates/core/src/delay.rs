//! Finite-bandwidth feedback: a bin after a phase change is split into a
//! hold segment (old displacement phase), a linear swing to the new phase and
//! a settled segment at the target phase.
//!
//! Each segment is modelled as a beam-splitter tap of the bin's light:
//! `r1^2` goes to the hold segment, `t1^2 r2^2` to the swing and `t1^2 t2^2`
//! to the settled part. Phases are rotated so the previous target sits at
//! index 0, which is exact by the pi/2 symmetry of the alphabet.
//!
//! The discard window at the start of each bin removes the leading segments'
//! light. The amount of light removed is accounted for separately as a global
//! linear loss already folded into `ChannelModel::eta_total`; here the window
//! only decides which phase condition the surviving light experiences.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, Error, Result};
use crate::physics::{check_symbol, off_probability_quarter, quarter_sin, ChannelModel};

/// Timing of one feedback bin, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayParams {
    pub t_bin: f64,
    pub t_hold: f64,
    pub t_swing: f64,
    pub delta_t: f64,
}

impl Default for DelayParams {
    fn default() -> Self {
        Self {
            t_bin: 20.0,
            t_hold: 0.37,
            t_swing: 0.63,
            delta_t: 1.1,
        }
    }
}

impl DelayParams {
    pub fn new(t_bin: f64, t_hold: f64, t_swing: f64, delta_t: f64) -> Result<Self> {
        let p = Self {
            t_bin,
            t_hold,
            t_swing,
            delta_t,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("t_bin", self.t_bin)?;
        check_non_negative("t_hold_us", self.t_hold)?;
        check_non_negative("t_swing_us", self.t_swing)?;
        check_non_negative("delta_t_us", self.delta_t)?;
        if self.t_bin <= 0.0 {
            return Err(Error::InvalidParameter {
                field: "t_bin",
                reason: "bin duration must be positive".into(),
            });
        }
        if self.t_hold + self.t_swing > self.t_bin {
            return Err(Error::InvalidParameter {
                field: "t_swing_us",
                reason: format!(
                    "hold {} + swing {} exceeds the bin duration {}",
                    self.t_hold, self.t_swing, self.t_bin
                ),
            });
        }
        if self.delta_t > self.t_bin {
            return Err(Error::InvalidParameter {
                field: "delta_t_us",
                reason: format!("{} exceeds the bin duration {}", self.delta_t, self.t_bin),
            });
        }
        Ok(())
    }

    /// Time at which the displacement reaches the target phase.
    pub fn settle_time(&self) -> f64 {
        self.t_hold + self.t_swing
    }

    /// The hold and swing durations that survive the discard window. The
    /// swing keeps its full phase ramp but loses the covered fraction of its
    /// light.
    pub fn after_discard(&self) -> Self {
        let hold = (self.t_hold - self.delta_t).max(0.0);
        let cut = (self.delta_t - self.t_hold).clamp(0.0, self.t_swing);
        Self {
            t_bin: self.t_bin,
            t_hold: hold,
            t_swing: self.t_swing - cut,
            delta_t: 0.0,
        }
    }
}

/// Intensity fractions of the three-segment beam-splitter model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCoefficients {
    pub r1_sq: f64,
    pub t1_sq: f64,
    pub r2_sq: f64,
    pub t2_sq: f64,
}

impl SplitCoefficients {
    pub fn hold_weight(&self) -> f64 {
        self.r1_sq
    }

    pub fn swing_weight(&self) -> f64 {
        self.t1_sq * self.r2_sq
    }

    pub fn settle_weight(&self) -> f64 {
        self.t1_sq * self.t2_sq
    }
}

/// `r1^2 = t_hold / t_bin`, `r2^2 = t_swing / (t_bin t1^2)`.
pub fn split_coefficients(p: &DelayParams) -> Result<SplitCoefficients> {
    let r1_sq = p.t_hold / p.t_bin;
    let t1_sq = 1.0 - r1_sq;
    if t1_sq <= 0.0 {
        return Err(Error::DegenerateSplit(format!(
            "hold segment covers the whole bin (t_hold = {}, t_bin = {})",
            p.t_hold, p.t_bin
        )));
    }
    let r2_sq = (p.t_swing / (p.t_bin * t1_sq)).min(1.0);
    Ok(SplitCoefficients {
        r1_sq,
        t1_sq,
        r2_sq,
        t2_sq: 1.0 - r2_sq,
    })
}

/// Signed shortest rotation from `prev` to `new` in quarter turns, in
/// `{-1, 0, 1, 2}`; the antipodal jump is taken as `+2`.
pub fn signed_span(prev: usize, new: usize) -> i64 {
    match (new as i64 - prev as i64).rem_euclid(4) {
        3 => -1,
        d => d,
    }
}

fn rel(m: usize, reference: usize) -> i64 {
    (m as i64 - reference as i64).rem_euclid(4)
}

fn segment_off(weight: f64, quarter_turns: i64, gamma_sq: f64, ch: &ChannelModel) -> f64 {
    off_probability_quarter(quarter_turns, weight * gamma_sq, ch, 0.0)
}

/// Hold segment: the previous target is still nulled.
pub fn off_prob_hold(
    m: usize,
    prev_target: usize,
    gamma_sq: f64,
    sc: &SplitCoefficients,
    ch: &ChannelModel,
) -> f64 {
    segment_off(sc.hold_weight(), rel(m, prev_target), gamma_sq, ch)
}

/// Settled segment: the new target is nulled.
pub fn off_prob_settle(
    m: usize,
    new_target: usize,
    gamma_sq: f64,
    sc: &SplitCoefficients,
    ch: &ChannelModel,
) -> f64 {
    segment_off(sc.settle_weight(), rel(m, new_target), gamma_sq, ch)
}

/// Swing segment in the continuum limit of the phase ramp.
pub fn off_prob_swing_analytic(
    m: usize,
    prev_target: usize,
    new_target: usize,
    gamma_sq: f64,
    sc: &SplitCoefficients,
    ch: &ChannelModel,
) -> f64 {
    let span = signed_span(prev_target, new_target);
    let m_rel = rel(m, prev_target);
    if span == 0 {
        // no phase motion: the hold condition persists through the window
        return segment_off(sc.swing_weight(), m_rel, gamma_sq, ch);
    }
    let a = ch.eta_total * sc.swing_weight() * gamma_sq;
    let ramp = quarter_sin(m_rel) - quarter_sin(m_rel - span);
    (-2.0 * a + 4.0 * a / (span as f64 * std::f64::consts::PI) * ch.xi * ramp).exp()
}

/// Swing segment as a product over `modes` equal sub-modes with phases
/// `theta_j = span pi/2 (j-1)/(L-1)`, endpoints included.
pub fn off_prob_swing_discrete(
    m: usize,
    prev_target: usize,
    new_target: usize,
    gamma_sq: f64,
    sc: &SplitCoefficients,
    ch: &ChannelModel,
    modes: usize,
) -> Result<f64> {
    if modes < 2 {
        return Err(Error::InvalidParameter {
            field: "modes",
            reason: format!("need at least 2 sub-modes, got {modes}"),
        });
    }
    let span = signed_span(prev_target, new_target) as f64;
    let signal_phase = rel(m, prev_target) as f64 * FRAC_PI_2;
    let g = ch.eta_total * sc.swing_weight() * gamma_sq / modes as f64;
    let last = (modes - 1) as f64;
    let exponent: f64 = (0..modes)
        .map(|j| {
            let theta = span * FRAC_PI_2 * j as f64 / last;
            2.0 * g * (1.0 - ch.xi * (theta - signal_phase).cos())
        })
        .sum();
    Ok((-exponent).exp())
}

/// Off probability of a whole bin whose target changed from `prev_target` to
/// `new_target`, including dark counts. When the target is unchanged this is
/// exactly the delay-free formula.
pub fn off_prob_bin_with_delay(
    m: usize,
    prev_target: usize,
    new_target: usize,
    gamma_sq: f64,
    p: &DelayParams,
    ch: &ChannelModel,
    nu_per_bin: f64,
) -> Result<f64> {
    check_symbol(m)?;
    check_symbol(prev_target)?;
    check_symbol(new_target)?;
    p.validate()?;
    if prev_target == new_target {
        return Ok(off_probability_quarter(
            rel(m, new_target),
            gamma_sq,
            ch,
            nu_per_bin,
        ));
    }
    let sc = split_coefficients(&p.after_discard())?;
    Ok(off_prob_hold(m, prev_target, gamma_sq, &sc, ch)
        * off_prob_swing_analytic(m, prev_target, new_target, gamma_sq, &sc, ch)
        * off_prob_settle(m, new_target, gamma_sq, &sc, ch)
        * (-nu_per_bin).exp())
}
