//! The model that generates detector outcomes. It may differ from the
//! receiver's [`InferenceModel`]: most notably it can include the feedback
//! delay, which the receiver never models.

use serde::{Deserialize, Serialize};

use crate::bayes::InferenceModel;
use crate::delay::{off_prob_bin_with_delay, DelayParams};
use crate::error::Result;
use crate::physics::{check_symbol, off_probability_quarter, SYMBOLS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthModel {
    pub model: InferenceModel,
    pub delay: Option<DelayParams>,
}

impl TruthModel {
    /// Outcomes drawn from the same model the receiver infers with.
    pub fn matched(model: &InferenceModel) -> Self {
        Self {
            model: *model,
            delay: None,
        }
    }

    pub fn with_delay(model: &InferenceModel, delay: DelayParams) -> Result<Self> {
        delay.validate()?;
        Ok(Self {
            model: *model,
            delay: Some(delay),
        })
    }

    pub fn stages(&self) -> usize {
        self.model.stages
    }

    /// Off probability of true symbol `m` in a bin that nulls `target`,
    /// where the previous bin nulled `prev_target`. The first bin of a state
    /// passes `prev_target == target`.
    pub fn bin_off_probability(&self, m: usize, prev_target: usize, target: usize) -> Result<f64> {
        check_symbol(m)?;
        check_symbol(prev_target)?;
        check_symbol(target)?;
        let gamma_sq = self.model.gamma_sq();
        let nu = self.model.nu_per_bin();
        match &self.delay {
            Some(delay) if prev_target != target => off_prob_bin_with_delay(
                m,
                prev_target,
                target,
                gamma_sq,
                delay,
                &self.model.channel,
                nu,
            ),
            _ => Ok(off_probability_quarter(
                m as i64 - target as i64,
                gamma_sq,
                &self.model.channel,
                nu,
            )),
        }
    }

    pub fn table(&self) -> Result<TruthTable> {
        let mut off = [[[0.0; SYMBOLS]; SYMBOLS]; SYMBOLS];
        for (m, by_prev) in off.iter_mut().enumerate() {
            for (prev, row) in by_prev.iter_mut().enumerate() {
                for (target, p) in row.iter_mut().enumerate() {
                    *p = self.bin_off_probability(m, prev, target)?;
                }
            }
        }
        Ok(TruthTable { off })
    }
}

/// Precomputed off probabilities indexed by `[m][prev_target][target]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthTable {
    off: [[[f64; SYMBOLS]; SYMBOLS]; SYMBOLS],
}

impl TruthTable {
    pub fn off(&self, m: usize, prev_target: usize, target: usize) -> f64 {
        self.off[m][prev_target][target]
    }
}
