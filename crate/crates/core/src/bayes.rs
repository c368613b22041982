//! Posterior recursion over the four QPSK hypotheses and the greedy MAP
//! feedback policy.
//!
//! After each bin the receiver multiplies the posterior by the per-bin
//! likelihood of the observed outcome, renormalises, and nulls the most
//! probable hypothesis in the next bin. Arithmetic is done on log-weights so
//! long histories at large photon numbers do not underflow.

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, Error, Result};
use crate::physics::{check_symbol, mean_clicks_quarter, ChannelModel, Outcome, SYMBOLS};

/// Posterior over the four hypotheses, stored as normalised log-probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    log_probs: [f64; SYMBOLS],
}

impl Posterior {
    pub fn uniform() -> Self {
        Self {
            log_probs: [-(SYMBOLS as f64).ln(); SYMBOLS],
        }
    }

    /// Builds a posterior from explicit probabilities, which must be in
    /// `[0, 1]` and sum to one within `1e-10`.
    pub fn from_probs(probs: [f64; SYMBOLS]) -> Result<Self> {
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter {
                field: "posterior",
                reason: format!("{probs:?} has entries outside [0, 1]"),
            });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter {
                field: "posterior",
                reason: format!("entries sum to {sum}"),
            });
        }
        Ok(Self {
            log_probs: probs.map(f64::ln),
        })
    }

    pub fn probs(&self) -> [f64; SYMBOLS] {
        self.log_probs.map(f64::exp)
    }

    pub fn prob(&self, m: usize) -> f64 {
        self.log_probs[m].exp()
    }

    pub fn log_probs(&self) -> &[f64; SYMBOLS] {
        &self.log_probs
    }

    /// Most probable hypothesis; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for m in 1..SYMBOLS {
            if self.log_probs[m] > self.log_probs[best] {
                best = m;
            }
        }
        best
    }

    /// Multiplies by `exp(log_likelihoods)` and renormalises.
    pub fn reweighted(&self, log_likelihoods: &[f64; SYMBOLS]) -> Result<Self> {
        let mut w = [0.0; SYMBOLS];
        for m in 0..SYMBOLS {
            w[m] = self.log_probs[m] + log_likelihoods[m];
        }
        let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Numeric(format!(
                "posterior update has no supported hypothesis (log weights {w:?})"
            )));
        }
        let norm = max + w.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        Ok(Self {
            log_probs: w.map(|x| x - norm),
        })
    }
}

/// Detector outcomes observed so far; never longer than the stage count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeHistory {
    bits: Vec<Outcome>,
    stages: usize,
}

impl OutcomeHistory {
    pub fn new(stages: usize) -> Self {
        Self {
            bits: Vec::with_capacity(stages),
            stages,
        }
    }

    pub fn push(&mut self, e: Outcome) -> Result<()> {
        if self.bits.len() >= self.stages {
            return Err(Error::InvalidParameter {
                field: "history",
                reason: format!("already holds {} outcomes", self.stages),
            });
        }
        self.bits.push(e);
        Ok(())
    }

    pub fn bits(&self) -> &[Outcome] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Click model used by the receiver to update its posterior.
///
/// `channel.eta_total` is the efficiency the receiver believes in, including
/// any discard-window loss. Feedback delay is never part of the inference
/// model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceModel {
    pub alpha_sq: f64,
    pub stages: usize,
    pub channel: ChannelModel,
    pub nu_per_state: f64,
}

impl InferenceModel {
    pub fn new(
        alpha_sq: f64,
        stages: usize,
        channel: ChannelModel,
        nu_per_state: f64,
    ) -> Result<Self> {
        check_non_negative("alpha_sq", alpha_sq)?;
        check_non_negative("nu", nu_per_state)?;
        // revalidate in case the channel was built with a struct literal
        let channel = ChannelModel::new(channel.eta_total, channel.xi)?;
        if stages == 0 {
            return Err(Error::InvalidParameter {
                field: "m",
                reason: "stage count must be at least 1".into(),
            });
        }
        Ok(Self {
            alpha_sq,
            stages,
            channel,
            nu_per_state,
        })
    }

    /// Unit efficiency, unit visibility, no dark counts.
    pub fn ideal(alpha_sq: f64, stages: usize) -> Result<Self> {
        Self::new(alpha_sq, stages, ChannelModel::ideal(), 0.0)
    }

    /// Per-bin signal mean photon number `|alpha|^2 / M`.
    pub fn gamma_sq(&self) -> f64 {
        self.alpha_sq / self.stages as f64
    }

    pub fn nu_per_bin(&self) -> f64 {
        self.nu_per_state / self.stages as f64
    }

    /// Off probability for a hypothesis `offset` quarter turns away from the
    /// nulled one.
    pub fn off_probability(&self, offset: i64) -> f64 {
        (-self.mean_clicks(offset)).exp()
    }

    fn mean_clicks(&self, offset: i64) -> f64 {
        mean_clicks_quarter(offset, self.gamma_sq(), &self.channel, self.nu_per_bin())
    }

    pub fn likelihood_table(&self) -> LikelihoodTable {
        let mut log_off = [0.0; SYMBOLS];
        let mut log_on = [0.0; SYMBOLS];
        for d in 0..SYMBOLS {
            let n = self.mean_clicks(d as i64);
            log_off[d] = -n;
            log_on[d] = (-(-n).exp_m1()).ln();
        }
        LikelihoodTable { log_off, log_on }
    }
}

/// Log-likelihoods of each outcome indexed by `(m - target) mod 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodTable {
    log_off: [f64; SYMBOLS],
    log_on: [f64; SYMBOLS],
}

impl LikelihoodTable {
    pub fn log_likelihood(&self, m: usize, target: usize, e: Outcome) -> f64 {
        let d = (m + SYMBOLS - target) % SYMBOLS;
        match e {
            Outcome::Off => self.log_off[d],
            Outcome::On => self.log_on[d],
        }
    }

    /// Log-likelihood of `e` for every hypothesis with `target` nulled.
    pub fn column(&self, target: usize, e: Outcome) -> [f64; SYMBOLS] {
        std::array::from_fn(|m| self.log_likelihood(m, target, e))
    }
}

/// Posterior plus the hypothesis the next bin will null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackState {
    pub posterior: Posterior,
    pub target: usize,
}

impl FeedbackState {
    pub fn update(&self, e: Outcome, table: &LikelihoodTable) -> Result<Self> {
        let posterior = self.posterior.reweighted(&table.column(self.target, e))?;
        Ok(Self {
            target: posterior.argmax(),
            posterior,
        })
    }
}

/// Uniform prior; the first bin nulls symbol 0.
pub fn initial_state() -> FeedbackState {
    FeedbackState {
        posterior: Posterior::uniform(),
        target: 0,
    }
}

/// `p(e | alpha_m / sqrt(M); target nulled)` under the inference model.
pub fn bin_likelihood(model: &InferenceModel, m: usize, target: usize, e: Outcome) -> Result<f64> {
    check_symbol(m)?;
    check_symbol(target)?;
    let p_off = model.off_probability(m as i64 - target as i64);
    Ok(match e {
        Outcome::Off => p_off,
        Outcome::On => 1.0 - p_off,
    })
}

pub fn posterior_update(
    state: &FeedbackState,
    e: Outcome,
    model: &InferenceModel,
) -> Result<FeedbackState> {
    state.update(e, &model.likelihood_table())
}

/// Final MAP decision, lowest index on ties.
pub fn decide(state: &FeedbackState) -> usize {
    state.posterior.argmax()
}
