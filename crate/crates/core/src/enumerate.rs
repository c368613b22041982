//! Exact average error probability by walking all `2^M` outcome histories.
//!
//! Every branch carries the probability of its history under each of the four
//! true symbols, so one walk of the tree yields all per-symbol errors. The
//! receiver's posterior along a branch is computed with the inference model
//! while branch weights come from the truth model.
//!
//! The walk may fork onto worker threads near the root. Sums are always
//! combined as `off-branch + on-branch` at every node, so the result is
//! bitwise the same for every fork depth.

use serde::{Deserialize, Serialize};

use crate::bayes::{decide, initial_state, FeedbackState, InferenceModel, LikelihoodTable};
use crate::error::{Error, Result};
use crate::physics::{Outcome, SYMBOLS};
use crate::truth::{TruthModel, TruthTable};

/// Default cap on the number of enumerated stages.
pub const DEFAULT_MAX_STAGES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumerationResult {
    pub error_prob: f64,
    /// `1 - P(decided m | m)` for each true symbol.
    pub per_symbol_error: [f64; SYMBOLS],
    /// Total probability of all visited histories per true symbol; one up to
    /// rounding.
    pub branch_mass: [f64; SYMBOLS],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Enumerator {
    pub max_stages: usize,
    /// Tree depth down to which branches are forked onto the thread pool.
    pub parallel_depth: usize,
}

impl Default for Enumerator {
    fn default() -> Self {
        Self {
            max_stages: DEFAULT_MAX_STAGES,
            parallel_depth: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    correct: [f64; SYMBOLS],
    mass: [f64; SYMBOLS],
}

impl Tally {
    fn add(self, other: Self) -> Self {
        Self {
            correct: std::array::from_fn(|m| self.correct[m] + other.correct[m]),
            mass: std::array::from_fn(|m| self.mass[m] + other.mass[m]),
        }
    }
}

struct Walk<'a> {
    stages: usize,
    parallel_depth: usize,
    likelihood: &'a LikelihoodTable,
    truth: &'a TruthTable,
}

impl Walk<'_> {
    fn visit(
        &self,
        depth: usize,
        state: FeedbackState,
        prev_target: usize,
        weight: [f64; SYMBOLS],
    ) -> Result<Tally> {
        if weight.iter().all(|&w| w == 0.0) {
            return Ok(Tally::default());
        }
        if depth == self.stages {
            let d = decide(&state);
            let mut correct = [0.0; SYMBOLS];
            correct[d] = weight[d];
            return Ok(Tally {
                correct,
                mass: weight,
            });
        }
        let target = state.target;
        let p_off: [f64; SYMBOLS] = std::array::from_fn(|m| self.truth.off(m, prev_target, target));
        let branch = |e: Outcome| -> Result<Tally> {
            let w: [f64; SYMBOLS] = std::array::from_fn(|m| match e {
                Outcome::Off => weight[m] * p_off[m],
                Outcome::On => weight[m] * (1.0 - p_off[m]),
            });
            if w.iter().all(|&x| x == 0.0) {
                return Ok(Tally::default());
            }
            let next = state.update(e, self.likelihood)?;
            self.visit(depth + 1, next, target, w)
        };
        let (off, on) = if depth < self.parallel_depth {
            rayon::join(|| branch(Outcome::Off), || branch(Outcome::On))
        } else {
            (branch(Outcome::Off), branch(Outcome::On))
        };
        Ok(off?.add(on?))
    }
}

impl Enumerator {
    /// Exact error probability of the receiver that infers with `model` while
    /// outcomes follow `truth` (the matched model when `None`).
    pub fn run(
        &self,
        model: &InferenceModel,
        truth: Option<&TruthModel>,
    ) -> Result<EnumerationResult> {
        let matched = TruthModel::matched(model);
        let truth = truth.unwrap_or(&matched);
        if truth.stages() != model.stages {
            return Err(Error::InvalidParameter {
                field: "m",
                reason: format!(
                    "truth model has {} stages, inference model {}",
                    truth.stages(),
                    model.stages
                ),
            });
        }
        if model.stages > self.max_stages {
            return Err(Error::TooManyStages {
                stages: model.stages,
                max: self.max_stages,
            });
        }
        let likelihood = model.likelihood_table();
        let table = truth.table()?;
        let walk = Walk {
            stages: model.stages,
            parallel_depth: self.parallel_depth,
            likelihood: &likelihood,
            truth: &table,
        };
        let start = initial_state();
        let tally = walk.visit(0, start, start.target, [1.0; SYMBOLS])?;
        let per_symbol_error = tally.correct.map(|c| 1.0 - c);
        let error_prob = 1.0 - tally.correct.iter().sum::<f64>() / SYMBOLS as f64;
        Ok(EnumerationResult {
            error_prob,
            per_symbol_error,
            branch_mass: tally.mass,
        })
    }
}

/// [`Enumerator::run`] with default limits.
pub fn enumerate_error_probability(
    model: &InferenceModel,
    truth: Option<&TruthModel>,
) -> Result<EnumerationResult> {
    Enumerator::default().run(model, truth)
}

/// Probability of one outcome history under true symbol `m`, re-walked
/// bin by bin from scratch.
pub fn history_probability(
    model: &InferenceModel,
    truth: &TruthModel,
    m: usize,
    history: &[Outcome],
) -> Result<f64> {
    let likelihood = model.likelihood_table();
    let mut state = initial_state();
    let mut prev = state.target;
    let mut p = 1.0;
    for &e in history {
        let off = truth.bin_off_probability(m, prev, state.target)?;
        p *= match e {
            Outcome::Off => off,
            Outcome::On => 1.0 - off,
        };
        if p == 0.0 {
            return Ok(0.0);
        }
        prev = state.target;
        state = state.update(e, &likelihood)?;
    }
    Ok(p)
}
