//! Seeded Monte Carlo estimate of the receiver error probability.
//!
//! Trials are split evenly over the four true symbols. Trial `k` of symbol
//! `m` always draws from the same ChaCha8 stream, keyed on
//! `(seed, m, k)`, so tallies do not depend on how trials are scheduled
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{decide, initial_state, InferenceModel, LikelihoodTable};
use crate::delay::DelayParams;
use crate::error::{check_non_negative, check_unit, Error, Result};
use crate::physics::{check_symbol, sample_click, ChannelModel, SYMBOLS};
use crate::truth::{TruthModel, TruthTable};

const CHUNK: u64 = 4096;

/// Hold and swing durations of the feedback actuator, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayTiming {
    pub t_hold_us: f64,
    pub t_swing_us: f64,
}

impl Default for DelayTiming {
    fn default() -> Self {
        let d = DelayParams::default();
        Self {
            t_hold_us: d.t_hold,
            t_swing_us: d.t_swing,
        }
    }
}

/// Everything that defines one receiver operating point.
///
/// `eta_total` is the system efficiency (transmittance times detector
/// efficiency). When `discard_loss` is set, the counts in a window of
/// `delta_t_us` at each of the `M - 1` bin boundaries are dropped, which acts
/// as a linear loss `1 - (M-1) delta_t / T` applied on top of `eta_total` for
/// both the truth and the inference model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverConfig {
    pub alpha_sq: f64,
    pub stages: usize,
    pub eta_total: f64,
    pub xi: f64,
    pub nu_per_state: f64,
    pub t_state_us: f64,
    pub delta_t_us: f64,
    pub discard_loss: bool,
    /// Outcomes are generated with the feedback-delay model when set.
    pub delay: Option<DelayTiming>,
}

impl ReceiverConfig {
    pub fn ideal(alpha_sq: f64, stages: usize) -> Self {
        Self {
            alpha_sq,
            stages,
            eta_total: 1.0,
            xi: 1.0,
            nu_per_state: 0.0,
            t_state_us: 200.0,
            delta_t_us: 0.0,
            discard_loss: false,
            delay: None,
        }
    }

    /// The measured operating point: 65% system efficiency, 99.6% visibility,
    /// 9.1e-3 dark counts per state, 1.1 us discard window per boundary of a
    /// 200 us state.
    pub fn experimental(alpha_sq: f64, stages: usize) -> Self {
        Self {
            alpha_sq,
            stages,
            eta_total: 0.65,
            xi: 0.996,
            nu_per_state: 9.1e-3,
            t_state_us: 200.0,
            delta_t_us: 1.1,
            discard_loss: true,
            delay: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("alpha_sq", self.alpha_sq)?;
        check_unit("eta_total", self.eta_total)?;
        check_unit("xi", self.xi)?;
        check_non_negative("nu", self.nu_per_state)?;
        check_non_negative("t_us", self.t_state_us)?;
        check_non_negative("delta_t_us", self.delta_t_us)?;
        if self.stages == 0 {
            return Err(Error::InvalidParameter {
                field: "m",
                reason: "stage count must be at least 1".into(),
            });
        }
        if self.t_state_us <= 0.0 {
            return Err(Error::InvalidParameter {
                field: "t_us",
                reason: "state duration must be positive".into(),
            });
        }
        if self.discard_factor() <= 0.0 {
            return Err(Error::InvalidParameter {
                field: "delta_t_us",
                reason: format!(
                    "{} boundaries of {} us discard the whole {} us state",
                    self.stages - 1,
                    self.delta_t_us,
                    self.t_state_us
                ),
            });
        }
        if let Some(p) = self.delay_params() {
            p.validate()?;
        }
        Ok(())
    }

    /// Fraction of the signal kept after the discard windows.
    pub fn discard_factor(&self) -> f64 {
        if self.discard_loss {
            1.0 - (self.stages as f64 - 1.0) * self.delta_t_us / self.t_state_us
        } else {
            1.0
        }
    }

    pub fn effective_eta(&self) -> f64 {
        self.eta_total * self.discard_factor()
    }

    pub fn bin_duration_us(&self) -> f64 {
        self.t_state_us / self.stages as f64
    }

    pub fn delay_params(&self) -> Option<DelayParams> {
        self.delay.map(|d| DelayParams {
            t_bin: self.bin_duration_us(),
            t_hold: d.t_hold_us,
            t_swing: d.t_swing_us,
            delta_t: if self.discard_loss {
                self.delta_t_us
            } else {
                0.0
            },
        })
    }

    pub fn inference_model(&self) -> Result<InferenceModel> {
        self.validate()?;
        InferenceModel::new(
            self.alpha_sq,
            self.stages,
            ChannelModel::new(self.effective_eta(), self.xi)?,
            self.nu_per_state,
        )
    }

    pub fn truth_model(&self) -> Result<TruthModel> {
        let model = self.inference_model()?;
        match self.delay_params() {
            Some(p) => TruthModel::with_delay(&model, p),
            None => Ok(TruthModel::matched(&model)),
        }
    }

    /// JSON echo of every parameter.
    pub fn digest(&self) -> String {
        serde_json::to_string(self).expect("plain data serialises")
    }
}

/// Seed plus the rule deriving one ChaCha8 stream per `(symbol, trial)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn base(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Stream for trial `trial` of true symbol `symbol`.
    pub fn substream(&self, symbol: usize, trial: u64) -> ChaCha8Rng {
        let mut rng = self.base();
        rng.set_stream(stream_id(symbol, trial));
        rng
    }
}

fn stream_id(symbol: usize, trial: u64) -> u64 {
    debug_assert!(trial < 1 << 56);
    ((symbol as u64) << 56) | trial
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub error_prob: f64,
    pub stderr: f64,
    pub trials: u64,
    pub per_symbol_trials: [u64; SYMBOLS],
    pub per_symbol_errors: [u64; SYMBOLS],
    pub per_symbol_error: [f64; SYMBOLS],
    pub config_digest: String,
}

/// Precomputed tables for running many trials of one configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    stages: usize,
    likelihood: LikelihoodTable,
    truth: TruthTable,
}

impl Simulator {
    pub fn new(truth: &TruthModel, inference: &InferenceModel) -> Result<Self> {
        if truth.stages() != inference.stages {
            return Err(Error::InvalidParameter {
                field: "m",
                reason: format!(
                    "truth model has {} stages, inference model {}",
                    truth.stages(),
                    inference.stages
                ),
            });
        }
        Ok(Self {
            stages: inference.stages,
            likelihood: inference.likelihood_table(),
            truth: truth.table()?,
        })
    }

    pub fn from_config(config: &ReceiverConfig) -> Result<Self> {
        Self::new(&config.truth_model()?, &config.inference_model()?)
    }

    /// One full state: returns whether the final decision was `truth_symbol`.
    pub fn trial<R: Rng + ?Sized>(&self, truth_symbol: usize, rng: &mut R) -> Result<bool> {
        let mut state = initial_state();
        let mut prev = state.target;
        for _ in 0..self.stages {
            let p_off = self.truth.off(truth_symbol, prev, state.target);
            let e = sample_click(p_off, rng.random::<f64>());
            prev = state.target;
            state = state.update(e, &self.likelihood)?;
        }
        Ok(decide(&state) == truth_symbol)
    }

    /// Correctness of trials `0..count` of `symbol`, in trial order.
    pub fn outcomes(&self, symbol: usize, count: u64, rng: &RngSpec) -> Result<Vec<bool>> {
        check_symbol(symbol)?;
        let chunks: Vec<Result<Vec<bool>>> = (0..count.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                (c * CHUNK..((c + 1) * CHUNK).min(count))
                    .map(|k| self.trial(symbol, &mut rng.substream(symbol, k)))
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(count as usize);
        for chunk in chunks {
            out.extend(chunk?);
        }
        Ok(out)
    }

    /// Number of wrong decisions among trials `0..count` of `symbol`.
    pub fn count_errors(&self, symbol: usize, count: u64, rng: &RngSpec) -> Result<u64> {
        check_symbol(symbol)?;
        (0..count.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let base = rng.base();
                let mut errors = 0u64;
                for k in c * CHUNK..((c + 1) * CHUNK).min(count) {
                    let mut r = base.clone();
                    r.set_stream(stream_id(symbol, k));
                    if !self.trial(symbol, &mut r)? {
                        errors += 1;
                    }
                }
                Ok(errors)
            })
            .sum()
    }
}

/// Runs a single trial with freshly built tables.
pub fn simulate_trial<R: Rng + ?Sized>(
    truth_symbol: usize,
    truth: &TruthModel,
    inference: &InferenceModel,
    rng: &mut R,
) -> Result<bool> {
    check_symbol(truth_symbol)?;
    Simulator::new(truth, inference)?.trial(truth_symbol, rng)
}

/// Trials per symbol: `N / 4` each, the remainder going to the lowest symbols.
pub fn split_trials(trials: u64) -> [u64; SYMBOLS] {
    let n = SYMBOLS as u64;
    std::array::from_fn(|m| trials / n + u64::from((m as u64) < trials % n))
}

/// Estimates the average error probability from `trials` seeded trials on the
/// current rayon pool.
pub fn estimate_error(
    config: &ReceiverConfig,
    trials: u64,
    rng: &RngSpec,
) -> Result<SimulationResult> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let sim = Simulator::from_config(config)?;
    let per_symbol_trials = split_trials(trials);
    let mut per_symbol_errors = [0u64; SYMBOLS];
    for m in 0..SYMBOLS {
        per_symbol_errors[m] = sim.count_errors(m, per_symbol_trials[m], rng)?;
    }
    let per_symbol_error: [f64; SYMBOLS] = std::array::from_fn(|m| {
        if per_symbol_trials[m] == 0 {
            0.0
        } else {
            per_symbol_errors[m] as f64 / per_symbol_trials[m] as f64
        }
    });
    let error_prob = if trials < SYMBOLS as u64 {
        per_symbol_errors.iter().sum::<u64>() as f64 / trials as f64
    } else {
        per_symbol_error.iter().sum::<f64>() / SYMBOLS as f64
    };
    Ok(SimulationResult {
        error_prob,
        stderr: (error_prob * (1.0 - error_prob) / trials as f64).sqrt(),
        trials,
        per_symbol_trials,
        per_symbol_errors,
        per_symbol_error,
        config_digest: config.digest(),
    })
}

/// [`estimate_error`] on a dedicated pool of `threads` workers.
pub fn estimate_error_with_threads(
    config: &ReceiverConfig,
    trials: u64,
    rng: &RngSpec,
    threads: usize,
) -> Result<SimulationResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    pool.install(|| estimate_error(config, trials, rng))
}
