//! Simulation and exact analysis of an adaptive displacement receiver for
//! QPSK coherent states.
//!
//! The receiver splits each signal state into `M` temporal bins, displaces the
//! currently most likely symbol to vacuum in every bin, and updates a Bayesian
//! posterior from the on/off outcome of a single-photon detector. This crate
//! provides
//!
//! * the click models ([`physics`]) including visibility and dark counts,
//! * the posterior recursion and MAP policy ([`bayes`]),
//! * exact error probabilities by enumerating every outcome history
//!   ([`enumerate`]),
//! * a seeded, schedule-independent Monte Carlo engine ([`monte_carlo`]),
//! * a finite-bandwidth feedback model ([`delay`], [`truth`]),
//! * the SQL and Helstrom baselines ([`bounds`]),
//! * configuration and sweep drivers behind the `qpskrx` binary
//!   ([`config`], [`sweep`]).

pub mod bayes;
pub mod bounds;
pub mod config;
pub mod delay;
pub mod enumerate;
pub mod error;
pub mod monte_carlo;
pub mod physics;
pub mod sweep;
pub mod truth;

pub use bayes::{
    decide, initial_state, posterior_update, FeedbackState, InferenceModel, Posterior,
};
pub use bounds::{helstrom_qpsk, sql_heterodyne, sql_lossy, BoundPoint};
pub use config::{load_config, Grid, Mode, Overrides, RunConfig};
pub use enumerate::{enumerate_error_probability, EnumerationResult, Enumerator};
pub use error::{Error, Result};
pub use monte_carlo::{estimate_error, ReceiverConfig, RngSpec, SimulationResult};
pub use physics::{ChannelModel, ComplexAmplitude, DetectorModel, Outcome, QpskAlphabet};
pub use sweep::{run, ResultTable};
pub use truth::TruthModel;
