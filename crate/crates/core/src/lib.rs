//! Exact and empirical recognition/decision regret analysis.
//!
//! An agent is split into a *recognition policy* (observation class to
//! representation token) followed by a *decision policy* (token to action).
//! This crate evaluates such agents exactly on finite partially-observable
//! environments, decomposes their regret into a recognition part and a
//! decision part, and runs the tabular key-door maze experiments used to
//! tell over-specific representations from under-specific ones.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI and
//! parallel orchestration live in the `regretscope` crate.

#![no_std]

extern crate alloc;

pub mod env;
pub mod error;
pub mod linalg;
pub mod maze;
pub mod policy;
pub mod rng;
pub mod sim;
pub mod solver;
pub mod worked;

pub use env::{FiniteEnv, ValuationSpec};
pub use error::{Error, Result};
pub use policy::{DecisionPolicy, DecisionVariant, DeltaMode, RecognitionPolicy, RecognitionVariant};
pub use sim::{induced_action_kernel, simulate, MonteCarloEstimate, Trajectory};
pub use solver::{
    best_deterministic_decision, chain_value, generalization_decompose_exact, generalization_error,
    optimal_value, regret_decompose, BestGivenRho, GenRegretReport, OptimalValue, RegretReport,
};
