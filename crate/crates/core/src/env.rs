//! Finite partially-observable environments.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows must sum to one within this tolerance.
pub const ROW_TOLERANCE: f64 = 1e-12;

/// A finite environment `(σ, τ, ω, r)` over states, actions and observation
/// classes.
///
/// Rewards are expected immediate rewards attached to states. A terminal
/// state pays its reward once on arrival and is then absorbing with zero
/// reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnv", into = "RawEnv")]
pub struct FiniteEnv {
    n_states: usize,
    n_actions: usize,
    n_obs: usize,
    sigma: Vec<f64>,
    tau: Vec<Vec<Vec<f64>>>,
    omega: Vec<Vec<f64>>,
    reward: Vec<f64>,
    terminal: Vec<bool>,
}

/// Wire form of [`FiniteEnv`]; unknown fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEnv {
    pub n_states: usize,
    pub n_actions: usize,
    pub n_obs: usize,
    pub sigma: Vec<f64>,
    pub tau: Vec<Vec<Vec<f64>>>,
    pub omega: Vec<Vec<f64>>,
    pub reward: Vec<f64>,
    pub terminal: Vec<bool>,
}

impl TryFrom<RawEnv> for FiniteEnv {
    type Error = Error;

    fn try_from(raw: RawEnv) -> Result<Self> {
        FiniteEnv::new(raw)
    }
}

impl From<FiniteEnv> for RawEnv {
    fn from(env: FiniteEnv) -> Self {
        RawEnv {
            n_states: env.n_states,
            n_actions: env.n_actions,
            n_obs: env.n_obs,
            sigma: env.sigma,
            tau: env.tau,
            omega: env.omega,
            reward: env.reward,
            terminal: env.terminal,
        }
    }
}

pub(crate) fn check_len(field: &str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape { field: String::from(field), expected, found })
    }
}

// `!(x <= tol)` also rejects NaN sums.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub(crate) fn check_row(field: impl FnOnce() -> String, row: &[f64]) -> Result<()> {
    let sum: f64 = row.iter().sum();
    let bad_entry = row.iter().any(|p| !p.is_finite() || *p < 0.0);
    if bad_entry || !((sum - 1.0).abs() <= ROW_TOLERANCE) {
        return Err(Error::InvalidDistribution { field: field(), sum });
    }
    Ok(())
}

impl FiniteEnv {
    /// Validates and builds an environment.
    pub fn new(raw: RawEnv) -> Result<Self> {
        let RawEnv { n_states, n_actions, n_obs, sigma, tau, omega, reward, terminal } = raw;
        if n_states == 0 || n_actions == 0 || n_obs == 0 {
            return Err(Error::Invalid(String::from("environment dimensions must be positive")));
        }
        check_len("sigma", n_states, sigma.len())?;
        check_row(|| String::from("sigma"), &sigma)?;
        check_len("tau", n_states, tau.len())?;
        for (s, per_action) in tau.iter().enumerate() {
            check_len(&format!("tau[{s}]"), n_actions, per_action.len())?;
            for (a, row) in per_action.iter().enumerate() {
                check_len(&format!("tau[{s}][{a}]"), n_states, row.len())?;
                check_row(|| format!("tau[{s}][{a}]"), row)?;
            }
        }
        check_len("omega", n_states, omega.len())?;
        for (s, row) in omega.iter().enumerate() {
            check_len(&format!("omega[{s}]"), n_obs, row.len())?;
            check_row(|| format!("omega[{s}]"), row)?;
        }
        check_len("reward", n_states, reward.len())?;
        if let Some(s) = reward.iter().position(|r| !r.is_finite()) {
            return Err(Error::Invalid(format!("reward[{s}] is not finite")));
        }
        check_len("terminal", n_states, terminal.len())?;
        for (s, _) in terminal.iter().enumerate().filter(|(_, t)| **t) {
            for (a, row) in tau[s].iter().enumerate() {
                if row[s] != 1.0 {
                    return Err(Error::TerminalNotAbsorbing { state: s, action: a });
                }
            }
        }
        Ok(FiniteEnv { n_states, n_actions, n_obs, sigma, tau, omega, reward, terminal })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Next-state distribution for `(state, action)`.
    pub fn tau(&self, state: usize, action: usize) -> &[f64] {
        &self.tau[state][action]
    }

    pub fn omega(&self, state: usize) -> &[f64] {
        &self.omega[state]
    }

    pub fn reward(&self) -> &[f64] {
        &self.reward
    }

    pub fn terminal(&self) -> &[bool] {
        &self.terminal
    }

    /// Same dynamics with a different initial distribution.
    pub fn with_sigma(&self, sigma: Vec<f64>) -> Result<Self> {
        let mut raw = RawEnv::from(self.clone());
        raw.sigma = sigma;
        FiniteEnv::new(raw)
    }

    /// `σ`-weighted scalar value of a per-state value vector.
    pub fn initial_value(&self, values: &[f64]) -> f64 {
        self.sigma.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Whether every observation class is emitted by at most one state with
    /// certainty, i.e. observations identify the state.
    pub fn observations_identify_state(&self) -> bool {
        let mut owner = alloc::vec![usize::MAX; self.n_obs];
        for (s, row) in self.omega.iter().enumerate() {
            for (x, p) in row.iter().enumerate() {
                if *p > 0.0 {
                    if owner[x] != usize::MAX && owner[x] != s {
                        return false;
                    }
                    owner[x] = s;
                }
            }
        }
        true
    }
}

/// Discounting and the simulation horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValuationSpec {
    pub gamma: f64,
    /// Truncation used by Monte-Carlo simulation only; `None` is unbounded.
    pub horizon: Option<usize>,
}

impl ValuationSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::OutOfRange { name: "gamma", value: gamma, range: "(0, 1)" });
        }
        Ok(ValuationSpec { gamma, horizon: None })
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = Some(horizon);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_state() -> RawEnv {
        RawEnv {
            n_states: 2,
            n_actions: 1,
            n_obs: 1,
            sigma: vec![1.0, 0.0],
            tau: vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]],
            omega: vec![vec![1.0], vec![1.0]],
            reward: vec![0.0, 1.0],
            terminal: vec![false, true],
        }
    }

    #[test]
    fn accepts_valid_env() {
        let env = FiniteEnv::new(two_state()).unwrap();
        assert_eq!(env.n_states(), 2);
        assert!(!env.observations_identify_state());
    }

    #[test]
    fn names_the_bad_tau_row() {
        let mut raw = two_state();
        raw.tau[1][0] = vec![0.0, 0.9];
        // terminal check would also trip, but distribution validation runs first
        match FiniteEnv::new(raw) {
            Err(Error::InvalidDistribution { field, .. }) => assert_eq!(field, "tau[1][0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_entries() {
        let mut raw = two_state();
        raw.sigma = vec![1.5, -0.5];
        assert!(matches!(FiniteEnv::new(raw), Err(Error::InvalidDistribution { .. })));
    }

    #[test]
    fn rejects_leaky_terminal() {
        let mut raw = two_state();
        raw.terminal = vec![true, true];
        assert_eq!(FiniteEnv::new(raw), Err(Error::TerminalNotAbsorbing { state: 0, action: 0 }));
    }

    #[test]
    fn shape_errors_name_the_field() {
        let mut raw = two_state();
        raw.omega[1] = vec![0.5, 0.5];
        assert_eq!(
            FiniteEnv::new(raw),
            Err(Error::Shape { field: String::from("omega[1]"), expected: 1, found: 2 })
        );
    }

    #[test]
    fn gamma_must_be_in_open_interval() {
        assert!(ValuationSpec::new(0.9).is_ok());
        assert!(ValuationSpec::new(1.0).is_err());
        assert!(ValuationSpec::new(0.0).is_err());
    }
}
