use alloc::string::String;

use serde::{Deserialize, Serialize};

use super::evaluate::{chain_value, optimal_value, RESIDUAL_TOLERANCE};
use super::search::{best_deterministic_decision, BestGivenRho};
use crate::env::{FiniteEnv, ValuationSpec};
use crate::error::{Error, Result};
use crate::policy::{DecisionPolicy, RecognitionPolicy};
use crate::sim::induced_action_kernel;

/// Tolerance for `V* ≥ max_π V(ρ, π) ≥ V(ρ, π₀)`.
pub const ORDER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VStarKind {
    /// Fully-observed optimum; attained because observations identify states.
    MdpOptimum,
    /// Fully-observed optimum used as an upper bound (observations alias states).
    MdpUpperBound,
    /// Normalised optimum of an empirical experiment (always 1).
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BestGivenRhoKind {
    /// Exact maximum over deterministic memoryless decision tables.
    DeterministicMaximizer,
    /// Caller-supplied value.
    Supplied,
    /// Best of the evaluated candidate decision policies (a lower bound).
    LowerBoundEstimate,
}

/// Evaluation conventions recorded alongside every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    /// How a scalar value is read off per-state values.
    pub initial_state: String,
    pub gamma: f64,
    pub v_star_kind: VStarKind,
    pub best_given_rho_kind: BestGivenRhoKind,
    pub solver_tolerance: f64,
    pub order_tolerance: f64,
}

impl Conventions {
    pub fn exact(gamma: f64, v_star_kind: VStarKind, best_given_rho_kind: BestGivenRhoKind) -> Self {
        Conventions {
            initial_state: String::from("sigma-weighted"),
            gamma,
            v_star_kind,
            best_given_rho_kind,
            solver_tolerance: RESIDUAL_TOLERANCE,
            order_tolerance: ORDER_TOLERANCE,
        }
    }

    /// Normalised maze experiments: `V* = 1` and the best-given-ρ value is
    /// the best evaluated candidate.
    pub fn empirical(gamma: f64) -> Self {
        Conventions {
            initial_state: String::from("uniform-over-configs"),
            gamma,
            v_star_kind: VStarKind::Normalized,
            best_given_rho_kind: BestGivenRhoKind::LowerBoundEstimate,
            solver_tolerance: 0.0,
            order_tolerance: ORDER_TOLERANCE,
        }
    }
}

/// `R = R^rec + R^dec` for a recognition/decision pair.
///
/// `r_rec` and `r_dec` are differences of the stored values and `r_total` is
/// their sum, so the identity holds bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub v_star: f64,
    pub v_best_given_rho: f64,
    pub v_pair: f64,
    pub r_total: f64,
    pub r_rec: f64,
    pub r_dec: f64,
    pub conventions: Conventions,
}

impl RegretReport {
    pub fn from_values(v_star: f64, v_best_given_rho: f64, v_pair: f64, conventions: Conventions) -> Self {
        let r_rec = v_star - v_best_given_rho;
        let r_dec = v_best_given_rho - v_pair;
        RegretReport { v_star, v_best_given_rho, v_pair, r_total: r_rec + r_dec, r_rec, r_dec, conventions }
    }

    /// Checks the decomposition identity and, for exact maximisers, the
    /// ordering of the three values.
    pub fn check(&self) -> core::result::Result<(), String> {
        if self.r_total != self.r_rec + self.r_dec {
            return Err(String::from("r_total != r_rec + r_dec"));
        }
        let tol = self.conventions.order_tolerance;
        if self.v_star < self.v_best_given_rho - tol {
            return Err(String::from("v_star < v_best_given_rho"));
        }
        if self.conventions.best_given_rho_kind == BestGivenRhoKind::DeterministicMaximizer && self.v_best_given_rho < self.v_pair - tol {
            return Err(String::from("v_best_given_rho < v_pair"));
        }
        Ok(())
    }
}

/// Generalisation regret split at the intermediary value (recognition from
/// training, decision re-fit on the test environment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRegretReport {
    pub gr: f64,
    pub gr_rec: f64,
    pub gr_dec: f64,
    /// Generalisation error `V_train(L(train)) − V_test(L(train))`.
    pub ge: f64,
    /// Test value of policies trained on the test environment.
    pub v_test_fresh: f64,
    /// Test value with the training recognition and a test-fitted decision.
    pub v_test_intermediary: f64,
    /// Test value of the policies trained on the training environment.
    pub v_test_transferred: f64,
    /// Training value of the policies trained on the training environment.
    pub v_train_trained: f64,
    pub conventions: Conventions,
}

impl GenRegretReport {
    pub fn from_values(
        v_test_fresh: f64,
        v_test_intermediary: f64,
        v_test_transferred: f64,
        v_train_trained: f64,
        conventions: Conventions,
    ) -> Self {
        let gr_rec = v_test_fresh - v_test_intermediary;
        let gr_dec = v_test_intermediary - v_test_transferred;
        GenRegretReport {
            gr: gr_rec + gr_dec,
            gr_rec,
            gr_dec,
            ge: v_train_trained - v_test_transferred,
            v_test_fresh,
            v_test_intermediary,
            v_test_transferred,
            v_train_trained,
            conventions,
        }
    }

    pub fn check(&self) -> core::result::Result<(), String> {
        if self.gr != self.gr_rec + self.gr_dec {
            return Err(String::from("gr != gr_rec + gr_dec"));
        }
        Ok(())
    }
}

fn pair_value(env: &FiniteEnv, rho: &RecognitionPolicy, pi: &DecisionPolicy, spec: &ValuationSpec) -> Result<f64> {
    let kernel = induced_action_kernel(env, rho, pi)?;
    Ok(env.initial_value(&chain_value(env, &kernel, spec)?))
}

fn v_star_kind(env: &FiniteEnv) -> VStarKind {
    if env.observations_identify_state() {
        VStarKind::MdpOptimum
    } else {
        VStarKind::MdpUpperBound
    }
}

pub fn regret_decompose(
    env: &FiniteEnv,
    rho: &RecognitionPolicy,
    pi: &DecisionPolicy,
    spec: &ValuationSpec,
) -> Result<RegretReport> {
    regret_decompose_with(env, rho, pi, spec, None)
}

/// As [`regret_decompose`], optionally with a precomputed
/// `max_π V(ρ, π)` when enumeration is infeasible.
pub fn regret_decompose_with(
    env: &FiniteEnv,
    rho: &RecognitionPolicy,
    pi: &DecisionPolicy,
    spec: &ValuationSpec,
    v_best_given_rho: Option<f64>,
) -> Result<RegretReport> {
    let v_pair = pair_value(env, rho, pi, spec)?;
    let (v_best, kind) = match v_best_given_rho {
        Some(v) => (v, BestGivenRhoKind::Supplied),
        None => (best_deterministic_decision(env, rho, spec)?.value, BestGivenRhoKind::DeterministicMaximizer),
    };
    let v_star = env.initial_value(&optimal_value(env, spec)?.values);
    Ok(RegretReport::from_values(v_star, v_best, v_pair, Conventions::exact(spec.gamma, v_star_kind(env), kind)))
}

fn same_spaces(train: &FiniteEnv, test: &FiniteEnv) -> Result<()> {
    for (axis, l, r) in [
        ("states", train.n_states(), test.n_states()),
        ("actions", train.n_actions(), test.n_actions()),
        ("observations", train.n_obs(), test.n_obs()),
    ] {
        if l != r {
            return Err(Error::DimensionMismatch { axis, left: l, right: r });
        }
    }
    Ok(())
}

/// Generalisation regret with exact optimisation in place of the learner:
/// the decision policy is trained on `train_env` by exhaustive search, the
/// fresh test policy is the test optimum and the intermediary re-fits the
/// decision policy on `test_env` with `rho0` fixed.
pub fn generalization_decompose_exact(
    train_env: &FiniteEnv,
    test_env: &FiniteEnv,
    rho0: &RecognitionPolicy,
    spec: &ValuationSpec,
) -> Result<(GenRegretReport, BestGivenRho)> {
    same_spaces(train_env, test_env)?;
    let trained = best_deterministic_decision(train_env, rho0, spec)?;
    let pi_trained = trained.policy(train_env.n_actions());
    let fresh = test_env.initial_value(&optimal_value(test_env, spec)?.values);
    let intermediary = best_deterministic_decision(test_env, rho0, spec)?.value;
    let transferred = pair_value(test_env, rho0, &pi_trained, spec)?;
    let report = GenRegretReport::from_values(
        fresh,
        intermediary,
        transferred,
        trained.value,
        Conventions::exact(spec.gamma, v_star_kind(test_env), BestGivenRhoKind::DeterministicMaximizer),
    );
    Ok((report, trained))
}

/// `GE = V_train(ρ₀, π) − V_test(ρ₀, π)`.
pub fn generalization_error(
    train_env: &FiniteEnv,
    test_env: &FiniteEnv,
    rho0: &RecognitionPolicy,
    pi_trained: &DecisionPolicy,
    spec: &ValuationSpec,
) -> Result<f64> {
    same_spaces(train_env, test_env)?;
    Ok(pair_value(train_env, rho0, pi_trained, spec)? - pair_value(test_env, rho0, pi_trained, spec)?)
}
