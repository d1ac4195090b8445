use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::evaluate::chain_value;
use crate::env::{FiniteEnv, ValuationSpec};
use crate::error::{Error, Result};
use crate::policy::{DecisionPolicy, RecognitionPolicy};

pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Candidates must beat the incumbent by more than this to replace it, so
/// ties resolve to the lexicographically smallest action table.
const TIE_TOLERANCE: f64 = 1e-12;

/// Best deterministic memoryless decision policy on top of a fixed
/// recognition policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestGivenRho {
    pub actions: Vec<usize>,
    /// `σ`-weighted value of the maximiser.
    pub value: f64,
    pub values: Vec<f64>,
    pub candidates: usize,
}

impl BestGivenRho {
    pub fn policy(&self, n_actions: usize) -> DecisionPolicy {
        DecisionPolicy::deterministic(n_actions, &self.actions).expect("enumerated actions are in range")
    }
}

pub fn best_deterministic_decision(env: &FiniteEnv, rho: &RecognitionPolicy, spec: &ValuationSpec) -> Result<BestGivenRho> {
    best_deterministic_decision_with_budget(env, rho, spec, DEFAULT_BUDGET)
}

/// Enumerates all `|A|^|Z|` deterministic decision tables in lexicographic
/// order, evaluates each exactly and keeps the `σ`-weighted maximiser.
pub fn best_deterministic_decision_with_budget(
    env: &FiniteEnv,
    rho: &RecognitionPolicy,
    spec: &ValuationSpec,
    budget: usize,
) -> Result<BestGivenRho> {
    let n_tokens = rho.n_tokens();
    let n_actions = env.n_actions();
    let candidates = libm::pow(n_actions as f64, n_tokens as f64);
    if candidates > budget as f64 {
        return Err(Error::EnumerationBudget { candidates, budget });
    }
    let candidates = candidates as usize;
    let tokens = rho.state_token_kernel(env)?;

    let mut table = vec![0usize; n_tokens];
    let mut best: Option<BestGivenRho> = None;
    let mut kernel = vec![vec![0.0; n_actions]; env.n_states()];
    for _ in 0..candidates {
        for (s, row) in kernel.iter_mut().enumerate() {
            row.iter_mut().for_each(|q| *q = 0.0);
            for (z, w) in tokens[s].iter().enumerate() {
                row[table[z]] += w;
            }
        }
        let values = chain_value(env, &kernel, spec)?;
        let value = env.initial_value(&values);
        if best.as_ref().is_none_or(|b| value > b.value + TIE_TOLERANCE) {
            best = Some(BestGivenRho { actions: table.clone(), value, values, candidates });
        }
        // next table in lexicographic order (last token varies fastest)
        for z in (0..n_tokens).rev() {
            table[z] += 1;
            if table[z] < n_actions {
                break;
            }
            table[z] = 0;
        }
    }
    best.ok_or(Error::Invalid(alloc::string::String::from("no decision policies to enumerate")))
}
