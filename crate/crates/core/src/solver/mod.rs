//! Exact policy evaluation, optimal values, decision-policy search and the
//! regret decompositions built on them.

mod evaluate;
mod regret;
mod search;

pub use evaluate::{chain_value, optimal_value, OptimalValue, DENSE_LIMIT, RESIDUAL_TOLERANCE, VI_TOLERANCE};
pub use regret::{
    generalization_decompose_exact, generalization_error, regret_decompose, regret_decompose_with,
    BestGivenRhoKind, Conventions, GenRegretReport, RegretReport, VStarKind, ORDER_TOLERANCE,
};
pub use search::{best_deterministic_decision, best_deterministic_decision_with_budget, BestGivenRho, DEFAULT_BUDGET};
