//! The three-state worked example and its grayscale test variant.
//!
//! States `{0, 1, 2}`, actions `{0, 1}`. Action 1 advances `0 → 1 → 2 → 0`,
//! action 0 maps `0 → 0`, `1 → 0`, `2 → 1`. Only state 2 pays reward 1.
//!
//! The phase-augmented variants carry a time phase (initial / odd step /
//! even step) in the state so that a timestamp-reading recognition policy
//! stays memoryless. Phased state index is `s + 3·phase`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env::{FiniteEnv, RawEnv, ValuationSpec};
use crate::error::Result;
use crate::policy::{DecisionPolicy, DeltaMode, RecognitionPolicy, RecognitionVariant};
use crate::sim::induced_action_kernel;
use crate::solver::{
    best_deterministic_decision, chain_value, generalization_decompose_exact, generalization_error, optimal_value,
    regret_decompose_with, GenRegretReport, RegretReport,
};

pub const DEFAULT_GAMMA: f64 = 0.9;
pub const DEFAULT_DELTA: f64 = 0.1;
/// Optimal action per state of the training environment.
pub const TRAIN_OPTIMAL: [usize; 3] = [1, 1, 0];

const N: usize = 3;
const PHASES: usize = 3;
/// Observation classes of the phased environments: colored digits first,
/// then gray digits, each indexed by `digit + 3·phase`.
pub const PHASED_OBS: usize = 2 * N * PHASES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestStart {
    /// Start the grayscale environment in state 1 (matches the printed values).
    #[default]
    StateOne,
    /// Start it in state 0.
    StateZero,
}

impl TestStart {
    fn state(self) -> usize {
        match self {
            TestStart::StateOne => 1,
            TestStart::StateZero => 0,
        }
    }
}

fn next_state(s: usize, a: usize) -> usize {
    match (s, a) {
        (0, 0) | (1, 0) => 0,
        (2, 0) => 1,
        (s, _) => (s + 1) % N,
    }
}

fn next_phase(phase: usize) -> usize {
    if phase == 1 {
        2
    } else {
        1
    }
}

fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn plain_env() -> FiniteEnv {
    FiniteEnv::new(RawEnv {
        n_states: N,
        n_actions: 2,
        n_obs: N,
        sigma: one_hot(N, 0),
        tau: (0..N).map(|s| (0..2).map(|a| one_hot(N, next_state(s, a))).collect()).collect(),
        omega: (0..N).map(|s| one_hot(N, s)).collect(),
        reward: vec![0.0, 0.0, 1.0],
        terminal: vec![false; N],
    })
    .expect("worked environment is valid")
}

fn phased_env(gray: bool, start: usize) -> FiniteEnv {
    let n = N * PHASES;
    let offset = if gray { N * PHASES } else { 0 };
    FiniteEnv::new(RawEnv {
        n_states: n,
        n_actions: 2,
        n_obs: PHASED_OBS,
        sigma: one_hot(n, start),
        tau: (0..n)
            .map(|i| {
                let (s, phase) = (i % N, i / N);
                (0..2).map(|a| one_hot(n, next_state(s, a) + N * next_phase(phase))).collect()
            })
            .collect(),
        omega: (0..n).map(|i| one_hot(PHASED_OBS, offset + i)).collect(),
        reward: (0..n).map(|i| if i % N == 2 { 1.0 } else { 0.0 }).collect(),
        terminal: vec![false; n],
    })
    .expect("phased worked environment is valid")
}

/// Environments and named policies of the worked example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkedExampleBundle {
    /// Colored digits, one observation class per state, start state 0.
    pub train_env: FiniteEnv,
    /// Phase-augmented training environment (colored classes).
    pub train_env_phased: FiniteEnv,
    /// Phase-augmented grayscale test environment.
    pub test_env: FiniteEnv,
    pub test_start: TestStart,
    /// Noisy-identity recognition at the default δ.
    pub rho0: RecognitionPolicy,
    /// First-order δ-optimal decision policy at the default δ.
    pub pi0: DecisionPolicy,
    pub under_specific: RecognitionPolicy,
    pub over_specific: RecognitionPolicy,
}

pub fn build_worked_envs() -> WorkedExampleBundle {
    build_worked_envs_with(TestStart::default())
}

pub fn build_worked_envs_with(test_start: TestStart) -> WorkedExampleBundle {
    let train_env = plain_env();
    let rho0 = noisy_recognition(DEFAULT_DELTA).expect("default δ is valid");
    let pi0 = DecisionPolicy::delta_optimal(&train_env, &rho0, &TRAIN_OPTIMAL, DEFAULT_DELTA, DeltaMode::FirstOrder)
        .expect("default δ-optimal policy is realisable");
    let (under_specific, over_specific) = shift_recognitions();
    WorkedExampleBundle {
        train_env,
        train_env_phased: phased_env(false, 0),
        test_env: phased_env(true, test_start.state()),
        test_start,
        rho0,
        pi0,
        under_specific,
        over_specific,
    }
}

pub fn noisy_recognition(delta: f64) -> Result<RecognitionPolicy> {
    RecognitionPolicy::noisy_identity(N, delta)
}

/// `(under_specific, over_specific)` recognition policies on the phased
/// observation classes.
///
/// The under-specific policy reads the digit color: a colored digit maps to
/// its own token, a gray digit to a uniform token. The over-specific policy
/// reads only the timestamp phase.
pub fn shift_recognitions() -> (RecognitionPolicy, RecognitionPolicy) {
    let under = (0..PHASED_OBS)
        .map(|x| if x < N * PHASES { one_hot(N, x % N) } else { vec![1.0 / N as f64; N] })
        .collect();
    let under = RecognitionPolicy::new(N, under, RecognitionVariant::FilterComposed).expect("valid kernel");
    let phases: Vec<usize> = (0..PHASED_OBS).map(|x| (x % (N * PHASES)) / N).collect();
    let over = RecognitionPolicy::from_map(PHASES, &phases, RecognitionVariant::TimestampParity).expect("valid map");
    (under, over)
}

/// Quantities of the three-state training example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTables {
    pub v_star: f64,
    /// Per-state values of the noisy recognition with the optimal decision table.
    pub noisy_optimal_values: Vec<f64>,
    /// Per-state values of the noisy recognition with the first-order δ-optimal decision policy.
    pub pi0_values: Vec<f64>,
    /// Same with the exact-composition δ-optimal decision policy.
    pub pi0_exact_values: Vec<f64>,
    /// Regret of the noisy recognition with the first-order π₀.
    pub regret: RegretReport,
    /// Regret with the exact-composition π₀.
    pub regret_exact: RegretReport,
}

/// One of the two shift recognition policies, transferred to the grayscale test env.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferTables {
    /// Decision table trained on the phased training environment.
    pub trained_actions: Vec<usize>,
    /// Per-state test values of the transferred pair at the initial phase.
    pub transferred_values: Vec<f64>,
    /// `max_π V_test(ρ, π)` over deterministic decision tables.
    pub best_given_rho: f64,
    pub best_given_rho_actions: Vec<usize>,
    pub generalization: GenRegretReport,
    pub ge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTables {
    pub test_start: TestStart,
    pub v_star_test: f64,
    pub under_specific: TransferTables,
    pub over_specific: TransferTables,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkedTables {
    pub gamma: f64,
    pub delta: f64,
    pub train: TrainTables,
    pub shift: ShiftTables,
}

fn pair_values(env: &FiniteEnv, rho: &RecognitionPolicy, pi: &DecisionPolicy, spec: &ValuationSpec) -> Result<Vec<f64>> {
    chain_value(env, &induced_action_kernel(env, rho, pi)?, spec)
}

fn transfer(bundle: &WorkedExampleBundle, rho: &RecognitionPolicy, spec: &ValuationSpec) -> Result<TransferTables> {
    let (generalization, trained) =
        generalization_decompose_exact(&bundle.train_env_phased, &bundle.test_env, rho, spec)?;
    let pi = trained.policy(2);
    let values = pair_values(&bundle.test_env, rho, &pi, spec)?;
    let best = best_deterministic_decision(&bundle.test_env, rho, spec)?;
    Ok(TransferTables {
        trained_actions: trained.actions.clone(),
        transferred_values: values[..N].to_vec(),
        best_given_rho: best.value,
        best_given_rho_actions: best.actions,
        ge: generalization_error(&bundle.train_env_phased, &bundle.test_env, rho, &pi, spec)?,
        generalization,
    })
}

/// Recomputes every quantity of the worked example with the exact solver.
pub fn reproduce_worked_tables(gamma: f64, delta: f64) -> Result<WorkedTables> {
    reproduce_worked_tables_with(gamma, delta, TestStart::default())
}

pub fn reproduce_worked_tables_with(gamma: f64, delta: f64, test_start: TestStart) -> Result<WorkedTables> {
    let spec = ValuationSpec::new(gamma)?;
    let bundle = build_worked_envs_with(test_start);
    let env = &bundle.train_env;
    let rho0 = noisy_recognition(delta)?;
    let optimal = DecisionPolicy::deterministic(2, &TRAIN_OPTIMAL)?;
    let pi0 = DecisionPolicy::delta_optimal(env, &rho0, &TRAIN_OPTIMAL, delta, DeltaMode::FirstOrder)?;
    let pi0_exact = DecisionPolicy::delta_optimal(env, &rho0, &TRAIN_OPTIMAL, delta, DeltaMode::ExactComposition)?;

    let best = best_deterministic_decision(env, &rho0, &spec)?.value;
    let train = TrainTables {
        v_star: env.initial_value(&optimal_value(env, &spec)?.values),
        noisy_optimal_values: pair_values(env, &rho0, &optimal, &spec)?,
        pi0_values: pair_values(env, &rho0, &pi0, &spec)?,
        pi0_exact_values: pair_values(env, &rho0, &pi0_exact, &spec)?,
        regret: regret_decompose_with(env, &rho0, &pi0, &spec, None)?,
        regret_exact: regret_decompose_with(env, &rho0, &pi0_exact, &spec, Some(best))?,
    };

    let shift = ShiftTables {
        test_start,
        v_star_test: bundle.test_env.initial_value(&optimal_value(&bundle.test_env, &spec)?.values),
        under_specific: transfer(&bundle, &bundle.under_specific, &spec)?,
        over_specific: transfer(&bundle, &bundle.over_specific, &spec)?,
    };
    Ok(WorkedTables { gamma, delta, train, shift })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn train_dynamics() {
        let b = build_worked_envs();
        assert_eq!(b.train_env.tau(2, 1), &[1.0, 0.0, 0.0]);
        assert_eq!(b.train_env.tau(2, 0), &[0.0, 1.0, 0.0]);
        assert_eq!(b.train_env.tau(1, 0), &[1.0, 0.0, 0.0]);
        assert_eq!(b.train_env.sigma(), &[1.0, 0.0, 0.0]);
        assert_eq!(b.train_env.reward(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn phased_envs() {
        let b = build_worked_envs();
        assert_eq!(b.test_env.n_states(), 9);
        assert_eq!(b.test_env.sigma()[1], 1.0);
        // (2, init) --a=1--> (0, odd) --a=1--> (1, even) --a=0--> (0, odd)
        assert_eq!(b.test_env.tau(2, 1)[3], 1.0);
        assert_eq!(b.test_env.tau(3, 1)[7], 1.0);
        assert_eq!(b.test_env.tau(7, 0)[3], 1.0);
        assert!(b.test_env.omega(0)[9] == 1.0 && b.train_env_phased.omega(0)[0] == 1.0);
        let zero = build_worked_envs_with(TestStart::StateZero);
        assert_eq!(zero.test_env.sigma()[0], 1.0);
    }

    #[test]
    fn shift_kernels() {
        let (under, over) = shift_recognitions();
        assert_eq!(under.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(under.row(5), &[0.0, 0.0, 1.0]);
        for x in 9..18 {
            assert_eq!(under.row(x), &[1.0 / 3.0; 3]);
        }
        for (x, phase) in [(0, 0), (4, 1), (8, 2), (9, 0), (13, 1), (17, 2)] {
            assert_eq!(over.row(x)[phase], 1.0);
        }
    }

    #[test]
    fn noiseless_tables_have_no_regret() {
        for gamma in [0.5, 0.9, 0.99] {
            let t = reproduce_worked_tables(gamma, 0.0).unwrap();
            assert!(t.train.regret.r_rec.abs() < 1e-12);
            assert!(t.train.regret.r_dec.abs() < 1e-12);
            assert_eq!(t.train.pi0_values, t.train.pi0_exact_values);
        }
    }
}
