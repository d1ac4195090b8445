//! Action-kernel marginalisation and seeded Monte-Carlo rollouts.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env::{FiniteEnv, ValuationSpec};
use crate::error::{Error, Result};
use crate::policy::{DecisionPolicy, RecognitionPolicy};
use crate::rng::{sample_categorical, seeded, SimRng};

fn check_dims(env: &FiniteEnv, rho: &RecognitionPolicy, pi: &DecisionPolicy) -> Result<()> {
    if env.n_obs() != rho.n_obs() {
        return Err(Error::DimensionMismatch { axis: "observations", left: env.n_obs(), right: rho.n_obs() });
    }
    if rho.n_tokens() != pi.n_tokens() {
        return Err(Error::DimensionMismatch { axis: "tokens", left: rho.n_tokens(), right: pi.n_tokens() });
    }
    if env.n_actions() != pi.n_actions() {
        return Err(Error::DimensionMismatch { axis: "actions", left: env.n_actions(), right: pi.n_actions() });
    }
    Ok(())
}

/// `P(a|s) = Σ_x ω(x|s) Σ_z ρ′(z|x) π(a|z)`, computed exactly.
pub fn induced_action_kernel(env: &FiniteEnv, rho: &RecognitionPolicy, pi: &DecisionPolicy) -> Result<Vec<Vec<f64>>> {
    check_dims(env, rho, pi)?;
    let tokens = rho.state_token_kernel(env)?;
    Ok(tokens
        .iter()
        .map(|pz| {
            let mut row = vec![0.0; env.n_actions()];
            for (z, w) in pz.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                for (a, q) in pi.row(z).iter().enumerate() {
                    row[a] += w * q;
                }
            }
            row
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub obs: usize,
    pub token: usize,
    pub action: usize,
    pub reward: f64,
}

/// One simulated episode. The reward of the state occupied at step `t`
/// (counting from zero) is discounted by `γ^t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub discounted_return: f64,
}

/// Rolls out one episode of at most `horizon` steps. A terminal state pays
/// its reward and ends the episode.
pub fn rollout(
    env: &FiniteEnv,
    rho: &RecognitionPolicy,
    pi: &DecisionPolicy,
    gamma: f64,
    horizon: usize,
    rng: &mut SimRng,
) -> Trajectory {
    let mut steps = Vec::new();
    let mut ret = 0.0;
    let mut discount = 1.0;
    if horizon == 0 {
        return Trajectory { steps, discounted_return: 0.0 };
    }
    let mut state = sample_categorical(rng, env.sigma());
    for _ in 0..horizon {
        let obs = sample_categorical(rng, env.omega(state));
        let token = sample_categorical(rng, rho.row(obs));
        let action = sample_categorical(rng, pi.row(token));
        let reward = env.reward()[state];
        ret += discount * reward;
        steps.push(Step { state, obs, token, action, reward });
        if env.terminal()[state] {
            break;
        }
        discount *= gamma;
        state = sample_categorical(rng, env.tau(state, action));
    }
    Trajectory { steps, discounted_return: ret }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub episodes: usize,
}

/// Monte-Carlo estimate of `V_ε(ρ, π)`; bit-reproducible for a given seed.
pub fn simulate(
    env: &FiniteEnv,
    rho: &RecognitionPolicy,
    pi: &DecisionPolicy,
    spec: &ValuationSpec,
    seed: u64,
    episodes: usize,
) -> Result<MonteCarloEstimate> {
    check_dims(env, rho, pi)?;
    if episodes == 0 {
        return Err(Error::Invalid(String::from("episodes must be at least 1")));
    }
    let horizon = spec
        .horizon
        .ok_or_else(|| Error::Invalid(String::from("simulation needs a finite horizon")))?;
    let mut rng = seeded(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..episodes {
        let g = rollout(env, rho, pi, spec.gamma, horizon, &mut rng).discounted_return;
        sum += g;
        sum_sq += g * g;
    }
    let n = episodes as f64;
    let mean = sum / n;
    let var = if episodes > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(MonteCarloEstimate { mean, std_error: libm::sqrt(var / n), episodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worked::build_worked_envs;

    #[test]
    fn noisy_recognition_action_kernel() {
        let bundle = build_worked_envs();
        let rho = RecognitionPolicy::noisy_identity(3, 0.1).unwrap();
        let pi = DecisionPolicy::deterministic(2, &[1, 1, 0]).unwrap();
        let k = induced_action_kernel(&bundle.train_env, &rho, &pi).unwrap();
        assert!((k[0][0] - 0.1 / 3.0).abs() < 1e-15);
        assert!((k[2][1] - 0.2 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_decision_gives_uniform_kernel() {
        let bundle = build_worked_envs();
        let rho = RecognitionPolicy::noisy_identity(3, 0.4).unwrap();
        let k = induced_action_kernel(&bundle.train_env, &rho, &DecisionPolicy::uniform(3, 2)).unwrap();
        for row in k {
            assert!((row[0] - 0.5).abs() < 1e-15 && (row[1] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_and_deterministic_is_one_hot() {
        let bundle = build_worked_envs();
        let pi = DecisionPolicy::deterministic(2, &[0, 1, 1]).unwrap();
        let k = induced_action_kernel(&bundle.train_env, &RecognitionPolicy::identity(3), &pi).unwrap();
        assert_eq!(k, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn dimension_mismatch_names_axis() {
        let bundle = build_worked_envs();
        let err = induced_action_kernel(&bundle.train_env, &RecognitionPolicy::identity(4), &DecisionPolicy::uniform(4, 2));
        assert!(matches!(err, Err(Error::DimensionMismatch { axis: "observations", .. })));
        let err = induced_action_kernel(&bundle.train_env, &RecognitionPolicy::identity(3), &DecisionPolicy::uniform(2, 2));
        assert!(matches!(err, Err(Error::DimensionMismatch { axis: "tokens", .. })));
    }

    #[test]
    fn zero_horizon_and_zero_reward() {
        let bundle = build_worked_envs();
        let rho = RecognitionPolicy::identity(3);
        let pi = DecisionPolicy::uniform(3, 2);
        let spec = ValuationSpec::new(0.9).unwrap().with_horizon(0);
        assert_eq!(simulate(&bundle.train_env, &rho, &pi, &spec, 1, 10).unwrap().mean, 0.0);

        let mut raw = crate::env::RawEnv::from(bundle.train_env.clone());
        raw.reward = vec![0.0; 3];
        let silent = FiniteEnv::new(raw).unwrap();
        let spec = spec.with_horizon(50);
        let est = simulate(&silent, &rho, &pi, &spec, 1, 100).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn seeded_runs_are_bitwise_identical() {
        let bundle = build_worked_envs();
        let rho = RecognitionPolicy::noisy_identity(3, 0.3).unwrap();
        let pi = DecisionPolicy::uniform(3, 2);
        let spec = ValuationSpec::new(0.9).unwrap().with_horizon(100);
        let a = simulate(&bundle.train_env, &rho, &pi, &spec, 99, 500).unwrap();
        let b = simulate(&bundle.train_env, &rho, &pi, &spec, 99, 500).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    }

    #[test]
    fn trajectory_return_matches_rewards() {
        let bundle = build_worked_envs();
        let rho = RecognitionPolicy::noisy_identity(3, 0.2).unwrap();
        let pi = DecisionPolicy::uniform(3, 2);
        let mut rng = seeded(5);
        let traj = rollout(&bundle.train_env, &rho, &pi, 0.9, 30, &mut rng);
        assert!(traj.steps.len() <= 30);
        let expected: f64 = traj.steps.iter().enumerate().map(|(t, s)| libm::pow(0.9, t as f64) * s.reward).sum();
        assert!((expected - traj.discounted_return).abs() < 1e-12);
    }
}
