#![allow(dead_code)]

use rand::Rng;
use regretscope_core::env::RawEnv;
use regretscope_core::rng::{seeded, SimRng};
use regretscope_core::{DecisionPolicy, FiniteEnv, RecognitionPolicy, RecognitionVariant, DecisionVariant};

pub fn dist(rng: &mut SimRng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.25 { 0.0 } else { rng.random::<f64>() }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

pub fn random_env(rng: &mut SimRng, max_s: usize, max_a: usize, max_x: usize) -> FiniteEnv {
    let n_states = rng.random_range(1..=max_s);
    let n_actions = rng.random_range(1..=max_a);
    let n_obs = rng.random_range(1..=max_x);
    let terminal: Vec<bool> = (0..n_states).map(|_| rng.random::<f64>() < 0.15).collect();
    let tau = (0..n_states)
        .map(|s| {
            (0..n_actions).map(|_| if terminal[s] { one_hot(n_states, s) } else { dist(rng, n_states) }).collect()
        })
        .collect();
    FiniteEnv::new(RawEnv {
        n_states,
        n_actions,
        n_obs,
        sigma: dist(rng, n_states),
        tau,
        omega: (0..n_states).map(|_| dist(rng, n_obs)).collect(),
        reward: (0..n_states).map(|_| rng.random_range(-1.0..1.0)).collect(),
        terminal,
    })
    .unwrap()
}

/// Same environment with one observation class per state.
pub fn fully_observed(env: &FiniteEnv) -> FiniteEnv {
    let n = env.n_states();
    FiniteEnv::new(RawEnv {
        n_states: n,
        n_actions: env.n_actions(),
        n_obs: n,
        sigma: env.sigma().to_vec(),
        tau: (0..n).map(|s| (0..env.n_actions()).map(|a| env.tau(s, a).to_vec()).collect()).collect(),
        omega: (0..n).map(|s| one_hot(n, s)).collect(),
        reward: env.reward().to_vec(),
        terminal: env.terminal().to_vec(),
    })
    .unwrap()
}

pub fn random_recognition(rng: &mut SimRng, n_obs: usize, n_tokens: usize) -> RecognitionPolicy {
    RecognitionPolicy::new(n_tokens, (0..n_obs).map(|_| dist(rng, n_tokens)).collect(), RecognitionVariant::Tabular).unwrap()
}

pub fn random_decision(rng: &mut SimRng, n_tokens: usize, n_actions: usize) -> DecisionPolicy {
    DecisionPolicy::new(n_actions, (0..n_tokens).map(|_| dist(rng, n_actions)).collect(), DecisionVariant::Tabular).unwrap()
}

pub fn random_deterministic(rng: &mut SimRng, n_tokens: usize, n_actions: usize) -> DecisionPolicy {
    let table: Vec<usize> = (0..n_tokens).map(|_| rng.random_range(0..n_actions)).collect();
    DecisionPolicy::deterministic(n_actions, &table).unwrap()
}

pub fn rng(seed: u64) -> SimRng {
    seeded(seed)
}
