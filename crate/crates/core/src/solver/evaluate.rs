use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env::{check_len, check_row, FiniteEnv, ValuationSpec};
use crate::error::{Error, Result};
use crate::linalg;

/// Largest chain solved with a dense direct solve.
pub const DENSE_LIMIT: usize = 512;
/// Sup-norm bound on `v − (r + γPv)` accepted from [`chain_value`].
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Sup-norm stopping threshold for value iteration and iterative evaluation.
pub const VI_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 10_000_000;

fn transition_matrix(env: &FiniteEnv, kernel: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = env.n_states();
    (0..n)
        .map(|s| {
            let mut row = vec![0.0; n];
            if env.terminal()[s] {
                return row;
            }
            for (a, pa) in kernel[s].iter().enumerate() {
                if *pa == 0.0 {
                    continue;
                }
                for (t, pt) in env.tau(s, a).iter().enumerate() {
                    row[t] += pa * pt;
                }
            }
            row
        })
        .collect()
}

fn residual(p: &[Vec<f64>], r: &[f64], gamma: f64, v: &[f64]) -> f64 {
    p.iter()
        .zip(r)
        .zip(v)
        .map(|((row, ri), vi)| {
            let pv: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            libm::fabs(vi - (ri + gamma * pv))
        })
        .fold(0.0, f64::max)
}

/// Exact expected discounted return from every state of the Markov chain
/// induced by a per-state action kernel, i.e. the solution of
/// `v = r + γ P v` (terminal rows pay their reward once).
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn chain_value(env: &FiniteEnv, action_kernel: &[Vec<f64>], spec: &ValuationSpec) -> Result<Vec<f64>> {
    let n = env.n_states();
    check_len("action_kernel", n, action_kernel.len())?;
    for (s, row) in action_kernel.iter().enumerate() {
        check_len(&format!("action_kernel[{s}]"), env.n_actions(), row.len())?;
        check_row(|| format!("action_kernel[{s}]"), row)?;
    }
    let gamma = spec.gamma;
    let p = transition_matrix(env, action_kernel);
    let r = env.reward();

    let v = if n <= DENSE_LIMIT {
        let a: Vec<Vec<f64>> = p
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, q)| f64::from(u8::from(i == j)) - gamma * q).collect())
            .collect();
        linalg::solve(&a, r)?
    } else {
        // Gauss-Seidel sweeps
        let mut v = vec![0.0; n];
        let mut sweeps = 0;
        loop {
            let mut delta: f64 = 0.0;
            for s in 0..n {
                let pv: f64 = p[s].iter().zip(&v).map(|(a, b)| a * b).sum();
                let next = r[s] + gamma * pv;
                delta = delta.max(libm::fabs(next - v[s]));
                v[s] = next;
            }
            sweeps += 1;
            if delta < VI_TOLERANCE || sweeps >= MAX_SWEEPS {
                break;
            }
        }
        v
    };

    let scale = v.iter().fold(1.0_f64, |m, x| m.max(libm::fabs(*x)));
    let res = residual(&p, r, gamma, &v);
    if !(res <= RESIDUAL_TOLERANCE * scale) {
        return Err(Error::NumericalFailure { residual: res, tolerance: RESIDUAL_TOLERANCE * scale });
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalValue {
    /// `V*` per start state, from exact evaluation of the greedy policy.
    pub values: Vec<f64>,
    /// Greedy action per state; ties go to the lowest action index.
    pub greedy: Vec<usize>,
    pub iterations: usize,
}

impl OptimalValue {
    pub fn greedy_kernel(&self, n_actions: usize) -> Vec<Vec<f64>> {
        self.greedy
            .iter()
            .map(|&a| {
                let mut row = vec![0.0; n_actions];
                row[a] = 1.0;
                row
            })
            .collect()
    }
}

fn q_values<'a>(env: &'a FiniteEnv, v: &'a [f64], s: usize, gamma: f64) -> impl Iterator<Item = f64> + 'a {
    (0..env.n_actions()).map(move |a| {
        let next: f64 = env.tau(s, a).iter().zip(v).map(|(p, x)| p * x).sum();
        env.reward()[s] + gamma * next
    })
}

/// Fully-observed optimum by value iteration. The returned values are the
/// exact evaluation of the greedy policy extracted from the fixed point.
pub fn optimal_value(env: &FiniteEnv, spec: &ValuationSpec) -> Result<OptimalValue> {
    let n = env.n_states();
    let gamma = spec.gamma;
    let mut v = vec![0.0; n];
    let mut iterations = 0;
    loop {
        let mut delta: f64 = 0.0;
        let next: Vec<f64> = (0..n)
            .map(|s| {
                if env.terminal()[s] {
                    env.reward()[s]
                } else {
                    q_values(env, &v, s, gamma).fold(f64::NEG_INFINITY, f64::max)
                }
            })
            .collect();
        for (a, b) in next.iter().zip(&v) {
            delta = delta.max(libm::fabs(a - b));
        }
        v = next;
        iterations += 1;
        if delta < VI_TOLERANCE || iterations >= MAX_SWEEPS {
            break;
        }
    }

    let greedy: Vec<usize> = (0..n)
        .map(|s| {
            let q: Vec<f64> = q_values(env, &v, s, gamma).collect();
            let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tol = VI_TOLERANCE * (1.0 + libm::fabs(best));
            q.iter().position(|x| *x >= best - tol).unwrap_or(0)
        })
        .collect();
    let mut out = OptimalValue { values: Vec::new(), greedy, iterations };
    out.values = chain_value(env, &out.greedy_kernel(env.n_actions()), spec)?;
    Ok(out)
}
