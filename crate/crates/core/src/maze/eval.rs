use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bfs::optimal_maze_value;
use super::grid::{maze_reset, maze_step, Action, MazeConfig, MazeState, N_ACTIONS};
use super::learner::{act_or_uniform, Recognizer, TokenTable};
use crate::error::{Error, Result};
use crate::rng::{seeded, SimRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    /// Mean normalised discounted return.
    pub mean: f64,
    pub std: f64,
    pub episodes: usize,
    /// Mean normalised return per configuration, in input order.
    pub per_config: Vec<f64>,
}

/// Discounted return of one episode, the reward of the `k`-th step weighted
/// by `γ^{k−1}`.
pub fn run_episode<F>(config: &MazeConfig, rng: &mut SimRng, mut policy: F) -> Result<f64>
where
    F: FnMut(&MazeConfig, &MazeState, &mut SimRng) -> usize,
{
    let (mut s, _) = maze_reset(config);
    let mut ret = 0.0;
    let mut discount = 1.0;
    loop {
        let a = policy(config, &s, rng);
        let (next, out) = maze_step(config, &s, Action::from_index(a))?;
        ret += discount * out.reward;
        discount *= config.gamma;
        if out.done {
            return Ok(ret);
        }
        s = next;
    }
}

/// Mean normalised return over `episodes` episodes, cycling through the
/// configurations in order.
pub fn evaluate_with<F>(configs: &[MazeConfig], episodes: usize, seed: u64, mut policy: F) -> Result<EvalSummary>
where
    F: FnMut(&MazeConfig, &MazeState, &mut SimRng) -> usize,
{
    if episodes == 0 || configs.is_empty() {
        return Err(Error::Invalid("evaluation needs at least one episode and configuration".into()));
    }
    let norms = configs.iter().map(optimal_maze_value).collect::<Result<Vec<_>>>()?;
    let mut rng = seeded(seed);
    let mut sums = vec![0.0; configs.len()];
    let mut counts = vec![0usize; configs.len()];
    let mut values = Vec::with_capacity(episodes);
    for e in 0..episodes {
        let i = e % configs.len();
        let v = run_episode(&configs[i], &mut rng, &mut policy)? / norms[i];
        sums[i] += v;
        counts[i] += 1;
        values.push(v);
    }
    let mean = values.iter().sum::<f64>() / episodes as f64;
    let var = if episodes > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (episodes - 1) as f64
    } else {
        0.0
    };
    let per_config = sums.iter().zip(&counts).map(|(s, &c)| if c > 0 { s / c as f64 } else { f64::NAN }).collect();
    Ok(EvalSummary { mean, std: libm::sqrt(var), episodes, per_config })
}

/// Evaluates the greedy policy of `table` behind `rec`, with forced random
/// actions at rate `p`. Unknown or untrained tokens act uniformly.
pub fn evaluate(
    configs: &[MazeConfig],
    rec: &Recognizer,
    table: &TokenTable,
    p: f64,
    episodes: usize,
    seed: u64,
) -> Result<EvalSummary> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { name: "p", value: p, range: "[0, 1]" });
    }
    evaluate_with(configs, episodes, seed, |config, s, rng| {
        let obs = rec.observe(config, s, rng);
        let a = act_or_uniform(table, table.lookup(&obs), rng);
        if p > 0.0 && rng.random::<f64>() < p {
            rng.random_range(0..N_ACTIONS)
        } else {
            a
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::bfs::shortest_solution;
    use crate::maze::grid::{all_configs, DoorRow, KdColor};
    use crate::maze::filter::PreFilter;

    #[test]
    fn optimal_policy_scores_one() {
        let configs = all_configs();
        let plans: Vec<_> = configs.iter().map(|c| shortest_solution(c).unwrap()).collect();
        let summary = evaluate_with(&configs, 24, 0, |config, s, _| {
            let i = configs.iter().position(|c| c == config).unwrap();
            plans[i][s.steps] as usize
        })
        .unwrap();
        assert!((summary.mean - 1.0).abs() < 1e-9);
        assert!(summary.per_config.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn empty_table_acts_uniformly() {
        let cfg = [MazeConfig::new(DoorRow::South, KdColor::Gray)];
        let t = TokenTable::new(10);
        let s = evaluate(&cfg, &Recognizer::new(PreFilter::Identity), &t, 0.0, 200, 1).unwrap();
        assert!(s.mean > 0.0 && s.mean < 1.0);
        assert!((0.0..=1.0 + 1e-9).contains(&s.mean));
    }
}
