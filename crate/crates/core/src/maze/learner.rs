use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::filter::{apply_filter, apply_mask, project_channels, PreFilter};
use super::grid::{maze_reset, maze_step, render, Action, MazeConfig, MazeObservation, MazeState, CELLS, N_ACTIONS};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, SimRng};

/// Per-step observation noise: each entry of the region cells is zeroed
/// with probability `p`, resampled every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub p: f64,
    pub region: Vec<usize>,
}

/// Observation pipeline in front of the token table: render, pre-filter,
/// optional channel projection, optional mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recognizer {
    pub filter: PreFilter,
    pub channels: Option<Vec<usize>>,
    pub mask: Option<MaskSpec>,
}

impl Recognizer {
    pub fn new(filter: PreFilter) -> Self {
        Recognizer { filter, channels: None, mask: None }
    }

    pub fn with_channels(mut self, channels: Vec<usize>) -> Result<Self> {
        if let Some(&ch) = channels.iter().find(|&&ch| ch >= self.filter.output_channels()) {
            return Err(Error::OutOfRange { name: "channel", value: ch as f64, range: "[0, filter channels)" });
        }
        self.channels = Some(channels);
        Ok(self)
    }

    pub fn with_mask(mut self, p: f64, region: Vec<usize>) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange { name: "p", value: p, range: "[0, 1]" });
        }
        if region.is_empty() {
            return Err(Error::Invalid("mask region must be non-empty".into()));
        }
        self.mask = Some(MaskSpec { p, region });
        Ok(self)
    }

    pub fn observe(&self, config: &MazeConfig, state: &MazeState, rng: &mut SimRng) -> MazeObservation {
        self.transform(&render(config, state), rng)
    }

    pub fn transform(&self, obs: &MazeObservation, rng: &mut SimRng) -> MazeObservation {
        let mut out = apply_filter(obs, self.filter);
        if let Some(keep) = &self.channels {
            out = project_channels(&out, keep).expect("channels validated on construction");
        }
        if let Some(mask) = &self.mask {
            // masking addresses cells, so it needs a per-cell grid
            if out.data.len() == CELLS * out.channels {
                apply_mask(&mut out, mask.p, &mask.region, rng);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub episodes: usize,
    pub learning_rate: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of episodes over which ε decays linearly.
    pub decay_fraction: f64,
    /// Probability that the executed action is replaced by a uniform one.
    pub action_noise: f64,
    pub token_budget: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            episodes: 20_000,
            learning_rate: 0.2,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            decay_fraction: 0.8,
            action_noise: 0.0,
            token_budget: 100_000,
        }
    }
}

impl LearnerConfig {
    fn epsilon(&self, episode: usize) -> f64 {
        let span = self.decay_fraction * self.episodes as f64;
        let frac = if span > 0.0 { (episode as f64 / span).min(1.0) } else { 1.0 };
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

fn fingerprint(obs: &MazeObservation) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in (obs.channels as u64).to_le_bytes().iter().chain(obs.data.iter()) {
        h ^= *b as u64;
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Dense token ids for filtered observations plus a Q-table over them.
///
/// Tokens are keyed by an FNV-1a fingerprint; the stored grid is compared
/// on every hit so distinct grids never share a token.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenTable {
    index: HashMap<u64, Vec<usize>>,
    grids: Vec<MazeObservation>,
    q: Vec<[f64; N_ACTIONS]>,
    trained: Vec<bool>,
    /// Reserved token for grids outside a frozen codebook.
    unknown: Option<usize>,
    collisions: usize,
    budget: usize,
}

impl TokenTable {
    pub fn new(budget: usize) -> Self {
        TokenTable { index: HashMap::new(), grids: Vec::new(), q: Vec::new(), trained: Vec::new(), unknown: None, collisions: 0, budget }
    }

    /// Same codebook, untrained values, and an extra unknown token that
    /// absorbs every grid not in the codebook.
    pub fn frozen_codebook(&self) -> Self {
        let n = self.grids.len();
        TokenTable {
            index: self.index.clone(),
            grids: self.grids.clone(),
            q: vec![[0.0; N_ACTIONS]; n + 1],
            trained: vec![false; n + 1],
            unknown: Some(n),
            collisions: self.collisions,
            budget: self.budget,
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn collisions(&self) -> usize {
        self.collisions
    }

    pub fn is_frozen(&self) -> bool {
        self.unknown.is_some()
    }

    pub fn unknown_token(&self) -> Option<usize> {
        self.unknown
    }

    pub fn q_values(&self, token: usize) -> &[f64; N_ACTIONS] {
        &self.q[token]
    }

    pub fn is_trained(&self, token: usize) -> bool {
        self.trained.get(token).copied().unwrap_or(false)
    }

    fn find(&self, obs: &MazeObservation, h: u64) -> Option<usize> {
        self.index.get(&h)?.iter().copied().find(|&t| self.grids[t] == *obs)
    }

    /// Token of a grid without inserting; a frozen table maps unseen grids
    /// to its unknown token.
    pub fn lookup(&self, obs: &MazeObservation) -> Option<usize> {
        self.find(obs, fingerprint(obs)).or(self.unknown)
    }

    /// Token of a grid, inserting it into an open codebook.
    pub fn intern(&mut self, obs: &MazeObservation) -> Result<usize> {
        let h = fingerprint(obs);
        if let Some(t) = self.find(obs, h) {
            return Ok(t);
        }
        if let Some(u) = self.unknown {
            return Ok(u);
        }
        if self.grids.len() >= self.budget {
            return Err(Error::TokenBudget { budget: self.budget });
        }
        let t = self.grids.len();
        let bucket = self.index.entry(h).or_default();
        if !bucket.is_empty() {
            self.collisions += 1;
        }
        bucket.push(t);
        self.grids.push(obs.clone());
        self.q.push([0.0; N_ACTIONS]);
        self.trained.push(false);
        Ok(t)
    }

    /// Greedy action with lowest-index tie-breaking, or `None` for tokens
    /// that never received an update.
    pub fn greedy(&self, token: usize) -> Option<usize> {
        if !self.is_trained(token) {
            return None;
        }
        Some(argmax(&self.q[token]))
    }

    fn max_q(&self, token: usize) -> f64 {
        self.q[token].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn argmax(q: &[f64; N_ACTIONS]) -> usize {
    let mut best = 0;
    for a in 1..N_ACTIONS {
        if q[a] > q[best] {
            best = a;
        }
    }
    best
}

/// Greedy action for `token`, uniform random for unknown or untrained tokens.
pub fn act_or_uniform(table: &TokenTable, token: Option<usize>, rng: &mut SimRng) -> usize {
    match token.and_then(|t| table.greedy(t)) {
        Some(a) => a,
        None => rng.random_range(0..N_ACTIONS),
    }
}

/// One-step Q-learning over tokens. Reaching the goal is terminal; running
/// out of steps bootstraps from the last token.
pub fn train_tabular(configs: &[MazeConfig], rec: &Recognizer, cfg: &LearnerConfig, seed: u64) -> Result<TokenTable> {
    learn(TokenTable::new(cfg.token_budget), configs, rec, cfg, seed)
}

/// Re-fits the decision values on top of a frozen codebook.
pub fn retrain_frozen(
    codebook: &TokenTable,
    configs: &[MazeConfig],
    rec: &Recognizer,
    cfg: &LearnerConfig,
    seed: u64,
) -> Result<TokenTable> {
    learn(codebook.frozen_codebook(), configs, rec, cfg, seed)
}

fn learn(mut table: TokenTable, configs: &[MazeConfig], rec: &Recognizer, cfg: &LearnerConfig, seed: u64) -> Result<TokenTable> {
    if cfg.episodes == 0 {
        return Err(Error::OutOfRange { name: "episodes", value: 0.0, range: "[1, ∞)" });
    }
    if configs.is_empty() {
        return Err(Error::Invalid("no maze configurations to train on".into()));
    }
    let mut rng = seeded(derive_seed(seed, 0));
    for episode in 0..cfg.episodes {
        let eps = cfg.epsilon(episode);
        let config = &configs[rng.random_range(0..configs.len())];
        let (mut s, _) = maze_reset(config);
        let mut z = table.intern(&rec.observe(config, &s, &mut rng))?;
        loop {
            let mut a = if rng.random::<f64>() < eps { rng.random_range(0..N_ACTIONS) } else { argmax(&table.q[z]) };
            if cfg.action_noise > 0.0 && rng.random::<f64>() < cfg.action_noise {
                a = rng.random_range(0..N_ACTIONS);
            }
            let (next, out) = maze_step(config, &s, Action::from_index(a))?;
            let (target, next_z) = if out.solved {
                (out.reward, None)
            } else {
                let nz = table.intern(&rec.observe(config, &next, &mut rng))?;
                (out.reward + config.gamma * table.max_q(nz), Some(nz))
            };
            let q = &mut table.q[z][a];
            *q += cfg.learning_rate * (target - *q);
            table.trained[z] = true;
            match next_z {
                Some(nz) if !out.done => {
                    z = nz;
                    s = next;
                }
                _ => break,
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::grid::{train_configs, DoorRow, KdColor};

    fn quick() -> LearnerConfig {
        LearnerConfig { episodes: 3000, ..LearnerConfig::default() }
    }

    #[test]
    fn epsilon_schedule() {
        let cfg = LearnerConfig { episodes: 100, ..LearnerConfig::default() };
        assert_eq!(cfg.epsilon(0), 1.0);
        assert!((cfg.epsilon(40) - 0.525).abs() < 1e-12);
        assert!((cfg.epsilon(80) - 0.05).abs() < 1e-12);
        assert!((cfg.epsilon(99) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn intern_is_injective_and_stable() {
        let mut t = TokenTable::new(10);
        let a = maze_reset(&MazeConfig::new(DoorRow::North, KdColor::Red)).1;
        let b = maze_reset(&MazeConfig::new(DoorRow::North, KdColor::Blue)).1;
        let za = t.intern(&a).unwrap();
        let zb = t.intern(&b).unwrap();
        assert_ne!(za, zb);
        assert_eq!(t.intern(&a).unwrap(), za);
        assert_eq!(t.lookup(&b), Some(zb));
        assert_eq!(t.collisions(), 0);
    }

    #[test]
    fn frozen_codebook_maps_unseen_to_unknown() {
        let mut t = TokenTable::new(10);
        let a = maze_reset(&MazeConfig::new(DoorRow::North, KdColor::Red)).1;
        let b = maze_reset(&MazeConfig::new(DoorRow::North, KdColor::Blue)).1;
        t.intern(&a).unwrap();
        assert_eq!(t.lookup(&b), None);
        let mut f = t.frozen_codebook();
        assert_eq!(f.lookup(&b), Some(1));
        assert_eq!(f.intern(&b).unwrap(), 1);
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn token_budget_is_enforced() {
        let rec = Recognizer::new(PreFilter::Identity);
        let cfg = LearnerConfig { token_budget: 3, ..quick() };
        assert!(matches!(train_tabular(&train_configs(), &rec, &cfg, 1), Err(Error::TokenBudget { budget: 3 })));
    }

    #[test]
    fn training_is_deterministic() {
        let rec = Recognizer::new(PreFilter::HideColors);
        let a = train_tabular(&train_configs(), &rec, &quick(), 7).unwrap();
        let b = train_tabular(&train_configs(), &rec, &quick(), 7).unwrap();
        assert_eq!(a, b);
        let c = train_tabular(&train_configs(), &rec, &quick(), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn blind_learns_one_token() {
        let t = train_tabular(&train_configs(), &Recognizer::new(PreFilter::Blind), &quick(), 1).unwrap();
        assert_eq!(t.len(), 1);
    }
}
