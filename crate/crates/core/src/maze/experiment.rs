use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::eval::evaluate;
use super::filter::{wall_column_region, PreFilter};
use super::grid::{MazeConfig, DEFAULT_GAMMA};
use super::learner::{retrain_frozen, train_tabular, LearnerConfig, Recognizer};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::solver::{Conventions, GenRegretReport, RegretReport};

/// Learner and evaluation settings shared by every run of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub learner: LearnerConfig,
    pub eval_episodes: usize,
    pub train_configs: Vec<MazeConfig>,
    pub test_configs: Vec<MazeConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            learner: LearnerConfig::default(),
            eval_episodes: 300,
            train_configs: super::grid::train_configs(),
            test_configs: super::grid::test_configs(),
        }
    }
}

impl ExperimentConfig {
    fn gamma(&self) -> f64 {
        self.train_configs.first().map_or(DEFAULT_GAMMA, |c| c.gamma)
    }
}

const EVAL_STREAM: u64 = 1;

fn eval_seed(seed: u64, run: u64) -> u64 {
    derive_seed(derive_seed(seed, EVAL_STREAM), run)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbMode {
    RandomActions,
    Masking,
}

impl PerturbMode {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "random-actions" => Some(PerturbMode::RandomActions),
            "mask" | "masking" => Some(PerturbMode::Masking),
            _ => None,
        }
    }
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        if xs.is_empty() {
            return Stat { mean: f64::NAN, std: f64::NAN };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Stat { mean, std: libm::sqrt(var) }
    }
}

/// Test value of the canonical fresh learner: identity filter trained on the
/// test configurations.
pub fn fresh_test_value(exp: &ExperimentConfig, seed: u64) -> Result<f64> {
    let rec = Recognizer::new(PreFilter::Identity);
    let table = train_tabular(&exp.test_configs, &rec, &exp.learner, seed)?;
    Ok(evaluate(&exp.test_configs, &rec, &table, 0.0, exp.eval_episodes, eval_seed(seed, 0))?.mean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSeedRun {
    pub seed: u64,
    pub train_regret: f64,
    pub report: GenRegretReport,
}

/// One seed of the empirical generalisation decomposition. `fresh` is the
/// value from [`fresh_test_value`] for the same seed.
pub fn generalization_seed(exp: &ExperimentConfig, rec: &Recognizer, seed: u64, fresh: f64) -> Result<GenSeedRun> {
    let trained = train_tabular(&exp.train_configs, rec, &exp.learner, seed)?;
    let v_train = evaluate(&exp.train_configs, rec, &trained, 0.0, exp.eval_episodes, eval_seed(seed, 1))?.mean;
    let transferred = evaluate(&exp.test_configs, rec, &trained, 0.0, exp.eval_episodes, eval_seed(seed, 2))?.mean;
    let refit = train_tabular(&exp.test_configs, rec, &exp.learner, seed)?;
    let intermediary = evaluate(&exp.test_configs, rec, &refit, 0.0, exp.eval_episodes, eval_seed(seed, 0))?.mean;
    let report = GenRegretReport::from_values(fresh, intermediary, transferred, v_train, Conventions::empirical(exp.gamma()));
    Ok(GenSeedRun { seed, train_regret: 1.0 - v_train, report })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSummary {
    pub label: String,
    pub train_regret: Stat,
    pub gr: Stat,
    pub gr_rec: Stat,
    pub gr_dec: Stat,
    pub ge: Stat,
    /// Report built from the seed means; its `gr` is `gr_rec + gr_dec` of
    /// the means.
    pub mean_report: GenRegretReport,
    pub runs: Vec<GenSeedRun>,
}

/// Aggregates per-seed runs, sorted by seed.
pub fn summarize_generalization(label: String, mut runs: Vec<GenSeedRun>, gamma: f64) -> Result<GenSummary> {
    if runs.is_empty() {
        return Err(Error::Invalid("no seeds to aggregate".into()));
    }
    runs.sort_by_key(|r| r.seed);
    let col = |f: fn(&GenSeedRun) -> f64| Stat::of(&runs.iter().map(f).collect::<Vec<_>>());
    let mean_report = GenRegretReport::from_values(
        col(|r| r.report.v_test_fresh).mean,
        col(|r| r.report.v_test_intermediary).mean,
        col(|r| r.report.v_test_transferred).mean,
        col(|r| r.report.v_train_trained).mean,
        Conventions::empirical(gamma),
    );
    Ok(GenSummary {
        label,
        train_regret: col(|r| r.train_regret),
        gr: col(|r| r.report.gr),
        gr_rec: col(|r| r.report.gr_rec),
        gr_dec: col(|r| r.report.gr_dec),
        ge: col(|r| r.report.ge),
        mean_report,
        runs,
    })
}

/// Empirical generalisation regret of a pre-filter over several seeds.
pub fn empirical_generalization_decompose(exp: &ExperimentConfig, rec: &Recognizer, seeds: &[u64]) -> Result<GenSummary> {
    let runs = seeds
        .iter()
        .map(|&seed| generalization_seed(exp, rec, seed, fresh_test_value(exp, seed)?))
        .collect::<Result<Vec<_>>>()?;
    summarize_generalization(recognizer_label(rec), runs, exp.gamma())
}

pub fn recognizer_label(rec: &Recognizer) -> String {
    let mut s = String::from(rec.filter.name());
    if let Some(ch) = &rec.channels {
        s.push('[');
        for (i, c) in ch.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(["type", "state", "color"].get(*c).copied().unwrap_or("?"));
        }
        s.push(']');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbRun {
    pub seed: u64,
    pub p: f64,
    /// Value of the decision table re-fit behind the perturbed recognition.
    pub v_refit: f64,
    pub report: RegretReport,
}

/// All `p` values of a perturbation sweep for one seed, on the training
/// configurations.
///
/// Random actions: the agent is trained and evaluated with forced random
/// actions at rate `p`; the best-given-ρ estimate is the unperturbed learner.
/// Masking: a clean identity learner is evaluated behind a masked
/// recognition whose codebook is frozen (unseen grids act uniformly); the
/// best-given-ρ estimate re-fits the decision values behind the same masked
/// recognition. In both modes the estimate is the better of the re-fit and
/// the evaluated pair.
pub fn perturbation_seed(exp: &ExperimentConfig, mode: PerturbMode, ps: &[f64], seed: u64) -> Result<Vec<PerturbRun>> {
    let configs = &exp.train_configs;
    let rec = Recognizer::new(PreFilter::Identity);
    let clean = train_tabular(configs, &rec, &exp.learner, seed)?;
    let mut out = Vec::with_capacity(ps.len());
    for (i, &p) in ps.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange { name: "p", value: p, range: "[0, 1]" });
        }
        let run = 10 + 2 * i as u64;
        let (v_pair, v_refit) = match mode {
            PerturbMode::RandomActions => {
                let noisy = if p == 0.0 {
                    clean.clone()
                } else {
                    let cfg = LearnerConfig { action_noise: p, ..exp.learner.clone() };
                    train_tabular(configs, &rec, &cfg, seed)?
                };
                let pair = evaluate(configs, &rec, &noisy, p, exp.eval_episodes, eval_seed(seed, run))?.mean;
                let refit = evaluate(configs, &rec, &clean, 0.0, exp.eval_episodes, eval_seed(seed, run + 1))?.mean;
                (pair, refit)
            }
            PerturbMode::Masking => {
                let masked = rec.clone().with_mask(p, wall_column_region())?;
                let pair = evaluate(configs, &masked, &clean, 0.0, exp.eval_episodes, eval_seed(seed, run))?.mean;
                let refit_table = retrain_frozen(&clean, configs, &masked, &exp.learner, seed)?;
                let refit = evaluate(configs, &masked, &refit_table, 0.0, exp.eval_episodes, eval_seed(seed, run + 1))?.mean;
                (pair, refit)
            }
        };
        let report = RegretReport::from_values(1.0, v_refit.max(v_pair), v_pair, Conventions::empirical(exp.gamma()));
        out.push(PerturbRun { seed, p, v_refit, report });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbPoint {
    pub p: f64,
    pub r: Stat,
    pub r_rec: Stat,
    pub r_dec: Stat,
    /// Report built from the seed means.
    pub mean_report: RegretReport,
    pub runs: Vec<PerturbRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbSummary {
    pub mode: PerturbMode,
    pub points: Vec<PerturbPoint>,
}

/// Groups per-seed sweeps by `p` (in the order of `ps`), runs sorted by seed.
pub fn summarize_perturbation(mode: PerturbMode, ps: &[f64], per_seed: Vec<Vec<PerturbRun>>, gamma: f64) -> PerturbSummary {
    let mut runs: Vec<PerturbRun> = per_seed.into_iter().flatten().collect();
    runs.sort_by_key(|r| r.seed);
    let points = ps
        .iter()
        .map(|&p| {
            let at: Vec<PerturbRun> = runs.iter().filter(|r| r.p == p).cloned().collect();
            let col = |f: fn(&PerturbRun) -> f64| Stat::of(&at.iter().map(f).collect::<Vec<_>>());
            let mean_report = RegretReport::from_values(
                1.0,
                col(|r| r.report.v_best_given_rho).mean,
                col(|r| r.report.v_pair).mean,
                Conventions::empirical(gamma),
            );
            PerturbPoint {
                p,
                r: col(|r| r.report.r_total),
                r_rec: col(|r| r.report.r_rec),
                r_dec: col(|r| r.report.r_dec),
                mean_report,
                runs: at,
            }
        })
        .collect();
    PerturbSummary { mode, points }
}

pub fn perturbation_sweep(exp: &ExperimentConfig, mode: PerturbMode, ps: &[f64], seeds: &[u64]) -> Result<PerturbSummary> {
    let per_seed = seeds.iter().map(|&s| perturbation_seed(exp, mode, ps, s)).collect::<Result<Vec<_>>>()?;
    Ok(summarize_perturbation(mode, ps, per_seed, exp.gamma()))
}

/// `{0, 0.1, …, 0.5}`.
pub fn default_p_grid() -> Vec<f64> {
    (0..=5).map(|i| i as f64 / 10.0).collect()
}

/// Channel subsets from full to constant: `[type, state, color]`,
/// `[type, color]`, `[color]`, `[]`.
pub fn default_levels() -> Vec<Vec<usize>> {
    alloc::vec![alloc::vec![0, 1, 2], alloc::vec![0, 2], alloc::vec![2], alloc::vec![]]
}

/// Generalisation decomposition at each channel subset of `filter`.
pub fn coarsening_sweep(
    exp: &ExperimentConfig,
    filter: PreFilter,
    levels: &[Vec<usize>],
    seeds: &[u64],
) -> Result<Vec<GenSummary>> {
    let recs = levels.iter().map(|l| Recognizer::new(filter).with_channels(l.clone())).collect::<Result<Vec<_>>>()?;
    let fresh = seeds.iter().map(|&s| fresh_test_value(exp, s)).collect::<Result<Vec<_>>>()?;
    recs.iter()
        .map(|rec| {
            let runs = seeds
                .iter()
                .zip(&fresh)
                .map(|(&s, &f)| generalization_seed(exp, rec, s, f))
                .collect::<Result<Vec<_>>>()?;
            summarize_generalization(recognizer_label(rec), runs, exp.gamma())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig { learner: LearnerConfig { episodes: 2000, ..LearnerConfig::default() }, eval_episodes: 30, ..Default::default() }
    }

    #[test]
    fn stat_of() {
        let s = Stat::of(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - libm::sqrt(2.0)).abs() < 1e-15);
        assert_eq!(Stat::of(&[4.0]).std, 0.0);
    }

    #[test]
    fn identity_has_no_recognition_gap() {
        let exp = small();
        let run = generalization_seed(&exp, &Recognizer::new(PreFilter::Identity), 3, fresh_test_value(&exp, 3).unwrap()).unwrap();
        assert_eq!(run.report.gr_rec, 0.0);
        assert_eq!(run.report.gr, run.report.gr_rec + run.report.gr_dec);
    }

    #[test]
    fn perturbation_reports_hold_identity() {
        let exp = small();
        for mode in [PerturbMode::RandomActions, PerturbMode::Masking] {
            let runs = perturbation_seed(&exp, mode, &[0.0, 0.5], 1).unwrap();
            for r in &runs {
                r.report.check().unwrap();
                assert!(r.report.r_rec >= 0.0 && r.report.r_dec >= 0.0);
            }
        }
    }

    #[test]
    fn level_labels() {
        let rec = Recognizer::new(PreFilter::Identity).with_channels(alloc::vec![0, 2]).unwrap();
        assert_eq!(recognizer_label(&rec), "identity[type,color]");
        assert!(Recognizer::new(PreFilter::OneHot).with_channels(alloc::vec![2]).is_err());
    }
}
