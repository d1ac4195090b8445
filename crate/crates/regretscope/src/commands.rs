//! Subcommand implementations. Each produces the rendered report plus the
//! files to write; nothing here touches the output directory.

use rayon::prelude::*;
use regretscope_core::maze::{
    default_levels, default_p_grid, fresh_test_value, generalization_seed, perturbation_seed,
    recognizer_label, similarity_matrix, summarize_generalization, summarize_perturbation, ExperimentConfig, GenSummary,
    LearnerConfig, PerturbSummary, Recognizer, SimilarityMatrix, DEFAULT_GAMMA,
};
use regretscope_core::solver::regret_decompose;
use regretscope_core::worked::{reproduce_worked_tables_with, TestStart, WorkedTables};
use regretscope_core::{DecisionPolicy, FiniteEnv, RecognitionPolicy, RegretReport, ValuationSpec};
use serde::Serialize;

use crate::cli::{CoarsenArgs, Command, LearnArgs, MazeCommand, MazeRunArgs, PerturbArgs, SimilarityArgs, SolveArgs, StartArg, WorkedArgs};
use crate::error::{CliError, CliResult};
use crate::io::{csv, fmt3, fmt_stat, matrix_csv, matrix_pgm, read_json, table, to_json};
use crate::manifest::{hash_file, FileHash};

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: impl Into<String>, text: String) -> Self {
        Artifact { name: name.into(), bytes: text.into_bytes() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub subcommand: String,
    pub text: String,
    pub json: String,
    pub artifacts: Vec<Artifact>,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileHash>,
}

impl Outcome {
    fn new<T: Serialize>(subcommand: &str, stem: &str, text: String, report: &T) -> Self {
        let json = to_json(report);
        Outcome {
            subcommand: subcommand.into(),
            artifacts: vec![Artifact::new(format!("{stem}.json"), json.clone()), Artifact::new(format!("{stem}.txt"), text.clone())],
            text,
            json,
            seeds: Vec::new(),
            inputs: Vec::new(),
        }
    }
}

pub fn execute(command: &Command, seed_base: u64, jobs: Option<usize>) -> CliResult<Outcome> {
    match command {
        Command::WorkedExample(a) => worked_example(a),
        Command::Solve(a) => solve(a),
        Command::Maze(m) => {
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = jobs {
                pool = pool.num_threads(n.max(1));
            }
            let pool = pool.build().map_err(|e| CliError::Internal(e.to_string()))?;
            pool.install(|| maze(m, seed_base))
        }
        Command::Replay(_) => Err(CliError::Input("replay cannot be nested".into())),
    }
}

pub fn worked_example(a: &WorkedArgs) -> CliResult<Outcome> {
    let start = match a.test_start {
        StartArg::One => TestStart::StateOne,
        StartArg::Zero => TestStart::StateZero,
    };
    let t = reproduce_worked_tables_with(a.gamma, a.delta, start)?;
    Ok(Outcome::new("worked-example", "worked", render_worked(&t), &t))
}

fn triple(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt3(*x)).collect();
    format!("({})", parts.join(", "))
}

pub fn render_worked(t: &WorkedTables) -> String {
    let tr = &t.train;
    let ap = &t.shift;
    let row = |k: &str, v: String| vec![k.to_string(), v];
    let mut rows = vec![
        row("V* train", fmt3(tr.v_star)),
        row("V(rho0, optimal pi) per state", triple(&tr.noisy_optimal_values)),
        row("V(rho0, pi0) per state", triple(&tr.pi0_values)),
        row("V(rho0, pi0 exact) per state", triple(&tr.pi0_exact_values)),
        row("max_pi V(rho0, pi)", fmt3(tr.regret.v_best_given_rho)),
        row("R", fmt3(tr.regret.r_total)),
        row("R^rec", fmt3(tr.regret.r_rec)),
        row("R^dec", fmt3(tr.regret.r_dec)),
        row("R^dec (exact pi0)", fmt3(tr.regret_exact.r_dec)),
        row("V* test", fmt3(ap.v_star_test)),
    ];
    for (name, x) in [("under-specific", &ap.under_specific), ("over-specific", &ap.over_specific)] {
        let g = &x.generalization;
        rows.push(row(&format!("{name} transferred V_test per state"), triple(&x.transferred_values)));
        rows.push(row(&format!("{name} max_pi V_test(rho, pi)"), fmt3(x.best_given_rho)));
        rows.push(row(&format!("{name} GR"), fmt3(g.gr)));
        rows.push(row(&format!("{name} GR^rec"), fmt3(g.gr_rec)));
        rows.push(row(&format!("{name} GR^dec"), fmt3(g.gr_dec)));
        rows.push(row(&format!("{name} GE"), fmt3(x.ge)));
    }
    let start = match ap.test_start {
        TestStart::StateOne => 1,
        TestStart::StateZero => 0,
    };
    format!(
        "worked example (gamma = {}, delta = {}, test start state {start})\n{}",
        t.gamma,
        t.delta,
        table(&["quantity", "value"], &rows)
    )
}

pub fn solve(a: &SolveArgs) -> CliResult<Outcome> {
    let env: FiniteEnv = read_json(&a.env)?;
    let rho: RecognitionPolicy = read_json(&a.rho)?;
    let pi: DecisionPolicy = read_json(&a.pi)?;
    let spec = ValuationSpec::new(a.gamma)?;
    let report = regret_decompose(&env, &rho, &pi, &spec)?;
    report.check().map_err(CliError::Internal)?;
    let mut out = Outcome::new("solve", "regret", render_regret(&report), &report);
    out.inputs = [&a.env, &a.rho, &a.pi]
        .iter()
        .map(|p| hash_file(&std::fs::canonicalize(p)?))
        .collect::<Result<_, _>>()?;
    Ok(out)
}

pub fn render_regret(r: &RegretReport) -> String {
    let rows: Vec<Vec<String>> = [
        ("V*", r.v_star),
        ("max_pi V(rho, pi)", r.v_best_given_rho),
        ("V(rho, pi)", r.v_pair),
        ("R", r.r_total),
        ("R^rec", r.r_rec),
        ("R^dec", r.r_dec),
    ]
    .iter()
    .map(|(k, v)| vec![k.to_string(), fmt3(*v)])
    .collect();
    let c = &r.conventions;
    format!(
        "{}initial state: {}; V*: {:?}; best-given-rho: {:?}; gamma = {}\n",
        table(&["quantity", "value"], &rows),
        c.initial_state,
        c.v_star_kind,
        c.best_given_rho_kind,
        c.gamma
    )
}

fn experiment(l: &LearnArgs) -> CliResult<ExperimentConfig> {
    if l.seeds == 0 || l.episodes == 0 || l.eval_episodes == 0 {
        return Err(CliError::Input("--seeds, --episodes and --eval-episodes must be positive".into()));
    }
    Ok(ExperimentConfig {
        learner: LearnerConfig { episodes: l.episodes, token_budget: l.token_budget, ..LearnerConfig::default() },
        eval_episodes: l.eval_episodes,
        ..ExperimentConfig::default()
    })
}

fn seeds(base: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| base + i).collect()
}

fn maze(m: &MazeCommand, seed_base: u64) -> CliResult<Outcome> {
    match m {
        MazeCommand::Run(a) => maze_run(a, seed_base),
        MazeCommand::Perturb(a) => maze_perturb(a, seed_base),
        MazeCommand::Similarity(a) => maze_similarity(a),
        MazeCommand::Coarsen(a) => maze_coarsen(a, seed_base),
    }
}

/// Generalisation decomposition for several recognizers, parallel over
/// seeds and recognizers.
pub fn generalization_runs(exp: &ExperimentConfig, recs: &[Recognizer], seeds: &[u64]) -> CliResult<Vec<GenSummary>> {
    let fresh: Vec<f64> = seeds.par_iter().map(|&s| fresh_test_value(exp, s)).collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..recs.len()).flat_map(|r| (0..seeds.len()).map(move |s| (r, s))).collect();
    let runs: Vec<_> = jobs
        .par_iter()
        .map(|&(r, s)| {
            log::info!("{} seed {}", recognizer_label(&recs[r]), seeds[s]);
            generalization_seed(exp, &recs[r], seeds[s], fresh[s])
        })
        .collect::<Result<_, _>>()?;
    let mut runs = runs.into_iter();
    recs.iter()
        .map(|rec| {
            let per_seed: Vec<_> = runs.by_ref().take(seeds.len()).collect();
            Ok(summarize_generalization(recognizer_label(rec), per_seed, DEFAULT_GAMMA)?)
        })
        .collect()
}

fn gen_rows(summaries: &[GenSummary]) -> Vec<Vec<String>> {
    summaries
        .iter()
        .map(|s| {
            vec![
                s.label.clone(),
                fmt_stat(s.train_regret.mean, s.train_regret.std),
                fmt_stat(s.gr.mean, s.gr.std),
                fmt_stat(s.gr_rec.mean, s.gr_rec.std),
                fmt_stat(s.gr_dec.mean, s.gr_dec.std),
                fmt_stat(s.ge.mean, s.ge.std),
            ]
        })
        .collect()
}

const GEN_HEADER: [&str; 6] = ["recognition", "train R", "GR", "GR^rec", "GR^dec", "GE"];

fn seed_csv(summaries: &[GenSummary]) -> String {
    let rows: Vec<Vec<String>> = summaries
        .iter()
        .flat_map(|s| {
            s.runs.iter().map(move |r| {
                let g = &r.report;
                let mut row = vec![s.label.clone(), r.seed.to_string()];
                row.extend(
                    [r.train_regret, g.gr, g.gr_rec, g.gr_dec, g.ge, g.v_test_fresh, g.v_test_intermediary, g.v_test_transferred, g.v_train_trained]
                        .iter()
                        .map(|v| v.to_string()),
                );
                row
            })
        })
        .collect();
    csv(
        &["recognition", "seed", "train_regret", "gr", "gr_rec", "gr_dec", "ge", "v_test_fresh", "v_test_intermediary", "v_test_transferred", "v_train_trained"],
        &rows,
    )
}

#[derive(Serialize)]
struct GenReport<'a> {
    experiment: &'a ExperimentConfig,
    seeds: &'a [u64],
    summaries: &'a [GenSummary],
}

fn maze_run(a: &MazeRunArgs, seed_base: u64) -> CliResult<Outcome> {
    let exp = experiment(&a.learn)?;
    let seeds = seeds(seed_base, a.learn.seeds);
    let recs: Vec<Recognizer> = a.filter.iter().map(|&f| Recognizer::new(f)).collect();
    let summaries = generalization_runs(&exp, &recs, &seeds)?;
    let text = format!(
        "maze generalisation regret, mean (std) over {} seeds\n{}",
        seeds.len(),
        table(&GEN_HEADER, &gen_rows(&summaries))
    );
    let mut out = Outcome::new("maze run", "maze_run", text, &GenReport { experiment: &exp, seeds: &seeds, summaries: &summaries });
    out.artifacts.push(Artifact::new("maze_run_seeds.csv", seed_csv(&summaries)));
    out.seeds = seeds;
    Ok(out)
}

pub fn perturbation_runs(exp: &ExperimentConfig, a: &PerturbArgs, seeds: &[u64]) -> CliResult<PerturbSummary> {
    let ps = if a.p.is_empty() { default_p_grid() } else { a.p.clone() };
    let per_seed: Vec<_> = seeds.par_iter().map(|&s| perturbation_seed(exp, a.mode, &ps, s)).collect::<Result<_, _>>()?;
    Ok(summarize_perturbation(a.mode, &ps, per_seed, DEFAULT_GAMMA))
}

#[derive(Serialize)]
struct PerturbReport<'a> {
    experiment: &'a ExperimentConfig,
    seeds: &'a [u64],
    sweep: &'a PerturbSummary,
}

fn maze_perturb(a: &PerturbArgs, seed_base: u64) -> CliResult<Outcome> {
    let exp = experiment(&a.learn)?;
    let seeds = seeds(seed_base, a.learn.seeds);
    let sweep = perturbation_runs(&exp, a, &seeds)?;
    let rows: Vec<Vec<String>> = sweep
        .points
        .iter()
        .map(|p| vec![format!("{}", p.p), fmt_stat(p.r.mean, p.r.std), fmt_stat(p.r_rec.mean, p.r_rec.std), fmt_stat(p.r_dec.mean, p.r_dec.std)])
        .collect();
    let mode = match a.mode {
        regretscope_core::maze::PerturbMode::RandomActions => "random-actions",
        regretscope_core::maze::PerturbMode::Masking => "mask",
    };
    let text = format!("perturbation sweep ({mode}), mean (std) over {} seeds\n{}", seeds.len(), table(&["p", "R", "R^rec", "R^dec"], &rows));
    let mut out = Outcome::new("maze perturb", &format!("perturb_{mode}"), text, &PerturbReport { experiment: &exp, seeds: &seeds, sweep: &sweep });
    let csv_rows: Vec<Vec<String>> = sweep
        .points
        .iter()
        .flat_map(|p| {
            p.runs.iter().map(|r| {
                let g = &r.report;
                [r.p, r.seed as f64, g.r_total, g.r_rec, g.r_dec, g.v_best_given_rho, g.v_pair, r.v_refit].iter().map(|v| v.to_string()).collect()
            })
        })
        .collect();
    out.artifacts.push(Artifact::new(
        format!("perturb_{mode}_seeds.csv"),
        csv(&["p", "seed", "r", "r_rec", "r_dec", "v_best_given_rho", "v_pair", "v_refit"], &csv_rows),
    ));
    out.seeds = seeds;
    Ok(out)
}

fn render_matrix(labels: &[String], values: &[Vec<f64>]) -> String {
    let mut header: Vec<&str> = vec![""];
    header.extend(labels.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = labels
        .iter()
        .zip(values)
        .map(|(l, row)| std::iter::once(l.clone()).chain(row.iter().map(|v| fmt3(*v))).collect())
        .collect();
    table(&header, &rows)
}

#[derive(Serialize)]
struct SimilarityReport<'a> {
    matrix: &'a SimilarityMatrix,
    by_color: (Vec<String>, Vec<Vec<f64>>),
    by_door: (Vec<String>, Vec<Vec<f64>>),
}

fn maze_similarity(a: &SimilarityArgs) -> CliResult<Outcome> {
    let m = similarity_matrix(a.filter)?;
    let by_color = m.by_color();
    let by_door = m.by_door();
    let name = a.filter.name();
    let text = format!(
        "representation distance ({name})\n{}\nby color\n{}\nby door\n{}",
        render_matrix(&m.labels, &m.values),
        render_matrix(&by_color.0, &by_color.1),
        render_matrix(&by_door.0, &by_door.1)
    );
    let stem = format!("similarity_{name}");
    let mut out = Outcome::new("maze similarity", &stem, text, &SimilarityReport { matrix: &m, by_color: by_color.clone(), by_door: by_door.clone() });
    out.artifacts.push(Artifact::new(format!("{stem}.csv"), matrix_csv(&m.labels, &m.values)));
    out.artifacts.push(Artifact::new(format!("{stem}_by_color.csv"), matrix_csv(&by_color.0, &by_color.1)));
    out.artifacts.push(Artifact::new(format!("{stem}_by_door.csv"), matrix_csv(&by_door.0, &by_door.1)));
    out.artifacts.push(Artifact::new(format!("{stem}.pgm"), matrix_pgm(&m.values, 16)));
    out.artifacts.push(Artifact::new(format!("{stem}_by_color.pgm"), matrix_pgm(&by_color.1, 32)));
    out.artifacts.push(Artifact::new(format!("{stem}_by_door.pgm"), matrix_pgm(&by_door.1, 32)));
    Ok(out)
}

fn maze_coarsen(a: &CoarsenArgs, seed_base: u64) -> CliResult<Outcome> {
    let exp = experiment(&a.learn)?;
    let seeds = seeds(seed_base, a.learn.seeds);
    let levels = default_levels();
    let recs = levels
        .iter()
        .map(|l| Recognizer::new(a.filter).with_channels(l.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let summaries = generalization_runs(&exp, &recs, &seeds)?;
    let text = format!(
        "channel coarsening ({}), mean (std) over {} seeds\n{}",
        a.filter.name(),
        seeds.len(),
        table(&GEN_HEADER, &gen_rows(&summaries))
    );
    let stem = format!("coarsen_{}", a.filter.name());
    let mut out = Outcome::new("maze coarsen", &stem, text, &GenReport { experiment: &exp, seeds: &seeds, summaries: &summaries });
    out.artifacts.push(Artifact::new(format!("{stem}_seeds.csv"), seed_csv(&summaries)));
    out.seeds = seeds;
    Ok(out)
}
