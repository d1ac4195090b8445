//! Key-door maze experiments.
//!
//! A 5×5 lattice with border walls. The agent starts in the top-left cell of
//! the left column, the key sits at the bottom of that column, and a parting
//! wall with a single locked door separates it from the goal at the bottom
//! of the right column. Door location and key/door color vary per
//! configuration; in training the color reveals the door location.

mod bfs;
mod eval;
mod experiment;
mod filter;
mod grid;
mod learner;
mod similarity;

pub use bfs::{optimal_maze_value, shortest_solution};
pub use eval::{evaluate, evaluate_with, run_episode, EvalSummary};
pub use experiment::{
    coarsening_sweep, default_levels, default_p_grid, empirical_generalization_decompose, fresh_test_value,
    generalization_seed, perturbation_seed, perturbation_sweep, recognizer_label, summarize_generalization,
    summarize_perturbation, ExperimentConfig, GenSeedRun, GenSummary, PerturbMode, PerturbPoint, PerturbRun,
    PerturbSummary, Stat,
};
pub use filter::{apply_filter, apply_mask, combined_id, project_channels, wall_column_region, PreFilter, ONE_HOT_IDS};
pub use grid::{
    all_configs, cell, color, maze_reset, maze_step, obj, render, state, test_configs, train_configs, transition,
    Action, DoorRow, KdColor, MazeConfig, MazeObservation, MazeState, StepOutcome, CELLS, CHANNELS, DEFAULT_GAMMA,
    DEFAULT_HORIZON, GOAL, HEIGHT, KEY, N_ACTIONS, START, WALL_COL, WIDTH,
};
pub use learner::{act_or_uniform, retrain_frozen, train_tabular, LearnerConfig, MaskSpec, Recognizer, TokenTable};
pub use similarity::{similarity_matrix, solving_trajectory, SimilarityMatrix};

use crate::error::Result;
use crate::policy::DecisionPolicy;

/// Forced random actions at rate `p`: `(1 − p)·π + p·Uniform(A)`.
pub fn mixture_policy(pi: &DecisionPolicy, p: f64) -> Result<DecisionPolicy> {
    pi.mixture(p)
}
