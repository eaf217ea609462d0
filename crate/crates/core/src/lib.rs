//! Combinatorial architecture search over cell-based DAG spaces.
//!
//! The search treats every candidate operation on every edge as a bandit arm.
//! Sampling favours arms with a low lower confidence bound (the uncertain and
//! the weak get the trials), and on a fixed schedule every edge abandons the
//! arm with the lowest upper confidence bound until one genotype survives.
//!
//! The crate ships three reward oracles — a planted-utility synthetic oracle,
//! a brute-force enumerator used as ground truth, and a tiny adversarially
//! trained network built from nine hand-differentiated operations — plus the
//! checkpoint machinery for deterministic, bit-identical resume.

pub mod bandit;
pub mod checkpoint;
pub mod error;
pub mod eval;
pub mod ops;
pub mod rng;
pub mod space;
pub mod stats;
pub mod tensor;

pub use bandit::{
    abandon_round, initialization_sweep, lcb_score, run_search, run_strategy,
    run_ucb_greedy_baseline, run_ucb_pruning_baseline, run_uniform_baseline,
    selection_probabilities, total_budget, ucb_score, write_history_csv, ArmStats, BanditState,
    SearchConfig, SearchOutcome, SearchRun, Strategy, TrialRecord,
};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use error::{Error, Result};
pub use eval::dataset::{make_synthetic_dataset, Dataset};
pub use eval::synthetic::{brute_force_best, random_separable_spec, SyntheticSpec};
pub use eval::tinynet::{tinynet_evaluate, TinyNet, TinyNetSpec, TrainReport};
pub use eval::{CountingEvaluator, Evaluator};
pub use ops::{AttackConfig, GaborParams, OpWeights};
pub use space::{build_search_space, EdgeId, Genotype, OperationKind, SearchSpace};
pub use stats::{one_sided_diff_lower_bound, wilson_lower_bound, Z_95};
pub use tensor::Tensor;
