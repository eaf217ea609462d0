//! Shared run machinery: resolving a command's inputs into a [`Context`],
//! executing per-seed searches (optionally in parallel worker slots), and
//! writing the on-disk artifacts.
//!
//! Output layout under the chosen directory:
//!
//! ```text
//! out/
//!   summary.json          aggregate of every finished seed below
//!   seed-<n>/
//!     checkpoint.json     resumable snapshot (always written)
//!     genotype.json       final genotype        (finished runs only)
//!     history.csv         one row per edge per trial     (finished only)
//!     summary.json        per-run metrics                (finished only)
//! ```
//!
//! Every file is written to a temporary sibling and renamed into place, so
//! readers never observe a half-written artifact and an interrupted process
//! leaves either the old file or the new one.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context as _, Result};
use cellsearch::bandit::{history_csv_string, SearchRun, Strategy};
use cellsearch::space::SearchSpace;
use cellsearch::{load_checkpoint, save_checkpoint, Genotype};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, RunEvaluator};

/// Everything a command needs, resolved from the config file plus flags.
pub struct Context {
    pub config: RunConfig,
    pub space: SearchSpace,
    pub evaluator: RunEvaluator,
    pub out_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub jobs: usize,
}

impl Context {
    pub fn new(
        config_path: &Path,
        out_override: Option<PathBuf>,
        seeds_override: Option<Vec<u64>>,
        jobs: usize,
    ) -> Result<Context> {
        let config = RunConfig::load(config_path)?;
        let space = config.build_space()?;
        let evaluator = config.build_evaluator(&space)?;
        let out_dir = match out_override.or_else(|| config.output_dir.clone()) {
            Some(dir) => dir,
            None => bail!("no output directory: set `output_dir` in the config or pass --out"),
        };
        let seeds = match seeds_override {
            Some(seeds) => {
                crate::config::validate_cli_seeds(&seeds)?;
                seeds
            }
            None => config.seeds.clone(),
        };
        if jobs < 1 {
            bail!("flag `--jobs`: need at least one worker slot");
        }
        Ok(Context { config, space, evaluator, out_dir, seeds, jobs })
    }

    pub fn seed_dir(&self, seed: u64) -> PathBuf {
        self.out_dir.join(format!("seed-{seed}"))
    }
}

/// Per-run metrics, one `summary.json` per seed directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub strategy: String,
    pub trials_per_arm: u64,
    pub ema_weight: f64,
    pub evaluator: String,
    pub evaluator_calls: u64,
    pub best_accuracy: f64,
    /// Wall time of the process that finished the run; a resumed run counts
    /// only its final leg.
    pub wall_seconds: f64,
    /// Whether the final genotype equals the oracle's known best; absent when
    /// the oracle has no ground truth (trained networks).
    pub recovered_optimum: Option<bool>,
    pub genotype: serde_json::Value,
}

/// What a single seed produced.
pub enum SeedOutcome {
    Finished(SeedSummary),
    /// Stopped early on purpose; only the checkpoint exists.
    Parked { done: u64, budget: u64 },
    /// Resume found nothing left to do.
    AlreadyFinished,
}

/// Starts a fresh run for `seed` and executes it (to completion unless
/// `stop_after` caps the trial count).
pub fn run_seed(ctx: &Context, seed: u64, stop_after: Option<u64>) -> Result<SeedOutcome> {
    let run = SearchRun::new(
        ctx.space.clone(),
        ctx.config.search_config(seed),
        Strategy::AntiBandit,
    )
    .map_err(|e| anyhow!("seed {seed}: {e}"))?;
    complete_run(ctx, seed, run, stop_after)
}

/// Loads the checkpoint for `seed`, checks it belongs to this config, and
/// finishes the run.
pub fn resume_seed(ctx: &Context, seed: u64) -> Result<SeedOutcome> {
    let dir = ctx.seed_dir(seed);
    let path = dir.join("checkpoint.json");
    let run = load_checkpoint(&path)
        .map_err(|e| anyhow!("seed {seed}: cannot resume from {}: {e}", path.display()))?;
    let expected = ctx.config.search_config(seed);
    if run.config() != &expected {
        bail!(
            "seed {seed}: checkpoint was written under a different schedule \
             (checkpoint: trials_per_arm {} ema_weight {} seed {}; config: \
             trials_per_arm {} ema_weight {} seed {})",
            run.config().trials_per_arm,
            run.config().ema_weight,
            run.config().seed,
            expected.trials_per_arm,
            expected.ema_weight,
            expected.seed,
        );
    }
    if run.initial_catalog() != ctx.space.catalog()
        || run.space().cells() != ctx.space.cells()
        || run.space().nodes() != ctx.space.nodes()
    {
        bail!(
            "seed {seed}: checkpoint was written for a different search space; \
             refusing to mix runs"
        );
    }
    if run.is_finished() && dir.join("summary.json").exists() {
        return Ok(SeedOutcome::AlreadyFinished);
    }
    complete_run(ctx, seed, run, None)
}

/// Drives `run` forward, checkpoints it, and writes final artifacts once the
/// budget is spent.
fn complete_run(
    ctx: &Context,
    seed: u64,
    mut run: SearchRun,
    stop_after: Option<u64>,
) -> Result<SeedOutcome> {
    let dir = ctx.seed_dir(seed);
    fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;

    let start = Instant::now();
    let budget = run.budget();
    let target = stop_after.map_or(budget, |n| n.min(budget));
    while run.trials_done() < target {
        run.step(ctx.evaluator.evaluator.as_ref())
            .map_err(|e| anyhow!("seed {seed}: trial {} failed: {e}", run.trials_done()))?;
    }
    save_checkpoint(&dir.join("checkpoint.json"), &run)
        .map_err(|e| anyhow!("seed {seed}: cannot write checkpoint: {e}"))?;

    if !run.is_finished() {
        return Ok(SeedOutcome::Parked { done: run.trials_done(), budget });
    }

    let outcome = run.finish().map_err(|e| anyhow!("seed {seed}: {e}"))?;
    debug_assert_eq!(outcome.evaluator_calls, budget);

    let genotype_json = outcome.genotype.to_json_string();
    write_atomic(&dir.join("genotype.json"), genotype_json.as_bytes())?;
    write_atomic(&dir.join("history.csv"), history_csv_string(&outcome.history).as_bytes())?;

    let summary = SeedSummary {
        seed,
        strategy: Strategy::AntiBandit.name().to_string(),
        trials_per_arm: ctx.config.search.trials_per_arm,
        ema_weight: ctx.config.search.ema_weight,
        evaluator: ctx.evaluator.kind.to_string(),
        evaluator_calls: outcome.evaluator_calls,
        best_accuracy: outcome.best_accuracy,
        wall_seconds: start.elapsed().as_secs_f64(),
        recovered_optimum: recovered(ctx.evaluator.planted.as_ref(), &outcome.genotype),
        genotype: serde_json::from_str(&genotype_json)
            .context("genotype JSON should round-trip")?,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(SeedOutcome::Finished(summary))
}

pub fn recovered(planted: Option<&Genotype>, found: &Genotype) -> Option<bool> {
    planted.map(|best| best == found)
}

/// Rebuilds the aggregate `summary.json` from every per-seed summary under
/// the output directory. Reading from disk (rather than this process's
/// results) makes aggregation a single final step that also picks up seeds
/// finished by earlier invocations.
pub fn aggregate_summaries(out_dir: &Path) -> Result<Vec<SeedSummary>> {
    let mut runs: Vec<SeedSummary> = Vec::new();
    let entries = match fs::read_dir(out_dir) {
        Ok(entries) => entries,
        Err(_) => return Ok(runs),
    };
    for entry in entries {
        let path = entry?.path().join("summary.json");
        if !path.is_file() {
            continue;
        }
        let text = fs::read_to_string(&path)?;
        let summary: SeedSummary = serde_json::from_str(&text)
            .with_context(|| format!("{} is not a run summary", path.display()))?;
        runs.push(summary);
    }
    runs.sort_by_key(|s| s.seed);
    if !runs.is_empty() {
        #[derive(Serialize)]
        struct Aggregate<'a> {
            version: u32,
            runs: &'a [SeedSummary],
        }
        write_json(&out_dir.join("summary.json"), &Aggregate { version: 1, runs: &runs })?;
    }
    Ok(runs)
}

/// Runs `work(i)` for `i in 0..count`, spreading across `jobs` worker slots.
/// Results come back in index order either way, so parallelism never changes
/// what gets written where.
pub fn run_indexed<T, F>(jobs: usize, count: usize, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Send + Sync,
{
    if jobs <= 1 || count <= 1 {
        return (0..count).map(work).collect();
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.min(count))
        .build()
        .context("cannot start worker pool")?;
    pool.install(|| (0..count).into_par_iter().map(work).collect())
}

/// Writes via a temporary sibling plus rename so the target is never partial.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
