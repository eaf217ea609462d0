//! Serializable snapshots of an in-flight search.
//!
//! A checkpoint captures everything [`crate::bandit::SearchRun`] needs to
//! continue: configuration, strategy, the initial catalog, the surviving
//! candidates per edge, every arm's statistics (including abandoned arms —
//! their history stays part of the record), the trial counters and the full
//! trial history. Resuming from a snapshot and finishing produces bit-exactly
//! the same trajectory as an uninterrupted run.
//!
//! JSON maps need string keys, so edge-keyed tables are stored as flat rows.

use crate::bandit::{ArmStats, BanditState, SearchConfig, SearchRun, Strategy, TrialRecord};
use crate::error::{Error, Result};
use crate::space::{EdgeId, OperationKind, SearchSpace};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Format version; bump on layout changes.
pub const CHECKPOINT_VERSION: u32 = 1;

/// Surviving candidates of one edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EdgeRow {
    cell: usize,
    from: usize,
    to: usize,
    ops: Vec<OperationKind>,
}

/// Statistics of one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ArmRow {
    cell: usize,
    from: usize,
    to: usize,
    op: OperationKind,
    estimate: f64,
    pulls: u64,
}

/// A complete, self-validating snapshot of a search run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    version: u32,
    config: SearchConfig,
    strategy: Strategy,
    cells: usize,
    nodes: usize,
    initial_catalog: Vec<OperationKind>,
    candidates: Vec<EdgeRow>,
    arms: Vec<ArmRow>,
    total_trials: u64,
    round_trials: u64,
    epoch: u64,
    arm_count: usize,
    history: Vec<TrialRecord>,
}

impl Checkpoint {
    /// Snapshots a run.
    pub fn from_run(run: &SearchRun) -> Checkpoint {
        let space = run.space();
        let state = run.state();
        let candidates = space
            .edges()
            .map(|edge| EdgeRow {
                cell: edge.cell,
                from: edge.from,
                to: edge.to,
                ops: space.candidates(edge).expect("edge comes from the space").to_vec(),
            })
            .collect();
        let arms = state
            .arms()
            .map(|(edge, op, stats)| ArmRow {
                cell: edge.cell,
                from: edge.from,
                to: edge.to,
                op,
                estimate: stats.estimate,
                pulls: stats.pulls,
            })
            .collect();
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config: run.config().clone(),
            strategy: run.strategy(),
            cells: space.cells(),
            nodes: space.nodes(),
            initial_catalog: run.initial_catalog().to_vec(),
            candidates,
            arms,
            total_trials: state.total_trials(),
            round_trials: state.round_trials(),
            epoch: state.epoch(),
            arm_count: state.arm_count(),
            history: run.history().to_vec(),
        }
    }

    /// Validates the snapshot and reconstructs the run.
    pub fn into_run(self) -> Result<SearchRun> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        self.config.validate()?;

        // the initial space re-derives the canonical edge set and checks the
        // catalog itself
        let initial = SearchSpace::new(self.cells, self.nodes, &self.initial_catalog)?;
        if initial.catalog() != self.initial_catalog.as_slice() {
            return Err(Error::Checkpoint(
                "initial catalog is not sorted and duplicate-free".into(),
            ));
        }

        // live candidates: one row per canonical edge, each a nonempty subset
        // of the catalog in catalog order, all equally long
        let mut candidates: BTreeMap<EdgeId, Vec<OperationKind>> = BTreeMap::new();
        for row in &self.candidates {
            let edge = EdgeId::new(row.cell, row.from, row.to);
            if initial.candidates(edge).is_err() {
                return Err(Error::Checkpoint(format!("unknown edge {edge} in checkpoint")));
            }
            if candidates.insert(edge, row.ops.clone()).is_some() {
                return Err(Error::Checkpoint(format!("duplicate edge {edge} in checkpoint")));
            }
        }
        if candidates.len() != initial.edge_count() {
            return Err(Error::Checkpoint(format!(
                "checkpoint lists {} edges, the space has {}",
                candidates.len(),
                initial.edge_count()
            )));
        }
        for (edge, ops) in &candidates {
            if ops.is_empty() || ops.len() != self.arm_count {
                return Err(Error::Checkpoint(format!(
                    "{edge} keeps {} candidates, expected arm_count {}",
                    ops.len(),
                    self.arm_count
                )));
            }
            let mut cursor = self.initial_catalog.iter();
            for op in ops {
                // subsequence check enforces both membership and order
                if !cursor.any(|c| c == op) {
                    return Err(Error::Checkpoint(format!(
                        "candidates of {edge} are not an ordered subset of the catalog"
                    )));
                }
            }
        }
        let space =
            SearchSpace::from_parts(self.cells, self.nodes, self.initial_catalog.clone(), candidates);

        // arm statistics: unique, on known arms, never more pulls than trials
        let mut stats: BTreeMap<(EdgeId, OperationKind), ArmStats> = BTreeMap::new();
        for row in &self.arms {
            let edge = EdgeId::new(row.cell, row.from, row.to);
            if initial.candidates(edge).is_err() {
                return Err(Error::Checkpoint(format!("stats on unknown edge {edge}")));
            }
            if !self.initial_catalog.contains(&row.op) {
                return Err(Error::Checkpoint(format!(
                    "stats on {} which is not in the catalog",
                    row.op
                )));
            }
            if !(0.0..=1.0).contains(&row.estimate) {
                return Err(Error::Checkpoint(format!(
                    "estimate {} outside [0, 1] for {} on {edge}",
                    row.estimate, row.op
                )));
            }
            // zero pulls marks an arm the sweep has not touched yet
            if row.pulls > self.total_trials {
                return Err(Error::Checkpoint(format!(
                    "implausible pull count {} for {} on {edge}",
                    row.pulls, row.op
                )));
            }
            let key = (edge, row.op);
            if stats
                .insert(key, ArmStats { estimate: row.estimate, pulls: row.pulls })
                .is_some()
            {
                return Err(Error::Checkpoint(format!(
                    "duplicate stats for {} on {edge}",
                    row.op
                )));
            }
        }

        if self.history.len() as u64 != self.total_trials {
            return Err(Error::Checkpoint(format!(
                "history holds {} trials but counters say {}",
                self.history.len(),
                self.total_trials
            )));
        }
        for record in &self.history {
            if !initial.is_valid_genotype(&record.genotype)
                && !space.is_valid_genotype(&record.genotype)
            {
                return Err(Error::Checkpoint(format!(
                    "trial {} does not fit the search space",
                    record.trial
                )));
            }
        }

        let state = BanditState::from_parts(
            stats,
            self.total_trials,
            self.round_trials,
            self.epoch,
            self.arm_count,
        );
        Ok(SearchRun::from_parts(
            self.config,
            self.strategy,
            self.initial_catalog,
            space,
            state,
            self.history,
        ))
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Checkpoint> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Writes a snapshot of `run`, atomically: the JSON lands in a sibling
/// temporary file first and is renamed into place.
pub fn save_checkpoint(path: &Path, run: &SearchRun) -> Result<()> {
    let checkpoint = Checkpoint::from_run(run);
    let json = checkpoint.to_json_string()?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, json)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Loads, validates and reconstructs a run from a snapshot file.
pub fn load_checkpoint(path: &Path) -> Result<SearchRun> {
    let text = fs::read_to_string(path)?;
    Checkpoint::from_json_str(&text)?.into_run()
}
