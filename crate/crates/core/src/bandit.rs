//! The anti-bandit search strategy and its baselines.
//!
//! Arms (one candidate operation on one edge) carry an exponentially-weighted
//! accuracy estimate `m` and a pull count `n`. Sampling favours arms with a
//! *low* lower confidence bound — the uncertain and the poorly performing get
//! extra trials — while every `K·T` trials each edge abandons the arm with
//! the *lowest* upper confidence bound: an arm that stayed bad despite the
//! extra attention. The candidate sets shrink by one per round until a single
//! genotype survives.

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::rng::{self, domain};
use crate::space::{EdgeId, Genotype, OperationKind, SearchSpace};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io;

/// Per-arm statistics: EMA accuracy estimate and pull count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    /// Exponentially-weighted accuracy estimate, in [0,1] when fed
    /// accuracies in [0,1].
    pub estimate: f64,
    /// Number of times the arm's operation appeared in an evaluated genotype.
    pub pulls: u64,
}

impl ArmStats {
    pub fn new() -> ArmStats {
        ArmStats { estimate: 0.0, pulls: 0 }
    }
}

impl Default for ArmStats {
    fn default() -> ArmStats {
        ArmStats::new()
    }
}

fn confidence_radius(stats: &ArmStats, total_trials: u64) -> Result<f64> {
    if stats.pulls == 0 {
        return Err(Error::UndefinedArm(
            "arm has never been pulled; run the initialization sweep first".into(),
        ));
    }
    if total_trials == 0 {
        return Err(Error::InvalidArgument(
            "confidence bounds need at least one completed trial".into(),
        ));
    }
    Ok((2.0 * (total_trials as f64).ln() / stats.pulls as f64).sqrt())
}

/// Lower confidence bound `m − sqrt(2·ln N / n)`.
pub fn lcb_score(stats: &ArmStats, total_trials: u64) -> Result<f64> {
    Ok(stats.estimate - confidence_radius(stats, total_trials)?)
}

/// Upper confidence bound `m + sqrt(2·ln N / n)`.
pub fn ucb_score(stats: &ArmStats, total_trials: u64) -> Result<f64> {
    Ok(stats.estimate + confidence_radius(stats, total_trials)?)
}

/// Sampling distribution over one edge's arms: softmax of the *negated*
/// lower confidence bounds, so a smaller LCB means a strictly larger
/// probability. Uses max-subtraction for overflow safety.
pub fn selection_probabilities(arms: &[ArmStats], total_trials: u64) -> Result<Vec<f64>> {
    if arms.is_empty() {
        return Err(Error::InvalidArgument("no arms to select between".into()));
    }
    let mut negated: Vec<f64> = Vec::with_capacity(arms.len());
    for stats in arms {
        negated.push(-lcb_score(stats, total_trials)?);
    }
    let peak = negated.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = negated.iter().map(|&q| (q - peak).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Post-initialization trial budget `T·Σ_{k=2}^{K} k`; empty sum (0) when
/// `initial_arms < 2`. The initialization sweep adds `initial_arms` more
/// evaluations on top.
pub fn total_budget(initial_arms: usize, trials_per_arm: u64) -> u64 {
    let k = initial_arms as u64;
    if k < 2 {
        return 0;
    }
    trials_per_arm * (k * (k + 1) / 2 - 1)
}

/// Search hyperparameters shared by every strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Samples per arm per abandonment round (`T`); a round lasts
    /// `current_arms · trials_per_arm` trials.
    pub trials_per_arm: u64,
    /// EMA weight on the newest accuracy (`λ`), in [0, 1].
    pub ema_weight: f64,
    /// Base PRNG seed; every randomized stage derives its own stream.
    pub seed: u64,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_arm < 1 {
            return Err(Error::Config("trials_per_arm must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.ema_weight) {
            return Err(Error::Config(format!(
                "ema_weight must lie in [0, 1], got {}",
                self.ema_weight
            )));
        }
        Ok(())
    }
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig { trials_per_arm: 3, ema_weight: 0.7, seed: 0 }
    }
}

/// How each trial's genotype is chosen and whether candidate sets shrink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// LCB-softmax sampling plus per-edge abandonment of the minimal-UCB arm.
    #[serde(rename = "anti_bandit")]
    AntiBandit,
    /// Greedy per-edge argmax-UCB selection, no abandonment; the final
    /// genotype takes each edge's highest estimate.
    #[serde(rename = "ucb_greedy")]
    UcbGreedy,
    /// Greedy argmax-UCB selection combined with the abandonment schedule.
    #[serde(rename = "ucb_pruning")]
    UcbPruning,
    /// Uniform sampling at equal budget; the final genotype is the best
    /// evaluated one. A statistical floor, not a published method.
    #[serde(rename = "uniform_random")]
    UniformRandom,
}

impl Strategy {
    pub const ALL: [Strategy; 4] =
        [Strategy::AntiBandit, Strategy::UcbGreedy, Strategy::UcbPruning, Strategy::UniformRandom];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::AntiBandit => "anti_bandit",
            Strategy::UcbGreedy => "ucb_greedy",
            Strategy::UcbPruning => "ucb_pruning",
            Strategy::UniformRandom => "uniform_random",
        }
    }

    pub fn from_name(name: &str) -> Option<Strategy> {
        Strategy::ALL.iter().copied().find(|s| s.name() == name)
    }

    /// Whether the strategy runs the abandonment schedule.
    pub fn prunes(self) -> bool {
        matches!(self, Strategy::AntiBandit | Strategy::UcbPruning)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All per-arm statistics plus the global counters driving the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditState {
    /// Every arm ever initialized keeps its entry, including abandoned ones,
    /// so pull counts stay conserved across pruning rounds.
    stats: BTreeMap<(EdgeId, OperationKind), ArmStats>,
    total_trials: u64,
    round_trials: u64,
    epoch: u64,
    arm_count: usize,
}

impl BanditState {
    /// Fresh state covering every arm of `space`, all unpulled.
    pub fn new(space: &SearchSpace) -> Result<BanditState> {
        let mut stats = BTreeMap::new();
        let mut arm_count = None;
        for edge in space.edges() {
            let ops = space.candidates(edge)?;
            match arm_count {
                None => arm_count = Some(ops.len()),
                Some(k) if k != ops.len() => {
                    return Err(Error::Invariant(format!(
                        "candidate sets must share one cardinality; {edge} has {} vs {k}",
                        ops.len()
                    )));
                }
                Some(_) => {}
            }
            for &op in ops {
                stats.insert((edge, op), ArmStats::new());
            }
        }
        let arm_count =
            arm_count.ok_or_else(|| Error::Config("space has no edges".into()))?;
        Ok(BanditState { stats, total_trials: 0, round_trials: 0, epoch: 0, arm_count })
    }

    /// Total evaluated genotypes since search start (`N`), sweep included.
    pub fn total_trials(&self) -> u64 {
        self.total_trials
    }

    /// Trials since the last abandonment (`c`); stays 0 during the sweep.
    pub fn round_trials(&self) -> u64 {
        self.round_trials
    }

    /// Post-initialization trial counter (`t`).
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Current candidate-set cardinality (`K`).
    pub fn arm_count(&self) -> usize {
        self.arm_count
    }

    pub fn arm(&self, edge: EdgeId, op: OperationKind) -> Result<&ArmStats> {
        self.stats.get(&(edge, op)).ok_or_else(|| {
            Error::UndefinedArm(format!("no statistics for {op} on {edge}"))
        })
    }

    /// Every tracked arm (abandoned ones included), in canonical order.
    pub fn arms(&self) -> impl Iterator<Item = (EdgeId, OperationKind, ArmStats)> + '_ {
        self.stats.iter().map(|(&(edge, op), &s)| (edge, op, s))
    }

    /// The sampling distribution over `edge`'s current candidates.
    pub fn edge_probabilities(&self, space: &SearchSpace, edge: EdgeId) -> Result<Vec<f64>> {
        let arms: Vec<ArmStats> = space
            .candidates(edge)?
            .iter()
            .map(|&op| self.arm(edge, op).copied())
            .collect::<Result<_>>()?;
        selection_probabilities(&arms, self.total_trials)
    }

    /// Draws one genotype: an independent categorical draw per edge from the
    /// LCB-softmax distribution.
    pub fn sample_genotype<R: Rng>(&self, space: &SearchSpace, rng: &mut R) -> Result<Genotype> {
        let mut choices = BTreeMap::new();
        for edge in space.edges() {
            let ops = space.candidates(edge)?;
            let probs = self.edge_probabilities(space, edge)?;
            let draw: f64 = rng.gen();
            let mut cumulative = 0.0;
            let mut picked = ops.len() - 1; // guards against round-off at 1.0
            for (i, p) in probs.iter().enumerate() {
                cumulative += p;
                if draw < cumulative {
                    picked = i;
                    break;
                }
            }
            choices.insert(edge, ops[picked]);
        }
        Ok(Genotype::new(choices))
    }

    /// Per-edge argmax-UCB genotype (ties to the lowest catalog index).
    pub fn greedy_ucb_genotype(&self, space: &SearchSpace) -> Result<Genotype> {
        self.argmax_genotype(space, |stats| ucb_score(stats, self.total_trials))
    }

    /// Per-edge argmax-estimate genotype (ties to the lowest catalog index).
    pub fn estimate_argmax_genotype(&self, space: &SearchSpace) -> Result<Genotype> {
        self.argmax_genotype(space, |stats| Ok(stats.estimate))
    }

    fn argmax_genotype(
        &self,
        space: &SearchSpace,
        score: impl Fn(&ArmStats) -> Result<f64>,
    ) -> Result<Genotype> {
        let mut choices = BTreeMap::new();
        for edge in space.edges() {
            let ops = space.candidates(edge)?;
            let mut best: Option<(f64, OperationKind)> = None;
            for &op in ops {
                let s = score(self.arm(edge, op)?)?;
                if best.map_or(true, |(b, _)| s > b) {
                    best = Some((s, op));
                }
            }
            let (_, op) = best.expect("candidate sets are non-empty");
            choices.insert(edge, op);
        }
        Ok(Genotype::new(choices))
    }

    /// Records one initialization-sweep trial: every arm in `genotype` takes
    /// the accuracy as its estimate with one pull. `N` advances; `c` and `t`
    /// stay at 0 through the sweep.
    pub fn record_initial(&mut self, genotype: &Genotype, accuracy: f64) -> Result<()> {
        check_accuracy(accuracy)?;
        for (edge, op) in genotype.iter() {
            let stats = self
                .stats
                .get_mut(&(edge, op))
                .ok_or_else(|| Error::UndefinedArm(format!("no arm for {op} on {edge}")))?;
            if stats.pulls != 0 {
                return Err(Error::Schedule(format!(
                    "{op} on {edge} was already initialized"
                )));
            }
            *stats = ArmStats { estimate: accuracy, pulls: 1 };
        }
        self.total_trials += 1;
        Ok(())
    }

    /// Records one post-initialization trial: for every arm in `genotype`,
    /// `m ← (1−λ)·m + λ·a` and `n ← n+1`; arms not in the genotype are
    /// untouched. Advances `N`, `c` and `t` by one each.
    pub fn update_performance(
        &mut self,
        genotype: &Genotype,
        accuracy: f64,
        ema_weight: f64,
    ) -> Result<()> {
        check_accuracy(accuracy)?;
        if !(0.0..=1.0).contains(&ema_weight) {
            return Err(Error::Config(format!(
                "ema_weight must lie in [0, 1], got {ema_weight}"
            )));
        }
        // validate the whole genotype before mutating anything
        for (edge, op) in genotype.iter() {
            let stats = self.arm(edge, op)?;
            if stats.pulls == 0 {
                return Err(Error::UndefinedArm(format!(
                    "{op} on {edge} has no initial estimate; run the sweep first"
                )));
            }
        }
        for (edge, op) in genotype.iter() {
            let stats = self.stats.get_mut(&(edge, op)).expect("validated above");
            stats.estimate = (1.0 - ema_weight) * stats.estimate + ema_weight * accuracy;
            stats.pulls += 1;
        }
        self.total_trials += 1;
        self.round_trials += 1;
        self.epoch += 1;
        Ok(())
    }

    pub(crate) fn from_parts(
        stats: BTreeMap<(EdgeId, OperationKind), ArmStats>,
        total_trials: u64,
        round_trials: u64,
        epoch: u64,
        arm_count: usize,
    ) -> BanditState {
        BanditState { stats, total_trials, round_trials, epoch, arm_count }
    }
}

fn check_accuracy(accuracy: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::InvalidArgument(format!(
            "accuracy must lie in [0, 1], got {accuracy}"
        )));
    }
    Ok(())
}

/// The genotype that applies `op` on every edge of `space`.
pub fn diagonal_genotype(space: &SearchSpace, op: OperationKind) -> Genotype {
    Genotype::new(space.edges().map(|e| (e, op)).collect())
}

/// Runs the `K` initialization trials: trial `k` evaluates the genotype that
/// picks catalog operation `k` on every edge, and that accuracy becomes the
/// initial estimate of all its arms. Afterwards every arm has one pull.
pub fn initialization_sweep<E: Evaluator + ?Sized>(
    space: &SearchSpace,
    state: &mut BanditState,
    evaluator: &E,
    base_seed: u64,
) -> Result<Vec<TrialRecord>> {
    if state.total_trials != 0 {
        return Err(Error::Schedule(
            "initialization sweep requires a fresh state".into(),
        ));
    }
    let mut records = Vec::with_capacity(space.catalog().len());
    for (k, &op) in space.catalog().iter().enumerate() {
        let genotype = diagonal_genotype(space, op);
        let seed = rng::derive_seed(base_seed, domain::TRIAL, k as u64);
        let accuracy = evaluator.evaluate(&genotype, seed)?;
        state.record_initial(&genotype, accuracy)?;
        records.push(TrialRecord {
            trial: k as u64,
            genotype,
            accuracy,
            arm_count: state.arm_count,
            total_trials: state.total_trials,
        });
    }
    Ok(records)
}

/// Ends an abandonment round: every edge independently drops its minimal-UCB
/// candidate (ties to the lowest catalog index); `c` resets and `K` drops by
/// one. Abandoned arms keep their statistics — they just stop being
/// candidates.
pub fn abandon_round(
    space: &SearchSpace,
    state: &mut BanditState,
    trials_per_arm: u64,
) -> Result<SearchSpace> {
    if state.arm_count < 2 {
        return Err(Error::Invariant(
            "cannot abandon below one candidate per edge".into(),
        ));
    }
    let due = state.arm_count as u64 * trials_per_arm;
    if state.round_trials != due {
        return Err(Error::Schedule(format!(
            "round incomplete: {} of {due} trials done",
            state.round_trials
        )));
    }
    let mut next = space.clone();
    for edge in space.edges() {
        let ops = space.candidates(edge)?;
        let mut worst: Option<(f64, OperationKind)> = None;
        for &op in ops {
            let s = ucb_score(state.arm(edge, op)?, state.total_trials)?;
            if worst.map_or(true, |(w, _)| s < w) {
                worst = Some((s, op));
            }
        }
        let (_, op) = worst.expect("candidate sets are non-empty");
        next = next.prune(edge, op)?;
    }
    state.round_trials = 0;
    state.arm_count -= 1;
    Ok(next)
}

/// One evaluated genotype in the history log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Zero-based trial index (sweep trials first).
    pub trial: u64,
    pub genotype: Genotype,
    pub accuracy: f64,
    /// Candidate-set cardinality when the trial was evaluated.
    pub arm_count: usize,
    /// Global trial counter `N` after this trial.
    pub total_trials: u64,
}

/// Result bundle of a completed search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// The strategy's final genotype.
    pub genotype: Genotype,
    pub history: Vec<TrialRecord>,
    pub evaluator_calls: u64,
    /// Highest accuracy observed during the run.
    pub best_accuracy: f64,
}

/// A stepwise search: one evaluated genotype per [`SearchRun::step`]. The
/// evaluator is passed per call so a resumed run can use a freshly built one;
/// all randomness comes from per-trial derived streams, so stopping and
/// rebuilding at any point cannot change the trajectory.
#[derive(Debug, Clone)]
pub struct SearchRun {
    config: SearchConfig,
    strategy: Strategy,
    initial_catalog: Vec<OperationKind>,
    space: SearchSpace,
    state: BanditState,
    history: Vec<TrialRecord>,
    budget: u64,
}

impl SearchRun {
    /// Starts a run on an unpruned space.
    pub fn new(space: SearchSpace, config: SearchConfig, strategy: Strategy) -> Result<SearchRun> {
        config.validate()?;
        for edge in space.edges() {
            if space.candidates(edge)? != space.catalog() {
                return Err(Error::Config(format!(
                    "search must start from an unpruned space; {edge} differs from the catalog"
                )));
            }
        }
        let state = BanditState::new(&space)?;
        let initial_catalog = space.catalog().to_vec();
        let budget =
            initial_catalog.len() as u64 + total_budget(initial_catalog.len(), config.trials_per_arm);
        Ok(SearchRun {
            config,
            strategy,
            initial_catalog,
            space,
            state,
            history: Vec::new(),
            budget,
        })
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// The catalog the run started from, in stable order.
    pub fn initial_catalog(&self) -> &[OperationKind] {
        &self.initial_catalog
    }

    /// The space as pruned so far.
    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn state(&self) -> &BanditState {
        &self.state
    }

    pub fn history(&self) -> &[TrialRecord] {
        &self.history
    }

    /// Total evaluator calls the run will make: `K + T·Σ_{k=2}^{K} k`.
    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn trials_done(&self) -> u64 {
        self.state.total_trials()
    }

    pub fn is_finished(&self) -> bool {
        self.state.total_trials() >= self.budget
    }

    /// Evaluates one genotype and updates the bookkeeping; runs the
    /// abandonment step when the strategy prunes and the round is complete.
    pub fn step<E: Evaluator + ?Sized>(&mut self, evaluator: &E) -> Result<TrialRecord> {
        if self.is_finished() {
            return Err(Error::Schedule("search already finished".into()));
        }
        let trial = self.state.total_trials();
        let sweep_len = self.initial_catalog.len() as u64;
        let genotype = if trial < sweep_len {
            diagonal_genotype(&self.space, self.initial_catalog[trial as usize])
        } else {
            match self.strategy {
                Strategy::AntiBandit => {
                    let mut rng = rng::stream(self.config.seed, domain::SAMPLE, trial);
                    self.state.sample_genotype(&self.space, &mut rng)?
                }
                Strategy::UcbGreedy | Strategy::UcbPruning => {
                    self.state.greedy_ucb_genotype(&self.space)?
                }
                Strategy::UniformRandom => {
                    let mut rng = rng::stream(self.config.seed, domain::SAMPLE, trial);
                    uniform_genotype(&self.space, &mut rng)?
                }
            }
        };
        let eval_seed = rng::derive_seed(self.config.seed, domain::TRIAL, trial);
        let accuracy = evaluator.evaluate(&genotype, eval_seed)?;
        if trial < sweep_len {
            self.state.record_initial(&genotype, accuracy)?;
        } else {
            self.state.update_performance(&genotype, accuracy, self.config.ema_weight)?;
        }
        let record = TrialRecord {
            trial,
            genotype,
            accuracy,
            arm_count: self.state.arm_count(),
            total_trials: self.state.total_trials(),
        };
        self.history.push(record.clone());
        if self.strategy.prunes()
            && self.state.arm_count() >= 2
            && self.state.round_trials()
                == self.state.arm_count() as u64 * self.config.trials_per_arm
        {
            self.space = abandon_round(&self.space, &mut self.state, self.config.trials_per_arm)?;
        }
        Ok(record)
    }

    /// Steps until the budget is exhausted.
    pub fn drive<E: Evaluator + ?Sized>(&mut self, evaluator: &E) -> Result<()> {
        while !self.is_finished() {
            self.step(evaluator)?;
        }
        Ok(())
    }

    /// Best evaluated trial so far (highest accuracy; earliest wins ties).
    pub fn best_trial(&self) -> Option<&TrialRecord> {
        self.history.iter().fold(None, |best: Option<&TrialRecord>, r| match best {
            Some(b) if b.accuracy >= r.accuracy => Some(b),
            _ => Some(r),
        })
    }

    /// The final genotype and history of a finished run.
    pub fn finish(&self) -> Result<SearchOutcome> {
        if !self.is_finished() {
            return Err(Error::Schedule(format!(
                "search not finished: {} of {} trials done",
                self.trials_done(),
                self.budget
            )));
        }
        let genotype = match self.strategy {
            Strategy::AntiBandit | Strategy::UcbPruning => {
                self.space.sole_genotype().ok_or_else(|| {
                    Error::Invariant("pruning run ended with undecided edges".into())
                })?
            }
            Strategy::UcbGreedy => self.state.estimate_argmax_genotype(&self.space)?,
            Strategy::UniformRandom => {
                self.best_trial()
                    .ok_or_else(|| Error::Invariant("finished run has empty history".into()))?
                    .genotype
                    .clone()
            }
        };
        let best_accuracy = self.best_trial().map(|r| r.accuracy).unwrap_or(0.0);
        Ok(SearchOutcome {
            genotype,
            history: self.history.clone(),
            evaluator_calls: self.trials_done(),
            best_accuracy,
        })
    }

    pub(crate) fn from_parts(
        config: SearchConfig,
        strategy: Strategy,
        initial_catalog: Vec<OperationKind>,
        space: SearchSpace,
        state: BanditState,
        history: Vec<TrialRecord>,
    ) -> SearchRun {
        let budget =
            initial_catalog.len() as u64 + total_budget(initial_catalog.len(), config.trials_per_arm);
        SearchRun { config, strategy, initial_catalog, space, state, history, budget }
    }
}

fn uniform_genotype<R: Rng>(space: &SearchSpace, rng: &mut R) -> Result<Genotype> {
    let mut choices = BTreeMap::new();
    for edge in space.edges() {
        let ops = space.candidates(edge)?;
        choices.insert(edge, ops[rng.gen_range(0..ops.len())]);
    }
    Ok(Genotype::new(choices))
}

/// Runs `strategy` to completion on a fresh copy of `space`.
pub fn run_strategy<E: Evaluator + ?Sized>(
    space: &SearchSpace,
    config: &SearchConfig,
    strategy: Strategy,
    evaluator: &E,
) -> Result<SearchOutcome> {
    let mut run = SearchRun::new(space.clone(), config.clone(), strategy)?;
    run.drive(evaluator)?;
    run.finish()
}

/// The full anti-bandit search: sweep, LCB sampling, EMA updates, UCB
/// abandonment every `K·T` trials, until one genotype survives.
pub fn run_search<E: Evaluator + ?Sized>(
    space: &SearchSpace,
    config: &SearchConfig,
    evaluator: &E,
) -> Result<SearchOutcome> {
    run_strategy(space, config, Strategy::AntiBandit, evaluator)
}

/// UCB-greedy baseline: no pruning, identical budget, final genotype by
/// per-edge argmax estimate.
pub fn run_ucb_greedy_baseline<E: Evaluator + ?Sized>(
    space: &SearchSpace,
    config: &SearchConfig,
    evaluator: &E,
) -> Result<SearchOutcome> {
    run_strategy(space, config, Strategy::UcbGreedy, evaluator)
}

/// UCB-greedy selection with the same abandonment schedule as the
/// anti-bandit search.
pub fn run_ucb_pruning_baseline<E: Evaluator + ?Sized>(
    space: &SearchSpace,
    config: &SearchConfig,
    evaluator: &E,
) -> Result<SearchOutcome> {
    run_strategy(space, config, Strategy::UcbPruning, evaluator)
}

/// Uniform-random baseline at equal budget; final genotype is the best
/// evaluated one.
pub fn run_uniform_baseline<E: Evaluator + ?Sized>(
    space: &SearchSpace,
    config: &SearchConfig,
    evaluator: &E,
) -> Result<SearchOutcome> {
    run_strategy(space, config, Strategy::UniformRandom, evaluator)
}

/// Writes the per-edge history rows:
/// `trial,cell,edge_from,edge_to,op,accuracy,K_current,N`.
pub fn write_history_csv<W: io::Write>(records: &[TrialRecord], out: &mut W) -> io::Result<()> {
    writeln!(out, "trial,cell,edge_from,edge_to,op,accuracy,K_current,N")?;
    for r in records {
        for (edge, op) in r.genotype.iter() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.trial,
                edge.cell,
                edge.from,
                edge.to,
                op.name(),
                r.accuracy,
                r.arm_count,
                r.total_trials
            )?;
        }
    }
    Ok(())
}

/// [`write_history_csv`] into a string.
pub fn history_csv_string(records: &[TrialRecord]) -> String {
    let mut buf = Vec::new();
    write_history_csv(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}
