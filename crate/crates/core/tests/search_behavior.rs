//! Cross-module behavior of the search loop through the public API only:
//! budget conservation, bookkeeping invariants along a run, bit-identical
//! replay and resume, and the CSV surface.

use cellsearch::bandit::{
    history_csv_string, run_strategy, total_budget, SearchConfig, SearchRun, Strategy,
};
use cellsearch::checkpoint::Checkpoint;
use cellsearch::eval::synthetic::random_separable_spec;
use cellsearch::space::{OperationKind, SearchSpace};
use cellsearch::{rng, SyntheticSpec};

fn noisy_spec(space: &SearchSpace, noise: f64) -> SyntheticSpec {
    let mut spec_rng = rng::stream(4242, rng::domain::SAMPLE, 0);
    random_separable_spec(space, 0.3, noise, true, &mut spec_rng).unwrap()
}

fn five_op_space() -> SearchSpace {
    SearchSpace::new(2, 2, &OperationKind::ALL[..5]).unwrap()
}

#[test]
fn every_strategy_spends_the_same_budget() {
    for k in [2usize, 5, 9] {
        for t in [1u64, 3] {
            let space = SearchSpace::new(1, 3, &OperationKind::ALL[..k]).unwrap();
            let spec = noisy_spec(&space, 0.1);
            let expected = k as u64 + total_budget(k, t);
            for strategy in [
                Strategy::AntiBandit,
                Strategy::UcbGreedy,
                Strategy::UcbPruning,
                Strategy::UniformRandom,
            ] {
                let config = SearchConfig { trials_per_arm: t, ema_weight: 0.7, seed: 9 };
                let outcome = run_strategy(&space, &config, strategy, &spec).unwrap();
                assert_eq!(outcome.evaluator_calls, expected, "{strategy} at K={k} T={t}");
                assert_eq!(outcome.history.len() as u64, expected);
            }
        }
    }
}

#[test]
fn bookkeeping_invariants_hold_at_every_step() {
    let space = five_op_space();
    let spec = noisy_spec(&space, 0.2);
    let config = SearchConfig { trials_per_arm: 3, ema_weight: 0.7, seed: 11 };
    let mut run = SearchRun::new(space.clone(), config, Strategy::AntiBandit).unwrap();
    let edges_total = (space.edges_per_cell() * space.cells()) as u64;
    let initial_arms = space.catalog().len() * space.edges_per_cell() * space.cells();
    let sweep_len = space.catalog().len() as u64;
    let mut previous_arm_count = run.state().arm_count();
    while !run.is_finished() {
        let before = run.trials_done();
        run.step(&spec).unwrap();
        let state = run.state();
        assert_eq!(run.trials_done(), before + 1, "each step is exactly one evaluation");

        // the stats map keeps every arm ever created, abandoned or not
        assert_eq!(state.arms().count(), initial_arms);
        // pull conservation: every trial touches exactly one arm per edge
        let pulled: u64 = state.arms().map(|(_, _, s)| s.pulls).sum();
        assert_eq!(pulled, edges_total * run.trials_done());
        // estimates stay inside the accuracy range
        assert!(state.arms().all(|(_, _, s)| (0.0..=1.0).contains(&s.estimate)));
        // the sweep does not advance the round counter
        if run.trials_done() <= sweep_len {
            assert_eq!(state.round_trials(), 0);
        }
        // abandonment shrinks the candidate lists one arm at a time
        let arm_count = state.arm_count();
        assert!(arm_count == previous_arm_count || arm_count + 1 == previous_arm_count);
        for edge in run.space().edges() {
            assert_eq!(run.space().candidates(edge).unwrap().len(), arm_count);
        }
        previous_arm_count = arm_count;
    }
    assert_eq!(run.state().arm_count(), 1);
    let outcome = run.finish().unwrap();
    assert_eq!(Some(outcome.genotype), run.space().sole_genotype());
}

#[test]
fn identical_seeds_replay_and_seeds_matter() {
    let space = five_op_space();
    let spec = noisy_spec(&space, 0.2);
    for strategy in [
        Strategy::AntiBandit,
        Strategy::UcbGreedy,
        Strategy::UcbPruning,
        Strategy::UniformRandom,
    ] {
        let config = SearchConfig { trials_per_arm: 3, ema_weight: 0.7, seed: 21 };
        let first = run_strategy(&space, &config, strategy, &spec).unwrap();
        let second = run_strategy(&space, &config, strategy, &spec).unwrap();
        assert_eq!(first.history, second.history, "{strategy} replay must be bit-identical");
        assert_eq!(first.genotype, second.genotype);

        let reseeded = SearchConfig { seed: 22, ..config };
        let third = run_strategy(&space, &reseeded, strategy, &spec).unwrap();
        assert_ne!(
            first.history, third.history,
            "{strategy} with a different seed must see different trials"
        );
    }
}

#[test]
fn resume_is_bit_exact_at_every_interrupt_point() {
    let space = five_op_space();
    let spec = noisy_spec(&space, 0.2);
    let config = SearchConfig { trials_per_arm: 2, ema_weight: 0.7, seed: 31 };
    let mut reference = SearchRun::new(space.clone(), config.clone(), Strategy::AntiBandit).unwrap();
    reference.drive(&spec).unwrap();
    let reference = reference.finish().unwrap();
    let budget = reference.evaluator_calls;

    let sweep = space.catalog().len() as u64;
    let stops = [0, 1, sweep - 1, sweep, sweep + 1, budget / 3, budget / 2, budget - 1, budget];
    for stop in stops {
        let mut run = SearchRun::new(space.clone(), config.clone(), Strategy::AntiBandit).unwrap();
        for _ in 0..stop {
            run.step(&spec).unwrap();
        }
        // serialize through JSON exactly as the on-disk checkpoint would
        let frozen = Checkpoint::from_run(&run).to_json_string().unwrap();
        let mut resumed = Checkpoint::from_json_str(&frozen).unwrap().into_run().unwrap();
        resumed.drive(&spec).unwrap();
        let outcome = resumed.finish().unwrap();
        assert_eq!(outcome.history, reference.history, "stop at {stop} diverged");
        assert_eq!(outcome.genotype, reference.genotype);
        assert_eq!(outcome.best_accuracy, reference.best_accuracy);
    }
}

#[test]
fn history_csv_has_one_row_per_edge_per_trial() {
    let space = SearchSpace::new(1, 2, &OperationKind::ALL[..3]).unwrap();
    let spec = noisy_spec(&space, 0.1);
    let config = SearchConfig { trials_per_arm: 1, ema_weight: 0.7, seed: 41 };
    let outcome = run_strategy(&space, &config, Strategy::AntiBandit, &spec).unwrap();
    let csv = history_csv_string(&outcome.history);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("trial,cell,edge_from,edge_to,op,accuracy,K_current,N"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), outcome.history.len() * space.edges_per_cell());
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 8);
        let trial: u64 = fields[0].parse().unwrap();
        assert_eq!(trial as usize, i / space.edges_per_cell());
        assert!(OperationKind::from_name(fields[4]).is_some(), "unknown op {}", fields[4]);
        let accuracy: f64 = fields[5].parse().unwrap();
        assert_eq!(accuracy, outcome.history[trial as usize].accuracy, "CSV must round-trip");
        let total: u64 = fields[7].parse().unwrap();
        assert_eq!(total, trial + 1);
    }
}
