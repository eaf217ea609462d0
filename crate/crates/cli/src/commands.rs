//! The four verbs. Each takes a resolved [`Context`] and returns an error
//! only for genuine failures; expected outcomes (parked runs, already-finished
//! resumes) are reported on stdout.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context as _, Result};
use cellsearch::bandit::{run_strategy, SearchOutcome, Strategy};
use cellsearch::{one_sided_diff_lower_bound, wilson_lower_bound, Z_95};

use crate::runner::{self, Context, SeedOutcome};

pub fn cmd_search(ctx: &Context, stop_after: Option<u64>) -> Result<()> {
    let outcomes = runner::run_indexed(ctx.jobs, ctx.seeds.len(), |i| {
        runner::run_seed(ctx, ctx.seeds[i], stop_after)
    })?;
    report_outcomes(ctx, &outcomes)
}

pub fn cmd_resume(ctx: &Context) -> Result<()> {
    let outcomes = runner::run_indexed(ctx.jobs, ctx.seeds.len(), |i| {
        runner::resume_seed(ctx, ctx.seeds[i])
    })?;
    report_outcomes(ctx, &outcomes)
}

fn report_outcomes(ctx: &Context, outcomes: &[SeedOutcome]) -> Result<()> {
    for (seed, outcome) in ctx.seeds.iter().zip(outcomes) {
        match outcome {
            SeedOutcome::Finished(s) => {
                let recovered = match s.recovered_optimum {
                    Some(true) => ", recovered optimum",
                    Some(false) => ", missed optimum",
                    None => "",
                };
                println!(
                    "seed {seed}: best {:.4} after {} evaluator calls{recovered} ({:.2}s) -> {}",
                    s.best_accuracy,
                    s.evaluator_calls,
                    s.wall_seconds,
                    ctx.seed_dir(*seed).display()
                );
            }
            SeedOutcome::Parked { done, budget } => {
                println!(
                    "seed {seed}: parked at {done}/{budget} trials; checkpoint in {}",
                    ctx.seed_dir(*seed).display()
                );
            }
            SeedOutcome::AlreadyFinished => {
                println!("seed {seed}: already finished; nothing to do");
            }
        }
    }
    let finished = runner::aggregate_summaries(&ctx.out_dir)?;
    if !finished.is_empty() {
        println!(
            "wrote {} ({} finished run{})",
            ctx.out_dir.join("summary.json").display(),
            finished.len(),
            if finished.len() == 1 { "" } else { "s" }
        );
    }
    Ok(())
}

/// One strategy's aggregate row in the comparison table.
struct CompareRow {
    strategy: Strategy,
    recoveries: u64,
    mean_best: f64,
    mean_calls: f64,
}

pub fn cmd_compare(ctx: &Context) -> Result<()> {
    let planted = ctx
        .evaluator
        .planted
        .as_ref()
        .context("compare needs the synthetic evaluator: it carries the ground truth that recovery rates are measured against")?;
    let seeds = &ctx.seeds;
    if seeds.len() < 2 {
        bail!("compare needs at least two seeds to estimate rates");
    }

    let strategies = Strategy::ALL;
    let outcomes: Vec<SearchOutcome> =
        runner::run_indexed(ctx.jobs, strategies.len() * seeds.len(), |i| {
            let strategy = strategies[i / seeds.len()];
            let config = ctx.config.search_config(seeds[i % seeds.len()]);
            run_strategy(&ctx.space, &config, strategy, ctx.evaluator.evaluator.as_ref())
                .map_err(|e| anyhow!("{} seed {}: {e}", strategy.name(), config.seed))
        })?;

    // Fairness: every strategy must have spent exactly the same budget.
    let budget = outcomes[0].evaluator_calls;
    if outcomes.iter().any(|o| o.evaluator_calls != budget) {
        bail!("internal error: strategies ran with unequal budgets");
    }

    let n = seeds.len() as u64;
    let rows: Vec<CompareRow> = strategies
        .iter()
        .enumerate()
        .map(|(s, &strategy)| {
            let per_seed = &outcomes[s * seeds.len()..(s + 1) * seeds.len()];
            CompareRow {
                strategy,
                recoveries: per_seed.iter().filter(|o| &o.genotype == planted).count() as u64,
                mean_best: per_seed.iter().map(|o| o.best_accuracy).sum::<f64>() / n as f64,
                mean_calls: budget as f64,
            }
        })
        .collect();
    let uniform = rows
        .iter()
        .find(|r| r.strategy == Strategy::UniformRandom)
        .expect("the strategy list includes the uniform baseline");
    let uniform_recoveries = uniform.recoveries;

    let mut csv = String::from(
        "strategy,seeds,recoveries,recovery_rate,recovery_wilson_lower_95,\
         mean_best_accuracy,mean_evaluator_calls,diff_vs_uniform_lower_95\n",
    );
    println!("comparing {} strategies over {n} seeds, {budget} evaluator calls each", rows.len());
    println!(
        "{:<16} {:>9} {:>7} {:>9} {:>10} {:>11} {:>17}",
        "strategy", "recovered", "rate", "wilson95", "mean best", "mean calls", "diff vs uniform"
    );
    for row in &rows {
        let rate = row.recoveries as f64 / n as f64;
        let wilson = wilson_lower_bound(row.recoveries, n, Z_95)?;
        // One-sided 95% lower bound on (this rate − uniform's rate): positive
        // means the advantage over blind sampling is statistically real.
        let diff = if row.strategy == Strategy::UniformRandom {
            None
        } else {
            Some(one_sided_diff_lower_bound(row.recoveries, n, uniform_recoveries, n, Z_95)?)
        };
        println!(
            "{:<16} {:>9} {:>7.3} {:>9.3} {:>11.4} {:>11} {:>17}",
            row.strategy.name(),
            format!("{}/{n}", row.recoveries),
            rate,
            wilson,
            row.mean_best,
            row.mean_calls,
            diff.map_or_else(|| "-".to_string(), |d| format!("{d:.4}")),
        );
        writeln!(
            csv,
            "{},{n},{},{rate},{wilson},{},{},{}",
            row.strategy.name(),
            row.recoveries,
            row.mean_best,
            row.mean_calls,
            diff.map_or_else(String::new, |d| d.to_string()),
        )?;
    }

    std::fs::create_dir_all(&ctx.out_dir)
        .with_context(|| format!("cannot create output directory {}", ctx.out_dir.display()))?;
    let path = ctx.out_dir.join("compare.csv");
    runner::write_atomic(&path, csv.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Which schedule knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    /// EMA weight on the newest accuracy.
    Lambda,
    /// Sampling trials per arm per abandonment round.
    T,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::T => "t",
        }
    }
}

/// Grid values actually swept, after parsing/defaulting.
#[derive(Debug)]
enum SweepValues {
    Lambda(Vec<f64>),
    T(Vec<u64>),
}

fn sweep_grid(param: SweepParam, values: Option<&[String]>) -> Result<SweepValues> {
    match (param, values) {
        // Default grids: the full EMA-weight ladder (the 0.7 default
        // included), and small per-round trial counts.
        (SweepParam::Lambda, None) => {
            Ok(SweepValues::Lambda((1..=9).map(|i| i as f64 / 10.0).collect()))
        }
        (SweepParam::T, None) => Ok(SweepValues::T(vec![1, 2, 3, 4])),
        (SweepParam::Lambda, Some(raw)) => {
            let mut grid = Vec::new();
            for text in raw {
                let value: f64 = text
                    .parse()
                    .map_err(|_| anyhow!("flag `--values`: `{text}` is not a number"))?;
                if !(0.0..=1.0).contains(&value) {
                    bail!("flag `--values`: lambda must lie in [0, 1], got {value}");
                }
                grid.push(value);
            }
            Ok(SweepValues::Lambda(grid))
        }
        (SweepParam::T, Some(raw)) => {
            let mut grid = Vec::new();
            for text in raw {
                let value: u64 = text
                    .parse()
                    .map_err(|_| anyhow!("flag `--values`: `{text}` is not a positive integer"))?;
                if value < 1 {
                    bail!("flag `--values`: t must be at least 1");
                }
                grid.push(value);
            }
            Ok(SweepValues::T(grid))
        }
    }
}

pub fn cmd_sweep(ctx: &Context, param: SweepParam, values: Option<&[String]>) -> Result<()> {
    let grid = sweep_grid(param, values)?;
    let (labels, configs): (Vec<String>, Vec<_>) = match &grid {
        SweepValues::Lambda(values) => values
            .iter()
            .map(|&v| {
                let mut config = ctx.config.search_config(0);
                config.ema_weight = v;
                (v.to_string(), config)
            })
            .unzip(),
        // A trial-count sweep holds the EMA weight at the configured value.
        SweepValues::T(values) => values
            .iter()
            .map(|&v| {
                let mut config = ctx.config.search_config(0);
                config.trials_per_arm = v;
                (v.to_string(), config)
            })
            .unzip(),
    };
    for (label, config) in labels.iter().zip(&configs) {
        config
            .validate()
            .map_err(|e| anyhow!("flag `--values`: {} = {label}: {e}", param.name()))?;
    }

    let seeds = &ctx.seeds;
    println!(
        "sweeping {} over {} value{} x {} seed{} ({} runs)",
        param.name(),
        labels.len(),
        if labels.len() == 1 { "" } else { "s" },
        seeds.len(),
        if seeds.len() == 1 { "" } else { "s" },
        labels.len() * seeds.len()
    );

    let outcomes: Vec<SearchOutcome> =
        runner::run_indexed(ctx.jobs, configs.len() * seeds.len(), |i| {
            let mut config = configs[i / seeds.len()].clone();
            config.seed = seeds[i % seeds.len()];
            run_strategy(
                &ctx.space,
                &config,
                Strategy::AntiBandit,
                ctx.evaluator.evaluator.as_ref(),
            )
            .map_err(|e| {
                anyhow!("{} = {} seed {}: {e}", param.name(), labels[i / seeds.len()], config.seed)
            })
        })?;

    let mut csv = String::from("param,value,seed,recovered,best_accuracy,evaluator_calls\n");
    for (v, label) in labels.iter().enumerate() {
        let per_seed = &outcomes[v * seeds.len()..(v + 1) * seeds.len()];
        let mut recoveries = 0u64;
        for (seed, outcome) in seeds.iter().zip(per_seed) {
            let recovered = runner::recovered(ctx.evaluator.planted.as_ref(), &outcome.genotype);
            if recovered == Some(true) {
                recoveries += 1;
            }
            writeln!(
                csv,
                "{},{label},{seed},{},{},{}",
                param.name(),
                recovered.map_or_else(String::new, |r| r.to_string()),
                outcome.best_accuracy,
                outcome.evaluator_calls,
            )?;
        }
        let mean_best =
            per_seed.iter().map(|o| o.best_accuracy).sum::<f64>() / seeds.len() as f64;
        if ctx.evaluator.planted.is_some() {
            println!(
                "{} = {label}: recovered {recoveries}/{}, mean best {mean_best:.4}",
                param.name(),
                seeds.len()
            );
        } else {
            println!("{} = {label}: mean best {mean_best:.4}", param.name());
        }
    }

    std::fs::create_dir_all(&ctx.out_dir)
        .with_context(|| format!("cannot create output directory {}", ctx.out_dir.display()))?;
    let path = ctx.out_dir.join("sweep.csv");
    runner::write_atomic(&path, csv.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}
