//! The TOML run configuration: one versioned document describing the search
//! space, the schedule, and the reward oracle. Everything a run needs besides
//! the seed list and output directory (both overridable on the command line).

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use cellsearch::bandit::SearchConfig;
use cellsearch::eval::Evaluator;
use cellsearch::rng::{domain, stream};
use cellsearch::space::{OperationKind, SearchSpace};
use cellsearch::{random_separable_spec, Genotype, TinyNetSpec};
use serde::Deserialize;

/// The only config schema this binary understands.
pub const CONFIG_VERSION: u32 = 1;

/// Top-level document, e.g.:
///
/// ```toml
/// version = 1
/// output_dir = "runs/demo"
/// seeds = [0, 1, 2]
///
/// [search]
/// trials_per_arm = 3
/// ema_weight = 0.7
///
/// [space]
/// cells = 2
/// nodes = 4
/// catalog = ["max_pool_3x3", "skip_connect", "sep_conv_3x3"]
///
/// [evaluator]
/// kind = "synthetic"
/// gap = 0.5
/// noise_sigma = 0.1
/// ```
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Where run artifacts go; `--out` takes precedence.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Seeds to run; `--seeds` takes precedence.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub search: SearchSection,
    pub space: SpaceSection,
    pub evaluator: EvaluatorSection,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Schedule knobs; the seed is injected per run from the seed list.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    #[serde(default = "default_trials_per_arm")]
    pub trials_per_arm: u64,
    #[serde(default = "default_ema_weight")]
    pub ema_weight: f64,
}

fn default_trials_per_arm() -> u64 {
    3
}

fn default_ema_weight() -> f64 {
    0.7
}

impl Default for SearchSection {
    fn default() -> SearchSection {
        SearchSection {
            trials_per_arm: default_trials_per_arm(),
            ema_weight: default_ema_weight(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    /// Stacked cells sharing one architecture.
    pub cells: usize,
    /// Intermediate nodes per cell.
    pub nodes: usize,
    /// Operation names to search over; omitted means the full catalog.
    #[serde(default)]
    pub catalog: Option<Vec<String>>,
}

/// Which reward oracle scores sampled genotypes.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvaluatorSection {
    /// Planted-utility table with optional Gaussian observation noise. The
    /// table itself is generated, not listed, so the config stays small; the
    /// generator is seeded and fully reproducible.
    Synthetic(SyntheticSection),
    /// Adversarially trained micro-network scored on held-out examples.
    Tinynet(TinyNetSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    /// Margin of the planted optimum over every runner-up, in (0, 0.9].
    pub gap: f64,
    /// Standard deviation of per-observation noise; 0 means noiseless.
    #[serde(default)]
    pub noise_sigma: f64,
    /// Clamp noisy observations into [0, 1].
    #[serde(default = "default_true")]
    pub clip: bool,
    /// Seed of the utility-table generator (independent of run seeds).
    #[serde(default)]
    pub spec_seed: u64,
}

fn default_true() -> bool {
    true
}

/// A built oracle plus the ground truth it carries, when it has one.
pub struct RunEvaluator {
    /// `"synthetic"` or `"tinynet"`, echoed into summaries.
    pub kind: &'static str,
    pub evaluator: Box<dyn Evaluator + Send + Sync>,
    /// Known best genotype (synthetic oracle only); lets runs report whether
    /// they recovered it.
    pub planted: Option<Genotype>,
}

impl RunConfig {
    /// Reads and validates a config file; any failure names the problem.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let config: RunConfig = toml::from_str(&text)
            .with_context(|| format!("config file {} is malformed", path.display()))?;
        config
            .validate()
            .with_context(|| format!("config file {} is invalid", path.display()))?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            bail!(
                "field `version`: this binary understands version {CONFIG_VERSION}, got {}",
                self.version
            );
        }
        check_seed_list(&self.seeds).context("field `seeds`")?;
        self.search_config(0)
            .validate()
            .map_err(|e| anyhow!("field `search`: {e}"))?;
        if self.space.cells < 1 {
            bail!("field `space.cells`: need at least one cell");
        }
        if self.space.nodes < 1 {
            bail!("field `space.nodes`: need at least one intermediate node");
        }
        match &self.evaluator {
            EvaluatorSection::Synthetic(s) => {
                if !(s.gap > 0.0 && s.gap <= 0.9) {
                    bail!("field `evaluator.gap`: must lie in (0, 0.9], got {}", s.gap);
                }
                if !(s.noise_sigma.is_finite() && s.noise_sigma >= 0.0) {
                    bail!(
                        "field `evaluator.noise_sigma`: must be finite and non-negative, got {}",
                        s.noise_sigma
                    );
                }
            }
            EvaluatorSection::Tinynet(spec) => {
                if spec.cells != self.space.cells || spec.nodes != self.space.nodes {
                    bail!(
                        "field `evaluator.cells`/`evaluator.nodes`: the trained-network \
                         evaluator is shaped {}x{} but the space is {}x{}; they must match",
                        spec.cells,
                        spec.nodes,
                        self.space.cells,
                        self.space.nodes
                    );
                }
                spec.attack
                    .validate()
                    .map_err(|e| anyhow!("field `evaluator.attack`: {e}"))?;
            }
        }
        Ok(())
    }

    /// The per-run schedule with `seed` plugged in.
    pub fn search_config(&self, seed: u64) -> SearchConfig {
        SearchConfig {
            trials_per_arm: self.search.trials_per_arm,
            ema_weight: self.search.ema_weight,
            seed,
        }
    }

    /// Resolves catalog names and builds the search space.
    pub fn build_space(&self) -> Result<SearchSpace> {
        let catalog: Vec<OperationKind> = match &self.space.catalog {
            None => OperationKind::ALL.to_vec(),
            Some(names) => {
                if names.is_empty() {
                    bail!("field `space.catalog`: an explicit catalog cannot be empty");
                }
                names
                    .iter()
                    .map(|name| {
                        OperationKind::from_name(name).ok_or_else(|| {
                            anyhow!(
                                "field `space.catalog`: unknown operation `{name}` \
                                 (known: {})",
                                known_operation_names()
                            )
                        })
                    })
                    .collect::<Result<_>>()?
            }
        };
        SearchSpace::new(self.space.cells, self.space.nodes, &catalog)
            .map_err(|e| anyhow!("field `space`: {e}"))
    }

    /// Instantiates the configured oracle for `space`.
    pub fn build_evaluator(&self, space: &SearchSpace) -> Result<RunEvaluator> {
        match &self.evaluator {
            EvaluatorSection::Synthetic(s) => {
                let mut rng = stream(s.spec_seed, domain::SAMPLE, 0);
                let spec = random_separable_spec(space, s.gap, s.noise_sigma, s.clip, &mut rng)
                    .map_err(|e| anyhow!("field `evaluator`: {e}"))?;
                let planted = spec
                    .planted_optimum(space)
                    .map_err(|e| anyhow!("field `evaluator`: {e}"))?;
                Ok(RunEvaluator {
                    kind: "synthetic",
                    evaluator: Box::new(spec),
                    planted: Some(planted),
                })
            }
            EvaluatorSection::Tinynet(spec) => Ok(RunEvaluator {
                kind: "tinynet",
                evaluator: Box::new(spec.clone()),
                planted: None,
            }),
        }
    }
}

fn check_seed_list(seeds: &[u64]) -> Result<()> {
    if seeds.is_empty() {
        bail!("need at least one seed");
    }
    let mut seen = std::collections::BTreeSet::new();
    for &seed in seeds {
        if !seen.insert(seed) {
            bail!("seed {seed} appears more than once");
        }
    }
    Ok(())
}

/// Comma list of every operation name, for error messages.
fn known_operation_names() -> String {
    OperationKind::ALL
        .iter()
        .map(|op| op.name())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Validates a seed list given on the command line.
pub fn validate_cli_seeds(seeds: &[u64]) -> Result<()> {
    check_seed_list(seeds).context("flag `--seeds`")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    const MINIMAL: &str = "
        version = 1
        [space]
        cells = 1
        nodes = 2
        [evaluator]
        kind = 'synthetic'
        gap = 0.5
    ";

    #[test]
    fn minimal_config_gets_defaults() {
        let config = parse(MINIMAL).unwrap();
        assert_eq!(config.seeds, vec![0]);
        assert_eq!(config.search.trials_per_arm, 3);
        assert_eq!(config.search.ema_weight, 0.7);
        assert!(config.output_dir.is_none());
        let space = config.build_space().unwrap();
        assert_eq!(space.catalog(), OperationKind::ALL);
        let built = config.build_evaluator(&space).unwrap();
        assert_eq!(built.kind, "synthetic");
        assert!(built.planted.is_some());
    }

    #[test]
    fn unknown_fields_and_bad_values_are_named() {
        let err = parse("version = 2\n[space]\ncells = 1\nnodes = 2\n[evaluator]\nkind = 'synthetic'\ngap = 0.5")
            .unwrap_err()
            .to_string();
        assert!(err.contains("`version`"), "{err}");

        let err = parse(&MINIMAL.replace("gap = 0.5", "gap = 1.5")).unwrap_err().to_string();
        assert!(err.contains("`evaluator.gap`"), "{err}");

        let err = toml::from_str::<RunConfig>(&format!("{MINIMAL}\ntypo = 3"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("typo"), "{err}");

        let err = format!(
            "{:#}",
            parse(&MINIMAL.replace("version = 1", "version = 1\nseeds = [4, 4]")).unwrap_err()
        );
        assert!(err.contains("seed 4"), "{err}");
    }

    #[test]
    fn catalog_names_resolve_or_fail_loudly() {
        let config = parse(&MINIMAL.replace(
            "nodes = 2",
            "nodes = 2\ncatalog = ['denoise', 'skip_connect', 'gabor_3x3']",
        ))
        .unwrap();
        let space = config.build_space().unwrap();
        // The space keeps its catalog in a canonical order regardless of the
        // order names appear in the file.
        assert_eq!(
            space.catalog(),
            &[OperationKind::SkipConnect, OperationKind::Gabor3x3, OperationKind::Denoise]
        );

        let config = parse(&MINIMAL.replace("nodes = 2", "nodes = 2\ncatalog = ['conv_7x7']"))
            .unwrap();
        let err = config.build_space().unwrap_err().to_string();
        assert!(err.contains("conv_7x7") && err.contains("`space.catalog`"), "{err}");
    }

    #[test]
    fn tinynet_section_parses_with_attack_subtable() {
        let config = parse(
            "
            version = 1
            [space]
            cells = 1
            nodes = 2
            [evaluator]
            kind = 'tinynet'
            channels = 2
            dataset_size = 120
            [evaluator.attack]
            epsilon = 0.1
            alpha = 0.125
            steps = 1
            random_init = true
        ",
        )
        .unwrap();
        match &config.evaluator {
            EvaluatorSection::Tinynet(spec) => {
                assert_eq!(spec.channels, 2);
                assert_eq!(spec.dataset_size, 120);
                assert_eq!(spec.attack.epsilon, 0.1);
                // Unlisted fields fall back to evaluator defaults.
                assert_eq!(spec.train_epochs, TinyNetSpec::default().train_epochs);
            }
            other => panic!("wrong evaluator: {other:?}"),
        }
    }

    #[test]
    fn tinynet_shape_must_match_the_space() {
        let err = parse(
            "
            version = 1
            [space]
            cells = 2
            nodes = 3
            [evaluator]
            kind = 'tinynet'
        ",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("must match"), "{err}");
    }
}
