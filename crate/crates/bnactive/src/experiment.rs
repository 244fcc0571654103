//! Multi-trial experiments comparing query strategies against a known network.
//!
//! Outputs in the configured directory:
//! - `trial_<t>.csv`: step reports of every strategy in trial `t`,
//! - `summary.csv`: final metrics per trial plus mean and sample standard deviation,
//! - `manifest.json`: the resolved configuration and trial seeds; it is itself a valid
//!   configuration that reproduces the run.
//!
//! Trial `t` uses seed `derive(seed, "trial", t)`. Within a trial every strategy sees
//! the same initial sample, and each strategy's later streams are keyed by its label,
//! so adding or removing strategies leaves the others' trajectories unchanged.

use std::fs;
use std::path::{Path, PathBuf};

use bnactive_core::{
    run_active, seed, BayesNet, LoopConfig, QueryConfig, ScoreConfig, SearchConfig, Strategy,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::read_network;
use crate::report::{summarize, write_rows, StepRow, SummaryRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoreParams {
    pub equivalent_sample_size: f64,
    pub max_parents: usize,
}

impl Default for ScoreParams {
    fn default() -> Self {
        let d = ScoreConfig::default();
        Self {
            equivalent_sample_size: d.equivalent_sample_size,
            max_parents: d.max_parents,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchParams {
    pub restarts: usize,
    pub max_flips: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        let d = SearchConfig::default();
        Self {
            restarts: d.restarts,
            max_flips: d.max_flips,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QueryParams {
    /// Maximum query size; absent means unbounded.
    pub budget: Option<usize>,
    pub threshold_abs: f64,
    pub threshold_z: f64,
    /// Names of the variables that may be intervened on; absent means all.
    pub candidate_vars: Option<Vec<String>>,
}

impl Default for QueryParams {
    fn default() -> Self {
        let d = QueryConfig::default();
        Self {
            budget: d.budget,
            threshold_abs: d.threshold_abs,
            threshold_z: d.threshold_z,
            candidate_vars: None,
        }
    }
}

/// Experiment description as read from JSON. `network` and `seed` are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// True network file, relative to the configuration file.
    pub network: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: usize,
    pub strategies: Vec<String>,
    pub out: PathBuf,
    pub steps: usize,
    pub initial_observational: usize,
    pub committee_size: usize,
    pub eval_every: usize,
    pub bootstrap_eval_count: usize,
    pub predictive_trials: usize,
    pub samples: usize,
    pub enumeration_budget: u64,
    pub score: ScoreParams,
    pub search: SearchParams,
    pub query: QueryParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let d = LoopConfig::default();
        Self {
            network: None,
            seed: None,
            trials: 5,
            strategies: vec!["passive".into()],
            out: PathBuf::from("results"),
            steps: d.steps,
            initial_observational: d.initial_observational,
            committee_size: d.committee_size,
            eval_every: d.eval_every,
            bootstrap_eval_count: d.bootstrap_eval_count,
            predictive_trials: d.predictive_trials,
            samples: d.samples,
            enumeration_budget: d.enumeration_budget,
            score: ScoreParams::default(),
            search: SearchParams::default(),
            query: QueryParams::default(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrialEntry {
    trial: usize,
    seed: u64,
    file: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    version: String,
    config: ExperimentConfig,
    trials: Vec<TrialEntry>,
}

impl ExperimentConfig {
    /// Read a configuration or a manifest written by [`run_experiment`]. A relative
    /// network path is resolved against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let bad = |e: serde_json::Error| Error::Config(format!("{}: {e}", path.display()));
        let value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
        let mut cfg: Self = if value.get("config").is_some() {
            serde_json::from_value::<Manifest>(value)
                .map_err(bad)?
                .config
        } else {
            serde_json::from_value(value).map_err(bad)?
        };
        if let Some(net) = &cfg.network {
            if net.is_relative() {
                cfg.network = Some(path.parent().unwrap_or(Path::new(".")).join(net));
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configurations always serialize")
    }

    pub fn parsed_strategies(&self) -> Result<Vec<Strategy>> {
        if self.strategies.is_empty() {
            return Err(Error::Config("at least one strategy is required".into()));
        }
        let mut out: Vec<Strategy> = Vec::with_capacity(self.strategies.len());
        for s in &self.strategies {
            let st: Strategy = s.parse().map_err(|e| Error::Config(format!("{e}")))?;
            if out.contains(&st) {
                return Err(Error::Config(format!("strategy `{s}` listed twice")));
            }
            out.push(st);
        }
        Ok(out)
    }

    /// Loop settings for `net`, with candidate variable names resolved.
    pub fn loop_config(&self, net: &BayesNet) -> Result<LoopConfig> {
        let candidate_vars = match &self.query.candidate_vars {
            None => None,
            Some(names) => Some(
                names
                    .iter()
                    .map(|n| {
                        net.variable_index(n).ok_or_else(|| {
                            Error::Config(format!("candidate variable `{n}` is not in the network"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let lc = LoopConfig {
            steps: self.steps,
            initial_observational: self.initial_observational,
            committee_size: self.committee_size,
            eval_every: self.eval_every,
            bootstrap_eval_count: self.bootstrap_eval_count,
            predictive_trials: self.predictive_trials,
            samples: self.samples,
            enumeration_budget: self.enumeration_budget,
            score: ScoreConfig {
                equivalent_sample_size: self.score.equivalent_sample_size,
                max_parents: self.score.max_parents,
            },
            search: SearchConfig {
                restarts: self.search.restarts,
                max_flips: self.search.max_flips,
            },
            query: QueryConfig {
                budget: self.query.budget,
                threshold_abs: self.query.threshold_abs,
                threshold_z: self.query.threshold_z,
                candidate_vars,
                ..QueryConfig::default()
            },
        };
        lc.validate()?;
        Ok(lc)
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::Config("`seed` is required; runs are never seeded from the clock".into())
        })
    }

    pub fn require_network(&self) -> Result<&Path> {
        self.network
            .as_deref()
            .ok_or_else(|| Error::Config("`network` is required".into()))
    }
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    seed::derive(master, "trial", trial as u64)
}

/// Run every (trial, strategy) pair on `jobs` worker threads (all cores if `None`)
/// and write the outputs. The files do not depend on the worker count.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<SummaryRow>> {
    let master = cfg.require_seed()?;
    let net_path = cfg.require_network()?;
    let strategies = cfg.parsed_strategies()?;
    if cfg.trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    let net = read_network(net_path)?;
    let lc = cfg.loop_config(&net)?;

    let tasks: Vec<(usize, Strategy)> = (0..cfg.trials)
        .flat_map(|t| strategies.iter().map(move |&s| (t, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(t, s)| run_active(&net, s, &lc, trial_seed(master, t)))
            .collect::<Vec<_>>()
    });

    let out = &cfg.out;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut trials: Vec<(usize, Vec<StepRow>)> = (0..cfg.trials).map(|t| (t, Vec::new())).collect();
    for ((t, _), reports) in tasks.iter().zip(results) {
        trials[*t]
            .1
            .extend(reports?.iter().map(|r| StepRow::from_report(&net, r)));
    }
    let mut entries = Vec::with_capacity(cfg.trials);
    for (t, rows) in &trials {
        let file = format!("trial_{t}.csv");
        let path = out.join(&file);
        write_rows(
            fs::File::create(&path).map_err(|e| Error::io(&path, e))?,
            rows,
        )?;
        entries.push(TrialEntry {
            trial: *t,
            seed: trial_seed(master, *t),
            file,
        });
    }
    let summary = summarize(&trials)?;
    let path = out.join("summary.csv");
    write_rows(
        fs::File::create(&path).map_err(|e| Error::io(&path, e))?,
        &summary,
    )?;

    let mut resolved = cfg.clone();
    resolved.network = Some(fs::canonicalize(net_path).map_err(|e| Error::io(net_path, e))?);
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").into(),
        config: resolved,
        trials: entries,
    };
    let path = out.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifests always serialize");
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}
