//! Closed-loop active learning against a simulated true network, and the metrics
//! used to judge the learned structures.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::committee::build_committee;
use crate::data::{Dataset, Record};
use crate::divergence::{kl_between, DivergenceEstimate, Method};
use crate::error::{Error, Result};
use crate::inference::DEFAULT_ENUMERATION_BUDGET;
use crate::learning::{local_search, ScoreConfig, SearchConfig};
use crate::net::{BayesNet, Dag, Intervention};
use crate::query::{greedy_query, Measure, QueryConfig};
use crate::seed;

/// Intervention sizes at which predictive accuracy is reported.
pub const PREDICTIVE_SIZES: [usize; 4] = [0, 1, 5, 10];

/// Size-1 interventions are enumerated exhaustively on networks up to this size.
const EXHAUSTIVE_SINGLETON_LIMIT: usize = 12;

/// How the learner picks its next query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Always observe without intervening.
    Passive,
    /// Intervene on this many uniformly chosen variables with uniform states.
    Random(usize),
    /// Greedy committee-disagreement query.
    Active(Measure),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Passive => f.write_str("passive"),
            Self::Random(k) => write!(f, "random:{k}"),
            Self::Active(m) => write!(f, "active:{m}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unknown strategy `{s}`"));
        match s.split_once(':') {
            None if s == "passive" => Ok(Self::Passive),
            Some(("random", k)) => k.parse().map(Self::Random).map_err(|_| bad()),
            Some(("active", m)) => m.parse().map(Self::Active),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub steps: usize,
    pub initial_observational: usize,
    pub committee_size: usize,
    /// Evaluate every this many steps; step 0 and the final step are always evaluated.
    /// Zero evaluates only those two.
    pub eval_every: usize,
    pub bootstrap_eval_count: usize,
    /// Random interventions averaged per size when exhaustive averaging is infeasible.
    pub predictive_trials: usize,
    /// Sample count for divergences whose state space exceeds the enumeration budget.
    pub samples: usize,
    pub enumeration_budget: u64,
    pub score: ScoreConfig,
    pub search: SearchConfig,
    /// Query search settings; the measure is taken from the strategy.
    pub query: QueryConfig,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            steps: 150,
            initial_observational: 20,
            committee_size: 2,
            eval_every: 0,
            bootstrap_eval_count: 50,
            predictive_trials: 100,
            samples: 2000,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            score: ScoreConfig::default(),
            search: SearchConfig::default(),
            query: QueryConfig::default(),
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_observational == 0 {
            return Err(Error::InvalidConfig(
                "at least one initial observation is required".into(),
            ));
        }
        if self.bootstrap_eval_count < 2 {
            return Err(Error::InvalidConfig(
                "evaluation needs at least two bootstrap networks".into(),
            ));
        }
        if self.committee_size == 0 {
            return Err(Error::InvalidConfig(
                "committee size must be at least 1".into(),
            ));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("sample count must be positive".into()));
        }
        self.score.validate()?;
        self.search.validate()?;
        self.query.validate()
    }

    fn method(&self, seed: u64) -> Method {
        Method::Auto {
            budget: self.enumeration_budget,
            samples: self.samples,
            seed,
        }
    }
}

/// Structure and prediction quality at one point of the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    pub edge_error: f64,
    pub edge_entropy: f64,
    /// Predictive KL at each of [`PREDICTIVE_SIZES`].
    pub predictive: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// 0 is the initial observational sample; step `t` has `N0 + t` records.
    pub step: usize,
    pub strategy: Strategy,
    pub query: Intervention,
    /// Disagreement score of the chosen query, for active strategies.
    pub score: Option<(Measure, DivergenceEstimate)>,
    pub metrics: Option<EvalMetrics>,
    pub dataset_size: usize,
}

/// One draw from the true network under `do(q)`, flagged on exactly the query variables.
pub fn oracle_respond<R: Rng + ?Sized>(
    true_net: &BayesNet,
    q: &Intervention,
    rng: &mut R,
) -> Result<Record> {
    let x = true_net.mutilate(q)?.sample_one(rng);
    Ok(Record::under(x, q))
}

/// `k` distinct variables chosen uniformly, each set to a uniform state. `k` is capped
/// at the number of variables.
pub fn random_query<R: Rng + ?Sized>(net: &BayesNet, k: usize, rng: &mut R) -> Intervention {
    let n = net.len();
    let vars = rand::seq::index::sample(rng, n, k.min(n));
    let mut assignments = Vec::with_capacity(vars.len());
    for v in vars.iter() {
        assignments.push((v, rng.random_range(0..net.variable(v).arity())));
    }
    Intervention::new(assignments).expect("distinct variables")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Forward,
    Backward,
    Absent,
}

fn relation(dag: &Dag, i: usize, j: usize) -> Relation {
    if dag.has_edge(i, j) {
        Relation::Forward
    } else if dag.has_edge(j, i) {
        Relation::Backward
    } else {
        Relation::Absent
    }
}

fn check_structures(dags: &[Dag], n: usize, min: usize) -> Result<()> {
    if dags.len() < min {
        return Err(Error::InvalidConfig(format!(
            "need at least {min} bootstrap structures, got {}",
            dags.len()
        )));
    }
    if dags.iter().any(|d| d.len() != n) {
        return Err(Error::SchemaMismatch);
    }
    Ok(())
}

/// Relation frequencies `[->, <-, none]` of each unordered pair `i < j`.
fn pair_frequencies(
    dags: &[Dag],
    n: usize,
) -> impl Iterator<Item = ((usize, usize), [f64; 3])> + '_ {
    let total = dags.len() as f64;
    (0..n).flat_map(move |i| {
        (i + 1..n).map(move |j| {
            let mut counts = [0usize; 3];
            for d in dags {
                counts[relation(d, i, j) as usize] += 1;
            }
            ((i, j), counts.map(|c| c as f64 / total))
        })
    })
}

/// Sum over unordered pairs of `1 - frequency of the true pair relation` among the
/// bootstrap structures. A reversed edge counts as one wrong pair.
pub fn edge_error(boot: &[Dag], truth: &Dag) -> Result<f64> {
    check_structures(boot, truth.len(), 1)?;
    Ok(pair_frequencies(boot, truth.len())
        .map(|((i, j), freq)| 1.0 - freq[relation(truth, i, j) as usize])
        .sum())
}

/// Sum over unordered pairs of the entropy (nats) of the pair-relation frequencies.
pub fn edge_entropy(boot: &[Dag]) -> Result<f64> {
    let n = boot.first().map_or(0, Dag::len);
    check_structures(boot, n, 2)?;
    Ok(pair_frequencies(boot, n)
        .map(|(_, freq)| {
            -freq
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| p * libm::log(p))
                .sum::<f64>()
        })
        .sum())
}

/// Mean `KL(true || learned)` under interventions of size `k`.
///
/// `k = 0` is the observational KL. Size-1 interventions are averaged exhaustively on
/// small networks; otherwise `trials` random interventions of size `min(k, n)` are drawn.
pub fn predictive_accuracy<R: Rng + ?Sized>(
    true_net: &BayesNet,
    learned: &BayesNet,
    k: usize,
    trials: usize,
    method: Method,
    rng: &mut R,
) -> Result<f64> {
    if !true_net.same_schema(learned) {
        return Err(Error::SchemaMismatch);
    }
    let n = true_net.len();
    let k = k.min(n);
    let queries: Vec<Intervention> = if k == 0 {
        vec![Intervention::empty()]
    } else if k == 1 && n <= EXHAUSTIVE_SINGLETON_LIMIT {
        (0..n)
            .flat_map(|v| {
                (0..true_net.variable(v).arity()).map(move |s| Intervention::single(v, s))
            })
            .collect()
    } else {
        if trials == 0 {
            return Err(Error::InvalidConfig(
                "predictive trials must be positive".into(),
            ));
        }
        (0..trials)
            .map(|_| random_query(true_net, k, rng))
            .collect()
    };
    let mut total = 0.0;
    for (i, q) in queries.iter().enumerate() {
        let m = method.reseeded(seed::derive(rng_seed(&method), "predictive", i as u64));
        total += kl_between(true_net, learned, q, m)?.value;
    }
    Ok(total / queries.len() as f64)
}

fn rng_seed(method: &Method) -> u64 {
    match *method {
        Method::Exact { .. } => 0,
        Method::Sampled { seed, .. } | Method::Auto { seed, .. } => seed,
    }
}

/// Edge metrics over `B` bootstrap re-learnings and predictive accuracy of the network
/// learned from the full data.
pub fn evaluate(
    true_net: &BayesNet,
    ds: &Dataset,
    cfg: &LoopConfig,
    seed: u64,
) -> Result<EvalMetrics> {
    let boot = crate::par::map_indexed(cfg.bootstrap_eval_count, |b| {
        let sample = ds.bootstrap_resample(&mut seed::stream(seed, "eval-resample", b as u64))?;
        local_search(
            &sample,
            &cfg.score,
            &cfg.search,
            &mut seed::stream(seed, "eval-search", b as u64),
        )
        .map(|net| net.dag().clone())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let learned = local_search(
        ds,
        &cfg.score,
        &cfg.search,
        &mut seed::stream(seed, "learn", 0),
    )?;
    let mut predictive = [0.0; 4];
    for (slot, &k) in predictive.iter_mut().zip(&PREDICTIVE_SIZES) {
        *slot = predictive_accuracy(
            true_net,
            &learned,
            k,
            cfg.predictive_trials,
            cfg.method(seed::derive(seed, "predictive-kl", k as u64)),
            &mut seed::stream(seed, "predictive-queries", k as u64),
        )?;
    }
    Ok(EvalMetrics {
        edge_error: edge_error(&boot, true_net.dag())?,
        edge_entropy: edge_entropy(&boot)?,
        predictive,
    })
}

fn strategy_label(strategy: Strategy) -> String {
    format!("{strategy}")
}

/// Run one trial of the active-learning loop.
///
/// The initial observational sample depends only on `seed`, so every strategy of a
/// trial starts from the same data. Evaluation at step `t` is keyed by `(seed, t)`
/// alone, so equal datasets get equal metrics; query, committee and oracle streams
/// are keyed by the strategy.
pub fn run_active(
    true_net: &BayesNet,
    strategy: Strategy,
    cfg: &LoopConfig,
    seed: u64,
) -> Result<Vec<StepReport>> {
    cfg.validate()?;
    let mut ds = Dataset::empty(true_net.variables().to_vec());
    let mut rng = seed::stream(seed, "initial", 0);
    for _ in 0..cfg.initial_observational {
        ds.push(oracle_respond(true_net, &Intervention::empty(), &mut rng)?)?;
    }
    let run_seed = seed::derive(seed, &strategy_label(strategy), 0);
    let is_eval =
        |t: usize| t == 0 || t == cfg.steps || (cfg.eval_every > 0 && t % cfg.eval_every == 0);

    let mut reports = Vec::with_capacity(cfg.steps + 1);
    reports.push(StepReport {
        step: 0,
        strategy,
        query: Intervention::empty(),
        score: None,
        metrics: Some(evaluate(true_net, &ds, cfg, seed::derive(seed, "eval", 0))?),
        dataset_size: ds.len(),
    });
    for t in 1..=cfg.steps {
        let step_seed = seed::derive(run_seed, "step", t as u64);
        let (query, score) = match strategy {
            Strategy::Passive => (Intervention::empty(), None),
            Strategy::Random(k) => (
                random_query(true_net, k, &mut seed::stream(step_seed, "query", 0)),
                None,
            ),
            Strategy::Active(measure) => {
                let committee = build_committee(
                    &ds,
                    cfg.committee_size,
                    &cfg.score,
                    &cfg.search,
                    seed::derive(step_seed, "committee", 0),
                )?;
                let qcfg = QueryConfig {
                    measure,
                    ..cfg.query.clone()
                };
                let choice = greedy_query(
                    &committee,
                    &qcfg,
                    cfg.method(seed::derive(step_seed, "measure", 0)),
                )?;
                (choice.query, Some((measure, choice.score)))
            }
        };
        ds.push(oracle_respond(
            true_net,
            &query,
            &mut seed::stream(step_seed, "oracle", 0),
        )?)?;
        let metrics = if is_eval(t) {
            Some(evaluate(
                true_net,
                &ds,
                cfg,
                seed::derive(seed, "eval", t as u64),
            )?)
        } else {
            None
        };
        reports.push(StepReport {
            step: t,
            strategy,
            query,
            score,
            metrics,
            dataset_size: ds.len(),
        });
    }
    Ok(reports)
}
