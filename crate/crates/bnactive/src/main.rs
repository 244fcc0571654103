use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bnactive::committee::{read_committee, write_committee};
use bnactive::dataset::{read_dataset, write_dataset, write_dataset_to};
use bnactive::experiment::{run_experiment, ExperimentConfig};
use bnactive::network::{network_to_json, read_network, write_network};
use bnactive::query::{format_query, parse_query};
use bnactive::report::{read_step_file, summarize, write_rows};
use bnactive::{Error, Result};
use bnactive_core::generate::{random_network, RandomNetConfig};
use bnactive_core::{
    bjs, build_committee, evaluate, greedy_query, js, kl2, local_search, score_query, seed,
    Committee, Dataset, Intervention, LoopConfig, Measure, Method, QueryConfig, Record,
    ScoreConfig, SearchConfig, DEFAULT_ENUMERATION_BUDGET,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bnactive",
    version,
    about = "Active learning of Bayesian networks from interventions"
)]
struct Cli {
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random sparse network.
    GenNet(GenNet),
    /// Draw records from a network, optionally under an intervention.
    Sample(SampleCmd),
    /// Learn a network from data by hill climbing.
    Learn(Learn),
    /// Learn a bootstrap committee and write it to a directory.
    Committee(CommitteeCmd),
    /// Print the JS, BJS and KL2 disagreement of a committee under a query.
    Measures(Measures),
    /// Score one query with one measure.
    ScoreQuery(ScoreQuery),
    /// Propose the next query by greedy search.
    ProposeQuery(ProposeQuery),
    /// Run a multi-trial active-learning experiment.
    Active(Active),
    /// Edge error, edge entropy and predictive accuracy of data against a true network.
    Eval(Eval),
    /// Recompute the summary table from the trial files in an output directory.
    Report(Report),
}

#[derive(Args)]
struct GenNet {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    variables: usize,
    #[arg(long, default_value_t = 3)]
    max_arity: usize,
    #[arg(long, default_value_t = 10)]
    edges: usize,
    #[arg(long, default_value_t = 3)]
    max_parents: usize,
    #[arg(long, default_value_t = 1.0)]
    concentration: f64,
}

#[derive(Args)]
struct SampleCmd {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Intervention such as `A=yes;B=lo`.
    #[arg(long, default_value = "")]
    query: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Learning {
    #[arg(long, default_value_t = 1.0)]
    equivalent_sample_size: f64,
    #[arg(long, default_value_t = 4)]
    max_parents: usize,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
}

impl Learning {
    fn configs(&self) -> (ScoreConfig, SearchConfig) {
        (
            ScoreConfig {
                equivalent_sample_size: self.equivalent_sample_size,
                max_parents: self.max_parents,
            },
            SearchConfig {
                restarts: self.restarts,
                ..SearchConfig::default()
            },
        )
    }
}

#[derive(Args)]
struct Learn {
    /// Network whose variables define the data schema.
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    learning: Learning,
}

#[derive(Args)]
struct CommitteeCmd {
    /// Network whose variables define the data schema.
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    committee_size: usize,
    #[command(flatten)]
    learning: Learning,
}

#[derive(Args)]
struct Estimation {
    /// Draws used when a state space is too large to enumerate.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest state space enumerated exactly.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    enumeration_budget: u64,
}

impl Estimation {
    fn method(&self) -> Method {
        Method::Auto {
            budget: self.enumeration_budget,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct Measures {
    #[arg(long)]
    committee: PathBuf,
    #[arg(long, default_value = "")]
    query: String,
    #[command(flatten)]
    estimation: Estimation,
}

#[derive(Args)]
struct ScoreQuery {
    #[arg(long)]
    committee: PathBuf,
    #[arg(long, default_value = "")]
    query: String,
    #[arg(long, default_value = "kl2")]
    measure: Measure,
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    estimation: Estimation,
}

#[derive(Args)]
struct ProposeQuery {
    #[arg(long)]
    committee: PathBuf,
    #[arg(long, default_value = "kl2")]
    measure: Measure,
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    estimation: Estimation,
}

#[derive(Args)]
struct Active {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    net: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the configured strategies; repeat for several.
    #[arg(long)]
    strategy: Vec<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    committee_size: Option<usize>,
}

#[derive(Args)]
struct Eval {
    /// True network.
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    bootstrap: usize,
    #[arg(long, default_value_t = 100)]
    predictive_trials: usize,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[command(flatten)]
    learning: Learning,
}

#[derive(Args)]
struct Report {
    /// Directory written by `active`.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    }
    match cli.command {
        Command::GenNet(a) => gen_net(a),
        Command::Sample(a) => sample(a),
        Command::Learn(a) => learn(a),
        Command::Committee(a) => committee(a),
        Command::Measures(a) => measures(a),
        Command::ScoreQuery(a) => score(a),
        Command::ProposeQuery(a) => propose(a),
        Command::Active(a) => active(a, cli.jobs),
        Command::Eval(a) => eval(a),
        Command::Report(a) => report(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_owned(),
            source: e,
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            }),
    }
}

fn gen_net(a: GenNet) -> Result<()> {
    let cfg = RandomNetConfig {
        variables: a.variables,
        max_arity: a.max_arity,
        edges: a.edges,
        max_parents: a.max_parents,
        concentration: a.concentration,
    };
    let net = random_network(&cfg, &mut seed::rng(a.seed))?;
    match a.out {
        Some(p) => write_network(p, &net),
        None => emit(None, &network_to_json(&net)),
    }
}

fn sample(a: SampleCmd) -> Result<()> {
    let net = read_network(&a.net)?;
    let q = parse_query(&net, &a.query)?;
    let records = net
        .forward_sample(&q, a.count, &mut seed::rng(a.seed))?
        .into_iter()
        .map(|x| Record::under(x, &q))
        .collect();
    let ds = Dataset::new(net.variables().to_vec(), records)?;
    match a.out {
        Some(p) => write_dataset(p, &ds),
        None => write_dataset_to(io::stdout().lock(), &ds),
    }
}

fn learn(a: Learn) -> Result<()> {
    let schema = read_network(&a.net)?;
    let ds = read_dataset(&a.data, schema.variables())?;
    let (cfg, scfg) = a.learning.configs();
    let net = local_search(&ds, &cfg, &scfg, &mut seed::rng(a.seed))?;
    match a.out {
        Some(p) => write_network(p, &net),
        None => emit(None, &network_to_json(&net)),
    }
}

fn committee(a: CommitteeCmd) -> Result<()> {
    let schema = read_network(&a.net)?;
    let ds = read_dataset(&a.data, schema.variables())?;
    let (cfg, scfg) = a.learning.configs();
    let c = build_committee(&ds, a.committee_size, &cfg, &scfg, a.seed)?;
    write_committee(&a.out, &c)
}

fn committee_and_query(path: &Path, query: &str) -> Result<(Committee, Intervention)> {
    let c = read_committee(path)?;
    let q = parse_query(&c.members()[0], query)?;
    Ok((c, q))
}

fn measures(a: Measures) -> Result<()> {
    let (c, q) = committee_and_query(&a.committee, &a.query)?;
    let method = a.estimation.method();
    let mut text = String::from("measure,value,std_error,method\n");
    for (m, f) in [
        (Measure::Js, js as fn(&_, &_, _) -> _),
        (Measure::Bjs, bjs),
        (Measure::Kl2, kl2),
    ] {
        let e = f(&c, &q, method)?;
        text.push_str(&format!("{m},{},{},{}\n", e.value, e.std_error, e.kind));
    }
    emit(None, &text)
}

fn score(a: ScoreQuery) -> Result<()> {
    let (c, q) = committee_and_query(&a.committee, &a.query)?;
    let cfg = QueryConfig {
        measure: a.measure,
        budget: a.budget,
        ..QueryConfig::default()
    };
    let e = score_query(&c, &q, &cfg, a.estimation.method())?;
    emit(
        None,
        &format!(
            "query,measure,value,std_error,method\n{},{},{},{},{}\n",
            format_query(&c.members()[0], &q),
            a.measure,
            e.value,
            e.std_error,
            e.kind
        ),
    )
}

fn propose(a: ProposeQuery) -> Result<()> {
    let c = read_committee(&a.committee)?;
    let cfg = QueryConfig {
        measure: a.measure,
        budget: a.budget,
        ..QueryConfig::default()
    };
    let choice = greedy_query(&c, &cfg, a.estimation.method())?;
    emit(
        None,
        &format!(
            "query,measure,value,std_error\n{},{},{},{}\n",
            format_query(&c.members()[0], &choice.query),
            a.measure,
            choice.score.value,
            choice.score.std_error
        ),
    )
}

fn active(a: Active, jobs: Option<usize>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = Some(s);
    }
    if let Some(n) = a.net {
        cfg.network = Some(n);
    }
    if let Some(o) = a.out {
        cfg.out = o;
    }
    if !a.strategy.is_empty() {
        cfg.strategies = a.strategy;
    }
    if let Some(t) = a.steps {
        cfg.steps = t;
    }
    if a.budget.is_some() {
        cfg.query.budget = a.budget;
    }
    if let Some(k) = a.committee_size {
        cfg.committee_size = k;
    }
    run_experiment(&cfg, jobs)?;
    eprintln!("wrote {}", cfg.out.join("summary.csv").display());
    Ok(())
}

fn eval(a: Eval) -> Result<()> {
    let truth = read_network(&a.net)?;
    let ds = read_dataset(&a.data, truth.variables())?;
    let (score, search) = a.learning.configs();
    let lc = LoopConfig {
        bootstrap_eval_count: a.bootstrap,
        predictive_trials: a.predictive_trials,
        samples: a.samples,
        score,
        search,
        ..LoopConfig::default()
    };
    lc.validate()?;
    let m = evaluate(&truth, &ds, &lc, a.seed)?;
    emit(
        None,
        &format!(
            "edge_error,edge_entropy,pkl0,pkl1,pkl5,pkl10\n{},{},{},{},{},{}\n",
            m.edge_error,
            m.edge_entropy,
            m.predictive[0],
            m.predictive[1],
            m.predictive[2],
            m.predictive[3]
        ),
    )
}

fn report(a: Report) -> Result<()> {
    let mut trials = Vec::new();
    for t in 0.. {
        let path = a.out.join(format!("trial_{t}.csv"));
        if !path.exists() {
            break;
        }
        trials.push((t, read_step_file(&path)?));
    }
    if trials.is_empty() {
        return Err(Error::Config(format!(
            "no trial_0.csv in {}",
            a.out.display()
        )));
    }
    write_rows(io::stdout().lock(), &summarize(&trials)?)
}
