//! Step-report and summary CSV files.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use bnactive_core::{BayesNet, StepReport};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::format_query;

/// One line of a trial CSV. Metric fields are empty on steps that were not evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub step: usize,
    pub strategy: String,
    pub query: String,
    pub measure: Option<String>,
    pub score: Option<f64>,
    pub score_se: Option<f64>,
    pub edge_error: Option<f64>,
    pub edge_entropy: Option<f64>,
    pub pkl0: Option<f64>,
    pub pkl1: Option<f64>,
    pub pkl5: Option<f64>,
    pub pkl10: Option<f64>,
}

impl StepRow {
    pub fn from_report(net: &BayesNet, r: &StepReport) -> Self {
        let m = r.metrics.as_ref();
        Self {
            step: r.step,
            strategy: r.strategy.to_string(),
            query: format_query(net, &r.query),
            measure: r.score.map(|(m, _)| m.to_string()),
            score: r.score.map(|(_, e)| e.value),
            score_se: r.score.map(|(_, e)| e.std_error),
            edge_error: m.map(|m| m.edge_error),
            edge_entropy: m.map(|m| m.edge_entropy),
            pkl0: m.map(|m| m.predictive[0]),
            pkl1: m.map(|m| m.predictive[1]),
            pkl5: m.map(|m| m.predictive[2]),
            pkl10: m.map(|m| m.predictive[3]),
        }
    }

    fn metrics(&self) -> Option<[f64; 6]> {
        Some([
            self.edge_error?,
            self.edge_entropy?,
            self.pkl0?,
            self.pkl1?,
            self.pkl5?,
            self.pkl10?,
        ])
    }

    fn query_size(&self) -> usize {
        self.query.split(';').filter(|p| !p.is_empty()).count()
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(w);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn read_step_rows<R: Read>(r: R) -> Result<Vec<StepRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .collect::<Result<Vec<_>, _>>()
        .map_err(Error::from)
}

pub fn read_step_file(path: impl AsRef<Path>) -> Result<Vec<StepRow>> {
    let path = path.as_ref();
    read_step_rows(File::open(path).map_err(|e| Error::io(path, e))?)
}

/// Final metrics of one strategy in one trial, or the mean or sample standard
/// deviation of those across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: String,
    /// Trial index, `mean` or `std`.
    pub trial: String,
    pub final_step: Option<usize>,
    pub edge_error: Option<f64>,
    pub edge_entropy: Option<f64>,
    pub pkl0: Option<f64>,
    pub pkl1: Option<f64>,
    pub pkl5: Option<f64>,
    pub pkl10: Option<f64>,
    /// Mean number of intervened variables per query over steps after the first.
    pub mean_query_size: Option<f64>,
}

impl SummaryRow {
    fn values(&self) -> [Option<f64>; 7] {
        [
            self.edge_error,
            self.edge_entropy,
            self.pkl0,
            self.pkl1,
            self.pkl5,
            self.pkl10,
            self.mean_query_size,
        ]
    }

    fn with_values(strategy: &str, trial: &str, v: [Option<f64>; 7]) -> Self {
        Self {
            strategy: strategy.to_owned(),
            trial: trial.to_owned(),
            final_step: None,
            edge_error: v[0],
            edge_entropy: v[1],
            pkl0: v[2],
            pkl1: v[3],
            pkl5: v[4],
            pkl10: v[5],
            mean_query_size: v[6],
        }
    }
}

fn trial_row(strategy: &str, trial: usize, rows: &[&StepRow]) -> Result<SummaryRow> {
    let last = rows
        .iter()
        .rev()
        .find_map(|r| r.metrics().map(|m| (r.step, m)))
        .ok_or_else(|| {
            Error::Config(format!(
                "trial {trial} of `{strategy}` has no evaluated step"
            ))
        })?;
    let queried: Vec<usize> = rows
        .iter()
        .filter(|r| r.step > 0)
        .map(|r| r.query_size())
        .collect();
    let mean_query_size =
        (!queried.is_empty()).then(|| queried.iter().sum::<usize>() as f64 / queried.len() as f64);
    let m = last.1;
    let mut row = SummaryRow::with_values(
        strategy,
        &trial.to_string(),
        [
            Some(m[0]),
            Some(m[1]),
            Some(m[2]),
            Some(m[3]),
            Some(m[4]),
            Some(m[5]),
            mean_query_size,
        ],
    );
    row.final_step = Some(last.0);
    Ok(row)
}

fn mean_std(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.len() > 1)
        .then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

/// Per-trial rows followed by `mean` and `std` rows for every strategy, strategies in
/// order of first appearance. `trials` holds each trial's index and its step rows.
pub fn summarize(trials: &[(usize, Vec<StepRow>)]) -> Result<Vec<SummaryRow>> {
    let mut strategies: Vec<&str> = Vec::new();
    for (_, rows) in trials {
        for r in rows {
            if !strategies.contains(&r.strategy.as_str()) {
                strategies.push(&r.strategy);
            }
        }
    }
    let mut out = Vec::new();
    for s in strategies {
        let per_trial = trials
            .iter()
            .map(|(t, rows)| {
                let mine: Vec<&StepRow> = rows.iter().filter(|r| r.strategy == s).collect();
                trial_row(s, *t, &mine)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut mean = [None; 7];
        let mut std = [None; 7];
        for k in 0..7 {
            let xs: Vec<f64> = per_trial.iter().filter_map(|r| r.values()[k]).collect();
            if xs.len() == per_trial.len() && !xs.is_empty() {
                let (m, sd) = mean_std(&xs);
                mean[k] = Some(m);
                std[k] = sd;
            }
        }
        out.extend(per_trial);
        out.push(SummaryRow::with_values(s, "mean", mean));
        out.push(SummaryRow::with_values(s, "std", std));
    }
    Ok(out)
}
