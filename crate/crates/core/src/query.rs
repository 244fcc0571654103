//! Greedy search over interventions maximizing committee disagreement.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::committee::Committee;
use crate::divergence::{bjs, js, kl2, DivergenceEstimate, Method};
use crate::error::{Error, Result};
use crate::net::Intervention;

/// Disagreement measure used to score a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Js,
    Bjs,
    Kl2,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Js => "js",
            Self::Bjs => "bjs",
            Self::Kl2 => "kl2",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "js" => Ok(Self::Js),
            "bjs" => Ok(Self::Bjs),
            "kl2" => Ok(Self::Kl2),
            _ => Err(Error::InvalidConfig(format!("unknown measure `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryConfig {
    pub measure: Measure,
    /// Maximum number of query variables; `None` is unbounded.
    pub budget: Option<usize>,
    /// Minimum gain required to accept an extension.
    pub threshold_abs: f64,
    /// Multiplier on the extension's standard error in the acceptance threshold.
    pub threshold_z: f64,
    /// Variables eligible for intervention; `None` means all.
    pub candidate_vars: Option<Vec<usize>>,
}

impl Default for QueryConfig {
    fn default() -> Self {
        Self {
            measure: Measure::Kl2,
            budget: None,
            threshold_abs: 1e-6,
            threshold_z: 2.0,
            candidate_vars: None,
        }
    }
}

impl QueryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_abs >= 0.0 && self.threshold_z >= 0.0) {
            return Err(Error::InvalidConfig(String::from(
                "query thresholds must be nonnegative",
            )));
        }
        Ok(())
    }
}

/// Disagreement of the committee under `do(q)` according to `cfg.measure`.
pub fn score_query(
    c: &Committee,
    q: &Intervention,
    cfg: &QueryConfig,
    method: Method,
) -> Result<DivergenceEstimate> {
    if let Some(b) = cfg.budget {
        if q.len() > b {
            return Err(Error::InvalidIntervention(format!(
                "query of {} variables exceeds budget {b}",
                q.len()
            )));
        }
    }
    match cfg.measure {
        Measure::Js => js(c, q, method),
        Measure::Bjs => bjs(c, q, method),
        Measure::Kl2 => kl2(c, q, method),
    }
}

/// Result of [`greedy_query`].
#[derive(Debug, Clone, PartialEq)]
pub struct QueryChoice {
    pub query: Intervention,
    pub score: DivergenceEstimate,
    /// Score after each accepted round, starting with the empty query.
    pub trace: Vec<DivergenceEstimate>,
}

/// Grow a query one `(variable, state)` at a time.
///
/// Each round scores every extension of the current query by an unused candidate
/// variable and keeps the best one (ties to the lowest variable, then state) if it
/// beats the current score by more than `max(threshold_abs, threshold_z * std_error)`.
pub fn greedy_query(c: &Committee, cfg: &QueryConfig, method: Method) -> Result<QueryChoice> {
    cfg.validate()?;
    let schema = c.members()[0].variables();
    let mut candidates: Vec<usize> = match &cfg.candidate_vars {
        Some(vs) => vs.clone(),
        None => (0..schema.len()).collect(),
    };
    candidates.sort_unstable();
    candidates.dedup();
    if let Some(&v) = candidates.iter().find(|&&v| v >= schema.len()) {
        return Err(Error::UnknownVariable {
            index: v,
            len: schema.len(),
        });
    }

    let mut query = Intervention::empty();
    let mut score = score_query(c, &query, cfg, method)?;
    let mut trace = alloc::vec![score];
    while cfg.budget.is_none_or(|b| query.len() < b) {
        let extensions: Vec<(usize, usize)> = candidates
            .iter()
            .filter(|&&v| !query.contains(v))
            .flat_map(|&v| (0..schema[v].arity()).map(move |s| (v, s)))
            .collect();
        if extensions.is_empty() {
            break;
        }
        let scored = crate::par::map_indexed(extensions.len(), |i| {
            let (v, s) = extensions[i];
            let q = query.with(v, s)?;
            score_query(c, &q, cfg, method).map(|e| (q, e))
        });
        let mut best: Option<(Intervention, DivergenceEstimate)> = None;
        for r in scored {
            let (q, e) = r?;
            if best.as_ref().is_none_or(|(_, b)| e.value > b.value) {
                best = Some((q, e));
            }
        }
        let (q, e) = best.expect("at least one extension");
        let threshold = cfg.threshold_abs.max(cfg.threshold_z * e.std_error);
        if e.value > score.value + threshold {
            query = q;
            score = e;
            trace.push(e);
        } else {
            break;
        }
    }
    Ok(QueryChoice {
        query,
        score,
        trace,
    })
}
