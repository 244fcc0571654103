//! JSON network files.
//!
//! ```json
//! {
//!   "variables": [{"name": "A", "states": ["no", "yes"]}, {"name": "B", "states": ["lo", "hi"]}],
//!   "edges": [["A", "B"]],
//!   "cpts": {"A": [[0.3, 0.7]], "B": [[0.9, 0.1], [0.2, 0.8]]}
//! }
//! ```
//!
//! A child's parents are ordered as its incoming edges are declared. Table rows
//! run over parent configurations lexicographically, first parent slowest.
//! Probabilities are written in shortest round-trip form, so files reload bit-exactly.

use std::fs;
use std::path::Path;

use bnactive_core::{BayesNet, Cpt, Dag, Variable};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, thiserror::Error)]
pub enum NetworkFormatError {
    #[error("not a network document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("variable `{name}`: {reason}")]
    Variable { name: String, reason: String },

    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),

    #[error("edge [{parent:?}, {child:?}] names undeclared variable `{missing}`")]
    UnknownEdgeVariable {
        parent: String,
        child: String,
        missing: String,
    },

    #[error("edge [{parent:?}, {child:?}] is a self-loop")]
    SelfLoop { parent: String, child: String },

    #[error("edge [{parent:?}, {child:?}] declared twice")]
    DuplicateEdge { parent: String, child: String },

    #[error("edges form a cycle: {}", format_edges(.0))]
    Cycle(Vec<(String, String)>),

    #[error("no table for variable `{0}`")]
    MissingTable(String),

    #[error("table given for undeclared variable `{0}`")]
    UnknownTable(String),

    #[error(
        "table of `{name}` has {found} rows, expected {expected} (one per parent configuration)"
    )]
    RowCount {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("table of `{name}`, row {row}: {found} entries, expected {expected} (one per state)")]
    RowLength {
        name: String,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("table of `{name}`: {reason}")]
    Table { name: String, reason: String },
}

fn format_edges(edges: &[(String, String)]) -> String {
    edges
        .iter()
        .map(|(p, c)| format!("{p} -> {c}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableDoc {
    name: String,
    states: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    variables: Vec<VariableDoc>,
    #[serde(default)]
    edges: Vec<(String, String)>,
    cpts: IndexMap<String, Vec<Vec<f64>>>,
}

pub fn parse_network(text: &str) -> Result<BayesNet, NetworkFormatError> {
    use NetworkFormatError as E;
    let doc: NetworkDoc = serde_json::from_str(text)?;
    let mut index: IndexMap<&str, usize> = IndexMap::new();
    let mut variables = Vec::with_capacity(doc.variables.len());
    for v in &doc.variables {
        if index.insert(&v.name, variables.len()).is_some() {
            return Err(E::DuplicateVariable(v.name.clone()));
        }
        let var = Variable::new(v.name.clone(), v.states.clone()).map_err(|e| match e {
            bnactive_core::Error::InvalidVariable { name, reason } => E::Variable { name, reason },
            other => E::Variable {
                name: v.name.clone(),
                reason: other.to_string(),
            },
        })?;
        variables.push(var);
    }

    let n = variables.len();
    let mut parents = vec![Vec::new(); n];
    for (p, c) in &doc.edges {
        let lookup = |name: &String| {
            index
                .get(name.as_str())
                .copied()
                .ok_or_else(|| E::UnknownEdgeVariable {
                    parent: p.clone(),
                    child: c.clone(),
                    missing: name.clone(),
                })
        };
        let (pi, ci) = (lookup(p)?, lookup(c)?);
        if pi == ci {
            return Err(E::SelfLoop {
                parent: p.clone(),
                child: c.clone(),
            });
        }
        if parents[ci].contains(&pi) {
            return Err(E::DuplicateEdge {
                parent: p.clone(),
                child: c.clone(),
            });
        }
        parents[ci].push(pi);
    }
    let dag = Dag::new(parents).map_err(|e| match e {
        bnactive_core::Error::Cycle { edges } => E::Cycle(
            edges
                .into_iter()
                .map(|(p, c)| {
                    (
                        variables[p].name().to_owned(),
                        variables[c].name().to_owned(),
                    )
                })
                .collect(),
        ),
        other => E::Table {
            name: String::new(),
            reason: other.to_string(),
        },
    })?;

    if let Some(name) = doc.cpts.keys().find(|k| !index.contains_key(k.as_str())) {
        return Err(E::UnknownTable(name.clone()));
    }
    let mut cpts = Vec::with_capacity(n);
    for (v, var) in variables.iter().enumerate() {
        let name = var.name();
        let rows = doc
            .cpts
            .get(name)
            .ok_or_else(|| E::MissingTable(name.to_owned()))?;
        let expected: usize = dag
            .parents(v)
            .iter()
            .map(|&p| variables[p].arity())
            .product();
        if rows.len() != expected {
            return Err(E::RowCount {
                name: name.to_owned(),
                expected,
                found: rows.len(),
            });
        }
        if let Some((row, r)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != var.arity())
        {
            return Err(E::RowLength {
                name: name.to_owned(),
                row,
                expected: var.arity(),
                found: r.len(),
            });
        }
        let cpt = Cpt::new(v, var.arity(), rows.clone()).map_err(|e| E::Table {
            name: name.to_owned(),
            reason: match e {
                bnactive_core::Error::InvalidCpt { reason, .. } => reason,
                other => other.to_string(),
            },
        })?;
        cpts.push(cpt);
    }
    BayesNet::new(variables, dag, cpts).map_err(|e| E::Table {
        name: String::new(),
        reason: e.to_string(),
    })
}

pub fn network_to_json(net: &BayesNet) -> String {
    let doc = NetworkDoc {
        variables: net
            .variables()
            .iter()
            .map(|v| VariableDoc {
                name: v.name().to_owned(),
                states: v.states().to_vec(),
            })
            .collect(),
        edges: net
            .dag()
            .edges()
            .map(|(p, c)| {
                (
                    net.variable(p).name().to_owned(),
                    net.variable(c).name().to_owned(),
                )
            })
            .collect(),
        cpts: (0..net.len())
            .map(|v| {
                (
                    net.variable(v).name().to_owned(),
                    net.cpt(v).rows().map(<[f64]>::to_vec).collect(),
                )
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("network documents always serialize");
    s.push('\n');
    s
}

pub fn read_network(path: impl AsRef<Path>) -> Result<BayesNet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_network(&text).map_err(|source| Error::Network {
        path: path.to_owned(),
        source,
    })
}

pub fn write_network(path: impl AsRef<Path>, net: &BayesNet) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, network_to_json(net)).map_err(|e| Error::io(path, e))
}
