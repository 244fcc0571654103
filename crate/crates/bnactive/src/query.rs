//! Textual interventions: `name=state` pairs joined by `;`, e.g. `A=yes;C=lo`.
//! The empty string is the empty intervention.

use bnactive_core::{BayesNet, Intervention};

use crate::error::{Error, Result};

pub fn parse_query(net: &BayesNet, text: &str) -> Result<Intervention> {
    let bad = |reason: String| Error::Query {
        text: text.to_owned(),
        reason,
    };
    let mut assignments = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, state) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("`{part}` is not of the form name=state")))?;
        let (name, state) = (name.trim(), state.trim());
        let v = net
            .variable_index(name)
            .ok_or_else(|| bad(format!("unknown variable `{name}`")))?;
        let s = net
            .variable(v)
            .state_index(state)
            .ok_or_else(|| bad(format!("`{state}` is not a state of `{name}`")))?;
        assignments.push((v, s));
    }
    Intervention::new(assignments).map_err(|e| bad(e.to_string()))
}

pub fn format_query(net: &BayesNet, q: &Intervention) -> String {
    q.iter()
        .map(|(v, s)| {
            let var = net.variable(v);
            format!("{}={}", var.name(), var.states()[s])
        })
        .collect::<Vec<_>>()
        .join(";")
}
