//! Discrete Bayesian networks and interventions.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{Error, Result};

/// Tolerance on the sum of a conditional probability row.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A discrete variable with named states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, states: Vec<String>) -> Result<Self> {
        let name = name.into();
        if states.len() < 2 {
            return Err(Error::InvalidVariable {
                name,
                reason: format!("arity {} is below 2", states.len()),
            });
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(Error::InvalidVariable {
                    name,
                    reason: format!("state label `{s}` is repeated"),
                });
            }
        }
        Ok(Self { name, states })
    }

    /// Variable whose states are labeled `0..arity`.
    pub fn with_arity(name: impl Into<String>, arity: usize) -> Result<Self> {
        Self::new(name, (0..arity).map(|s| s.to_string()).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn arity(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Directed acyclic graph stored as one ordered parent list per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
}

impl Dag {
    /// Build a graph, rejecting self-loops, duplicate or out-of-range parents, and cycles.
    pub fn new(parents: Vec<Vec<usize>>) -> Result<Self> {
        let n = parents.len();
        for (child, ps) in parents.iter().enumerate() {
            for (i, &p) in ps.iter().enumerate() {
                if p >= n {
                    return Err(Error::UnknownVariable { index: p, len: n });
                }
                if p == child {
                    return Err(Error::InvalidParents {
                        child,
                        reason: "variable is its own parent".into(),
                    });
                }
                if ps[..i].contains(&p) {
                    return Err(Error::InvalidParents {
                        child,
                        reason: format!("parent {p} listed twice"),
                    });
                }
            }
        }
        let dag = Self { parents };
        dag.check_acyclic()?;
        Ok(dag)
    }

    pub fn empty(n: usize) -> Self {
        Self {
            parents: vec![Vec::new(); n],
        }
    }

    pub(crate) fn from_parents_unchecked(parents: Vec<Vec<usize>>) -> Self {
        Self { parents }
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn parent_sets(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&c| self.parents[c].contains(&v))
            .collect()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(&from)
    }

    /// Edges as `(parent, child)`, grouped by child in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// True if a directed path leads from `from` to `to` (including `from == to`).
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        // walk backwards from `to` through parents
        let mut seen = vec![false; self.len()];
        let mut stack = vec![to];
        while let Some(v) = stack.pop() {
            if v == from {
                return true;
            }
            if core::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(self.parents[v].iter().copied().filter(|&p| !seen[p]));
        }
        false
    }

    /// Kahn's algorithm; among ready variables the smallest index goes first.
    pub fn topological_order(&self) -> Vec<usize> {
        self.kahn().0
    }

    fn kahn(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut children = vec![Vec::new(); n];
        for (p, c) in self.edges() {
            children[p].push(c);
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        (order, indegree)
    }

    fn check_acyclic(&self) -> Result<()> {
        let (order, _) = self.kahn();
        if order.len() == self.len() {
            return Ok(());
        }
        // Strip nodes without children inside the leftover set; what remains lies on cycles.
        let mut left = vec![true; self.len()];
        for &v in &order {
            left[v] = false;
        }
        loop {
            let mut changed = false;
            for v in 0..self.len() {
                if left[v] && !(0..self.len()).any(|c| left[c] && self.parents[c].contains(&v)) {
                    left[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let edges = self.edges().filter(|&(p, c)| left[p] && left[c]).collect();
        Err(Error::Cycle { edges })
    }
}

/// Conditional probability table of one variable.
///
/// Rows are indexed by the parent configuration in lexicographic order over the
/// parents' states, first parent most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    child: usize,
    arity: usize,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
    degenerate: bool,
}

impl Cpt {
    /// Validated table. Entries must be finite and nonnegative and each row must sum to one.
    pub fn new(child: usize, arity: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidCpt {
                child,
                reason: "no rows".into(),
            });
        }
        let mut probs = Vec::with_capacity(rows.len() * arity);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != arity {
                return Err(Error::InvalidCpt {
                    child,
                    reason: format!("row {r} has {} entries, expected {arity}", row.len()),
                });
            }
            if let Some(bad) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(Error::InvalidCpt {
                    child,
                    reason: format!("row {r} contains invalid probability {bad}"),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidCpt {
                    child,
                    reason: format!("row {r} sums to {sum}"),
                });
            }
            probs.extend_from_slice(row);
        }
        Ok(Self::from_flat(child, arity, probs))
    }

    pub(crate) fn from_flat(child: usize, arity: usize, probs: Vec<f64>) -> Self {
        let log_probs = probs.iter().map(|&p| libm::log(p)).collect();
        Self {
            child,
            arity,
            probs,
            log_probs,
            degenerate: false,
        }
    }

    /// Single row placing all mass on `state`.
    pub fn degenerate(child: usize, arity: usize, state: usize) -> Self {
        let mut probs = vec![0.0; arity];
        probs[state] = 1.0;
        let mut cpt = Self::from_flat(child, arity, probs);
        cpt.degenerate = true;
        cpt
    }

    pub fn child(&self) -> usize {
        self.child
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn row_count(&self) -> usize {
        self.probs.len() / self.arity
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.probs[config * self.arity..(config + 1) * self.arity]
    }

    pub fn log_row(&self, config: usize) -> &[f64] {
        &self.log_probs[config * self.arity..(config + 1) * self.arity]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.arity)
    }

    /// Set by mutilation: the variable is clamped by an intervention.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }
}

/// An intervention `do(q)`: a partial assignment, kept sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Intervention {
    assignments: Vec<(usize, usize)>,
}

impl Intervention {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(variable: usize, state: usize) -> Self {
        Self {
            assignments: vec![(variable, state)],
        }
    }

    /// Rejects a variable assigned twice. State ranges are checked by [`Intervention::validate`].
    pub fn new(assignments: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut assignments: Vec<_> = assignments.into_iter().collect();
        assignments.sort_unstable();
        for w in assignments.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidIntervention(format!(
                    "variable {} assigned more than once",
                    w[0].0
                )));
            }
        }
        Ok(Self { assignments })
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn get(&self, variable: usize) -> Option<usize> {
        self.assignments
            .binary_search_by_key(&variable, |&(v, _)| v)
            .ok()
            .map(|i| self.assignments[i].1)
    }

    pub fn contains(&self, variable: usize) -> bool {
        self.get(variable).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignments.iter().copied()
    }

    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignments.iter().map(|&(v, _)| v)
    }

    /// This intervention extended by `variable = state`.
    pub fn with(&self, variable: usize, state: usize) -> Result<Self> {
        Self::new(self.iter().chain(core::iter::once((variable, state))))
    }

    pub fn validate(&self, variables: &[Variable]) -> Result<()> {
        for (v, s) in self.iter() {
            let var = variables.get(v).ok_or_else(|| {
                Error::InvalidIntervention(format!(
                    "variable index {v} out of range for {} variables",
                    variables.len()
                ))
            })?;
            if s >= var.arity() {
                return Err(Error::InvalidIntervention(format!(
                    "state {s} out of range for `{}` with {} states",
                    var.name(),
                    var.arity()
                )));
            }
        }
        Ok(())
    }

    /// True if `x` agrees with every forced value.
    pub fn consistent_with(&self, x: &[usize]) -> bool {
        self.iter().all(|(v, s)| x.get(v) == Some(&s))
    }

    pub(crate) fn dense(&self, n: usize) -> Vec<Option<usize>> {
        let mut forced = vec![None; n];
        for (v, s) in self.iter() {
            forced[v] = Some(s);
        }
        forced
    }
}

/// Discrete Bayesian network: variables, structure, and one table per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    variables: Vec<Variable>,
    dag: Dag,
    cpts: Vec<Cpt>,
    order: Vec<usize>,
    strides: Vec<Vec<usize>>,
}

impl BayesNet {
    pub fn new(variables: Vec<Variable>, dag: Dag, cpts: Vec<Cpt>) -> Result<Self> {
        let n = variables.len();
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].iter().any(|w| w.name() == v.name()) {
                return Err(Error::DuplicateVariable(v.name().into()));
            }
        }
        if dag.len() != n || cpts.len() != n {
            return Err(Error::Shape(format!(
                "{n} variables, {} graph nodes, {} tables",
                dag.len(),
                cpts.len()
            )));
        }
        for (v, cpt) in cpts.iter().enumerate() {
            let rows: usize = dag
                .parents(v)
                .iter()
                .map(|&p| variables[p].arity())
                .product();
            if cpt.child() != v {
                return Err(Error::InvalidCpt {
                    child: v,
                    reason: format!("table is labeled for variable {}", cpt.child()),
                });
            }
            if cpt.arity() != variables[v].arity() {
                return Err(Error::InvalidCpt {
                    child: v,
                    reason: format!(
                        "table arity {} but variable has {} states",
                        cpt.arity(),
                        variables[v].arity()
                    ),
                });
            }
            if cpt.row_count() != rows {
                return Err(Error::InvalidCpt {
                    child: v,
                    reason: format!("{} rows, expected {rows}", cpt.row_count()),
                });
            }
        }
        Ok(Self::assemble(variables, dag, cpts))
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows(variables: Vec<Variable>, dag: Dag, rows: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if rows.len() != variables.len() {
            return Err(Error::Shape(format!(
                "{} tables for {} variables",
                rows.len(),
                variables.len()
            )));
        }
        let cpts = rows
            .into_iter()
            .enumerate()
            .map(|(v, r)| Cpt::new(v, variables[v].arity(), r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(variables, dag, cpts)
    }

    pub(crate) fn assemble(variables: Vec<Variable>, dag: Dag, cpts: Vec<Cpt>) -> Self {
        let order = dag.topological_order();
        let strides = (0..variables.len())
            .map(|v| {
                let ps = dag.parents(v);
                let mut s = vec![1; ps.len()];
                for i in (0..ps.len().saturating_sub(1)).rev() {
                    s[i] = s[i + 1] * variables[ps[i + 1]].arity();
                }
                s
            })
            .collect();
        Self {
            variables,
            dag,
            cpts,
            order,
            strides,
        }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: usize) -> &Variable {
        &self.variables[v]
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name() == name)
    }

    pub fn arities(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::arity).collect()
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpt(&self, v: usize) -> &Cpt {
        &self.cpts[v]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Same variable names and state labels in the same order.
    pub fn same_schema(&self, other: &BayesNet) -> bool {
        self.variables == other.variables
    }

    /// Number of joint configurations, saturating at `u64::MAX`.
    pub fn joint_state_count(&self) -> u64 {
        state_count(self.variables.iter().map(Variable::arity))
    }

    /// Row index of `v`'s table selected by the parent values in `x`.
    pub fn parent_config(&self, v: usize, x: &[usize]) -> usize {
        self.dag
            .parents(v)
            .iter()
            .zip(&self.strides[v])
            .map(|(&p, &s)| x[p] * s)
            .sum()
    }

    /// The mutilated network of `do(q)`: edges into intervened variables are cut and
    /// each intervened variable gets a single degenerate row at its forced state.
    pub fn mutilate(&self, q: &Intervention) -> Result<BayesNet> {
        q.validate(&self.variables)?;
        if q.is_empty() {
            return Ok(self.clone());
        }
        let mut parents = self.dag.parents.clone();
        let mut cpts = self.cpts.clone();
        for (v, s) in q.iter() {
            parents[v].clear();
            cpts[v] = Cpt::degenerate(v, self.variables[v].arity(), s);
        }
        Ok(Self::assemble(
            self.variables.clone(),
            Dag::from_parents_unchecked(parents),
            cpts,
        ))
    }

    /// Natural log of `P(x | do(q))` under truncated factorization; `-inf` if `x` contradicts `q`.
    pub fn joint_log_prob(&self, x: &[usize], q: &Intervention) -> Result<f64> {
        self.check_assignment(x)?;
        q.validate(&self.variables)?;
        Ok(self.log_prob_forced(x, &q.dense(self.len())))
    }

    pub(crate) fn check_assignment(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::Shape(format!(
                "assignment of length {} for {} variables",
                x.len(),
                self.len()
            )));
        }
        for (v, (&s, var)) in x.iter().zip(&self.variables).enumerate() {
            if s >= var.arity() {
                return Err(Error::Shape(format!(
                    "state {s} of variable {v} exceeds arity {}",
                    var.arity()
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn log_prob_forced(&self, x: &[usize], forced: &[Option<usize>]) -> f64 {
        let mut acc = 0.0;
        for v in 0..self.len() {
            match forced[v] {
                Some(s) if x[v] != s => return f64::NEG_INFINITY,
                Some(_) => {}
                None => {
                    acc += self.cpts[v].log_row(self.parent_config(v, x))[x[v]];
                }
            }
        }
        acc
    }

    /// Network over `vars` (in the given order). Every parent of a kept variable must be kept.
    pub fn subnet(&self, vars: &[usize]) -> Result<BayesNet> {
        let mut index = vec![None; self.len()];
        for (i, &v) in vars.iter().enumerate() {
            if v >= self.len() {
                return Err(Error::UnknownVariable {
                    index: v,
                    len: self.len(),
                });
            }
            if index[v].replace(i).is_some() {
                return Err(Error::Shape(format!("variable {v} listed twice")));
            }
        }
        let mut parents = Vec::with_capacity(vars.len());
        for &v in vars {
            let ps = self
                .dag
                .parents(v)
                .iter()
                .map(|&p| {
                    index[p].ok_or_else(|| Error::InvalidParents {
                        child: v,
                        reason: format!("parent {p} lies outside the kept variables"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            parents.push(ps);
        }
        let variables = vars.iter().map(|&v| self.variables[v].clone()).collect();
        let cpts = vars
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut c = self.cpts[v].clone();
                c.child = i;
                c
            })
            .collect();
        Ok(Self::assemble(
            variables,
            Dag::from_parents_unchecked(parents),
            cpts,
        ))
    }
}

pub(crate) fn state_count(arities: impl IntoIterator<Item = usize>) -> u64 {
    arities
        .into_iter()
        .fold(1u64, |acc, a| acc.saturating_mul(a as u64))
}
