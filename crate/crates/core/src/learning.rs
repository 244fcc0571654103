//! BDeu family scores under mixed observational/interventional data, parameter
//! fitting, and greedy hill climbing over structures.
//!
//! Records flagged as intervened on a variable carry no information about that
//! variable's mechanism, so they are dropped from its family statistics only.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::net::{BayesNet, Cpt, Dag};

/// Structure score hyperparameters. The structure prior is uniform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreConfig {
    pub equivalent_sample_size: f64,
    pub max_parents: usize,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            equivalent_sample_size: 1.0,
            max_parents: 4,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.equivalent_sample_size > 0.0 && self.equivalent_sample_size.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "equivalent sample size must be positive, got {}",
                self.equivalent_sample_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Cap on accepted moves per restart.
    pub max_flips: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 3,
            max_flips: 1000,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig(
                "at least one restart is required".into(),
            ));
        }
        Ok(())
    }
}

/// Moves whose gain differs by less than this are treated as tied.
const TIE_TOLERANCE: f64 = 1e-9;

fn family_counts(ds: &Dataset, child: usize, parents: &[usize]) -> (Vec<u32>, usize, usize) {
    let schema = ds.schema();
    let r = schema[child].arity();
    let q: usize = parents.iter().map(|&p| schema[p].arity()).product();
    let mut counts = vec![0u32; q * r];
    for rec in ds.records() {
        if rec.is_intervened(child) {
            continue;
        }
        let x = rec.values();
        let j = parents
            .iter()
            .fold(0, |acc, &p| acc * schema[p].arity() + x[p]);
        counts[j * r + x[child]] += 1;
    }
    (counts, q, r)
}

/// Log BDeu marginal likelihood of one family. Records intervened on `child` are excluded.
pub fn family_log_score(ds: &Dataset, child: usize, parents: &[usize], cfg: &ScoreConfig) -> f64 {
    debug_assert!(parents.len() <= cfg.max_parents);
    let (counts, q, r) = family_counts(ds, child, parents);
    let alpha = cfg.equivalent_sample_size;
    let a_j = alpha / q as f64;
    let a_jk = alpha / (q * r) as f64;
    let lg_a_j = libm::lgamma(a_j);
    let lg_a_jk = libm::lgamma(a_jk);
    let mut score = 0.0;
    for row in counts.chunks(r) {
        let n_j: u32 = row.iter().sum();
        if n_j == 0 {
            continue;
        }
        score += lg_a_j - libm::lgamma(a_j + f64::from(n_j));
        for &n in row.iter().filter(|&&n| n > 0) {
            score += libm::lgamma(a_jk + f64::from(n)) - lg_a_jk;
        }
    }
    score
}

/// Sum of family scores.
pub fn structure_score(ds: &Dataset, dag: &Dag, cfg: &ScoreConfig) -> f64 {
    (0..dag.len())
        .map(|v| family_log_score(ds, v, dag.parents(v), cfg))
        .sum()
}

/// Dirichlet posterior-mean tables, strictly positive for a positive equivalent sample size.
pub fn fit_parameters(dag: &Dag, ds: &Dataset, cfg: &ScoreConfig) -> Result<BayesNet> {
    cfg.validate()?;
    if dag.len() != ds.variable_count() {
        return Err(Error::Shape(format!(
            "graph over {} variables, data over {}",
            dag.len(),
            ds.variable_count()
        )));
    }
    let alpha = cfg.equivalent_sample_size;
    let cpts = (0..dag.len())
        .map(|v| {
            let (counts, q, r) = family_counts(ds, v, dag.parents(v));
            let a_jk = alpha / (q * r) as f64;
            let mut probs = Vec::with_capacity(counts.len());
            for row in counts.chunks(r) {
                let start = probs.len();
                probs.extend(row.iter().map(|&n| f64::from(n) + a_jk));
                let total: f64 = probs[start..].iter().sum();
                for p in &mut probs[start..] {
                    *p /= total;
                }
            }
            Cpt::from_flat(v, r, probs)
        })
        .collect();
    Ok(BayesNet::assemble(ds.schema().to_vec(), dag.clone(), cpts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Add,
    Delete,
    Reverse,
}

struct Scorer<'a> {
    ds: &'a Dataset,
    cfg: &'a ScoreConfig,
    cache: BTreeMap<(usize, Vec<usize>), f64>,
}

impl Scorer<'_> {
    fn score(&mut self, child: usize, parents: &[usize]) -> f64 {
        let mut key = parents.to_vec();
        key.sort_unstable();
        let (ds, cfg) = (self.ds, self.cfg);
        *self
            .cache
            .entry((child, key))
            .or_insert_with_key(|(c, ps)| family_log_score(ds, *c, ps, cfg))
    }

    fn climb(&mut self, mut parents: Vec<Vec<usize>>, max_flips: usize) -> (Vec<Vec<usize>>, f64) {
        let n = parents.len();
        let max_parents = self.cfg.max_parents;
        let mut family: Vec<f64> = (0..n).map(|v| self.score(v, &parents[v])).collect();
        for _ in 0..max_flips {
            let mut best: Option<(f64, usize, usize, Move)> = None;
            let mut consider = |gain: f64, child: usize, parent: usize, mv: Move| {
                if best.is_none_or(|(g, ..)| gain > g + TIE_TOLERANCE) {
                    best = Some((gain, child, parent, mv));
                }
            };
            let dag = Dag::from_parents_unchecked(parents.clone());
            for child in 0..n {
                for parent in (0..n).filter(|&p| p != child) {
                    if parents[child].contains(&parent) {
                        let without: Vec<usize> = parents[child]
                            .iter()
                            .copied()
                            .filter(|&p| p != parent)
                            .collect();
                        let del = self.score(child, &without) - family[child];
                        consider(del, child, parent, Move::Delete);
                        if parents[parent].len() < max_parents {
                            let mut cut = parents.clone();
                            cut[child] = without;
                            if !Dag::from_parents_unchecked(cut).reaches(parent, child) {
                                let mut grown = parents[parent].clone();
                                grown.push(child);
                                let rev = del + self.score(parent, &grown) - family[parent];
                                consider(rev, child, parent, Move::Reverse);
                            }
                        }
                    } else if parents[child].len() < max_parents && !dag.reaches(child, parent) {
                        let mut grown = parents[child].clone();
                        grown.push(parent);
                        let add = self.score(child, &grown) - family[child];
                        consider(add, child, parent, Move::Add);
                    }
                }
            }
            match best {
                Some((gain, child, parent, mv)) if gain > TIE_TOLERANCE => {
                    match mv {
                        Move::Add => parents[child].push(parent),
                        Move::Delete => parents[child].retain(|&p| p != parent),
                        Move::Reverse => {
                            parents[child].retain(|&p| p != parent);
                            parents[parent].push(child);
                        }
                    }
                    parents[child].sort_unstable();
                    parents[parent].sort_unstable();
                    family[child] = self.score(child, &parents[child]);
                    family[parent] = self.score(parent, &parents[parent]);
                }
                _ => break,
            }
        }
        let total = family.iter().sum();
        (parents, total)
    }
}

fn random_dag<R: Rng + ?Sized>(n: usize, max_parents: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let p_edge = if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 };
    let mut parents = vec![Vec::new(); n];
    for j in 1..n {
        for i in 0..j {
            if parents[order[j]].len() < max_parents && rng.random_bool(p_edge) {
                parents[order[j]].push(order[i]);
            }
        }
        parents[order[j]].sort_unstable();
    }
    parents
}

/// Greedy hill climbing over add/delete/reverse moves with random restarts.
///
/// The first restart begins at the empty graph, later ones at random sparse graphs.
/// Returns the best-scoring structure with fitted parameters.
pub fn local_search<R: Rng + ?Sized>(
    ds: &Dataset,
    cfg: &ScoreConfig,
    scfg: &SearchConfig,
    rng: &mut R,
) -> Result<BayesNet> {
    cfg.validate()?;
    scfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = ds.variable_count();
    let mut scorer = Scorer {
        ds,
        cfg,
        cache: BTreeMap::new(),
    };
    let mut best: Option<(Vec<Vec<usize>>, f64)> = None;
    for restart in 0..scfg.restarts {
        let start = if restart == 0 {
            vec![Vec::new(); n]
        } else {
            random_dag(n, cfg.max_parents, rng)
        };
        let (parents, score) = scorer.climb(start, scfg.max_flips);
        if best.as_ref().is_none_or(|(_, s)| score > s + TIE_TOLERANCE) {
            best = Some((parents, score));
        }
    }
    let (parents, _) = best.expect("at least one restart");
    fit_parameters(&Dag::from_parents_unchecked(parents), ds, cfg)
}
