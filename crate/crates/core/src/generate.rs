//! Random sparse networks for simulation studies.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::net::{BayesNet, Cpt, Dag, Variable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomNetConfig {
    pub variables: usize,
    /// Arities are drawn uniformly from `2..=max_arity`.
    pub max_arity: usize,
    /// Target edge count; fewer edges result if the parent cap binds.
    pub edges: usize,
    pub max_parents: usize,
    /// Symmetric Dirichlet concentration of every table row.
    pub concentration: f64,
}

impl Default for RandomNetConfig {
    fn default() -> Self {
        Self {
            variables: 8,
            max_arity: 3,
            edges: 10,
            max_parents: 3,
            concentration: 1.0,
        }
    }
}

/// Smallest probability a generated row may hold.
const MIN_PROB: f64 = 1e-6;

/// Random DAG over a random variable order with Dirichlet-distributed tables.
pub fn random_network<R: Rng + ?Sized>(cfg: &RandomNetConfig, rng: &mut R) -> Result<BayesNet> {
    if cfg.variables == 0 || cfg.max_arity < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least one variable and max arity >= 2, got {} and {}",
            cfg.variables, cfg.max_arity
        )));
    }
    let gamma = Gamma::new(cfg.concentration, 1.0).map_err(|_| {
        Error::InvalidConfig(format!(
            "Dirichlet concentration must be positive, got {}",
            cfg.concentration
        ))
    })?;
    let n = cfg.variables;
    let variables = (0..n)
        .map(|i| {
            let arity = rng.random_range(2..=cfg.max_arity);
            Variable::new(
                format!("X{i}"),
                (0..arity).map(|s| format!("s{s}")).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    pairs.shuffle(rng);
    let mut parents = vec![Vec::new(); n];
    let mut added = 0;
    for (i, j) in pairs {
        if added == cfg.edges {
            break;
        }
        let child = order[j];
        if parents[child].len() < cfg.max_parents {
            parents[child].push(order[i]);
            added += 1;
        }
    }
    for ps in &mut parents {
        ps.sort_unstable();
    }
    let dag = Dag::new(parents)?;

    let cpts = (0..n)
        .map(|v| {
            let arity = variables[v].arity();
            let rows: usize = dag
                .parents(v)
                .iter()
                .map(|&p| variables[p].arity())
                .product();
            let mut probs = Vec::with_capacity(rows * arity);
            for _ in 0..rows {
                let start = probs.len();
                probs.extend((0..arity).map(|_| gamma.sample(rng).max(MIN_PROB)));
                let total: f64 = probs[start..].iter().sum();
                for p in &mut probs[start..] {
                    *p /= total;
                }
            }
            Cpt::from_flat(v, arity, probs)
        })
        .collect();
    BayesNet::new(variables, dag, cpts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn respects_caps_and_is_deterministic() {
        let cfg = RandomNetConfig {
            variables: 8,
            max_arity: 3,
            edges: 12,
            max_parents: 2,
            concentration: 0.7,
        };
        let a = random_network(&cfg, &mut seed::rng(4)).unwrap();
        let b = random_network(&cfg, &mut seed::rng(4)).unwrap();
        assert_eq!(a, b);
        assert!(a.dag().edge_count() <= 12);
        assert!((0..8).all(|v| a.dag().parents(v).len() <= 2));
        assert!(a.variables().iter().all(|v| (2..=3).contains(&v.arity())));
        for cpt in a.cpts() {
            for row in cpt.rows() {
                approx::assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut rng = seed::rng(0);
        let cfg = RandomNetConfig {
            max_arity: 1,
            ..RandomNetConfig::default()
        };
        assert!(random_network(&cfg, &mut rng).is_err());
        let cfg = RandomNetConfig {
            concentration: 0.0,
            ..RandomNetConfig::default()
        };
        assert!(random_network(&cfg, &mut rng).is_err());
    }
}
