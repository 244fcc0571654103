//! Bootstrap committees.

use alloc::format;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learning::{local_search, ScoreConfig, SearchConfig};
use crate::net::BayesNet;
use crate::seed;

/// Tolerance on the sum of committee weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// A weighted set of networks over a shared schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Committee {
    members: Vec<BayesNet>,
    weights: Vec<f64>,
}

impl Committee {
    pub fn new(members: Vec<BayesNet>, weights: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidConfig(
                "committee needs at least one member".into(),
            ));
        }
        if weights.len() != members.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} members",
                weights.len(),
                members.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidConfig(
                "committee weights must be nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "committee weights sum to {sum}"
            )));
        }
        if members.iter().any(|m| !m.same_schema(&members[0])) {
            return Err(Error::SchemaMismatch);
        }
        Ok(Self { members, weights })
    }

    /// Members with equal weights `1/K`.
    pub fn uniform(members: Vec<BayesNet>) -> Result<Self> {
        let k = members.len().max(1) as f64;
        let weights = alloc::vec![1.0 / k; members.len()];
        Self::new(members, weights)
    }

    pub fn members(&self) -> &[BayesNet] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub(crate) fn all_identical(&self) -> bool {
        self.members.iter().all(|m| *m == self.members[0])
    }
}

/// Learn one member from a bootstrap resample. The member's streams depend only on
/// `seed` and `index`.
pub fn build_member(
    ds: &Dataset,
    index: usize,
    cfg: &ScoreConfig,
    scfg: &SearchConfig,
    seed: u64,
) -> Result<BayesNet> {
    let member_seed = seed::derive(seed, "member", index as u64);
    let sample = ds.bootstrap_resample(&mut seed::stream(member_seed, "resample", 0))?;
    local_search(
        &sample,
        cfg,
        scfg,
        &mut seed::stream(member_seed, "search", 0),
    )
}

/// `K` members, each learned independently from its own bootstrap resample, with
/// uniform weights.
pub fn build_committee(
    ds: &Dataset,
    k: usize,
    cfg: &ScoreConfig,
    scfg: &SearchConfig,
    seed: u64,
) -> Result<Committee> {
    if k == 0 {
        return Err(Error::InvalidConfig(
            "committee size must be at least 1".into(),
        ));
    }
    if ds.is_empty() {
        return Err(Error::EmptyData);
    }
    let members = crate::par::map_indexed(k, |i| build_member(ds, i, cfg, scfg, seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Committee::uniform(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Record;
    use crate::net::{Dag, Intervention, Variable};
    use alloc::vec;

    fn coupled_data(n: usize, seed_value: u64) -> Dataset {
        let vars = vec![
            Variable::with_arity("A", 2).unwrap(),
            Variable::with_arity("B", 2).unwrap(),
        ];
        let net = BayesNet::from_rows(
            vars.clone(),
            Dag::new(vec![vec![], vec![0]]).unwrap(),
            vec![vec![vec![0.5, 0.5]], vec![vec![0.9, 0.1], vec![0.1, 0.9]]],
        )
        .unwrap();
        let mut rng = seed::rng(seed_value);
        let records = net
            .forward_sample(&Intervention::empty(), n, &mut rng)
            .unwrap()
            .into_iter()
            .map(Record::observational)
            .collect();
        Dataset::new(vars, records).unwrap()
    }

    #[test]
    fn single_member_committee() {
        let ds = coupled_data(50, 1);
        let c =
            build_committee(&ds, 1, &ScoreConfig::default(), &SearchConfig::default(), 5).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.weights(), &[1.0]);
    }

    #[test]
    fn committee_is_seed_deterministic() {
        let ds = coupled_data(60, 2);
        let a =
            build_committee(&ds, 3, &ScoreConfig::default(), &SearchConfig::default(), 9).unwrap();
        let b =
            build_committee(&ds, 3, &ScoreConfig::default(), &SearchConfig::default(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn members_do_not_depend_on_build_order() {
        let ds = coupled_data(60, 3);
        let (cfg, scfg) = (ScoreConfig::default(), SearchConfig::default());
        let c = build_committee(&ds, 4, &cfg, &scfg, 21).unwrap();
        for i in (0..4).rev() {
            assert_eq!(
                build_member(&ds, i, &cfg, &scfg, 21).unwrap(),
                c.members()[i]
            );
        }
    }

    #[test]
    fn committee_validation() {
        let ds = coupled_data(10, 4);
        assert!(
            build_committee(&ds, 0, &ScoreConfig::default(), &SearchConfig::default(), 0).is_err()
        );
        let empty = Dataset::empty(ds.schema().to_vec());
        assert_eq!(
            build_committee(
                &empty,
                2,
                &ScoreConfig::default(),
                &SearchConfig::default(),
                0
            )
            .unwrap_err(),
            Error::EmptyData
        );
        let m = build_member(&ds, 0, &ScoreConfig::default(), &SearchConfig::default(), 0).unwrap();
        assert!(Committee::new(vec![m.clone(), m.clone()], vec![0.7, 0.2]).is_err());
        assert!(Committee::new(vec![m.clone()], vec![-1.0]).is_err());
        assert!(Committee::new(vec![], vec![]).is_err());
    }
}
