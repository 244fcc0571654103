//! Committee disagreement measures under an intervention.
//!
//! * [`js`]: Jensen-Shannon divergence, mixture entropy minus mean member entropy.
//! * [`bjs`]: backward JS, mean `KL(mixture || member)`.
//! * [`kl2`]: weighted mean KL over ordered member pairs. Equals `js + bjs` and stays
//!   additive over independent subdomains for any committee size.
//!
//! Variables clamped by the intervention are identical across members and are left
//! out of every sum over the domain.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::committee::Committee;
use crate::error::{Error, Result};
use crate::inference::{
    free_state_count, sample_categorical, MarginalSource, RunningMean, DEFAULT_ENUMERATION_BUDGET,
};
use crate::net::{BayesNet, Intervention};
use crate::seed;

/// How a divergence should be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Enumerate the joint; fails if the state space exceeds `budget`.
    Exact { budget: u64 },
    /// Sample `samples` draws from streams derived from `seed`.
    Sampled { samples: usize, seed: u64 },
    /// Exact when the state space under the query fits `budget`, sampled otherwise.
    Auto {
        budget: u64,
        samples: usize,
        seed: u64,
    },
}

impl Method {
    pub const fn exact() -> Self {
        Self::Exact {
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }

    pub const fn sampled(samples: usize, seed: u64) -> Self {
        Self::Sampled { samples, seed }
    }

    /// Same method with its sampling seed replaced.
    pub fn reseeded(self, seed: u64) -> Self {
        match self {
            Self::Exact { .. } => self,
            Self::Sampled { samples, .. } => Self::Sampled { samples, seed },
            Self::Auto {
                budget, samples, ..
            } => Self::Auto {
                budget,
                samples,
                seed,
            },
        }
    }

    fn resolve(self, net: &BayesNet, q: &Intervention) -> Result<Resolved> {
        let (samples, seed) = match self {
            Self::Exact { budget } => return Ok(Resolved::Exact { budget }),
            Self::Auto { budget, .. } if free_state_count(net, q) <= budget => {
                return Ok(Resolved::Exact { budget })
            }
            Self::Sampled { samples, seed } | Self::Auto { samples, seed, .. } => (samples, seed),
        };
        if samples == 0 {
            return Err(Error::InvalidConfig("sample count must be positive".into()));
        }
        Ok(Resolved::Sampled { samples, seed })
    }
}

#[derive(Debug, Clone, Copy)]
enum Resolved {
    Exact { budget: u64 },
    Sampled { samples: usize, seed: u64 },
}

/// How an estimate was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    ExactEnumeration,
    FamilyDecompositionExact,
    FamilyDecompositionSampled(usize),
    MonteCarlo(usize),
}

impl EstimateKind {
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            Self::ExactEnumeration | Self::FamilyDecompositionExact
        )
    }
}

impl fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExactEnumeration => f.write_str("exact-enumeration"),
            Self::FamilyDecompositionExact => f.write_str("family-decomposition-exact"),
            Self::FamilyDecompositionSampled(n) => write!(f, "family-decomposition-sampled({n})"),
            Self::MonteCarlo(n) => write!(f, "monte-carlo({n})"),
        }
    }
}

/// A divergence value in nats with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceEstimate {
    /// Nonnegative value; negative noise is clamped to zero.
    pub value: f64,
    /// Value before clamping.
    pub raw_value: f64,
    /// Zero for exact methods.
    pub std_error: f64,
    pub kind: EstimateKind,
}

impl DivergenceEstimate {
    fn exact(raw: f64, kind: EstimateKind) -> Self {
        Self {
            value: raw.max(0.0),
            raw_value: raw,
            std_error: 0.0,
            kind,
        }
    }

    fn sampled(raw: f64, std_error: f64, kind: EstimateKind) -> Self {
        Self {
            value: raw.max(0.0),
            raw_value: raw,
            std_error,
            kind,
        }
    }

    /// True if the raw value was negative and got clamped.
    pub fn was_clamped(&self) -> bool {
        self.raw_value < 0.0
    }
}

fn check_pair(m1: &BayesNet, m2: &BayesNet, q: &Intervention) -> Result<()> {
    if !m1.same_schema(m2) {
        return Err(Error::SchemaMismatch);
    }
    q.validate(m1.variables())
}

/// Per-family table of `P(x_j, pa_j, pa'_j)` where `pa` and `pa'` are the parent
/// configurations of `j` in the two networks.
struct FamilyTable {
    var: usize,
    arity: usize,
    rows2: usize,
    mass: Vec<f64>,
}

struct FamilyTables<'a> {
    m1: &'a BayesNet,
    m2: &'a BayesNet,
    tables: Vec<FamilyTable>,
}

impl<'a> FamilyTables<'a> {
    fn new(m1: &'a BayesNet, m2: &'a BayesNet, q: &Intervention) -> Self {
        let tables = (0..m1.len())
            .filter(|&v| !q.contains(v))
            .map(|v| {
                let arity = m1.variable(v).arity();
                let rows1 = m1.cpt(v).row_count();
                let rows2 = m2.cpt(v).row_count();
                FamilyTable {
                    var: v,
                    arity,
                    rows2,
                    mass: vec![0.0; rows1 * rows2 * arity],
                }
            })
            .collect();
        Self { m1, m2, tables }
    }

    fn add(&mut self, x: &[usize], w: f64) {
        for t in &mut self.tables {
            let c1 = self.m1.parent_config(t.var, x);
            let c2 = self.m2.parent_config(t.var, x);
            t.mass[(c1 * t.rows2 + c2) * t.arity + x[t.var]] += w;
        }
    }

    /// `sum_j ln P1(x_j | pa_j) / P2(x_j | pa'_j)` at a single configuration.
    fn log_ratio(&self, x: &[usize]) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.tables {
            let v = t.var;
            let l2 = self.m2.cpt(v).log_row(self.m2.parent_config(v, x))[x[v]];
            if l2 == f64::NEG_INFINITY {
                return Err(Error::InfiniteDivergence { variable: v });
            }
            acc += self.m1.cpt(v).log_row(self.m1.parent_config(v, x))[x[v]] - l2;
        }
        Ok(acc)
    }

    fn value(&self) -> Result<f64> {
        let mut total = 0.0;
        for t in &self.tables {
            let (cpt1, cpt2) = (self.m1.cpt(t.var), self.m2.cpt(t.var));
            let rows1 = t.mass.len() / (t.rows2 * t.arity);
            for c1 in 0..rows1 {
                let l1 = cpt1.log_row(c1);
                for c2 in 0..t.rows2 {
                    let l2 = cpt2.log_row(c2);
                    let base = (c1 * t.rows2 + c2) * t.arity;
                    for k in 0..t.arity {
                        let w = t.mass[base + k];
                        if w > 0.0 {
                            if l2[k] == f64::NEG_INFINITY {
                                return Err(Error::InfiniteDivergence { variable: t.var });
                            }
                            total += w * (l1[k] - l2[k]);
                        }
                    }
                }
            }
        }
        Ok(total)
    }
}

/// `KL(P(X | do(q), m1) || P(X | do(q), m2))` by family decomposition, with family
/// marginals of `m1` from enumeration or forward sampling.
pub fn kl_between(
    m1: &BayesNet,
    m2: &BayesNet,
    q: &Intervention,
    method: Method,
) -> Result<DivergenceEstimate> {
    check_pair(m1, m2, q)?;
    match method.resolve(m1, q)? {
        Resolved::Exact { budget } => {
            if m1 == m2 {
                return Ok(DivergenceEstimate::exact(
                    0.0,
                    EstimateKind::FamilyDecompositionExact,
                ));
            }
            let mut tables = FamilyTables::new(m1, m2, q);
            m1.enumerate(q, budget, |x, lp| {
                if lp > f64::NEG_INFINITY {
                    tables.add(x, libm::exp(lp));
                }
            })?;
            Ok(DivergenceEstimate::exact(
                tables.value()?,
                EstimateKind::FamilyDecompositionExact,
            ))
        }
        Resolved::Sampled { samples, seed } => {
            let (value, var) = sampled_kl(m1, m2, q, samples, seed)?;
            Ok(DivergenceEstimate::sampled(
                value,
                libm::sqrt(var / samples as f64),
                EstimateKind::FamilyDecompositionSampled(samples),
            ))
        }
    }
}

/// Sampled KL and the sample variance of the per-draw log ratio.
fn sampled_kl(
    m1: &BayesNet,
    m2: &BayesNet,
    q: &Intervention,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let sampler = m1.mutilate(q)?;
    let mut rng = seed::rng(seed);
    let mut tables = FamilyTables::new(m1, m2, q);
    let mut stats = RunningMean::default();
    let w = 1.0 / samples as f64;
    let mut x = vec![0; m1.len()];
    for _ in 0..samples {
        sampler.sample_into(&mut x, &mut rng);
        stats.push(tables.log_ratio(&x)?);
        tables.add(&x, w);
    }
    Ok((tables.value()?, stats.variance()))
}

fn trivial(c: &Committee, q: &Intervention) -> Result<bool> {
    q.validate(c.members()[0].variables())?;
    Ok(c.len() == 1 || c.all_identical())
}

/// Weighted mean KL over ordered member pairs; the diagonal contributes zero.
pub fn kl2(c: &Committee, q: &Intervention, method: Method) -> Result<DivergenceEstimate> {
    if trivial(c, q)? {
        return Ok(DivergenceEstimate::exact(
            0.0,
            EstimateKind::FamilyDecompositionExact,
        ));
    }
    let members = c.members();
    let w = c.weights();
    match method.resolve(&members[0], q)? {
        Resolved::Exact { budget } => {
            let mut total = 0.0;
            for (i, mi) in members.iter().enumerate() {
                for (j, mj) in members.iter().enumerate() {
                    if i != j && w[i] > 0.0 && w[j] > 0.0 {
                        total += w[i]
                            * w[j]
                            * kl_between(mi, mj, q, Method::Exact { budget })?.raw_value;
                    }
                }
            }
            Ok(DivergenceEstimate::exact(
                total,
                EstimateKind::FamilyDecompositionExact,
            ))
        }
        Resolved::Sampled { samples, seed: s } => {
            let mut total = 0.0;
            let mut var = 0.0;
            for (i, mi) in members.iter().enumerate() {
                if w[i] == 0.0 {
                    continue;
                }
                let sampler = mi.mutilate(q)?;
                let mut rng = seed::stream(s, "kl2-member", i as u64);
                let mut tables: Vec<(usize, FamilyTables<'_>)> = members
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i && w[j] > 0.0)
                    .map(|(j, mj)| (j, FamilyTables::new(mi, mj, q)))
                    .collect();
                let mut stats = RunningMean::default();
                let mut x = vec![0; mi.len()];
                let inv = 1.0 / samples as f64;
                for _ in 0..samples {
                    sampler.sample_into(&mut x, &mut rng);
                    let mut y = 0.0;
                    for (j, t) in &mut tables {
                        y += w[*j] * t.log_ratio(&x)?;
                        t.add(&x, inv);
                    }
                    stats.push(y);
                }
                let mut member_value = 0.0;
                for (j, t) in &tables {
                    member_value += w[*j] * t.value()?;
                }
                total += w[i] * member_value;
                var += w[i] * w[i] * stats.variance() / samples as f64;
            }
            Ok(DivergenceEstimate::sampled(
                total,
                libm::sqrt(var),
                EstimateKind::FamilyDecompositionSampled(samples),
            ))
        }
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + libm::log(terms.map(|t| libm::exp(t - max)).sum::<f64>())
}

/// Per-member log probabilities at `x`, and the log of the weighted mixture.
fn member_log_probs(c: &Committee, x: &[usize], forced: &[Option<usize>], out: &mut [f64]) -> f64 {
    for (o, m) in out.iter_mut().zip(c.members()) {
        *o = m.log_prob_forced(x, forced);
    }
    log_sum_exp(
        out.iter()
            .zip(c.weights())
            .filter(|(_, &w)| w > 0.0)
            .map(|(&lp, &w)| libm::log(w) + lp),
    )
}

fn zero_family(net: &BayesNet, x: &[usize], forced: &[Option<usize>]) -> usize {
    (0..net.len())
        .find(|&v| forced[v].is_none() && net.cpt(v).row(net.parent_config(v, x))[x[v]] == 0.0)
        .unwrap_or(0)
}

/// Draws from the mixture `sum_m P(m) P(X | do(q), m)`, yielding each draw's index.
fn mixture_draws(
    c: &Committee,
    q: &Intervention,
    samples: usize,
    seed: u64,
    mut f: impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let samplers = c
        .members()
        .iter()
        .map(|m| m.mutilate(q))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = seed::stream(seed, "mixture", 0);
    let mut x = vec![0; samplers[0].len()];
    for _ in 0..samples {
        let m = sample_categorical(c.weights(), &mut rng);
        samplers[m].sample_into(&mut x, &mut rng);
        f(&x)?;
    }
    Ok(())
}

/// Jensen-Shannon divergence `H(mixture) - <H(member)>`.
///
/// The sampled form estimates member entropies by family decomposition over sampled
/// parent marginals and the mixture entropy by drawing from the mixture and
/// evaluating its density exactly at each draw.
pub fn js(c: &Committee, q: &Intervention, method: Method) -> Result<DivergenceEstimate> {
    if trivial(c, q)? {
        return Ok(DivergenceEstimate::exact(
            0.0,
            EstimateKind::ExactEnumeration,
        ));
    }
    let first = &c.members()[0];
    let forced = q.dense(first.len());
    let w = c.weights();
    let mut lps = vec![0.0; c.len()];
    match method.resolve(first, q)? {
        Resolved::Exact { budget } => {
            let mut total = 0.0;
            first.enumerate(q, budget, |x, _| {
                let lmix = member_log_probs(c, x, &forced, &mut lps);
                if lmix == f64::NEG_INFINITY {
                    return;
                }
                for (&lp, &wm) in lps.iter().zip(w) {
                    if wm > 0.0 && lp > f64::NEG_INFINITY {
                        total += wm * libm::exp(lp) * (lp - lmix);
                    }
                }
            })?;
            Ok(DivergenceEstimate::exact(
                total,
                EstimateKind::ExactEnumeration,
            ))
        }
        Resolved::Sampled { samples, seed: s } => {
            let mut mix = RunningMean::default();
            mixture_draws(c, q, samples, s, |x| {
                mix.push(-member_log_probs(c, x, &forced, &mut lps));
                Ok(())
            })?;
            let mut mean_member = 0.0;
            let mut var = mix.variance() / samples as f64;
            for (i, m) in c.members().iter().enumerate() {
                if w[i] == 0.0 {
                    continue;
                }
                let (h, se) = m.entropy_estimate(
                    q,
                    MarginalSource::Sampled {
                        samples,
                        seed: seed::derive(s, "member-entropy", i as u64),
                    },
                )?;
                mean_member += w[i] * h;
                var += w[i] * w[i] * se * se;
            }
            Ok(DivergenceEstimate::sampled(
                mix.mean() - mean_member,
                libm::sqrt(var),
                EstimateKind::MonteCarlo(samples),
            ))
        }
    }
}

/// Backward JS divergence `<KL(mixture || member)>`, equivalently the KL divergence
/// from the arithmetic to the (unnormalized) geometric member average.
pub fn bjs(c: &Committee, q: &Intervention, method: Method) -> Result<DivergenceEstimate> {
    if trivial(c, q)? {
        return Ok(DivergenceEstimate::exact(
            0.0,
            EstimateKind::ExactEnumeration,
        ));
    }
    let first = &c.members()[0];
    let forced = q.dense(first.len());
    let w = c.weights();
    let mut lps = vec![0.0; c.len()];
    // ln mixture(x) - sum_m w_m ln P_m(x)
    let integrand = |x: &[usize], lps: &mut [f64]| -> Result<Option<(f64, f64)>> {
        let lmix = member_log_probs(c, x, &forced, lps);
        if lmix == f64::NEG_INFINITY {
            return Ok(None);
        }
        let mut geo = 0.0;
        for (i, (&lp, &wm)) in lps.iter().zip(w).enumerate() {
            if wm > 0.0 {
                if lp == f64::NEG_INFINITY {
                    let m = &c.members()[i];
                    return Err(Error::InfiniteDivergence {
                        variable: zero_family(m, x, &forced),
                    });
                }
                geo += wm * lp;
            }
        }
        Ok(Some((lmix, lmix - geo)))
    };
    match method.resolve(first, q)? {
        Resolved::Exact { budget } => {
            let mut total = 0.0;
            let mut failure = None;
            first.enumerate(q, budget, |x, _| {
                if failure.is_some() {
                    return;
                }
                match integrand(x, &mut lps) {
                    Ok(Some((lmix, y))) => total += libm::exp(lmix) * y,
                    Ok(None) => {}
                    Err(e) => failure = Some(e),
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            Ok(DivergenceEstimate::exact(
                total,
                EstimateKind::ExactEnumeration,
            ))
        }
        Resolved::Sampled { samples, seed: s } => {
            let mut stats = RunningMean::default();
            mixture_draws(c, q, samples, s, |x| {
                if let Some((_, y)) = integrand(x, &mut lps)? {
                    stats.push(y);
                }
                Ok(())
            })?;
            Ok(DivergenceEstimate::sampled(
                stats.mean(),
                stats.std_error(),
                EstimateKind::MonteCarlo(samples),
            ))
        }
    }
}

/// Posterior over committee members after observing `x` under `do(q)`:
/// `P(m | x, q) ∝ P(m) P(x | do(q), m)`.
pub fn committee_posterior(c: &Committee, x: &[usize], q: &Intervention) -> Result<Vec<f64>> {
    let first = &c.members()[0];
    first.check_assignment(x)?;
    q.validate(first.variables())?;
    let forced = q.dense(first.len());
    let logs: Vec<f64> = c
        .members()
        .iter()
        .zip(c.weights())
        .map(|(m, &w)| {
            if w > 0.0 {
                libm::log(w) + m.log_prob_forced(x, &forced)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let norm = log_sum_exp(logs.iter().copied());
    if norm == f64::NEG_INFINITY {
        return Err(Error::UndefinedPosterior);
    }
    Ok(logs.iter().map(|&l| libm::exp(l - norm)).collect())
}

/// A partition of the variables into blocks that every member treats as mutually
/// independent subdomains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredDomain {
    blocks: Vec<Vec<usize>>,
}

impl FactoredDomain {
    pub fn new(blocks: Vec<Vec<usize>>, variable_count: usize) -> Result<Self> {
        let mut owner = vec![None; variable_count];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidConfig(format!("block {b} is empty")));
            }
            for &v in block {
                if v >= variable_count {
                    return Err(Error::UnknownVariable {
                        index: v,
                        len: variable_count,
                    });
                }
                if owner[v].replace(b).is_some() {
                    return Err(Error::InvalidConfig(format!(
                        "variable {v} belongs to more than one block"
                    )));
                }
            }
        }
        if let Some(v) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidConfig(format!(
                "variable {v} belongs to no block"
            )));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// True if no edge of `net` crosses a block boundary.
    pub fn factorizes(&self, net: &BayesNet) -> bool {
        let mut owner = vec![0; net.len()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &v in block {
                owner[v] = b;
            }
        }
        net.dag().edges().all(|(p, c)| owner[p] == owner[c])
    }

    pub fn restrict_net(&self, net: &BayesNet, block: usize) -> Result<BayesNet> {
        net.subnet(&self.blocks[block])
    }

    /// Committee of block-restricted members with the same weights.
    pub fn restrict_committee(&self, c: &Committee, block: usize) -> Result<Committee> {
        let members = c
            .members()
            .iter()
            .map(|m| self.restrict_net(m, block))
            .collect::<Result<Vec<_>>>()?;
        Committee::new(members, c.weights().to_vec())
    }

    /// The part of `q` falling in `block`, re-indexed to the block's variables.
    pub fn restrict_intervention(&self, q: &Intervention, block: usize) -> Intervention {
        let vars = &self.blocks[block];
        Intervention::new(
            q.iter()
                .filter_map(|(v, s)| vars.iter().position(|&b| b == v).map(|i| (i, s))),
        )
        .expect("restriction of a valid intervention")
    }
}
