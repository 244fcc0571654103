//! Exact inference by enumeration, ancestral sampling, and model entropy.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::net::{state_count, BayesNet, Intervention};
use crate::seed;

/// Default cap on the number of joint configurations visited by enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 20;

/// Visit every configuration consistent with `forced`, in mixed-radix order with the
/// last free variable varying fastest.
pub(crate) fn for_each_configuration(
    arities: &[usize],
    forced: &[Option<usize>],
    budget: u64,
    mut f: impl FnMut(&[usize]),
) -> Result<()> {
    let free: Vec<usize> = (0..arities.len())
        .filter(|&v| forced[v].is_none())
        .collect();
    let states = state_count(free.iter().map(|&v| arities[v]));
    if states > budget {
        return Err(Error::EnumerationTooLarge { states, budget });
    }
    let mut x: Vec<usize> = forced.iter().map(|s| s.unwrap_or(0)).collect();
    loop {
        f(&x);
        let mut i = free.len();
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            let v = free[i];
            x[v] += 1;
            if x[v] < arities[v] {
                break;
            }
            x[v] = 0;
        }
    }
}

/// Number of configurations enumeration would visit under `q`.
pub fn free_state_count(net: &BayesNet, q: &Intervention) -> u64 {
    state_count(
        (0..net.len())
            .filter(|&v| !q.contains(v))
            .map(|v| net.variable(v).arity()),
    )
}

/// Probability table over an ordered set of target variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    variables: Vec<usize>,
    arities: Vec<usize>,
    probs: Vec<f64>,
}

impl Marginal {
    pub fn variables(&self) -> &[usize] {
        &self.variables
    }

    /// Entries in lexicographic order over target states, first target most significant.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index(&self, states: &[usize]) -> usize {
        states
            .iter()
            .zip(&self.arities)
            .fold(0, |acc, (&s, &a)| acc * a + s)
    }

    pub fn prob(&self, states: &[usize]) -> f64 {
        self.probs[self.index(states)]
    }
}

/// Where the parent marginals of the family decomposition come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalSource {
    Exact { budget: u64 },
    Sampled { samples: usize, seed: u64 },
}

impl MarginalSource {
    pub const fn exact() -> Self {
        Self::Exact {
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

pub(crate) fn sample_categorical<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (s, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = s;
            if u < acc {
                return s;
            }
        }
    }
    last
}

pub(crate) fn row_entropy(row: &[f64]) -> f64 {
    -row.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * libm::log(p))
        .sum::<f64>()
}

impl BayesNet {
    /// Visit every configuration consistent with `q` together with its log probability
    /// under `do(q)`. Configurations of probability zero are visited too.
    pub fn enumerate(
        &self,
        q: &Intervention,
        budget: u64,
        mut f: impl FnMut(&[usize], f64),
    ) -> Result<()> {
        q.validate(self.variables())?;
        let forced = q.dense(self.len());
        for_each_configuration(&self.arities(), &forced, budget, |x| {
            f(x, self.log_prob_forced(x, &forced))
        })
    }

    /// `P(targets | do(q))` by full enumeration.
    pub fn exact_marginal(
        &self,
        targets: &[usize],
        q: &Intervention,
        budget: u64,
    ) -> Result<Marginal> {
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.len() {
                return Err(Error::UnknownVariable {
                    index: t,
                    len: self.len(),
                });
            }
            if targets[..i].contains(&t) {
                return Err(Error::Shape(format!("target variable {t} listed twice")));
            }
        }
        let arities: Vec<usize> = targets.iter().map(|&t| self.variable(t).arity()).collect();
        let size = arities.iter().product();
        let mut probs = vec![0.0; size];
        self.enumerate(q, budget, |x, lp| {
            let idx = targets
                .iter()
                .zip(&arities)
                .fold(0, |acc, (&t, &a)| acc * a + x[t]);
            probs[idx] += libm::exp(lp);
        })?;
        Ok(Marginal {
            variables: targets.to_vec(),
            arities,
            probs,
        })
    }

    /// Ancestral sampling from the mutilated network of `do(q)`.
    pub fn forward_sample<R: Rng + ?Sized>(
        &self,
        q: &Intervention,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<usize>>> {
        let sampler = self.mutilate(q)?;
        Ok((0..n).map(|_| sampler.sample_one(rng)).collect())
    }

    /// One ancestral draw. Degenerate (clamped) tables consume no randomness.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut x = vec![0; self.len()];
        self.sample_into(&mut x, rng);
        x
    }

    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, x: &mut [usize], rng: &mut R) {
        for &v in self.topological_order() {
            let cpt = self.cpt(v);
            let row = cpt.row(self.parent_config(v, x));
            x[v] = if cpt.is_degenerate() {
                row.iter().position(|&p| p == 1.0).unwrap_or(0)
            } else {
                sample_categorical(row, rng)
            };
        }
    }

    /// Entropy of `P(X | do(q))` in nats by family decomposition:
    /// `sum_j sum_pa P(pa_j | do(q)) H(X_j | pa_j)`. Clamped variables contribute nothing.
    pub fn model_entropy(&self, q: &Intervention, source: MarginalSource) -> Result<f64> {
        self.entropy_estimate(q, source).map(|(h, _)| h)
    }

    /// Entropy together with its Monte-Carlo standard error (0 for exact marginals).
    pub(crate) fn entropy_estimate(
        &self,
        q: &Intervention,
        source: MarginalSource,
    ) -> Result<(f64, f64)> {
        q.validate(self.variables())?;
        let free: Vec<usize> = (0..self.len()).filter(|&v| !q.contains(v)).collect();
        let row_h: Vec<Vec<f64>> = free
            .iter()
            .map(|&v| self.cpt(v).rows().map(row_entropy).collect())
            .collect();
        match source {
            MarginalSource::Exact { budget } => {
                let mut parent_marg: Vec<Vec<f64>> =
                    row_h.iter().map(|r| vec![0.0; r.len()]).collect();
                self.enumerate(q, budget, |x, lp| {
                    if lp == f64::NEG_INFINITY {
                        return;
                    }
                    let p = libm::exp(lp);
                    for (j, &v) in free.iter().enumerate() {
                        parent_marg[j][self.parent_config(v, x)] += p;
                    }
                })?;
                let h = parent_marg
                    .iter()
                    .zip(&row_h)
                    .map(|(m, r)| m.iter().zip(r).map(|(p, h)| p * h).sum::<f64>())
                    .sum();
                Ok((h, 0.0))
            }
            MarginalSource::Sampled { samples, seed: s } => {
                if samples == 0 {
                    return Err(Error::InvalidConfig("sample count must be positive".into()));
                }
                let sampler = self.mutilate(q)?;
                let mut rng = seed::rng(s);
                let mut x = vec![0; self.len()];
                let mut stats = RunningMean::default();
                for _ in 0..samples {
                    sampler.sample_into(&mut x, &mut rng);
                    let h: f64 = free
                        .iter()
                        .zip(&row_h)
                        .map(|(&v, r)| r[self.parent_config(v, &x)])
                        .sum();
                    stats.push(h);
                }
                Ok((stats.mean(), stats.std_error()))
            }
        }
    }
}

/// Welford accumulator for a sample mean and its standard error.
#[derive(Debug, Default, Clone)]
pub(crate) struct RunningMean {
    n: usize,
    mean: f64,
    m2: f64,
}

impl RunningMean {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    pub(crate) fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub(crate) fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            libm::sqrt(self.variance() / self.n as f64)
        }
    }
}
