//! Brute-force oracles over full joint tables. Nothing here calls the library's
//! inference or divergence code; networks are only read through their tables.

#![allow(dead_code)]

use bnactive_core::generate::{random_network, RandomNetConfig};
use bnactive_core::{seed, BayesNet, Committee, Dag, Intervention, Variable};
use rand::Rng;

/// Every configuration of the given arities, last variable fastest.
pub fn configurations(arities: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &a in arities {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..a).map(move |s| {
                    let mut x = prefix.clone();
                    x.push(s);
                    x
                })
            })
            .collect();
    }
    out
}

fn row_index(net: &BayesNet, v: usize, x: &[usize]) -> usize {
    net.dag()
        .parents(v)
        .iter()
        .fold(0, |acc, &p| acc * net.variable(p).arity() + x[p])
}

/// `P(x | do(q))` by the truncated product over non-clamped families.
pub fn joint_prob(net: &BayesNet, x: &[usize], q: &Intervention) -> f64 {
    let mut p = 1.0;
    for v in 0..net.len() {
        match q.get(v) {
            Some(s) if x[v] != s => return 0.0,
            Some(_) => {}
            None => p *= net.cpt(v).row(row_index(net, v, x))[x[v]],
        }
    }
    p
}

/// Full joint table under `do(q)`, indexed like [`configurations`].
pub fn joint_table(net: &BayesNet, q: &Intervention) -> Vec<f64> {
    configurations(&net.arities())
        .iter()
        .map(|x| joint_prob(net, x, q))
        .collect()
}

pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

pub fn mixture(tables: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; tables[0].len()];
    for (t, &wi) in tables.iter().zip(w) {
        for (mi, &ti) in m.iter_mut().zip(t) {
            *mi += wi * ti;
        }
    }
    m
}

/// Joint tables of every member under `do(q)`.
pub fn member_tables(c: &Committee, q: &Intervention) -> Vec<Vec<f64>> {
    c.members().iter().map(|m| joint_table(m, q)).collect()
}

pub fn brute_js(c: &Committee, q: &Intervention) -> f64 {
    let t = member_tables(c, q);
    let w = c.weights();
    entropy(&mixture(&t, w))
        - t.iter()
            .zip(w)
            .map(|(ti, wi)| wi * entropy(ti))
            .sum::<f64>()
}

pub fn brute_bjs(c: &Committee, q: &Intervention) -> f64 {
    let t = member_tables(c, q);
    let w = c.weights();
    let m = mixture(&t, w);
    t.iter().zip(w).map(|(ti, wi)| wi * kl(&m, ti)).sum()
}

pub fn brute_kl2(c: &Committee, q: &Intervention) -> f64 {
    let t = member_tables(c, q);
    let w = c.weights();
    let mut total = 0.0;
    for (a, wa) in t.iter().zip(w) {
        for (b, wb) in t.iter().zip(w) {
            total += wa * wb * kl(a, b);
        }
    }
    total
}

pub fn random_net(seed: u64, variables: usize, max_arity: usize, edges: usize) -> BayesNet {
    let cfg = RandomNetConfig {
        variables,
        max_arity,
        edges,
        max_parents: 3,
        concentration: 1.0,
    };
    random_network(&cfg, &mut seed::rng(seed)).unwrap()
}

/// Random tables on a fixed structure and schema.
pub fn reparameterize(net: &BayesNet, seed: u64) -> BayesNet {
    let mut rng = seed::rng(seed);
    let rows = (0..net.len())
        .map(|v| {
            net.cpt(v)
                .rows()
                .map(|r| random_row(r.len(), &mut rng))
                .collect()
        })
        .collect();
    BayesNet::from_rows(net.variables().to_vec(), net.dag().clone(), rows).unwrap()
}

pub fn random_row<R: Rng>(arity: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..arity).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / s).collect()
}

/// Net over `schema` with the given parent sets and random tables.
pub fn net_on(schema: &[Variable], parents: Vec<Vec<usize>>, seed: u64) -> BayesNet {
    let mut rng = seed::rng(seed);
    let dag = Dag::new(parents).unwrap();
    let rows = (0..schema.len())
        .map(|v| {
            let configs: usize = dag.parents(v).iter().map(|&p| schema[p].arity()).product();
            (0..configs)
                .map(|_| random_row(schema[v].arity(), &mut rng))
                .collect()
        })
        .collect();
    BayesNet::from_rows(schema.to_vec(), dag, rows).unwrap()
}

pub fn random_weights<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / s).collect()
}

/// Random intervention of at most `max_size` variables.
pub fn random_intervention<R: Rng>(net: &BayesNet, max_size: usize, rng: &mut R) -> Intervention {
    let size = rng.random_range(0..=max_size.min(net.len()));
    let mut vars: Vec<usize> = (0..net.len()).collect();
    for i in 0..size {
        let j = rng.random_range(i..vars.len());
        vars.swap(i, j);
    }
    Intervention::new(
        vars[..size]
            .iter()
            .map(|&v| (v, rng.random_range(0..net.variable(v).arity()))),
    )
    .unwrap()
}

/// Every intervention of at most `max_size` variables, the empty one first.
pub fn all_interventions(net: &BayesNet, max_size: usize) -> Vec<Intervention> {
    let mut out = vec![Intervention::empty()];
    let mut frontier = vec![Intervention::empty()];
    for _ in 0..max_size {
        let mut next = Vec::new();
        for q in &frontier {
            let start = q.variables().last().map_or(0, |v| v + 1);
            for v in start..net.len() {
                for s in 0..net.variable(v).arity() {
                    next.push(q.with(v, s).unwrap());
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn binary_schema(n: usize) -> Vec<Variable> {
    (0..n)
        .map(|i| Variable::with_arity(format!("V{i}"), 2).unwrap())
        .collect()
}

/// Random parent sets: edges follow a random order, each present with probability
/// `density`, at most three parents per child.
pub fn random_parents<R: Rng>(n: usize, density: f64, rng: &mut R) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut parents = vec![Vec::new(); n];
    for j in 0..n {
        for i in 0..j {
            if parents[order[j]].len() < 3 && rng.random_bool(density) {
                parents[order[j]].push(order[i]);
            }
        }
    }
    parents
}

/// Schema with arities drawn from `2..=max_arity`.
pub fn random_schema<R: Rng>(n: usize, max_arity: usize, rng: &mut R) -> Vec<Variable> {
    (0..n)
        .map(|i| Variable::with_arity(format!("V{i}"), rng.random_range(2..=max_arity)).unwrap())
        .collect()
}

/// `k` members with independent random structures and tables, random weights.
pub fn random_committee(seed: u64, n: usize, max_arity: usize, k: usize) -> Committee {
    let mut rng = bnactive_core::seed::rng(seed);
    let schema = random_schema(n, max_arity, &mut rng);
    let members = (0..k)
        .map(|_| {
            let parents = random_parents(n, 0.5, &mut rng);
            net_on(&schema, parents, rng.random())
        })
        .collect();
    Committee::new(members, random_weights(k, &mut rng)).unwrap()
}

/// Every DAG over `n` variables (25 for three).
pub fn all_dags(n: usize) -> Vec<Dag> {
    let subsets: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|v| {
            let others: Vec<usize> = (0..n).filter(|&u| u != v).collect();
            (0..1usize << others.len())
                .map(|mask| {
                    others
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &u)| u)
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let parents = (0..n).map(|v| subsets[v][idx[v]].clone()).collect();
        if let Ok(d) = Dag::new(parents) {
            out.push(d);
        }
        let mut v = 0;
        loop {
            if v == n {
                return out;
            }
            idx[v] += 1;
            if idx[v] < subsets[v].len() {
                break;
            }
            idx[v] = 0;
            v += 1;
        }
    }
}

/// `n` observational records from `net`.
pub fn observe(net: &BayesNet, n: usize, seed: u64) -> bnactive_core::Dataset {
    let records = net
        .forward_sample(
            &Intervention::empty(),
            n,
            &mut bnactive_core::seed::rng(seed),
        )
        .unwrap()
        .into_iter()
        .map(bnactive_core::Record::observational)
        .collect();
    bnactive_core::Dataset::new(net.variables().to_vec(), records).unwrap()
}
