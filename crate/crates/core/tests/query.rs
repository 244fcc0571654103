mod common;

use bnactive_core::{
    greedy_query, kl2, score_query, BayesNet, Committee, FactoredDomain, Intervention, Measure,
    Method, QueryConfig,
};
use common::*;
use proptest::prelude::*;

fn cfg(measure: Measure, budget: Option<usize>) -> QueryConfig {
    QueryConfig {
        measure,
        budget,
        ..QueryConfig::default()
    }
}

/// Highest-scoring query of at most `budget` variables, ties to the earlier one in
/// enumeration order.
fn exhaustive(c: &Committee, budget: usize, measure: Measure) -> (Intervention, f64) {
    let mut best = (Intervention::empty(), f64::NEG_INFINITY);
    for q in all_interventions(&c.members()[0], budget) {
        let s = score_query(c, &q, &cfg(measure, None), Method::exact())
            .unwrap()
            .value;
        if s > best.1 {
            best = (q, s);
        }
    }
    best
}

fn measure() -> impl Strategy<Value = Measure> {
    prop::sample::select(vec![Measure::Js, Measure::Bjs, Measure::Kl2])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn budget_one_matches_singleton_argmax(s in any::<u64>(), m in measure()) {
        let c = random_committee(s, 4, 3, 2);
        let config = cfg(m, Some(1));
        let choice = greedy_query(&c, &config, Method::exact()).unwrap();
        let empty = choice.trace[0].value;
        let mut best: Option<(Intervention, f64)> = None;
        for q in all_interventions(&c.members()[0], 1).into_iter().skip(1) {
            let s = score_query(&c, &q, &config, Method::exact()).unwrap().value;
            if best.as_ref().is_none_or(|(_, b)| s > *b) {
                best = Some((q, s));
            }
        }
        let (q, s) = best.unwrap();
        if s > empty + config.threshold_abs {
            prop_assert_eq!(choice.query, q);
        } else {
            prop_assert!(choice.query.is_empty());
        }
    }

    #[test]
    fn accepted_rounds_increase_by_the_threshold(s in any::<u64>(), m in measure(), b in prop::option::of(0usize..4)) {
        let c = random_committee(s, 4, 2, 3);
        let config = cfg(m, b);
        let choice = greedy_query(&c, &config, Method::exact()).unwrap();
        prop_assert!(b.is_none_or(|b| choice.query.len() <= b));
        prop_assert_eq!(choice.trace.len(), choice.query.len() + 1);
        for w in choice.trace.windows(2) {
            prop_assert!(w[1].value > w[0].value + config.threshold_abs);
        }
        prop_assert_eq!(choice.trace.last().unwrap(), &choice.score);
    }
}

#[test]
fn score_query_dispatches() {
    let c = random_committee(4, 4, 3, 2);
    let q = Intervention::single(2, 1);
    assert_eq!(
        score_query(&c, &q, &cfg(Measure::Kl2, None), Method::exact()).unwrap(),
        kl2(&c, &q, Method::exact()).unwrap()
    );
}

#[test]
fn std_error_shrinks_with_root_n() {
    let c = random_committee(21, 4, 3, 2);
    let q = Intervention::single(0, 0);
    for m in [Measure::Js, Measure::Kl2, Measure::Bjs] {
        let mean_se = |n: usize| {
            (0..10)
                .map(|s| {
                    score_query(&c, &q, &cfg(m, None), Method::sampled(n, s))
                        .unwrap()
                        .std_error
                })
                .sum::<f64>()
                / 10.0
        };
        let ratio = mean_se(1000) / mean_se(16_000);
        assert!((ratio - 4.0).abs() < 0.4, "{m}: ratio {ratio}");
    }
}

/// Members on blocks `{0,1}` and `{2,3}` sharing block 2 exactly.
fn block_committee(seed_value: u64, vary_second: bool) -> Committee {
    let schema = binary_schema(4);
    let parents = vec![vec![], vec![0], vec![3], vec![]];
    let a = net_on(&schema, parents.clone(), seed_value);
    let b = net_on(&schema, parents, seed_value + 1);
    let mut rows: Vec<Vec<Vec<f64>>> = (0..4)
        .map(|v| a.cpt(v).rows().map(<[f64]>::to_vec).collect())
        .collect();
    let varied = if vary_second { 4 } else { 2 };
    for (v, r) in rows.iter_mut().enumerate().take(varied) {
        *r = b.cpt(v).rows().map(<[f64]>::to_vec).collect();
    }
    let b = BayesNet::from_rows(schema, a.dag().clone(), rows).unwrap();
    Committee::uniform(vec![a, b]).unwrap()
}

#[test]
fn disagreement_in_one_block_confines_the_query() {
    for s in 0..10u64 {
        let c = block_committee(100 + 2 * s, false);
        let choice = greedy_query(&c, &cfg(Measure::Kl2, Some(2)), Method::exact()).unwrap();
        assert!(
            choice.query.variables().all(|v| v < 2),
            "{:?}",
            choice.query
        );
        let (_, opt) = exhaustive(&c, 2, Measure::Kl2);
        assert!(
            (choice.score.value - opt).abs() < 1e-12,
            "{} vs {opt}",
            choice.score.value
        );
    }
}

#[test]
fn greedy_query_decomposes_over_blocks() {
    let domain = FactoredDomain::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
    for s in 0..10u64 {
        let c = block_committee(300 + 2 * s, true);
        let full = greedy_query(&c, &cfg(Measure::Kl2, None), Method::exact()).unwrap();
        for b in 0..2 {
            let own = greedy_query(
                &domain.restrict_committee(&c, b).unwrap(),
                &cfg(Measure::Kl2, None),
                Method::exact(),
            )
            .unwrap();
            assert_eq!(domain.restrict_intervention(&full.query, b), own.query);
        }
    }
}

#[test]
fn sampled_search_is_seed_deterministic() {
    let c = random_committee(8, 5, 3, 2);
    let m = Method::sampled(500, 3);
    let config = cfg(Measure::Js, Some(2));
    assert_eq!(
        greedy_query(&c, &config, m).unwrap(),
        greedy_query(&c, &config, m).unwrap()
    );
}
