mod common;

use approx::assert_abs_diff_eq;
use bnactive_core::inference::free_state_count;
use bnactive_core::{seed, BayesNet, Dag, Error, Intervention, MarginalSource, Variable};
use common::*;
use proptest::prelude::*;

fn small_net() -> impl Strategy<Value = BayesNet> {
    (any::<u64>(), 2usize..=6, 2usize..=3, 0usize..=8)
        .prop_map(|(s, n, a, e)| random_net(s, n, a, e))
}

fn net_and_query() -> impl Strategy<Value = (BayesNet, Intervention)> {
    (small_net(), any::<u64>()).prop_map(|(net, s)| {
        let q = random_intervention(&net, 3, &mut seed::rng(s));
        (net, q)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncated_factorization_matches_brute_force((net, q) in net_and_query()) {
        for x in configurations(&net.arities()) {
            let lp = net.joint_log_prob(&x, &q).unwrap();
            let oracle = joint_prob(&net, &x, &q);
            if q.consistent_with(&x) {
                prop_assert!((lp.exp() - oracle).abs() < 1e-12);
            } else {
                prop_assert_eq!(lp, f64::NEG_INFINITY);
                prop_assert_eq!(oracle, 0.0);
            }
        }
    }

    #[test]
    fn joint_is_normalized((net, q) in net_and_query()) {
        let total: f64 = configurations(&net.arities())
            .iter()
            .map(|x| net.joint_log_prob(x, &q).unwrap().exp())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mutilation_is_idempotent((net, q) in net_and_query()) {
        let once = net.mutilate(&q).unwrap();
        prop_assert_eq!(once.mutilate(&q).unwrap(), once.clone());
        for v in q.variables() {
            prop_assert!(once.dag().parents(v).is_empty());
            prop_assert!(once.cpt(v).is_degenerate());
        }
        for v in (0..net.len()).filter(|&v| !q.contains(v)) {
            prop_assert_eq!(once.dag().parents(v), net.dag().parents(v));
            prop_assert_eq!(once.cpt(v), net.cpt(v));
        }
    }

    #[test]
    fn empty_mutilation_is_identity(net in small_net()) {
        prop_assert_eq!(net.mutilate(&Intervention::empty()).unwrap(), net);
    }

    #[test]
    fn family_entropy_matches_enumeration((net, q) in net_and_query()) {
        let h = net.model_entropy(&q, MarginalSource::exact()).unwrap();
        prop_assert!((h - entropy(&joint_table(&net, &q))).abs() < 1e-9);
    }

    #[test]
    fn marginal_sums_joint((net, q) in net_and_query(), t in 0usize..6) {
        let target = t % net.len();
        let m = net.exact_marginal(&[target], &q, 1 << 20).unwrap();
        let mut oracle = vec![0.0; net.variable(target).arity()];
        for x in configurations(&net.arities()) {
            oracle[x[target]] += joint_prob(&net, &x, &q);
        }
        prop_assert!((m.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (a, b) in m.probs().iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

fn chain3() -> BayesNet {
    BayesNet::from_rows(
        binary_schema(3),
        Dag::new(vec![vec![], vec![0], vec![1]]).unwrap(),
        vec![
            vec![vec![0.35, 0.65]],
            vec![vec![0.8, 0.2], vec![0.15, 0.85]],
            vec![vec![0.6, 0.4], vec![0.05, 0.95]],
        ],
    )
    .unwrap()
}

#[test]
fn three_node_chain_log_probs_match_table() {
    let net = chain3();
    let table = joint_table(&net, &Intervention::empty());
    for (x, p) in configurations(&net.arities()).iter().zip(&table) {
        assert_abs_diff_eq!(
            net.joint_log_prob(x, &Intervention::empty()).unwrap(),
            p.ln(),
            epsilon = 1e-12
        );
    }
}

#[test]
fn independent_fair_pair() {
    let net = BayesNet::from_rows(
        binary_schema(2),
        Dag::empty(2),
        vec![vec![vec![0.5, 0.5]], vec![vec![0.5, 0.5]]],
    )
    .unwrap();
    assert_abs_diff_eq!(
        net.joint_log_prob(&[0, 0], &Intervention::empty()).unwrap(),
        0.25f64.ln(),
        epsilon = 1e-15
    );
}

#[test]
fn joint_log_prob_rejects_wrong_length() {
    assert!(matches!(
        chain3().joint_log_prob(&[0, 1], &Intervention::empty()),
        Err(Error::Shape(_))
    ));
}

#[test]
fn mutilation_cuts_incoming_edges() {
    let net = chain3();
    let m = net.mutilate(&Intervention::single(1, 1)).unwrap();
    assert!(!m.dag().has_edge(0, 1));
    assert!(m.dag().has_edge(1, 2));
    assert_eq!(m.cpt(1).row(0), &[0.0, 1.0]);
    assert_eq!(m.cpt(0), net.cpt(0));
    assert!(matches!(
        net.mutilate(&Intervention::single(5, 0)),
        Err(Error::InvalidIntervention(_)) | Err(Error::UnknownVariable { .. })
    ));
    assert!(net.mutilate(&Intervention::single(1, 2)).is_err());
}

#[test]
fn root_intervention_gives_conditional() {
    let net = chain3();
    let m = net
        .exact_marginal(&[1], &Intervention::single(0, 0), 1 << 20)
        .unwrap();
    assert_eq!(m.probs(), net.cpt(1).row(0));
}

#[test]
fn collider_clamp_leaves_parents_independent() {
    let net = BayesNet::from_rows(
        binary_schema(3),
        Dag::new(vec![vec![], vec![], vec![0, 1]]).unwrap(),
        vec![
            vec![vec![0.3, 0.7]],
            vec![vec![0.6, 0.4]],
            vec![
                vec![0.9, 0.1],
                vec![0.5, 0.5],
                vec![0.2, 0.8],
                vec![0.01, 0.99],
            ],
        ],
    )
    .unwrap();
    let m = net
        .exact_marginal(&[0, 1], &Intervention::single(2, 0), 1 << 20)
        .unwrap();
    for (i, (a, b)) in [(0.3, 0.6), (0.3, 0.4), (0.7, 0.6), (0.7, 0.4)]
        .iter()
        .enumerate()
    {
        assert_abs_diff_eq!(m.probs()[i], a * b, epsilon = 1e-15);
    }
}

#[test]
fn budget_counts_free_states() {
    let net = random_net(3, 6, 3, 6);
    let q = Intervention::single(0, 0);
    let free = free_state_count(&net, &q);
    assert!(net.exact_marginal(&[1], &q, free).is_ok());
    assert!(matches!(
        net.exact_marginal(&[1], &q, free - 1),
        Err(Error::EnumerationTooLarge { .. })
    ));
}

#[test]
fn sampled_marginals_within_three_binomial_errors() {
    let net = chain3();
    for q in [Intervention::empty(), Intervention::single(1, 0)] {
        let n = 100_000;
        let draws = net.forward_sample(&q, n, &mut seed::rng(2024)).unwrap();
        for v in 0..3 {
            let exact = net.exact_marginal(&[v], &q, 1 << 20).unwrap().probs()[0];
            let freq = draws.iter().filter(|x| x[v] == 0).count() as f64 / n as f64;
            let se = (exact * (1.0 - exact) / n as f64).sqrt();
            assert!(
                (freq - exact).abs() <= 3.0 * se + 1e-12,
                "variable {v} under {q:?}: {freq} vs {exact}"
            );
        }
    }
}

#[test]
fn sampling_is_seed_deterministic_and_respects_clamps() {
    let net = chain3();
    let q = Intervention::single(0, 1);
    let a = net.forward_sample(&q, 500, &mut seed::rng(9)).unwrap();
    let b = net.forward_sample(&q, 500, &mut seed::rng(9)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|x| x[0] == 1));
}

#[test]
fn deterministic_net_has_zero_entropy_and_one_sample() {
    let net = BayesNet::from_rows(
        binary_schema(2),
        Dag::new(vec![vec![], vec![0]]).unwrap(),
        vec![vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0], vec![1.0, 0.0]]],
    )
    .unwrap();
    let draws = net
        .forward_sample(&Intervention::empty(), 50, &mut seed::rng(1))
        .unwrap();
    assert!(draws.iter().all(|x| x == &[0, 1]));
    assert_eq!(
        net.model_entropy(&Intervention::empty(), MarginalSource::exact())
            .unwrap(),
        0.0
    );
}

#[test]
fn variable_and_dag_validation() {
    assert!(Variable::with_arity("A", 1).is_err());
    assert!(Variable::new("A", vec!["x".into(), "x".into()]).is_err());
    assert!(Dag::new(vec![vec![0]]).is_err());
    assert!(Dag::new(vec![vec![1, 1], vec![]]).is_err());
    match Dag::new(vec![vec![2], vec![0], vec![1], vec![0]]) {
        Err(Error::Cycle { edges }) => {
            let mut e = edges.clone();
            e.sort();
            assert_eq!(e, vec![(0, 1), (1, 2), (2, 0)]);
        }
        other => panic!("expected cycle, got {other:?}"),
    }
}
