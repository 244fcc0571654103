//! Committee-based active learning of discrete Bayesian networks from
//! interventional data.
//!
//! A committee of networks, each learned on a bootstrap resample of the data,
//! represents the learner's uncertainty. The next experiment `do(q)` is the query
//! on which the committee disagrees most, measured by the Jensen-Shannon
//! divergence ([`divergence::js`]), its backward form ([`divergence::bjs`]) or the
//! average pairwise KL divergence ([`divergence::kl2`]).
//!
//! The crate is `no_std` with `alloc` when built without the default `std`
//! feature. The `parallel` feature spreads committee construction, query scoring
//! and bootstrap evaluation over a rayon pool; results do not depend on it.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod active;
pub mod committee;
pub mod data;
pub mod divergence;
pub mod error;
pub mod generate;
pub mod inference;
pub mod learning;
pub mod net;
pub mod query;
pub mod seed;

mod par;

pub use active::{
    edge_entropy, edge_error, evaluate, oracle_respond, predictive_accuracy, random_query,
    run_active, EvalMetrics, LoopConfig, StepReport, Strategy, PREDICTIVE_SIZES,
};
pub use committee::{build_committee, Committee};
pub use data::{Dataset, Record};
pub use divergence::{
    bjs, committee_posterior, js, kl2, kl_between, DivergenceEstimate, EstimateKind,
    FactoredDomain, Method,
};
pub use error::{Error, Result};
pub use inference::{Marginal, MarginalSource, DEFAULT_ENUMERATION_BUDGET};
pub use learning::{family_log_score, fit_parameters, local_search, ScoreConfig, SearchConfig};
pub use net::{BayesNet, Cpt, Dag, Intervention, Variable};
pub use query::{greedy_query, score_query, Measure, QueryChoice, QueryConfig};
