use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },

    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),

    #[error("variable index {index} out of range for {len} variables")]
    UnknownVariable { index: usize, len: usize },

    #[error("invalid parent set for variable {child}: {reason}")]
    InvalidParents { child: usize, reason: String },

    #[error("graph contains a cycle through edges {edges:?}")]
    Cycle { edges: Vec<(usize, usize)> },

    #[error("conditional table of variable {child}: {reason}")]
    InvalidCpt { child: usize, reason: String },

    #[error("invalid intervention: {0}")]
    InvalidIntervention(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("networks do not share a variable schema")]
    SchemaMismatch,

    #[error(
        "joint state space of {states} configurations exceeds the enumeration budget {budget}"
    )]
    EnumerationTooLarge { states: u64, budget: u64 },

    #[error("dataset is empty")]
    EmptyData,

    #[error("divergence is infinite: second model assigns zero probability in the family of variable {variable}")]
    InfiniteDivergence { variable: usize },

    #[error("posterior over committee is undefined: every member assigns zero probability")]
    UndefinedPosterior,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
