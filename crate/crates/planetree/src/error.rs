use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("address {address} is not a vertex of the tree")]
    InvalidAddress { address: String },

    #[error("depth {given} is out of range (tree height {height})")]
    DepthOutOfRange { given: usize, height: usize },

    #[error("time index {given} is out of range (lifetime {lifetime})")]
    TimeOutOfRange { given: usize, lifetime: usize },

    #[error("invalid contour path: {0}")]
    InvalidContour(String),

    #[error("a single-vertex tree has no edge to root at")]
    NoEdgeRooting,

    #[error("the root edge of the code is not central")]
    NotCentral,

    #[error("subtree heights ({left}, {right}) do not fit a central-edge rooting")]
    HeightMismatch { left: usize, right: usize },

    #[error("size {n} exceeds the enumeration budget {budget}")]
    EnumerationBudget { n: usize, budget: usize },

    #[error("offspring distribution rejected: {0}")]
    InvalidDistribution(String),

    #[error("{0} is not available on the exact backend")]
    ExactBackendUnsupported(&'static str),

    #[error("sampling budget exhausted after {attempts} attempts ({nodes} nodes generated)")]
    BudgetExhausted { attempts: u64, nodes: u64 },

    #[error("height distribution puts no mass at n = {n}")]
    DegenerateHeight { n: usize },

    #[error("branching mechanism does not satisfy the tail integrability condition")]
    NonIntegrable,

    #[error("no scaling sequence: infinite variance without a stable tail exponent")]
    NoScalingSequence,
}

pub type Result<T> = std::result::Result<T, Error>;
