//! Random unrooted plane trees with a fixed diameter.
//!
//! This crate implements the discrete theory behind degree-weighted
//! random plane trees conditioned on their diameter: exact codings of
//! ordered and plane trees, center and central-edge structure, the
//! decomposition of a centrally rooted tree into an ordered pair of
//! height-constrained halves, branching-tree samplers conditioned by
//! height, the exact fixed-diameter sampler, and the statistical
//! machinery comparing desk-scale simulations against closed-form
//! continuum reference laws.
//!
//! Modules:
//! - [`ordered_tree`]: ordered rooted trees, addresses, contour paths.
//! - [`plane_tree`]: canonical plane codes, centers, central edges,
//!   compose/decompose, symmetry counts, weights, enumeration and the
//!   closed counting formula, partition functions.
//! - [`offspring`]: offspring laws and generating-function analytics.
//! - [`gw_sampler`]: reproducible streams and conditioned samplers.
//! - [`diameter_sampler`]: the fixed-diameter rejection sampler and its
//!   law checks.
//! - [`limits`]: continuum constants, scaling sequences, rescaled
//!   contours and convergence reports.
//! - [`enumeration`], [`stats`]: exhaustive generators and test
//!   statistics backing the oracles.
//!
//! Mass computations are generic over the scalar backend through
//! [`Scalar`]: exact big rationals where a quantity is specified
//! exactly, `f64` elsewhere. The aliases below name the two backends.

pub mod diameter_sampler;
pub mod enumeration;
pub mod error;
pub mod gw_sampler;
pub mod limits;
pub mod offspring;
pub mod ordered_tree;
pub mod plane_tree;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use ordered_tree::{Address, ContourPath, OrderedTree};
pub use scalar::Scalar;

/// Exact rational scalar backend.
pub type Exact = num_rational::BigRational;

/// Offspring law on the exact backend.
pub type ExactDistribution = offspring::OffspringDistribution<Exact>;

/// Offspring law on the floating-point backend.
pub type FloatDistribution = offspring::OffspringDistribution<f64>;

/// Weight of a plane tree on the exact backend.
pub type ExactWeight = Exact;

/// Weight of a plane tree on the floating-point backend.
pub type FloatWeight = f64;
