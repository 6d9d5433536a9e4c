//! Graph clustering by boundary-width reduction.
//!
//! A weighted undirected graph is clustered by arranging each connected
//! component in a linear order, locally minimizing the *width* of the order
//! (its prefix-boundary profile sorted descending, compared
//! lexicographically), and then cutting the order at every local minimum of
//! the profile. The resulting blocks tend to straddle bottlenecks of the
//! graph, which makes them useful units for label propagation: the
//! [`predict`] module assigns each unlabeled vertex the mean label of its
//! block, optionally averaged over bagged subsamples, and [`eval`] scores
//! such predictions with repeated stratified cross-validation and ROC curves.
//!
//! All randomness is driven by explicit `u64` seeds through a fixed counter
//! chain (see [`seed`]), so every public entry point is deterministic given
//! its inputs. Edge weights are kept as exact integer multiples of a
//! graph-wide unit (see [`weight`]); boundary comparisons never go through
//! floating point.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod graph;
pub mod order;
pub mod predict;
pub mod search;
pub mod seed;
pub mod synth;
pub mod weight;

pub use error::{Error, Result};
pub use graph::{ComponentDecomposition, GraphStats, VertexId, VertexSet, WeightedGraph};
pub use order::{BoundaryProfile, Ordering, Partition, Width};
