//! Exact distances between trees.
//!
//! This crate computes the interleaving distance between two merge trees
//! and a constant-factor approximation of the Gromov-Hausdorff distance
//! between two metric trees. All arithmetic is exact big-rational
//! arithmetic; every returned distance is an exact value, not a float.
//!
//! Module map:
//!
//! * [`rational`]: arbitrary-precision rational scalars.
//! * [`tree`]: merge trees, metric trees, point-level queries, and the
//!   degree-bound parameters that control the search.
//! * [`augment`]: common super-levels, level-augmented trees, and the
//!   valid / sensible pair enumerations.
//! * [`decide`]: the fixed-parameter decision procedures answering
//!   "is the interleaving distance at most delta?".
//! * [`search`]: candidate values and the optimizing searches (linear
//!   scan and degree-classed double binary search).
//! * [`gh`]: Gromov-Hausdorff approximation by minimizing interleaving
//!   distance over all root pairs.
//! * [`oracle`]: independent brute-force reference implementations used
//!   for differential testing.
//! * [`io`]: the line-based file format, serialization, and the seeded
//!   random instance generator.

pub mod augment;
pub mod decide;
pub mod gh;
pub mod io;
pub mod oracle;
pub mod rational;
pub mod search;
pub mod tree;

pub use rational::Rational;
pub use tree::{MergePoint, MergeTree, MetricTree, NodeId, TreeError};
