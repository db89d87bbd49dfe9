//! Minimum spanning trees of rank-1 inhomogeneous random graphs.
//!
//! Every potential edge `{i, j}` carries an exponential capacity of rate
//! `w_i * w_j`. Thresholding the capacities at `p` gives the graph process
//! `G(W, p)`; the minimum spanning forest of each snapshot forms the
//! increasing forest process `T(W, p)`. This crate generates those objects,
//! explores them with the size-biased breadth-first walk, couples the walk
//! with Poisson Galton-Watson trees, and runs replicated campaigns that
//! measure how diameters and typical distances scale with `n`.
//!
//! Nodes are `0`-based internally. Text exports use `1`-based labels.

// `!(x >= 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod exploration;
pub mod graphgen;
pub mod gwcoupling;
pub mod metrics;
pub mod mst;
pub mod par;
pub mod seed;
pub mod unionfind;
pub mod weights;

pub use error::{Error, Result};
pub use exploration::ExplorationTrace;
pub use graphgen::{CapacityMode, CapacitySource, Edge, GraphSnapshot};
pub use mst::Forest;
pub use weights::{WeightLaw, WeightStats, WeightVector};
