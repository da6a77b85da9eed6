//! Distributed classification with randomized RVFL networks built from
//! hyperdimensional computing primitives.
//!
//! Agents encode private data shards with a shared random projection, train a
//! local output layer (regularized least squares or class centroids), and
//! exchange only classifiers. A classifier can optionally be packed into a
//! single hypervector with holographic reduced representations before it is
//! sent, trading reconstruction crosstalk for an `L:1` cut in payload size.
//!
//! Module map:
//!
//! - [`hdc`]: hypervector algebra (binding, superposition, clipping,
//!   circular convolution, inverses, similarity).
//! - [`rvfl`]: thermometer codes and the hidden-layer activation.
//! - [`classifier`]: RLS and centroid output layers, winner-takes-all.
//! - [`hrr`]: key generation, compression, decompression, wire format.
//! - [`sim`]: agent network, partitioning, exchange and aggregation.
//! - [`data`]: CSV loading, normalization, splits, synthetic blobs.
//! - [`harness`]: grid search, multi-seed suites, statistics, reporting.

pub mod classifier;
pub mod data;
mod error;
pub mod harness;
pub mod hdc;
pub mod hrr;
pub mod rvfl;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use seed::SeedSpec;
