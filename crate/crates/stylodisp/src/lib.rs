#![allow(clippy::needless_range_loop)] // index loops read better in the numeric kernels
#![allow(clippy::neg_cmp_op_on_partial_ord)] // !(x > 0) deliberately catches NaN

//! Quantifies how topic variation versus writing-style variation disperses
//! text-embedding vectors.
//!
//! The pipeline: a 2x2 corpus design (topic mode x style mode) is validated
//! by clustering reduced embeddings; multi-seed UMAP reductions yield
//! per-document centroid distances whose cell means are compared by
//! directional hypothesis tests; stylometric feature deltas are then
//! correlated against dispersion deltas to explain what the embeddings
//! react to.

pub mod cluster;
pub mod corpus;
pub mod delta;
pub mod dispersion;
pub mod embedding;
pub mod generation;
pub mod matrix;
pub mod provider;
pub mod reduce;
pub mod report;
pub mod stats;
pub mod stylometry;

pub use corpus::{CellId, Corpus, Document, Origin};
pub use embedding::EmbeddingSet;
pub use matrix::Matrix;
pub use reduce::{ReduceMethod, ReducedSet, UmapParams};
