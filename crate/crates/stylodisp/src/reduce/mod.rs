//! Dimensionality reduction: PCA for cluster validation and a self-contained
//! seeded UMAP for dispersion analysis.
//!
//! Both reducers are deterministic; UMAP additionally takes an explicit seed
//! so a multi-seed run can average out initialization sensitivity.

mod pca;
mod umap;

pub use pca::pca_reduce;
pub use umap::{fit_membership_curve, umap_reduce, UmapGraph, UmapParams};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum ReduceError {
    #[error("target dimension {d} out of range [1, {max}]")]
    DimOutOfRange { d: usize, max: usize },
    #[error("need more than {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
    #[error("seed list is empty")]
    NoSeeds,
    #[error("duplicate seed {0}")]
    DuplicateSeed(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReduceMethod {
    Pca,
    Umap,
    /// Identity passthrough: the input coordinates untouched.
    FullD,
}

impl ReduceMethod {
    pub fn label(self) -> &'static str {
        match self {
            ReduceMethod::Pca => "PCA",
            ReduceMethod::Umap => "UMAP",
            ReduceMethod::FullD => "FullD",
        }
    }
}

/// Low-dimensional coordinates in fixed document order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSet {
    pub method: ReduceMethod,
    pub target_dim: usize,
    /// Seed of the stochastic layout; `None` for the deterministic methods.
    pub seed: Option<u64>,
    pub coords: Matrix,
    /// Per-component variance captured, PCA only; non-increasing.
    pub explained_variance: Option<Vec<f64>>,
}

/// Identity reduction: passes coordinates through untouched.
pub fn full_pass(m: &Matrix) -> ReducedSet {
    ReducedSet {
        method: ReduceMethod::FullD,
        target_dim: m.n_cols(),
        seed: None,
        coords: m.clone(),
        explained_variance: None,
    }
}

/// One independent UMAP reduction per seed, in seed order. Seeds must be
/// non-empty and distinct. Reductions run in parallel; each is fully
/// determined by its own seed, so parallelism does not affect the output.
pub fn multi_seed_reduce(
    m: &Matrix,
    d: usize,
    params: &UmapParams,
    seeds: &[u64],
) -> Result<Vec<ReducedSet>, ReduceError> {
    if seeds.is_empty() {
        return Err(ReduceError::NoSeeds);
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(ReduceError::DuplicateSeed(pair[0]));
        }
    }
    seeds
        .par_iter()
        .map(|&seed| umap_reduce(m, d, params, seed))
        .collect()
}
