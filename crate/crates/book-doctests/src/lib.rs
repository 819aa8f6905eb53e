//! Keeps the book honest: each chapter is included as rustdoc, so every
//! `rust` code fence in `book/src/*.md` compiles and runs under
//! `cargo test --doc -p book-doctests`. One module per chapter makes a
//! failing snippet traceable to its file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/corpus-design.md")]
pub mod corpus_design {}

#[doc = include_str!("../../../book/src/generation.md")]
pub mod generation {}

#[doc = include_str!("../../../book/src/embeddings.md")]
pub mod embeddings {}

#[doc = include_str!("../../../book/src/pca.md")]
pub mod pca {}

#[doc = include_str!("../../../book/src/umap.md")]
pub mod umap {}

#[doc = include_str!("../../../book/src/cluster-validation.md")]
pub mod cluster_validation {}

#[doc = include_str!("../../../book/src/dispersion.md")]
pub mod dispersion {}

#[doc = include_str!("../../../book/src/stylometry.md")]
pub mod stylometry {}

#[doc = include_str!("../../../book/src/delta-correlation.md")]
pub mod delta_correlation {}

#[doc = include_str!("../../../book/src/statistics.md")]
pub mod statistics {}

#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
