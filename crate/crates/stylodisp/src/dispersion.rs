//! Centroid-distance dispersion over multi-seed reductions and the five
//! directional hypotheses comparing topic and style variation.
//!
//! Per seed and per cell, each document's Euclidean distance to its cell
//! centroid is computed; distances are then averaged across seeds per
//! document, and a cell's dispersion is the mean of those per-document
//! averages. Hypotheses compare the per-document samples of two cells with
//! a two-sided t-test (Welch by default).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CellId;
use crate::matrix::{euclidean, Matrix};
use crate::reduce::{ReduceMethod, ReducedSet};
use crate::stats::{self, StatsError};

#[derive(Debug, Error, PartialEq)]
pub enum DispersionError {
    #[error("empty member list")]
    EmptyMembers,
    #[error("member row {row} out of bounds (matrix has {n} rows)")]
    RowOutOfBounds { row: usize, n: usize },
    #[error("ragged per-seed distance lists: {0} vs {1}")]
    Ragged(usize, usize),
    #[error("no seeds")]
    NoSeeds,
    #[error("no reductions")]
    NoReductions,
    #[error("reductions disagree in shape or method")]
    MixedReductions,
    #[error("cell {0} missing from dispersion table")]
    MissingCell(CellId),
    #[error("cell {cell} has {got} documents; need at least 2")]
    UndersizedCell { cell: CellId, got: usize },
    #[error("statistics failed: {0}")]
    Stats(#[from] StatsError),
}

/// Which two-sample test backs the hypothesis verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestVariant {
    /// Welch's unequal-variance t-test (default; cell variances differ).
    Welch,
    /// Student's pooled-variance t-test.
    Pooled,
}

/// Euclidean distance of every member row to the members' centroid, in
/// `member_rows` order.
pub fn centroid_distances(
    coords: &Matrix,
    member_rows: &[usize],
) -> Result<Vec<f64>, DispersionError> {
    if member_rows.is_empty() {
        return Err(DispersionError::EmptyMembers);
    }
    let n = coords.n_rows();
    if let Some(&row) = member_rows.iter().find(|&&r| r >= n) {
        return Err(DispersionError::RowOutOfBounds { row, n });
    }
    let d = coords.n_cols();
    let mut centroid = vec![0.0; d];
    for &r in member_rows {
        for (c, v) in centroid.iter_mut().zip(coords.row(r)) {
            *c += v;
        }
    }
    let count = member_rows.len() as f64;
    for c in &mut centroid {
        *c /= count;
    }
    Ok(member_rows.iter().map(|&r| euclidean(coords.row(r), &centroid)).collect())
}

/// Elementwise arithmetic mean over seeds: input is one distance list per
/// seed, all in the same document order.
pub fn seed_mean_distances(per_seed: &[Vec<f64>]) -> Result<Vec<f64>, DispersionError> {
    let first = per_seed.first().ok_or(DispersionError::NoSeeds)?;
    let len = first.len();
    for list in per_seed {
        if list.len() != len {
            return Err(DispersionError::Ragged(len, list.len()));
        }
    }
    let n_seeds = per_seed.len() as f64;
    Ok((0..len)
        .map(|i| per_seed.iter().map(|list| list[i]).sum::<f64>() / n_seeds)
        .collect())
}

/// Mean of the per-document seed-averaged distances.
pub fn cell_dispersion(d_bar: &[f64]) -> Result<f64, DispersionError> {
    if d_bar.is_empty() {
        return Err(DispersionError::EmptyMembers);
    }
    Ok(d_bar.iter().sum::<f64>() / d_bar.len() as f64)
}

/// Seed-averaged dispersion of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDispersion {
    pub cell: CellId,
    /// Row indices of the cell's documents in the reduced matrices.
    pub rows: Vec<usize>,
    /// Seed-averaged centroid distance per document, aligned to `rows`.
    pub per_doc: Vec<f64>,
    /// Cell mean of `per_doc`.
    pub mean: f64,
}

/// Dispersion of every cell over one multi-seed reduction family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionTable {
    pub cells: BTreeMap<CellId, CellDispersion>,
    /// Seeds of the contributing reductions; `None` for seedless methods.
    pub seeds_used: Vec<Option<u64>>,
    pub method: ReduceMethod,
    pub target_dim: usize,
}

impl DispersionTable {
    /// Computes per-cell dispersion across the given reductions. Centroids
    /// are recomputed per seed and per cell, never pooled across seeds.
    /// All reductions must share shape and method.
    pub fn compute(
        reductions: &[ReducedSet],
        membership: &BTreeMap<CellId, Vec<usize>>,
    ) -> Result<Self, DispersionError> {
        let first = reductions.first().ok_or(DispersionError::NoReductions)?;
        for r in reductions {
            if r.method != first.method
                || r.target_dim != first.target_dim
                || r.coords.n_rows() != first.coords.n_rows()
            {
                return Err(DispersionError::MixedReductions);
            }
        }
        let mut cells = BTreeMap::new();
        for (&cell, rows) in membership {
            if rows.is_empty() {
                return Err(DispersionError::EmptyMembers);
            }
            let per_seed: Vec<Vec<f64>> = reductions
                .iter()
                .map(|r| centroid_distances(&r.coords, rows))
                .collect::<Result<_, _>>()?;
            let per_doc = seed_mean_distances(&per_seed)?;
            let mean = cell_dispersion(&per_doc)?;
            cells.insert(cell, CellDispersion { cell, rows: rows.clone(), per_doc, mean });
        }
        Ok(Self {
            cells,
            seeds_used: reductions.iter().map(|r| r.seed).collect(),
            method: first.method,
            target_dim: first.target_dim,
        })
    }

    pub fn cell(&self, cell: CellId) -> Result<&CellDispersion, DispersionError> {
        self.cells.get(&cell).ok_or(DispersionError::MissingCell(cell))
    }
}

/// The five directional predictions. Topic hypotheses compare cells that
/// differ in topic mode, style hypotheses in style mode, and the global one
/// pits topic variation against style variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HypothesisId {
    TPrime,
    TSecond,
    SPrime,
    SSecond,
    TopicOverStyle,
}

impl HypothesisId {
    pub const ALL: [HypothesisId; 5] = [
        HypothesisId::TPrime,
        HypothesisId::TSecond,
        HypothesisId::SPrime,
        HypothesisId::SSecond,
        HypothesisId::TopicOverStyle,
    ];

    pub fn label(self) -> &'static str {
        match self {
            HypothesisId::TPrime => "T'",
            HypothesisId::TSecond => "T''",
            HypothesisId::SPrime => "S'",
            HypothesisId::SSecond => "S''",
            HypothesisId::TopicOverStyle => "T-S",
        }
    }

    /// The predicted ordering: dispersion of `lhs` exceeds dispersion of `rhs`.
    pub fn cells(self) -> (CellId, CellId) {
        match self {
            HypothesisId::TPrime => (CellId::FeneonGen, CellId::QueneauRef),
            HypothesisId::TSecond => (CellId::FeneonRef, CellId::QueneauGen),
            HypothesisId::SPrime => (CellId::QueneauRef, CellId::QueneauGen),
            HypothesisId::SSecond => (CellId::FeneonGen, CellId::FeneonRef),
            HypothesisId::TopicOverStyle => (CellId::FeneonRef, CellId::QueneauRef),
        }
    }
}

impl fmt::Display for HypothesisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Significance stars at the .05 / .01 thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stars {
    None,
    One,
    Two,
}

impl Stars {
    pub fn from_p(p: f64) -> Self {
        if p < 0.01 {
            Stars::Two
        } else if p < 0.05 {
            Stars::One
        } else {
            Stars::None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::One => "*",
            Stars::Two => "**",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisVerdict {
    pub id: HypothesisId,
    pub lhs_cell: CellId,
    pub rhs_cell: CellId,
    /// True iff mean dispersion of lhs strictly exceeds that of rhs.
    pub direction_ok: bool,
    pub t_stat: f64,
    pub p_value: f64,
    pub stars: Stars,
}

/// Tests all five hypotheses with Welch's t-test on the per-document
/// seed-averaged distances.
pub fn test_hypotheses(table: &DispersionTable) -> Result<Vec<HypothesisVerdict>, DispersionError> {
    test_hypotheses_with(table, TestVariant::Welch)
}

/// Same, with an explicit test variant.
pub fn test_hypotheses_with(
    table: &DispersionTable,
    variant: TestVariant,
) -> Result<Vec<HypothesisVerdict>, DispersionError> {
    let mut verdicts = Vec::with_capacity(HypothesisId::ALL.len());
    for id in HypothesisId::ALL {
        let (lhs, rhs) = id.cells();
        let lhs_cell = table.cell(lhs)?;
        let rhs_cell = table.cell(rhs)?;
        for c in [lhs_cell, rhs_cell] {
            if c.per_doc.len() < 2 {
                return Err(DispersionError::UndersizedCell { cell: c.cell, got: c.per_doc.len() });
            }
        }
        let result = match variant {
            TestVariant::Welch => stats::welch_t(&lhs_cell.per_doc, &rhs_cell.per_doc)?,
            TestVariant::Pooled => stats::student_t_pooled(&lhs_cell.per_doc, &rhs_cell.per_doc)?,
        };
        verdicts.push(HypothesisVerdict {
            id,
            lhs_cell: lhs,
            rhs_cell: rhs,
            direction_ok: lhs_cell.mean > rhs_cell.mean,
            t_stat: result.t,
            p_value: result.p,
            stars: Stars::from_p(result.p),
        });
    }
    Ok(verdicts)
}
