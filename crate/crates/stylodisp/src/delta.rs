//! Pairwise dispersion/feature deltas between two cells and the masked
//! Pearson correlation matrix built from them.
//!
//! A delta row pairs one document of cell X with one of cell Y and records
//! the difference in seed-averaged centroid distance alongside the
//! difference in each stylometric group. Correlations are masked wherever
//! the ground-frequency shift for that (feature, comparison) was not
//! significant, and wherever a delta column has zero variance.

use serde::Serialize;
use thiserror::Error;

use crate::corpus::CellId;
use crate::dispersion::Stars;
use crate::stats::{self, StatsError};
use crate::stylometry::{GroundFrequencyTable, StyleFeatures, FEATURE_GROUPS};

#[derive(Debug, Error, PartialEq)]
pub enum DeltaError {
    #[error("indexed pairing needs equal cell sizes: {0} vs {1}")]
    UnequalIndexed(usize, usize),
    #[error("dispersion and feature rows misaligned: {dists} distances vs {features} features")]
    MisalignedRows { dists: usize, features: usize },
    #[error("cell {0} has no documents")]
    EmptyCell(CellId),
    #[error("series too small: {0} rows, need at least 3")]
    SeriesTooSmall(usize),
    #[error("comparison {0} missing from the ground table")]
    MissingComparison(CellId),
    #[error("statistics failed: {0}")]
    Stats(#[from] StatsError),
}

/// How X documents pair with Y documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairingMode {
    /// Every (i, j) pair: |X| * |Y| rows. The default.
    Cartesian,
    /// Position-wise pairs: requires |X| = |Y|.
    Indexed,
}

/// One pairing's deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub delta_d: f64,
    /// Aligned to [`FEATURE_GROUPS`].
    pub delta_f: [f64; 8],
}

/// All delta rows for one (X, Y) comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSeries {
    pub x_cell: CellId,
    pub y_cell: CellId,
    pub pairing_mode: PairingMode,
    pub rows: Vec<DeltaRow>,
}

/// Inputs for one cell: seed-averaged distances and features, row-aligned.
pub struct CellSamples<'a> {
    pub cell: CellId,
    pub d_bar: &'a [f64],
    pub features: &'a [StyleFeatures],
}

impl<'a> CellSamples<'a> {
    fn validate(&self) -> Result<(), DeltaError> {
        if self.d_bar.is_empty() {
            return Err(DeltaError::EmptyCell(self.cell));
        }
        if self.d_bar.len() != self.features.len() {
            return Err(DeltaError::MisalignedRows {
                dists: self.d_bar.len(),
                features: self.features.len(),
            });
        }
        Ok(())
    }
}

/// Builds the delta series for (X, Y). Row order is X-major then Y within
/// each X document for Cartesian pairing.
pub fn delta_series(
    x: &CellSamples,
    y: &CellSamples,
    pairing_mode: PairingMode,
) -> Result<DeltaSeries, DeltaError> {
    x.validate()?;
    y.validate()?;
    let deltas = |xi: usize, yj: usize| -> DeltaRow {
        let mut delta_f = [0.0; 8];
        for (g, name) in FEATURE_GROUPS.iter().enumerate() {
            delta_f[g] = x.features[xi].group(name) - y.features[yj].group(name);
        }
        DeltaRow { delta_d: x.d_bar[xi] - y.d_bar[yj], delta_f }
    };
    let rows = match pairing_mode {
        PairingMode::Cartesian => {
            let mut rows = Vec::with_capacity(x.d_bar.len() * y.d_bar.len());
            for xi in 0..x.d_bar.len() {
                for yj in 0..y.d_bar.len() {
                    rows.push(deltas(xi, yj));
                }
            }
            rows
        }
        PairingMode::Indexed => {
            if x.d_bar.len() != y.d_bar.len() {
                return Err(DeltaError::UnequalIndexed(x.d_bar.len(), y.d_bar.len()));
            }
            (0..x.d_bar.len()).map(|i| deltas(i, i)).collect()
        }
    };
    Ok(DeltaSeries { x_cell: x.cell, y_cell: y.cell, pairing_mode, rows })
}

/// Why a correlation cell carries no r value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MaskReason {
    /// The ground-frequency shift for this feature was not significant.
    GroundNotSignificant,
    /// The delta column is constant.
    ZeroVariance,
}

/// One (feature, comparison) correlation entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CorrelationCell {
    Masked { reason: MaskReason },
    Value { r: f64, p: f64, stars: Stars, n: usize },
}

/// Correlations between dispersion deltas and feature deltas for one
/// comparison, in [`FEATURE_GROUPS`] order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub x_cell: CellId,
    pub y_cell: CellId,
    pub cells: Vec<CorrelationCell>,
}

/// Pearson r between delta-dispersion and each feature's delta, masked by
/// the ground table's significance at .05 for this comparison (the X cell).
pub fn correlation_matrix(
    series: &DeltaSeries,
    ground: &GroundFrequencyTable,
) -> Result<CorrelationMatrix, DeltaError> {
    if series.rows.len() < 3 {
        return Err(DeltaError::SeriesTooSmall(series.rows.len()));
    }
    let shifts = ground
        .comparisons
        .get(&series.x_cell)
        .ok_or(DeltaError::MissingComparison(series.x_cell))?;
    let delta_d: Vec<f64> = series.rows.iter().map(|r| r.delta_d).collect();
    let mut cells = Vec::with_capacity(FEATURE_GROUPS.len());
    for g in 0..FEATURE_GROUPS.len() {
        if !shifts[g].significant() {
            cells.push(CorrelationCell::Masked { reason: MaskReason::GroundNotSignificant });
            continue;
        }
        let delta_f: Vec<f64> = series.rows.iter().map(|r| r.delta_f[g]).collect();
        match stats::pearson(&delta_d, &delta_f) {
            Ok(result) => cells.push(CorrelationCell::Value {
                r: result.r,
                p: result.p,
                stars: Stars::from_p(result.p),
                n: result.n,
            }),
            Err(StatsError::ConstantInput) => {
                cells.push(CorrelationCell::Masked { reason: MaskReason::ZeroVariance });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(CorrelationMatrix { x_cell: series.x_cell, y_cell: series.y_cell, cells })
}
