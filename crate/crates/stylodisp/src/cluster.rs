//! k-means clustering with external validation: Purity, normalized mutual
//! information, their average, the per-dimensionality sweep table, and the
//! per-cluster majority-class map.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::embedding::EmbeddingSet;
use crate::matrix::{sq_dist, Matrix};
use crate::reduce::pca_reduce;

const MAX_LLOYD_ITERS: usize = 300;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("k = {k} exceeds the number of rows {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be positive")]
    KZero,
    #[error("restarts must be positive")]
    NoRestarts,
    #[error("label lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("document sets differ between models: {0:?} vs {1:?}")]
    InconsistentDocuments(String, String),
    #[error("reduction failed: {0}")]
    Reduce(#[from] crate::reduce::ReduceError),
}

/// A clustering of n rows into k groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Cluster index per row, each in [0, k).
    pub labels: Vec<usize>,
    pub k: usize,
    /// Sum of squared distances to the owning centroid.
    pub inertia: f64,
}

impl Assignment {
    /// Wraps externally produced labels (for scoring); inertia is unknown
    /// and reported as zero.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        Self { labels, k, inertia: 0.0 }
    }
}

/// Purity, NMI and their arithmetic mean for one clustering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationScores {
    pub purity: f64,
    pub nmi: f64,
    pub s_bar: f64,
}

impl ValidationScores {
    pub fn new(purity: f64, nmi: f64) -> Self {
        Self { purity, nmi, s_bar: sbar(purity, nmi) }
    }
}

/// Arithmetic mean of purity and NMI.
pub fn sbar(purity: f64, nmi: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&purity) && (0.0..=1.0).contains(&nmi));
    (purity + nmi) / 2.0
}

/// Seeded k-means: k-means++ initialization, Lloyd iterations to an
/// assignment fixpoint (or 300 iterations), best of `restarts` runs by
/// inertia. Bit-deterministic for fixed (seed, restarts).
pub fn kmeans(
    coords: &Matrix,
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<Assignment, ClusterError> {
    let n = coords.n_rows();
    if k == 0 {
        return Err(ClusterError::KZero);
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, n });
    }
    if restarts == 0 {
        return Err(ClusterError::NoRestarts);
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Assignment> = None;
    for _ in 0..restarts {
        let run_seed: u64 = master.gen();
        let candidate = lloyd_once(coords, k, run_seed);
        let better = match &best {
            None => true,
            Some(b) => candidate.inertia < b.inertia,
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn lloyd_once(coords: &Matrix, k: usize, seed: u64) -> Assignment {
    let n = coords.n_rows();
    let d = coords.n_cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding.
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.gen_range(0..n);
    centroids.push(coords.row(first).to_vec());
    let mut dist_sq: Vec<f64> = (0..n).map(|i| sq_dist(coords.row(i), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dist_sq.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen_range(0.0..total);
            let mut chosen = n - 1;
            for (i, &w) in dist_sq.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            // All remaining mass is zero (duplicate points); pick uniformly.
            rng.gen_range(0..n)
        };
        centroids.push(coords.row(next).to_vec());
        for i in 0..n {
            dist_sq[i] = dist_sq[i].min(sq_dist(coords.row(i), centroids.last().unwrap()));
        }
    }

    let mut labels = vec![0usize; n];
    let mut prev_inertia = f64::INFINITY;
    for _ in 0..MAX_LLOYD_ITERS {
        // Assignment step; ties go to the lowest cluster index.
        let mut changed = false;
        let mut inertia = 0.0;
        for i in 0..n {
            let mut best_c = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let dsq = sq_dist(coords.row(i), centroid);
                if dsq < best_d {
                    best_d = dsq;
                    best_c = c;
                }
            }
            if labels[i] != best_c {
                labels[i] = best_c;
                changed = true;
            }
            inertia += best_d;
        }
        debug_assert!(
            inertia <= prev_inertia * (1.0 + 1e-12) + 1e-12,
            "Lloyd iteration increased inertia: {prev_inertia} -> {inertia}"
        );
        prev_inertia = inertia;
        if !changed {
            break;
        }

        // Update step.
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, v) in sums[labels[i]].iter_mut().zip(coords.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in &mut sums[c] {
                    *s /= counts[c] as f64;
                }
                centroids[c] = sums[c].clone();
            } else {
                // Empty cluster: claim the point farthest from its centroid.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(coords.row(a), &centroids[labels[a]])
                            .partial_cmp(&sq_dist(coords.row(b), &centroids[labels[b]]))
                            .expect("finite distances")
                    })
                    .expect("nonempty matrix");
                centroids[c] = coords.row(far).to_vec();
            }
        }
    }

    let inertia = (0..n).map(|i| sq_dist(coords.row(i), &centroids[labels[i]])).sum();
    Assignment { labels, k, inertia }
}

fn contingency<L: Eq + Hash + Clone>(
    assignment: &Assignment,
    truth: &[L],
) -> Result<Vec<Vec<usize>>, ClusterError> {
    if assignment.labels.len() != truth.len() {
        return Err(ClusterError::LengthMismatch(assignment.labels.len(), truth.len()));
    }
    let mut class_index: std::collections::HashMap<&L, usize> = std::collections::HashMap::new();
    for t in truth {
        let next = class_index.len();
        class_index.entry(t).or_insert(next);
    }
    let mut table = vec![vec![0usize; class_index.len()]; assignment.k.max(1)];
    for (label, t) in assignment.labels.iter().zip(truth) {
        table[*label][class_index[t]] += 1;
    }
    Ok(table)
}

/// Fraction of rows that belong to their cluster's majority class.
pub fn purity<L: Eq + Hash + Clone>(
    assignment: &Assignment,
    truth: &[L],
) -> Result<f64, ClusterError> {
    let table = contingency(assignment, truth)?;
    let n: usize = truth.len();
    let hits: usize = table.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum();
    Ok(hits as f64 / n as f64)
}

/// Normalized mutual information with arithmetic-mean normalization:
/// 2 I(clusters; classes) / (H(clusters) + H(classes)). Defined as 1 when
/// both partitions are single groups (both entropies zero).
pub fn nmi<L: Eq + Hash + Clone>(
    assignment: &Assignment,
    truth: &[L],
) -> Result<f64, ClusterError> {
    let table = contingency(assignment, truth)?;
    let n = truth.len() as f64;
    let cluster_sizes: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let n_classes = table.first().map_or(0, |r| r.len());
    let class_sizes: Vec<usize> =
        (0..n_classes).map(|j| table.iter().map(|r| r[j]).sum()).collect();

    let entropy = |sizes: &[usize]| -> f64 {
        sizes
            .iter()
            .filter(|&&s| s > 0)
            .map(|&s| {
                let p = s as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let h_clusters = entropy(&cluster_sizes);
    let h_classes = entropy(&class_sizes);
    if h_clusters == 0.0 && h_classes == 0.0 {
        return Ok(1.0);
    }

    let mut mutual = 0.0;
    for (c, row) in table.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let pij = count as f64 / n;
            let pi = cluster_sizes[c] as f64 / n;
            let pj = class_sizes[j] as f64 / n;
            mutual += pij * (pij / (pi * pj)).ln();
        }
    }
    Ok((2.0 * mutual / (h_clusters + h_classes)).clamp(0.0, 1.0))
}

/// Per-cluster majority class with its fraction; ties resolve to the
/// smallest class (by `Ord`) and are flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorityEntry<L> {
    pub class: L,
    pub fraction: f64,
    pub tie: bool,
}

pub fn majority_map<L: Eq + Hash + Clone + Ord>(
    assignment: &Assignment,
    truth: &[L],
) -> Result<BTreeMap<usize, MajorityEntry<L>>, ClusterError> {
    if assignment.labels.len() != truth.len() {
        return Err(ClusterError::LengthMismatch(assignment.labels.len(), truth.len()));
    }
    let mut per_cluster: BTreeMap<usize, BTreeMap<L, usize>> = BTreeMap::new();
    for (label, t) in assignment.labels.iter().zip(truth) {
        *per_cluster.entry(*label).or_default().entry(t.clone()).or_insert(0) += 1;
    }
    let mut out = BTreeMap::new();
    for (cluster, counts) in per_cluster {
        let size: usize = counts.values().sum();
        let max = *counts.values().max().expect("cluster has members");
        // BTreeMap iterates classes in ascending order, so the first class
        // hitting the maximum is the smallest one.
        let class =
            counts.iter().find(|(_, &c)| c == max).map(|(l, _)| l.clone()).expect("max exists");
        let tie = counts.values().filter(|&&c| c == max).count() > 1;
        out.insert(cluster, MajorityEntry { class, fraction: max as f64 / size as f64, tie });
    }
    Ok(out)
}

/// One dimensionality setting of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDim {
    Pca(usize),
    FullD,
}

impl fmt::Display for SweepDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepDim::Pca(d) => write!(f, "{d}D"),
            SweepDim::FullD => write!(f, "FullD"),
        }
    }
}

/// Canonical sweep: 2D, 3D, 5D, 10D PCA plus full dimensionality.
pub fn default_sweep_dims() -> Vec<SweepDim> {
    vec![SweepDim::Pca(2), SweepDim::Pca(3), SweepDim::Pca(5), SweepDim::Pca(10), SweepDim::FullD]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub model_id: String,
    /// Aligned to the table's dims.
    pub scores: Vec<ValidationScores>,
}

/// Scores per (model, dimensionality) with per-dimension aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub dims: Vec<SweepDim>,
    /// Rows ordered by descending 2D-PCA s_bar (model id breaks ties).
    pub rows: Vec<SweepRow>,
    /// Mean s_bar across models, aligned to dims.
    pub mean_sbar: Vec<f64>,
    /// Median s_bar across models, aligned to dims.
    pub median_sbar: Vec<f64>,
    /// Indices into `dims`, best mean s_bar first.
    pub dim_ranking: Vec<usize>,
}

/// Runs the dimensionality sweep over every model: PCA per dim (FullD is a
/// passthrough), k-means, then Purity/NMI/s_bar against the ground truth.
pub fn sweep<L: Eq + Hash + Clone + Sync>(
    sets: &BTreeMap<String, EmbeddingSet>,
    truth: &[L],
    dims: &[SweepDim],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<SweepTable, ClusterError> {
    let mut iter = sets.iter();
    if let Some((first_id, first)) = iter.next() {
        for (id, set) in iter {
            if set.doc_ids() != first.doc_ids() {
                return Err(ClusterError::InconsistentDocuments(first_id.clone(), id.clone()));
            }
        }
    }

    let mut rows: Vec<SweepRow> = sets
        .par_iter()
        .map(|(model_id, set)| -> Result<SweepRow, ClusterError> {
            let matrix = set.to_matrix();
            let mut scores = Vec::with_capacity(dims.len());
            for &dim in dims {
                let coords = match dim {
                    SweepDim::Pca(d) => pca_reduce(&matrix, d)?.coords,
                    SweepDim::FullD => matrix.clone(),
                };
                let assignment = kmeans(&coords, k, seed, restarts)?;
                let p = purity(&assignment, truth)?;
                let m = nmi(&assignment, truth)?;
                scores.push(ValidationScores::new(p, m));
            }
            Ok(SweepRow { model_id: model_id.clone(), scores })
        })
        .collect::<Result<_, _>>()?;

    // Order models by their 2D score, falling back to the first dim.
    let order_dim = dims
        .iter()
        .position(|d| matches!(d, SweepDim::Pca(2)))
        .unwrap_or(0);
    rows.sort_by(|a, b| {
        b.scores[order_dim]
            .s_bar
            .partial_cmp(&a.scores[order_dim].s_bar)
            .expect("finite scores")
            .then_with(|| a.model_id.cmp(&b.model_id))
    });

    let mut mean_sbar = Vec::with_capacity(dims.len());
    let mut median_sbar = Vec::with_capacity(dims.len());
    for di in 0..dims.len() {
        let mut vals: Vec<f64> = rows.iter().map(|r| r.scores[di].s_bar).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let median = if vals.len() % 2 == 1 {
            vals[vals.len() / 2]
        } else {
            0.5 * (vals[vals.len() / 2 - 1] + vals[vals.len() / 2])
        };
        mean_sbar.push(mean);
        median_sbar.push(median);
    }
    let mut dim_ranking: Vec<usize> = (0..dims.len()).collect();
    dim_ranking.sort_by(|&a, &b| {
        mean_sbar[b].partial_cmp(&mean_sbar[a]).expect("finite means").then(a.cmp(&b))
    });

    Ok(SweepTable { dims: dims.to_vec(), rows, mean_sbar, median_sbar, dim_ranking })
}
