//! Seed-deterministic UMAP built from first principles.
//!
//! Pipeline: exact Euclidean kNN -> per-point membership calibration (rho =
//! nearest-neighbor distance, sigma solved by bisection so the local weight
//! sum hits log2(n_neighbors)) -> fuzzy union of the directed graphs ->
//! spectral initialization (power iteration on the normalized adjacency,
//! seeded random fallback) -> per-edge stochastic gradient descent with
//! negative sampling.
//!
//! The output is fully determined by (input, target dim, params, seed): the
//! RNG is a counter-based stream seeded once, edge updates run in seeded
//! shuffled order, and no parallelism is used inside one reduction.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ReduceError, ReduceMethod, ReducedSet};
use crate::matrix::{sq_dist, Matrix};

const SIGMA_TOL: f64 = 1e-6;
const SIGMA_MIN: f64 = 1e-12;
const GRAD_CLIP: f64 = 4.0;
const SPECTRAL_TOL: f64 = 1e-10;
const SPECTRAL_MAX_ITER: usize = 10_000;
const INIT_SPAN: f64 = 10.0;

/// Layout hyperparameters. `curve_a` / `curve_b` shape the low-dimensional
/// membership curve `1 / (1 + a * d^(2b))` and are fit from `min_dist`.
#[derive(Debug, Clone, PartialEq)]
pub struct UmapParams {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub learning_rate: f64,
    pub curve_a: f64,
    pub curve_b: f64,
}

impl UmapParams {
    /// Canonical parameters with the membership curve refit for `min_dist`.
    pub fn with_min_dist(min_dist: f64) -> Self {
        let (curve_a, curve_b) = fit_membership_curve(min_dist, 1.0);
        Self {
            n_neighbors: 15,
            min_dist,
            n_epochs: 200,
            negative_sample_rate: 5,
            learning_rate: 1.0,
            curve_a,
            curve_b,
        }
    }

    fn validate(&self, n_rows: usize) -> Result<(), ReduceError> {
        if self.n_neighbors < 2 {
            return Err(ReduceError::InvalidParam("n_neighbors must be at least 2"));
        }
        if n_rows <= self.n_neighbors {
            return Err(ReduceError::TooFewRows { need: self.n_neighbors, got: n_rows });
        }
        if !(self.min_dist > 0.0 && self.min_dist <= 1.0) {
            return Err(ReduceError::InvalidParam("min_dist must lie in (0, 1]"));
        }
        if self.n_epochs == 0 {
            return Err(ReduceError::InvalidParam("n_epochs must be positive"));
        }
        if self.negative_sample_rate == 0 {
            return Err(ReduceError::InvalidParam("negative_sample_rate must be positive"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(ReduceError::InvalidParam("learning_rate must be positive"));
        }
        if !(self.curve_a > 0.0 && self.curve_b > 0.0) {
            return Err(ReduceError::InvalidParam("curve parameters must be positive"));
        }
        Ok(())
    }
}

impl Default for UmapParams {
    fn default() -> Self {
        Self::with_min_dist(0.1)
    }
}

/// Least-squares fit of `1 / (1 + a * x^(2b))` to the target membership
/// curve: 1 below `min_dist`, `exp(-(x - min_dist) / spread)` above it.
/// Levenberg-Marquardt over 300 samples on [0, 3 * spread].
pub fn fit_membership_curve(min_dist: f64, spread: f64) -> (f64, f64) {
    let n = 300;
    let xs: Vec<f64> = (0..n).map(|i| 3.0 * spread * i as f64 / (n - 1) as f64).collect();
    let target: Vec<f64> = xs
        .iter()
        .map(|&x| if x <= min_dist { 1.0 } else { (-(x - min_dist) / spread).exp() })
        .collect();

    let model = |a: f64, b: f64, x: f64| -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            1.0 / (1.0 + a * x.powf(2.0 * b))
        }
    };
    let sse = |a: f64, b: f64| -> f64 {
        xs.iter().zip(&target).map(|(&x, &t)| (model(a, b, x) - t).powi(2)).sum()
    };

    let (mut a, mut b) = (1.0, 1.0);
    let mut lambda = 1e-3;
    let mut err = sse(a, b);
    for _ in 0..200 {
        // Accumulate J^T J and J^T r for the two parameters.
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&x, &t) in xs.iter().zip(&target) {
            if x <= 0.0 {
                continue;
            }
            let u = x.powf(2.0 * b);
            let denom = 1.0 + a * u;
            let f = 1.0 / denom;
            let r = f - t;
            let dfda = -u / (denom * denom);
            let dfdb = -a * u * 2.0 * x.ln() / (denom * denom);
            jaa += dfda * dfda;
            jab += dfda * dfdb;
            jbb += dfdb * dfdb;
            ga += dfda * r;
            gb += dfdb * r;
        }
        let (maa, mbb) = (jaa + lambda * jaa.max(1e-12), jbb + lambda * jbb.max(1e-12));
        let det = maa * mbb - jab * jab;
        if det.abs() < 1e-30 {
            break;
        }
        let da = (-ga * mbb + gb * jab) / det;
        let db = (-gb * maa + ga * jab) / det;
        let (na, nb) = ((a + da).max(1e-8), (b + db).max(1e-8));
        let new_err = sse(na, nb);
        if new_err < err {
            a = na;
            b = nb;
            err = new_err;
            lambda = (lambda / 3.0).max(1e-12);
            if da.abs() < 1e-12 && db.abs() < 1e-12 {
                break;
            }
        } else {
            lambda *= 3.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    (a, b)
}

/// The calibrated fuzzy graph; exposed so tests can check the membership
/// invariants without rerunning the layout.
#[derive(Debug, Clone)]
pub struct UmapGraph {
    pub n_rows: usize,
    /// Per point: the k nearest neighbors as (row, distance), closest first.
    pub neighbors: Vec<Vec<(usize, f64)>>,
    /// Distance to the nearest neighbor.
    pub rho: Vec<f64>,
    /// Calibrated local bandwidth.
    pub sigma: Vec<f64>,
    /// |sum of local weights - log2(k)| after bisection.
    pub calibration_residual: Vec<f64>,
    /// Undirected fuzzy-union edges (i < j, weight in [0, 1]).
    pub edges: Vec<(usize, usize, f64)>,
}

impl UmapGraph {
    pub fn build(m: &Matrix, params: &UmapParams) -> Result<Self, ReduceError> {
        params.validate(m.n_rows())?;
        if !m.is_finite() {
            return Err(ReduceError::NonFiniteInput);
        }
        let n = m.n_rows();
        let k = params.n_neighbors;

        // Exact kNN; ties broken by row index for determinism.
        let mut neighbors: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut dists: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, sq_dist(m.row(i), m.row(j)).sqrt()))
                .collect();
            dists.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite").then(a.0.cmp(&b.0)));
            dists.truncate(k);
            neighbors.push(dists);
        }

        // Per-point calibration.
        let target = (k as f64).log2();
        let mut rho = vec![0.0; n];
        let mut sigma = vec![0.0; n];
        let mut calibration_residual = vec![0.0; n];
        for i in 0..n {
            rho[i] = neighbors[i][0].1;
            let weight_sum = |s: f64| -> f64 {
                neighbors[i].iter().map(|&(_, d)| (-((d - rho[i]).max(0.0)) / s).exp()).sum()
            };
            let mut lo = SIGMA_MIN;
            if weight_sum(lo) >= target {
                // Enough neighbors sit at distance rho already; the infimum
                // bandwidth is as good as it gets (duplicate-heavy data).
                sigma[i] = lo;
                calibration_residual[i] = (weight_sum(lo) - target).abs();
                continue;
            }
            let mut hi = 1.0;
            let mut grow = 0;
            while weight_sum(hi) < target && grow < 100 {
                hi *= 2.0;
                grow += 1;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if weight_sum(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if (hi - lo) / hi < SIGMA_TOL * 1e-3 {
                    break;
                }
            }
            sigma[i] = 0.5 * (lo + hi);
            calibration_residual[i] = (weight_sum(sigma[i]) - target).abs();
        }

        // Directed memberships, then the fuzzy union w1 + w2 - w1*w2.
        let mut union: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
        for i in 0..n {
            for &(j, d) in &neighbors[i] {
                let w = (-((d - rho[i]).max(0.0)) / sigma[i]).exp();
                let key = (i.min(j), i.max(j));
                let entry = union.entry(key).or_insert((0.0, 0.0));
                if i < j {
                    entry.0 = w;
                } else {
                    entry.1 = w;
                }
            }
        }
        let edges: Vec<(usize, usize, f64)> = union
            .into_iter()
            .map(|((i, j), (w1, w2))| (i, j, w1 + w2 - w1 * w2))
            .collect();

        Ok(Self { n_rows: n, neighbors, rho, sigma, calibration_residual, edges })
    }

    /// Membership strength from `i` toward `j` (directed), for tests.
    pub fn directed_weight(&self, i: usize, j: usize) -> Option<f64> {
        self.neighbors[i]
            .iter()
            .find(|&&(nbr, _)| nbr == j)
            .map(|&(_, d)| (-((d - self.rho[i]).max(0.0)) / self.sigma[i]).exp())
    }
}

/// Spectral initialization: the smallest nontrivial eigenvectors of the
/// symmetric normalized graph Laplacian, obtained as the dominant
/// eigenvectors of I + D^(-1/2) W D^(-1/2) by seeded power iteration with
/// deflation. Returns None if any vector fails to converge in the budget.
fn spectral_init(graph: &UmapGraph, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<f64>>> {
    let n = graph.n_rows;
    let mut degree = vec![0.0; n];
    for &(i, j, w) in &graph.edges {
        degree[i] += w;
        degree[j] += w;
    }
    if degree.iter().any(|&d| d <= 0.0) {
        return None;
    }
    let inv_sqrt: Vec<f64> = degree.iter().map(|&d| 1.0 / d.sqrt()).collect();
    // m_ij of the normalized adjacency; matvec of A = I + M.
    let matvec = |v: &[f64], out: &mut [f64]| {
        out.copy_from_slice(v);
        for &(i, j, w) in &graph.edges {
            let m = w * inv_sqrt[i] * inv_sqrt[j];
            out[i] += m * v[j];
            out[j] += m * v[i];
        }
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut work = vec![0.0; n];
    for _ in 0..=d {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthonormalize(&mut v, &basis)?;
        let mut converged = false;
        for _ in 0..SPECTRAL_MAX_ITER {
            matvec(&v, &mut work);
            orthonormalize(&mut work, &basis)?;
            let drift: f64 =
                v.iter().zip(&work).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            std::mem::swap(&mut v, &mut work);
            if drift < SPECTRAL_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return None;
        }
        // Deterministic sign: largest-magnitude component positive.
        let lead = v
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).expect("finite"))
            .map(|(i, _)| i)
            .expect("nonempty");
        if v[lead] < 0.0 {
            for x in &mut v {
                *x = -*x;
            }
        }
        basis.push(v);
    }
    // Drop the trivial top eigenvector; scale the rest into [-span, span].
    let cols = &basis[1..=d];
    let max_abs = cols
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0_f64, |m, &v| m.max(v.abs()))
        .max(1e-12);
    let scale = INIT_SPAN / max_abs;
    Some(cols.iter().map(|c| c.iter().map(|&v| v * scale).collect()).collect())
}

/// Normalizes `v` after removing its projection onto `basis`. Returns None
/// when the remainder is numerically zero.
fn orthonormalize(v: &mut [f64], basis: &[Vec<f64>]) -> Option<()> {
    for b in basis {
        let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
        for (x, c) in v.iter_mut().zip(b) {
            *x -= dot * c;
        }
    }
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-30 {
        return None;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    Some(())
}

/// Reduces `m` to `d` dimensions. Same (input, dim, params, seed) gives
/// bit-identical output.
pub fn umap_reduce(
    m: &Matrix,
    d: usize,
    params: &UmapParams,
    seed: u64,
) -> Result<ReducedSet, ReduceError> {
    if d == 0 {
        return Err(ReduceError::DimOutOfRange { d, max: m.n_cols() });
    }
    let graph = UmapGraph::build(m, params)?;
    let n = graph.n_rows;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut embedding: Vec<Vec<f64>> = match spectral_init(&graph, d, &mut rng) {
        Some(cols) => (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect(),
        None => (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-INIT_SPAN..INIT_SPAN)).collect())
            .collect(),
    };

    // Directed edge list, both orientations, as in the fuzzy union graph.
    let mut head: Vec<usize> = Vec::with_capacity(graph.edges.len() * 2);
    let mut tail: Vec<usize> = Vec::with_capacity(graph.edges.len() * 2);
    let mut weight: Vec<f64> = Vec::with_capacity(graph.edges.len() * 2);
    for &(i, j, w) in &graph.edges {
        head.push(i);
        tail.push(j);
        weight.push(w);
        head.push(j);
        tail.push(i);
        weight.push(w);
    }
    let w_max = weight.iter().cloned().fold(f64::MIN, f64::max);
    let n_edges = head.len();
    let epochs_per_sample: Vec<f64> = weight.iter().map(|&w| w_max / w).collect();
    let epochs_per_negative: Vec<f64> = epochs_per_sample
        .iter()
        .map(|&e| e / params.negative_sample_rate as f64)
        .collect();
    let mut next_sample = epochs_per_sample.clone();
    let mut next_negative = epochs_per_negative.clone();

    let a = params.curve_a;
    let b = params.curve_b;
    let mut order: Vec<usize> = (0..n_edges).collect();

    for epoch in 0..params.n_epochs {
        let alpha = params.learning_rate * (1.0 - epoch as f64 / params.n_epochs as f64);
        let epoch_f = epoch as f64;
        order.shuffle(&mut rng);
        for &e in &order {
            if next_sample[e] > epoch_f {
                continue;
            }
            let (i, j) = (head[e], tail[e]);
            // Attraction along the edge; both endpoints move.
            let dist_sq = sq_dist(&embedding[i], &embedding[j]);
            if dist_sq > 0.0 {
                let coeff = (-2.0 * a * b * dist_sq.powf(b - 1.0)) / (a * dist_sq.powf(b) + 1.0);
                for dim in 0..d {
                    let g = (coeff * (embedding[i][dim] - embedding[j][dim]))
                        .clamp(-GRAD_CLIP, GRAD_CLIP);
                    embedding[i][dim] += alpha * g;
                    embedding[j][dim] -= alpha * g;
                }
            }
            next_sample[e] += epochs_per_sample[e];

            // Repulsion from uniformly sampled non-neighbors; head moves.
            let n_neg = ((epoch_f - next_negative[e]) / epochs_per_negative[e]).max(0.0) as usize;
            for _ in 0..n_neg {
                let t = rng.gen_range(0..n);
                if t == i || t == j {
                    continue;
                }
                let dist_sq = sq_dist(&embedding[i], &embedding[t]);
                for dim in 0..d {
                    let g = if dist_sq > 0.0 {
                        let coeff =
                            (2.0 * b) / ((0.001 + dist_sq) * (a * dist_sq.powf(b) + 1.0));
                        (coeff * (embedding[i][dim] - embedding[t][dim]))
                            .clamp(-GRAD_CLIP, GRAD_CLIP)
                    } else {
                        GRAD_CLIP
                    };
                    embedding[i][dim] += alpha * g;
                }
            }
            next_negative[e] += n_neg as f64 * epochs_per_negative[e];
        }
    }

    let coords = Matrix::from_rows(&embedding).map_err(|_| ReduceError::NonFiniteInput)?;
    Ok(ReducedSet {
        method: ReduceMethod::Umap,
        target_dim: d,
        seed: Some(seed),
        coords,
        explained_variance: None,
    })
}
