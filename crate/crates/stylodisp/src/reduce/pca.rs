//! Principal component analysis via singular value decomposition of the
//! mean-centered data matrix.

use nalgebra::DMatrix;

use super::{ReduceError, ReduceMethod, ReducedSet};
use crate::matrix::Matrix;

/// Projects rows onto the top-d right singular vectors of the mean-centered
/// matrix. Deterministic across runs and platforms: each component's
/// largest-magnitude loading is flipped positive.
///
/// Degenerate input (all rows identical) yields all-zero coordinates with
/// zero explained variance rather than an error.
pub fn pca_reduce(m: &Matrix, d: usize) -> Result<ReducedSet, ReduceError> {
    let n = m.n_rows();
    let p = m.n_cols();
    let max_d = std::cmp::min(n.saturating_sub(1), p);
    if d == 0 || d > max_d {
        return Err(ReduceError::DimOutOfRange { d, max: max_d });
    }

    let means = m.column_means();
    let mut centered = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        let row = m.row(i);
        for j in 0..p {
            centered[(i, j)] = row[j] - means[j];
        }
    }

    // nalgebra sorts singular values in descending order.
    let svd = centered.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let singular = &svd.singular_values;

    // Principal directions, sign-fixed so the largest |loading| is positive.
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(d);
    for c in 0..d {
        let mut comp: Vec<f64> = (0..p).map(|j| v_t[(c, j)]).collect();
        let lead = comp
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).expect("finite loadings"))
            .map(|(idx, _)| idx)
            .expect("nonzero dimension");
        if comp[lead] < 0.0 {
            for v in &mut comp {
                *v = -*v;
            }
        }
        components.push(comp);
    }

    let mut coords = Matrix::zeros(n, d);
    for i in 0..n {
        for (c, comp) in components.iter().enumerate() {
            let score: f64 = (0..p).map(|j| centered[(i, j)] * comp[j]).sum();
            coords.set(i, c, score);
        }
    }
    if !coords.is_finite() {
        return Err(ReduceError::NonFiniteInput);
    }

    let denom = (n as f64 - 1.0).max(1.0);
    let explained: Vec<f64> = (0..d).map(|c| singular[c] * singular[c] / denom).collect();

    Ok(ReducedSet {
        method: ReduceMethod::Pca,
        target_dim: d,
        seed: None,
        coords,
        explained_variance: Some(explained),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::euclidean;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn total_variance(m: &Matrix) -> f64 {
        let means = m.column_means();
        let n = m.n_rows() as f64;
        (0..m.n_cols())
            .map(|j| {
                m.rows().map(|r| (r[j] - means[j]) * (r[j] - means[j])).sum::<f64>() / (n - 1.0)
            })
            .sum()
    }

    #[test]
    fn collinear_points_explained_by_one_component() {
        // Points on a line through 3-D space.
        let rows: Vec<Vec<f64>> =
            (0..10).map(|i| vec![i as f64, 2.0 * i as f64, -0.5 * i as f64]).collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let r = pca_reduce(&m, 1).unwrap();
        let ev = r.explained_variance.unwrap();
        let total = total_variance(&m);
        assert!(ev[0] / total > 0.9999, "rank-1 data must be captured by 1 component");
    }

    #[test]
    fn identical_rows_give_zero_coordinates() {
        let m = Matrix::from_rows(&vec![vec![3.0, -1.0, 2.0]; 5]).unwrap();
        let r = pca_reduce(&m, 2).unwrap();
        assert!(r.coords.as_slice().iter().all(|&v| v.abs() < 1e-12));
        assert!(r.explained_variance.unwrap().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn dim_out_of_range_rejected() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(pca_reduce(&m, 0), Err(ReduceError::DimOutOfRange { .. })));
        assert!(matches!(pca_reduce(&m, 3), Err(ReduceError::DimOutOfRange { .. })));
    }

    #[test]
    fn explained_variance_non_increasing_and_bounded() {
        let mut rng = StdRng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> =
            (0..40).map(|_| (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let r = pca_reduce(&m, 5).unwrap();
        let ev = r.explained_variance.unwrap();
        for w in ev.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        assert!(ev.iter().sum::<f64>() <= total_variance(&m) + 1e-9);
    }

    #[test]
    fn translation_invariant_and_rotation_preserves_distances() {
        let mut rng = StdRng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> =
            (0..30).map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let base = pca_reduce(&m, 2).unwrap();

        // Translation: identical output.
        let shifted: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r[0] + 10.0, r[1] - 4.0, r[2] + 0.5])
            .collect();
        let t = pca_reduce(&Matrix::from_rows(&shifted).unwrap(), 2).unwrap();
        for (a, b) in base.coords.as_slice().iter().zip(t.coords.as_slice()) {
            assert!((a - b).abs() < 1e-8);
        }

        // Rotation about the z-axis: pairwise projected distances preserved.
        let theta: f64 = 0.61;
        let rotated: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                vec![
                    r[0] * theta.cos() - r[1] * theta.sin(),
                    r[0] * theta.sin() + r[1] * theta.cos(),
                    r[2],
                ]
            })
            .collect();
        let rot = pca_reduce(&Matrix::from_rows(&rotated).unwrap(), 2).unwrap();
        for i in 0..rows.len() {
            for j in (i + 1)..rows.len() {
                let d0 = euclidean(base.coords.row(i), base.coords.row(j));
                let d1 = euclidean(rot.coords.row(i), rot.coords.row(j));
                assert!((d0 - d1).abs() < 1e-8, "distance changed under rotation");
            }
        }
    }

    #[test]
    fn deterministic_across_calls() {
        let mut rng = StdRng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> =
            (0..25).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let m = Matrix::from_rows(&rows).unwrap();
        assert_eq!(pca_reduce(&m, 3).unwrap(), pca_reduce(&m, 3).unwrap());
    }
}
