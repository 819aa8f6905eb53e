//! Independent oracles for the acceptance suite. Everything here is
//! deliberately written along different routes than the library: dense
//! nested-loop contingency counting, cyclic Jacobi eigendecomposition, and
//! Simpson integration of the Student-t density.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra

use rand::rngs::StdRng;
use rand::Rng;

/// Standard normal via Box-Muller; the library never uses this path.
pub fn gaussian(rng: &mut StdRng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Brute-force purity: dense contingency table, then sum of per-cluster
/// maxima over the total count.
pub fn purity_oracle(labels: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(labels.len(), truth.len());
    let k = labels.iter().copied().max().unwrap_or(0) + 1;
    let c = truth.iter().copied().max().unwrap_or(0) + 1;
    let mut table = vec![vec![0usize; c]; k];
    for i in 0..labels.len() {
        table[labels[i]][truth[i]] += 1;
    }
    let mut hits = 0usize;
    for row in &table {
        let mut best = 0usize;
        for &v in row {
            if v > best {
                best = v;
            }
        }
        hits += best;
    }
    hits as f64 / labels.len() as f64
}

/// Brute-force NMI with arithmetic-mean normalization and natural logs.
pub fn nmi_oracle(labels: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(labels.len(), truth.len());
    let n = labels.len() as f64;
    let k = labels.iter().copied().max().unwrap_or(0) + 1;
    let c = truth.iter().copied().max().unwrap_or(0) + 1;
    let mut table = vec![vec![0usize; c]; k];
    for i in 0..labels.len() {
        table[labels[i]][truth[i]] += 1;
    }
    let row_sum: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sum: Vec<usize> = (0..c).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut h_rows = 0.0;
    for &s in &row_sum {
        if s > 0 {
            let p = s as f64 / n;
            h_rows -= p * p.ln();
        }
    }
    let mut h_cols = 0.0;
    for &s in &col_sum {
        if s > 0 {
            let p = s as f64 / n;
            h_cols -= p * p.ln();
        }
    }
    if h_rows == 0.0 && h_cols == 0.0 {
        return 1.0;
    }
    let mut mutual = 0.0;
    for i in 0..k {
        for j in 0..c {
            if table[i][j] == 0 {
                continue;
            }
            let pij = table[i][j] as f64 / n;
            mutual += pij * (pij * n * n / (row_sum[i] as f64 * col_sum[j] as f64)).ln();
        }
    }
    (2.0 * mutual / (h_rows + h_cols)).clamp(0.0, 1.0)
}

/// All set partitions of n elements as restricted growth strings (canonical
/// label vectors).
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    fn recurse(current: &mut Vec<usize>, idx: usize, max_used: usize, out: &mut Vec<Vec<usize>>) {
        if idx == current.len() {
            out.push(current.clone());
            return;
        }
        for label in 0..=max_used + 1 {
            current[idx] = label;
            recurse(current, idx + 1, max_used.max(label), out);
        }
    }
    if n == 0 {
        return out;
    }
    current[0] = 0;
    recurse(&mut current, 1, 0, &mut out);
    out
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues in descending order with matching eigenvector columns
/// (`vectors[j]` is the j-th eigenvector).
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].partial_cmp(&a[x][x]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> =
        order.iter().map(|&j| (0..n).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

/// Gram-Schmidt orthonormalization of columns (each column a Vec).
fn orthonormalize(columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for col in columns {
        let mut w = col.clone();
        for prev in &q {
            let dot: f64 = w.iter().zip(prev).map(|(a, b)| a * b).sum();
            for (x, p) in w.iter_mut().zip(prev) {
                *x -= dot * p;
            }
        }
        let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm > 1e-12, "degenerate column in subspace comparison");
        for x in &mut w {
            *x /= norm;
        }
        q.push(w);
    }
    q
}

/// Principal angles (radians, ascending) between the column spaces of two
/// equal-shape column sets.
pub fn principal_angles(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    assert_eq!(a.len(), b.len());
    let qa = orthonormalize(a);
    let qb = orthonormalize(b);
    let d = qa.len();
    // m = Qa^T Qb, then eigenvalues of m^T m are cos^2(theta).
    let mut m = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            m[i][j] = qa[i].iter().zip(&qb[j]).map(|(x, y)| x * y).sum();
        }
    }
    let mut mtm = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            mtm[i][j] = (0..d).map(|k| m[k][i] * m[k][j]).sum();
        }
    }
    let (values, _) = jacobi_eigen(&mtm);
    let mut angles: Vec<f64> =
        values.iter().map(|&l| l.clamp(0.0, 1.0).sqrt().clamp(0.0, 1.0).acos()).collect();
    angles.sort_by(|x, y| x.partial_cmp(y).expect("finite angles"));
    angles
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = if intervals.is_multiple_of(2) { intervals } else { intervals + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Two-sided Student-t tail probability by numerical integration of the
/// density, via the substitution x = sqrt(df) * tan(u) which maps the whole
/// line onto (-pi/2, pi/2) and the density onto cos(u)^(df-1). No gamma
/// function anywhere.
pub fn t_two_sided_p_by_integration(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let half = std::f64::consts::FRAC_PI_2;
    let a = (t.abs() / df.sqrt()).atan();
    let density = |u: f64| u.cos().powf(df - 1.0);
    let full = simpson(density, 0.0, half, 120_000);
    let central = simpson(density, 0.0, a, 120_000);
    (1.0 - central / full).max(0.0)
}
