//! Slow, obviously-correct reference implementations.
//!
//! Everything here materializes dense matrices or scans dense grids. The
//! fast matrix-free paths in [`crate::conv`], [`crate::lipschitz`] and
//! [`crate::prox`] are tested against these routines; nothing in this
//! module is meant for production-size inputs.

/// Single-channel correlation-style convolution, written as the literal
/// double sum: `out[j] = Σ_d c[j+d] · p[2q-d]` for `j = 0..m`.
pub fn conv_channel_naive(c: &[f64], p: &[f64], m: usize) -> Vec<f64> {
    let width = p.len();
    assert_eq!(c.len(), m + width - 1, "coefficient length must be m + 2q");
    let mut out = vec![0.0; m];
    for j in 0..m {
        let mut acc = 0.0;
        for d in 0..width {
            acc += c[j + d] * p[width - 1 - d];
        }
        out[j] = acc;
    }
    out
}

/// Dense `m × (m+2q)` matrix of the map `c ↦ c * p` for a fixed kernel.
pub fn p_matrix(p: &[f64], m: usize) -> Vec<Vec<f64>> {
    let width = p.len();
    let cols = m + width - 1;
    let mut mat = vec![vec![0.0; cols]; m];
    for (j, row) in mat.iter_mut().enumerate() {
        for d in 0..width {
            row[j + d] = p[width - 1 - d];
        }
    }
    mat
}

/// Dense `m × (2q+1)` matrix of the map `p ↦ c * p` for fixed coefficients.
pub fn c_matrix(c: &[f64], m: usize, half_width: usize) -> Vec<Vec<f64>> {
    let width = 2 * half_width + 1;
    assert_eq!(c.len(), m + 2 * half_width, "coefficient length must be m + 2q");
    let mut mat = vec![vec![0.0; width]; m];
    for (j, row) in mat.iter_mut().enumerate() {
        for (l, cell) in row.iter_mut().enumerate() {
            *cell = c[j + width - 1 - l];
        }
    }
    mat
}

pub fn matvec(mat: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    mat.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn matvec_transpose(mat: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let cols = mat.first().map_or(0, Vec::len);
    let mut out = vec![0.0; cols];
    for (row, &yi) in mat.iter().zip(y) {
        for (o, &a) in out.iter_mut().zip(row) {
            *o += yi * a;
        }
    }
    out
}

/// Minimizes `f` over a dense grid around `center`, refining `levels` times.
///
/// Each level lays `points` samples per dimension across
/// `[center - half_range, center + half_range]`, then recenters on the best
/// sample with the range shrunk to twice the previous grid step. Cost is
/// `points^dim` per level, so this is only usable for very small `dim`.
/// `f` may return `f64::INFINITY` to mark infeasible points.
pub fn grid_min<F>(f: F, center: &[f64], half_range: f64, levels: usize, points: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    assert!(points >= 2, "need at least two grid points per dimension");
    let dim = center.len();
    let mut best = center.to_vec();
    let mut best_val = f(&best);
    let mut range = half_range;
    for _ in 0..levels {
        let step = 2.0 * range / (points - 1) as f64;
        let origin: Vec<f64> = best.iter().map(|&c| c - range).collect();
        let mut idx = vec![0usize; dim];
        let mut point = vec![0.0; dim];
        loop {
            for k in 0..dim {
                point[k] = origin[k] + idx[k] as f64 * step;
            }
            let val = f(&point);
            if val < best_val {
                best_val = val;
                best.copy_from_slice(&point);
            }
            // Odometer increment over the dim-dimensional index.
            let mut k = 0;
            loop {
                if k == dim {
                    break;
                }
                idx[k] += 1;
                if idx[k] < points {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == dim {
                break;
            }
        }
        range = 2.0 * step;
    }
    (best, best_val)
}

/// Coordinate-wise variant of [`grid_min`] for objectives that decompose as
/// a sum of one-dimensional terms: each coordinate is refined independently
/// against `f_coord(k, x_k)`. Invalid for coupled objectives.
pub fn grid_min_separable<F>(
    f_coord: F,
    center: &[f64],
    half_range: f64,
    levels: usize,
    points: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(usize, f64) -> f64,
{
    let mut best = Vec::with_capacity(center.len());
    let mut total = 0.0;
    for (k, &c) in center.iter().enumerate() {
        let (point, val) = grid_min(|x| f_coord(k, x[0]), &[c], half_range, levels, points);
        best.push(point[0]);
        total += val;
    }
    (best, total)
}
