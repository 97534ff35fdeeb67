//! Closed-form upper bounds on the block Lipschitz constants that drive
//! the solver's step sizes.
//!
//! The gradient of the data term in the coefficient block is Lipschitz
//! with constant `L₁(p) = 2·Σᵢ ‖Pⁱ‖²`, and in the kernel block with
//! `L₂(c) = 2·Σᵢ ‖Cⁱ‖²`, where `Pⁱ`, `Cⁱ` are the per-channel convolution
//! operators. Exact spectral norms are too expensive to recompute every
//! iteration, so each `‖Pⁱ‖` is replaced by `‖pⁱ‖₁` and each `‖Cⁱ‖` by a
//! four-way minimum of cheap norm estimates, all evaluable in
//! `O(N·(m+q))` per iteration. A dense power-iteration oracle is provided
//! for tests only.

use crate::error::{Error, Result};
use crate::signal::{check_dims, Atoms, Coefficients};

/// Per-channel operator-norm bounds and the resulting block constants.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEstimate {
    /// Bound on the coefficient-block constant: `2·Σᵢ p_bound_i²`.
    pub l1: f64,
    /// Bound on the kernel-block constant: `2·Σᵢ c_bound_i²`.
    pub l2: f64,
    pub per_channel_p_bounds: Vec<f64>,
    pub per_channel_c_bounds: Vec<f64>,
}

/// Bound on the spectral norm of the kernel-application operator for one
/// channel: `‖Pⁱ‖ ≤ ‖pⁱ‖₁`. Tight for impulse kernels.
pub fn p_block_bound(p: &[f64]) -> f64 {
    p.iter().map(|v| v.abs()).sum()
}

/// Bound on the spectral norm of the coefficient-application operator for
/// one channel: the minimum of four estimates of `‖Cⁱ‖`.
///
/// The two window-sum estimates take the coefficient entries as they are,
/// without absolute values; they are valid bounds on the nonnegative
/// orthant, which is where every solver iterate lives.
pub fn c_block_bound(c: &[f64], m: usize, half_width: usize) -> f64 {
    let width = 2 * half_width + 1;
    debug_assert_eq!(c.len(), m + 2 * half_width);

    let l1: f64 = c.iter().map(|v| v.abs()).sum();

    let mut prefix = vec![0.0; c.len() + 1];
    for (k, &v) in c.iter().enumerate() {
        prefix[k + 1] = prefix[k] + v;
    }
    // Window sums of length m, one per kernel offset.
    let col_max = (0..width)
        .map(|dj| prefix[dj + m] - prefix[dj])
        .fold(f64::NEG_INFINITY, f64::max);
    let col_est = (width as f64).sqrt() * col_max;
    // Window sums of length 2q+1, one per output row.
    let row_max = (0..m)
        .map(|dj| prefix[dj + width] - prefix[dj])
        .fold(f64::NEG_INFINITY, f64::max);
    let row_est = (m as f64).sqrt() * row_max;

    // Frobenius norm of the banded matrix: entry k of c appears once per
    // (row, offset) pair that reads it.
    let mut frob_sq = 0.0;
    for (k, &v) in c.iter().enumerate() {
        let hi = (k + 1).min(m);
        let lo = (k + 1).saturating_sub(2 * half_width).max(1);
        frob_sq += (hi - lo + 1) as f64 * v * v;
    }
    let frob = frob_sq.sqrt();

    l1.min(col_est).min(row_est).min(frob)
}

/// Aggregates per-channel bounds into the two block constants.
pub fn estimate(c: &Coefficients, p: &Atoms) -> Result<LipschitzEstimate> {
    check_dims(c, p)?;
    let m = c.signal_len();
    let q = c.half_width();
    let per_channel_p_bounds: Vec<f64> = p.kernels().iter().map(|k| p_block_bound(k)).collect();
    let per_channel_c_bounds: Vec<f64> = c
        .channels()
        .iter()
        .map(|s| c_block_bound(s, m, q))
        .collect();
    let l1 = 2.0 * per_channel_p_bounds.iter().map(|b| b * b).sum::<f64>();
    let l2 = 2.0 * per_channel_c_bounds.iter().map(|b| b * b).sum::<f64>();
    Ok(LipschitzEstimate {
        l1,
        l2,
        per_channel_p_bounds,
        per_channel_c_bounds,
    })
}

/// Largest singular value of a small dense matrix via power iteration on
/// `AᵀA`, to relative accuracy 1e-9. Test oracle only; panics on matrices
/// larger than 256×256.
pub fn spectral_norm_oracle(mat: &[Vec<f64>]) -> Result<f64> {
    let rows = mat.len();
    let cols = mat.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Ok(0.0);
    }
    assert!(
        rows <= 256 && cols <= 256,
        "spectral_norm_oracle is restricted to matrices up to 256×256"
    );
    if mat.iter().flatten().all(|&v| v == 0.0) {
        return Ok(0.0);
    }

    // Deterministic start with unequal entries so it is not orthogonal to
    // the leading singular vector of structured matrices.
    let mut v: Vec<f64> = (0..cols).map(|i| 1.0 + 0.01 * (i % 7) as f64).collect();
    normalize_in_place(&mut v);
    let mut restarts = 0usize;
    let mut prev = f64::NAN;
    for _ in 0..10_000 {
        let av: Vec<f64> = mat
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let mut z = vec![0.0; cols];
        for (row, &wi) in mat.iter().zip(&av) {
            for (zk, &a) in z.iter_mut().zip(row) {
                *zk += wi * a;
            }
        }
        let sigma = v
            .iter()
            .zip(&z)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .max(0.0)
            .sqrt();
        let zn = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        if zn == 0.0 {
            // Landed in the null space; restart from a basis vector.
            if restarts >= cols {
                return Ok(0.0);
            }
            v = vec![0.0; cols];
            v[restarts] = 1.0;
            restarts += 1;
            prev = f64::NAN;
            continue;
        }
        for (vk, zk) in v.iter_mut().zip(&z) {
            *vk = zk / zn;
        }
        if !prev.is_nan() && (sigma - prev).abs() <= 1e-9 * sigma.max(f64::MIN_POSITIVE) {
            return Ok(sigma);
        }
        prev = sigma;
    }
    Err(Error::Numerical(
        "power iteration did not converge within 10000 iterations".into(),
    ))
}

fn normalize_in_place(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v {
            *x /= n;
        }
    }
}
