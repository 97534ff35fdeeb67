//! Matrix-free convolution operators and their adjoints.
//!
//! All maps are expressed as index arithmetic over flat slices; the dense
//! operator matrices are never formed. With kernel length `w = 2q+1`:
//!
//! * forward:  `(c * p)[j] = Σ_{d=0}^{w-1} c[j+d] · p[w-1-d]`,
//! * kernel adjoint `Pᵀ`: maps a residual of length `m` back to
//!   coefficient space (length `m+2q`),
//! * coefficient adjoint `Cᵀ`: maps a residual back to kernel space
//!   (length `w`).

use crate::error::{invalid, Result};
use crate::signal::{check_dims, Atoms, Coefficients};

/// Convolves one coefficient series (length `m + 2q`) with one kernel
/// (length `2q+1`), producing the `m` interior samples.
pub fn conv_channel(c: &[f64], p: &[f64], m: usize) -> Vec<f64> {
    let width = p.len();
    debug_assert_eq!(c.len(), m + width - 1);
    let mut out = vec![0.0; m];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for d in 0..width {
            acc += c[j + d] * p[width - 1 - d];
        }
        *o = acc;
    }
    out
}

/// Sum of all channel convolutions: the model's explanation of the signal.
pub fn reconstruct(c: &Coefficients, p: &Atoms) -> Result<Vec<f64>> {
    check_dims(c, p)?;
    let m = c.signal_len();
    let mut out = vec![0.0; m];
    for i in 0..c.num_channels() {
        let channel = conv_channel(c.channel(i), p.kernel(i), m);
        for (o, v) in out.iter_mut().zip(channel) {
            *o += v;
        }
    }
    Ok(out)
}

/// Reconstruction of a single channel `i` (0-based).
pub fn reconstruct_channel(c: &Coefficients, p: &Atoms, i: usize) -> Vec<f64> {
    conv_channel(c.channel(i), p.kernel(i), c.signal_len())
}

/// Residual `u - Σ_i c^i * p^i`.
pub fn residual(u: &[f64], c: &Coefficients, p: &Atoms) -> Result<Vec<f64>> {
    if u.len() != c.signal_len() {
        return Err(invalid(format!(
            "signal length {} does not match coefficient layout for m = {}",
            u.len(),
            c.signal_len()
        )));
    }
    let mut rec = reconstruct(c, p)?;
    for (r, &ui) in rec.iter_mut().zip(u) {
        *r = ui - *r;
    }
    Ok(rec)
}

/// Adjoint of `c ↦ c * p` for a fixed kernel: scatters each residual sample
/// across the `2q+1` coefficient positions it was built from.
pub fn adjoint_kernel(r: &[f64], p: &[f64]) -> Vec<f64> {
    let width = p.len();
    let mut out = vec![0.0; r.len() + width - 1];
    for (j, &rj) in r.iter().enumerate() {
        if rj == 0.0 {
            continue;
        }
        for d in 0..width {
            out[j + d] += rj * p[width - 1 - d];
        }
    }
    out
}

/// Adjoint of `p ↦ c * p` for fixed coefficients: correlates the residual
/// against the coefficient series at each of the `2q+1` kernel offsets.
pub fn adjoint_coeffs(r: &[f64], c: &[f64], width: usize) -> Vec<f64> {
    debug_assert_eq!(c.len(), r.len() + width - 1);
    let mut out = vec![0.0; width];
    for (l, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, &rj) in r.iter().enumerate() {
            acc += c[j + width - 1 - l] * rj;
        }
        *o = acc;
    }
    out
}

/// Gradient of `‖u - Σ c^i * p^i‖²` with respect to each coefficient
/// series, given the residual.
pub fn grad_coefficients(residual: &[f64], p: &Atoms) -> Vec<Vec<f64>> {
    (0..p.num_channels())
        .map(|i| {
            let mut g = adjoint_kernel(residual, p.kernel(i));
            for v in &mut g {
                *v *= -2.0;
            }
            g
        })
        .collect()
}

/// Gradient of the same data term with respect to each kernel.
pub fn grad_atoms(residual: &[f64], c: &Coefficients) -> Vec<Vec<f64>> {
    let width = 2 * c.half_width() + 1;
    (0..c.num_channels())
        .map(|i| {
            let mut g = adjoint_coeffs(residual, c.channel(i), width);
            for v in &mut g {
                *v *= -2.0;
            }
            g
        })
        .collect()
}

/// Squared ℓ₂ norm of a residual: the data-fidelity term.
pub fn data_term(residual: &[f64]) -> f64 {
    residual.iter().map(|r| r * r).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_instance(rng: &mut ChaCha8Rng) -> (usize, usize, Vec<f64>, Vec<f64>, Vec<f64>) {
        let m = rng.random_range(1..40);
        let q = rng.random_range(0..6usize);
        let width = 2 * q + 1;
        let c: Vec<f64> = (0..m + 2 * q).map(|_| rng.random_range(-2.0..2.0)).collect();
        let p: Vec<f64> = (0..width).map(|_| rng.random_range(-2.0..2.0)).collect();
        let r: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        (m, q, c, p, r)
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn impulse_places_the_flipped_kernel() {
        let c = [0.0, 1.0, 0.0, 0.0, 0.0];
        let p = [1.0, 2.0, 3.0];
        assert_eq!(conv_channel(&c, &p, 3), vec![2.0, 3.0, 0.0]);
    }

    #[test]
    fn forward_matches_naive_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (m, _, c, p, _) = random_instance(&mut rng);
            let fast = conv_channel(&c, &p, m);
            let slow = reference::conv_channel_naive(&c, &p, m);
            for (a, b) in fast.iter().zip(slow.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_adjoint_satisfies_the_inner_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let (m, _, c, p, r) = random_instance(&mut rng);
            let lhs = dot(&conv_channel(&c, &p, m), &r);
            let rhs = dot(&c, &adjoint_kernel(&r, &p));
            assert!(
                (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()),
                "⟨Pc, r⟩ = {lhs} but ⟨c, Pᵀr⟩ = {rhs}"
            );
        }
    }

    #[test]
    fn coefficient_adjoint_satisfies_the_inner_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let (m, q, c, p, r) = random_instance(&mut rng);
            let lhs = dot(&conv_channel(&c, &p, m), &r);
            let rhs = dot(&p, &adjoint_coeffs(&r, &c, 2 * q + 1));
            assert!(
                (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()),
                "⟨Cp, r⟩ = {lhs} but ⟨p, Cᵀr⟩ = {rhs}"
            );
        }
    }

    #[test]
    fn adjoints_match_dense_transposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let (m, q, c, p, r) = random_instance(&mut rng);
            let pt = reference::matvec_transpose(&reference::p_matrix(&p, m), &r);
            for (a, b) in adjoint_kernel(&r, &p).iter().zip(pt.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
            let ct = reference::matvec_transpose(&reference::c_matrix(&c, m, q), &r);
            for (a, b) in adjoint_coeffs(&r, &c, 2 * q + 1).iter().zip(ct.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coefficient_adjoint_stencil_example() {
        // m = 3, q = 1, impulse coefficient at the second interior slot,
        // residual concentrated on the first sample.
        let c = [0.0, 1.0, 0.0, 0.0, 0.0];
        let r = [1.0, 0.0, 0.0];
        assert_eq!(adjoint_coeffs(&r, &c, 3), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn multichannel_reconstruction_sums_channels() {
        let c = Coefficients::new(
            vec![vec![0.0, 1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 2.0, 0.0, 0.0]],
            3,
            1,
        )
        .unwrap();
        let p = Atoms::new(vec![vec![1.0, 2.0, 3.0], vec![0.5, 0.5, 0.5]], 1).unwrap();
        let rec = reconstruct(&c, &p).unwrap();
        // Channel 1 contributes [2, 3, 0]; channel 2 places 2·[0.5,0.5,0.5]
        // one slot later: [1, 1, 1].
        assert_eq!(rec, vec![3.0, 4.0, 1.0]);
        assert_eq!(reconstruct_channel(&c, &p, 0), vec![2.0, 3.0, 0.0]);
    }

    #[test]
    fn residual_rejects_mismatched_signal_length() {
        let c = Coefficients::zeros(1, 3, 1);
        let p = Atoms::zeros(1, 1);
        assert!(residual(&[0.0; 4], &c, &p).is_err());
        assert!(residual(&[0.0; 3], &c, &p).is_ok());
    }

    #[test]
    fn gradients_vanish_at_an_exact_fit() {
        let c = Coefficients::new(vec![vec![0.0, 1.0, 0.0, 0.0, 0.0]], 3, 1).unwrap();
        let p = Atoms::new(vec![vec![0.1, 0.2, 0.3]], 1).unwrap();
        let u = reconstruct(&c, &p).unwrap();
        let r = residual(&u, &c, &p).unwrap();
        assert!(data_term(&r) < 1e-30);
        assert!(grad_coefficients(&r, &p).iter().flatten().all(|&g| g == 0.0));
        assert!(grad_atoms(&r, &c).iter().flatten().all(|&g| g == 0.0));
    }
}
