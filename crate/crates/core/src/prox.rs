//! Closed-form proximal mappings of the two penalty blocks.
//!
//! Convention: `prox_t(v)` minimizes `f(d) + (t/2)·‖d − v‖₂²`, so the
//! penalty weights enter the formulas as `λ/t`. Parameterizations with the
//! quadratic weight written `1/(2t)` exist in the literature; this crate
//! uses `t/2` throughout.

use crate::error::{invalid, Result};
use crate::signal::{Atoms, Coefficients};

/// Proximal map of the coefficient penalty: channel 1 carries a group-ℓ₂
/// penalty with weight `lambda_passive`, every other channel an entrywise
/// ℓ₁ penalty with weight `lambda_active`, all under nonnegativity.
///
/// Channel 1 is the positive-part group shrinkage
/// `(1 − (λ/t)/max{‖[v]₊‖₂, λ/t})·[v]₊`; when `[v]₊` is the zero vector
/// the factor is taken as 0 outright, so the output is exactly zero.
/// Channels ≥ 2 are soft-thresholded at `λ/t` and clamped: `[v − λ/t]₊`.
pub fn prox_coefficients(
    c: &Coefficients,
    t: f64,
    lambda_passive: f64,
    lambda_active: f64,
) -> Result<Coefficients> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("prox step must be positive and finite, got {t}")));
    }
    let mut series = Vec::with_capacity(c.num_channels());
    for (i, channel) in c.channels().iter().enumerate() {
        if i == 0 {
            series.push(group_shrink(channel, lambda_passive / t));
        } else {
            let threshold = lambda_active / t;
            series.push(channel.iter().map(|&v| (v - threshold).max(0.0)).collect());
        }
    }
    Coefficients::new(series, c.signal_len(), c.half_width())
}

fn group_shrink(v: &[f64], threshold: f64) -> Vec<f64> {
    let positive: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
    let norm = positive.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || norm <= threshold {
        return vec![0.0; v.len()];
    }
    let factor = 1.0 - threshold / norm;
    positive.into_iter().map(|x| factor * x).collect()
}

/// Euclidean projection of each kernel onto `{x ≥ 0, ‖x‖₂ ≤ 1}`:
/// `[p]₊ / max{‖[p]₊‖₂, 1}`. Independent of the step size, since the
/// kernel block's penalty is a pure constraint.
pub fn project_atoms(p: &Atoms) -> Atoms {
    let kernels = p
        .kernels()
        .iter()
        .map(|k| {
            let positive: Vec<f64> = k.iter().map(|&x| x.max(0.0)).collect();
            let norm = positive.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm <= 1.0 {
                positive
            } else {
                positive.into_iter().map(|x| x / norm).collect()
            }
        })
        .collect();
    Atoms::new(kernels, p.half_width()).expect("projection preserves kernel dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{grid_min, grid_min_separable};
    use crate::signal::TOL_FEAS;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn coeffs(series: Vec<Vec<f64>>, m: usize, q: usize) -> Coefficients {
        Coefficients::new(series, m, q).unwrap()
    }

    #[test]
    fn passive_channel_gets_group_shrinkage() {
        // λ/t = 1: the positive part [3,4] has norm 5, factor 1 − 1/5.
        let c = coeffs(vec![vec![3.0, 4.0]], 0, 1);
        let out = prox_coefficients(&c, 2.0, 2.0, 0.1).unwrap();
        assert!((out.channel(0)[0] - 2.4).abs() < 1e-15);
        assert!((out.channel(0)[1] - 3.2).abs() < 1e-15);
    }

    #[test]
    fn fully_negative_passive_channel_maps_to_origin() {
        let c = coeffs(vec![vec![-1.0, -2.0]], 0, 1);
        let out = prox_coefficients(&c, 1.0, 0.5, 0.1).unwrap();
        assert_eq!(out.channel(0), &[0.0, 0.0]);
    }

    #[test]
    fn small_positive_passive_channel_is_shrunk_to_zero() {
        // ‖[v]₊‖ = 0.5 is below λ/t = 1: the group threshold kills it.
        let c = coeffs(vec![vec![0.3, 0.4]], 0, 1);
        let out = prox_coefficients(&c, 1.0, 1.0, 0.1).unwrap();
        assert_eq!(out.channel(0), &[0.0, 0.0]);
    }

    #[test]
    fn active_channels_are_soft_thresholded() {
        let c = coeffs(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.3, -0.2]], 1, 1);
        let out = prox_coefficients(&c, 2.0, 0.1, 1.0).unwrap();
        assert_eq!(out.channel(1), &[0.5, 0.0, 0.0]);
    }

    #[test]
    fn zero_active_threshold_degenerates_to_clamping() {
        let c = coeffs(vec![vec![0.0, 0.0, 0.0], vec![1.0, -0.3, 0.2]], 1, 1);
        let out = prox_coefficients(&c, 3.0, 0.1, 0.0).unwrap();
        assert_eq!(out.channel(1), &[1.0, 0.0, 0.2]);
    }

    #[test]
    fn nonpositive_step_is_rejected() {
        let c = coeffs(vec![vec![1.0, 1.0]], 0, 1);
        assert!(prox_coefficients(&c, 0.0, 0.1, 0.1).is_err());
        assert!(prox_coefficients(&c, -1.0, 0.1, 0.1).is_err());
        assert!(prox_coefficients(&c, f64::INFINITY, 0.1, 0.1).is_err());
    }

    #[test]
    fn projection_matches_worked_examples() {
        let p = Atoms::new(vec![vec![0.6, -0.3, 0.8]], 1).unwrap();
        let out = project_atoms(&p);
        assert_eq!(out.kernel(0), &[0.6, 0.0, 0.8]);

        let p = Atoms::new(vec![vec![3.0, 4.0, 0.0]], 1).unwrap();
        let out = project_atoms(&p);
        assert!((out.kernel(0)[0] - 0.6).abs() < 1e-15);
        assert!((out.kernel(0)[1] - 0.8).abs() < 1e-15);
        assert_eq!(out.kernel(0)[2], 0.0);
    }

    #[test]
    fn projection_is_identity_on_the_feasible_set() {
        let p = Atoms::new(vec![vec![0.5, 0.0, 0.5]], 1).unwrap();
        assert_eq!(project_atoms(&p), p);
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let q = rng.random_range(1..4usize);
            let kernel: Vec<f64> = (0..2 * q + 1).map(|_| rng.random_range(-3.0..3.0)).collect();
            let p = Atoms::new(vec![kernel], q).unwrap();
            let once = project_atoms(&p);
            let twice = project_atoms(&once);
            for (a, b) in once.kernel(0).iter().zip(twice.kernel(0)) {
                assert!((a - b).abs() <= 1e-12);
            }
            once.check_feasible(TOL_FEAS).unwrap();
        }
    }

    #[test]
    fn projection_is_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..100 {
            let q = rng.random_range(1..4usize);
            let w = 2 * q + 1;
            let a: Vec<f64> = (0..w).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..w).map(|_| rng.random_range(-3.0..3.0)).collect();
            let pa = project_atoms(&Atoms::new(vec![a.clone()], q).unwrap());
            let pb = project_atoms(&Atoms::new(vec![b.clone()], q).unwrap());
            let dist_in: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
            let dist_out: f64 = pa
                .kernel(0)
                .iter()
                .zip(pb.kernel(0))
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            assert!(
                dist_out.sqrt() <= dist_in.sqrt() * (1.0 + 1e-12),
                "projection expanded {} to {}",
                dist_in.sqrt(),
                dist_out.sqrt()
            );
        }
    }

    #[test]
    fn prox_outputs_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..50 {
            let m = rng.random_range(1..6);
            let q = 1;
            let n = rng.random_range(1..4usize);
            let series: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m + 2 * q).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let c = coeffs(series, m, q);
            let t = rng.random_range(0.1..5.0);
            let out = prox_coefficients(&c, t, 0.3, 0.2).unwrap();
            out.check_feasible(TOL_FEAS).unwrap();
        }
    }

    // Objective value reached by the closed form, compared against a dense
    // grid-refinement minimizer of the same prox objective.
    #[test]
    fn closed_forms_match_grid_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let levels = 3;
        let points = 100;

        for trial in 0..12 {
            let t = rng.random_range(0.5..3.0);
            let lambda = rng.random_range(0.05..1.5);

            // Passive-channel group shrinkage, dimension 2 (padded layout
            // m=0, q=1 gives a length-2 channel).
            let v: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let c = coeffs(vec![v.clone()], 0, 1);
            let out = prox_coefficients(&c, t, lambda, 0.1).unwrap();
            let objective = |d: &[f64]| {
                if d.iter().any(|&x| x < 0.0) {
                    return f64::INFINITY;
                }
                let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                let dist: f64 = d.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum();
                lambda * norm + t / 2.0 * dist
            };
            let (_, oracle_val) = grid_min(&objective, &v, 2.5, levels, points);
            let reached = objective(out.channel(0));
            assert!(
                reached <= oracle_val + 1e-6,
                "trial {trial}: group prox reached {reached}, oracle found {oracle_val}"
            );

            // Active-channel soft threshold, dimension 4, coordinate-wise
            // oracle since the objective is separable.
            let v: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let c = coeffs(vec![vec![0.0; 4], v.clone()], 2, 1);
            let out = prox_coefficients(&c, t, 0.1, lambda).unwrap();
            let coord = |k: usize, x: f64| {
                if x < 0.0 {
                    f64::INFINITY
                } else {
                    lambda * x + t / 2.0 * (x - v[k]) * (x - v[k])
                }
            };
            let (_, oracle_val) = grid_min_separable(&coord, &v, 2.5, levels, points);
            let reached: f64 = out
                .channel(1)
                .iter()
                .enumerate()
                .map(|(k, &x)| coord(k, x))
                .sum();
            assert!(
                reached <= oracle_val + 1e-6,
                "trial {trial}: soft threshold reached {reached}, oracle found {oracle_val}"
            );

            // Kernel projection, dimension 3.
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p = Atoms::new(vec![v.clone()], 1).unwrap();
            let out = project_atoms(&p);
            let objective = |d: &[f64]| {
                if d.iter().any(|&x| x < 0.0) || d.iter().map(|x| x * x).sum::<f64>() > 1.0 {
                    return f64::INFINITY;
                }
                d.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / 2.0
            };
            let (_, oracle_val) = grid_min(&objective, &[0.0; 3], 1.1, levels, points);
            let reached = objective(out.kernel(0));
            assert!(
                reached <= oracle_val + 1e-6,
                "trial {trial}: projection reached {reached}, oracle found {oracle_val}"
            );
        }
    }
}
