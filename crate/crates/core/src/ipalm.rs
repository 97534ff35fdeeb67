//! The alternating inertial proximal solver.
//!
//! Each iteration extrapolates the coefficient block, takes a prox-gradient
//! step on it, then does the same for the kernel block using the fresh
//! coefficients. Step sizes come from closed-form Lipschitz bounds
//! ([`crate::lipschitz`]); running maxima of those bounds stand in for the
//! a-priori constants the theory asks for. Progress is tracked through the
//! modified energy
//!
//! `Ψ_k = F(c_k, p_k) + (γ₁/2)·‖c_k − c_{k−1}‖² + (γ₂/2)·‖p_k − p_{k−1}‖²`,
//!
//! and iteration stops when Ψ hits zero or its relative change falls below
//! `rel_tol`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conv;
use crate::error::{invalid, Error, Result};
use crate::lipschitz;
use crate::prox;
use crate::signal::{check_dims, Atoms, AggregateSignal, Coefficients, SolverConfig, SolverState, TOL_FEAS};

/// Keep the bounds of this many recent iterations (current one included)
/// when forming the running Lipschitz maxima, so a transiently huge early
/// bound cannot inflate the inertia weights forever.
const L_WINDOW: usize = 51;

/// Bounds are floored here so the step-size rule always yields τ > 0.
const L_FLOOR: f64 = 1e-12;

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub coefficients: Coefficients,
    pub atoms: Atoms,
    /// Modified energy per iteration, starting with Ψ₀.
    pub psi_history: Vec<f64>,
    pub iterations: usize,
    /// Whether the stopping rule fired before `max_iter`.
    pub converged: bool,
    /// Objective F = data term + penalties at the final iterate.
    pub final_objective: f64,
}

/// Full objective `F(c,p) = ‖u − Σ cⁱ∗pⁱ‖₂² + λ_p‖c¹‖₂ + λ_a Σ_{i≥2}‖cⁱ‖₁`,
/// extended with the constraint set: any violation beyond [`TOL_FEAS`]
/// returns `+∞`.
pub fn objective(
    u: &[f64],
    c: &Coefficients,
    p: &Atoms,
    lambda_passive: f64,
    lambda_active: f64,
) -> Result<f64> {
    check_dims(c, p)?;
    if u.len() != c.signal_len() {
        return Err(invalid(format!(
            "signal length {} does not match coefficient layout for m = {}",
            u.len(),
            c.signal_len()
        )));
    }
    if c.check_feasible(TOL_FEAS).is_err() || p.check_feasible(TOL_FEAS).is_err() {
        return Ok(f64::INFINITY);
    }
    let r = conv::residual(u, c, p)?;
    Ok(conv::data_term(&r) + penalties(c, lambda_passive, lambda_active))
}

fn penalties(c: &Coefficients, lambda_passive: f64, lambda_active: f64) -> f64 {
    let mut val = lambda_passive
        * c.channel(0).iter().map(|v| v * v).sum::<f64>().sqrt();
    for i in 1..c.num_channels() {
        val += lambda_active * c.channel(i).iter().map(|v| v.abs()).sum::<f64>();
    }
    val
}

fn gamma_coefficient(alpha_bar: f64, beta_bar: f64, epsilon: f64) -> f64 {
    (alpha_bar + 2.0 * beta_bar) / (2.0 * (1.0 - epsilon - alpha_bar))
}

/// Builds a solver state around a given starting pair, seeding the running
/// Lipschitz maxima and inertia weights from that pair.
pub(crate) fn state_from_parts(
    c: Coefficients,
    p: Atoms,
    u: &AggregateSignal,
    config: &SolverConfig,
) -> Result<SolverState> {
    let est = lipschitz::estimate(&c, &p)?;
    let l1 = est.l1.max(L_FLOOR);
    let l2 = est.l2.max(L_FLOOR);
    let objective = objective(u.samples(), &c, &p, config.lambda_passive, config.lambda_active)?;
    if !objective.is_finite() {
        return Err(invalid("starting point is infeasible or non-finite"));
    }
    let r = conv::residual(u.samples(), &c, &p)?;
    let mut state = SolverState {
        c_prev: c.clone(),
        c_curr: c,
        p_prev: p.clone(),
        p_curr: p,
        psi: objective,
        objective,
        data_term: conv::data_term(&r),
        iter: 0,
        l1_running_max: 0.0,
        l2_running_max: 0.0,
        gamma1: 0.0,
        gamma2: 0.0,
        l1_window: VecDeque::new(),
        l2_window: VecDeque::new(),
    };
    state.push_l1(l1, L_WINDOW);
    state.push_l2(l2, L_WINDOW);
    state.gamma1 = gamma_coefficient(config.alpha_bar.0, config.beta_bar.0, config.epsilon)
        * state.l1_running_max;
    state.gamma2 = gamma_coefficient(config.alpha_bar.1, config.beta_bar.1, config.epsilon)
        * state.l2_running_max;
    Ok(state)
}

/// Builds the starting point by sampling features of the signal itself:
/// each kernel is a random window of `u` centered on a nonzero sample,
/// clamped and rescaled to unit norm, and the matching coefficient is an
/// impulse placed so the channel initially reproduces that window.
pub fn initialize<R: Rng + ?Sized>(
    u: &AggregateSignal,
    config: &SolverConfig,
    rng: &mut R,
) -> Result<SolverState> {
    config.validate()?;
    let samples = u.samples();
    let nonzero: Vec<usize> = (0..samples.len()).filter(|&j| samples[j] != 0.0).collect();
    if nonzero.is_empty() {
        return Err(invalid("signal is identically zero, nothing to disaggregate"));
    }
    let m = samples.len();
    let q = config.half_width;
    let width = 2 * q + 1;
    let mut kernels = Vec::with_capacity(config.num_channels);
    let mut series = Vec::with_capacity(config.num_channels);
    for _ in 0..config.num_channels {
        let center = nonzero[rng.random_range(0..nonzero.len())];
        let mut window = vec![0.0; width];
        for (d, w) in window.iter_mut().enumerate() {
            let j = center as isize - q as isize + d as isize;
            if j >= 0 && (j as usize) < m {
                *w = samples[j as usize].max(0.0);
            }
        }
        let norm = window.iter().map(|v| v * v).sum::<f64>().sqrt();
        let kernel = if norm > 0.0 {
            window.iter().map(|v| v / norm).collect()
        } else {
            let mut impulse = vec![0.0; width];
            impulse[q] = 1.0;
            impulse
        };
        kernels.push(kernel);
        let mut coeffs = vec![0.0; m + 2 * q];
        coeffs[center + q] = if norm > 0.0 { norm } else { 1.0 };
        series.push(coeffs);
    }
    let p = Atoms::new(kernels, q)?;
    let c = Coefficients::new(series, m, q)?;
    state_from_parts(c, p, u, config)
}

fn extrapolate(curr: &[Vec<f64>], prev: &[Vec<f64>], weight: f64) -> Vec<Vec<f64>> {
    curr.iter()
        .zip(prev)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + weight * (x - y)).collect())
        .collect()
}

fn dist_sq(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>())
        .sum()
}

/// Advances the state by one full iteration: coefficient update first, then
/// the kernel update against the fresh coefficients.
pub fn step(state: &mut SolverState, u: &AggregateSignal, config: &SolverConfig) -> Result<()> {
    let iteration = state.iter + 1;
    let diverged = move || Error::NumericalDivergence { iteration };
    let m = state.c_curr.signal_len();
    let q = state.c_curr.half_width();
    let samples = u.samples();

    // Coefficient block.
    let l1_now = state
        .p_curr
        .kernels()
        .iter()
        .map(|k| {
            let b = lipschitz::p_block_bound(k);
            b * b
        })
        .sum::<f64>()
        * 2.0;
    let l1_now = l1_now.max(L_FLOOR);
    state.push_l1(l1_now, L_WINDOW);
    state.gamma1 = gamma_coefficient(config.alpha_bar.0, config.beta_bar.0, config.epsilon)
        * state.l1_running_max;
    let alpha = config.alpha_step;
    let beta = config.beta_step;
    let tau1 = config.step_scale * ((1.0 + config.epsilon) * state.gamma1 + (1.0 + beta) * l1_now)
        / (2.0 - alpha);
    if !tau1.is_finite() {
        return Err(diverged());
    }
    let y1 = extrapolate(state.c_curr.channels(), state.c_prev.channels(), alpha);
    let z1 = extrapolate(state.c_curr.channels(), state.c_prev.channels(), beta);
    let z1 = Coefficients::new(z1, m, q).map_err(|_| diverged())?;
    let r = conv::residual(samples, &z1, &state.p_curr)?;
    let grad = conv::grad_coefficients(&r, &state.p_curr);
    let arg: Vec<Vec<f64>> = y1
        .iter()
        .zip(&grad)
        .map(|(yc, gc)| yc.iter().zip(gc).map(|(y, g)| y - g / tau1).collect())
        .collect();
    let arg = Coefficients::new(arg, m, q).map_err(|_| diverged())?;
    let c_next = prox::prox_coefficients(&arg, tau1, config.lambda_passive, config.lambda_active)
        .map_err(|_| diverged())?;

    // Kernel block, driven by the fresh coefficients.
    let l2_now = c_next
        .channels()
        .iter()
        .map(|s| {
            let b = lipschitz::c_block_bound(s, m, q);
            b * b
        })
        .sum::<f64>()
        * 2.0;
    let l2_now = l2_now.max(L_FLOOR);
    state.push_l2(l2_now, L_WINDOW);
    state.gamma2 = gamma_coefficient(config.alpha_bar.1, config.beta_bar.1, config.epsilon)
        * state.l2_running_max;
    let tau2 = config.step_scale * ((1.0 + config.epsilon) * state.gamma2 + (1.0 + beta) * l2_now)
        / (2.0 - alpha);
    if !tau2.is_finite() {
        return Err(diverged());
    }
    let y2 = extrapolate(state.p_curr.kernels(), state.p_prev.kernels(), alpha);
    let z2 = extrapolate(state.p_curr.kernels(), state.p_prev.kernels(), beta);
    let z2 = Atoms::new(z2, q).map_err(|_| diverged())?;
    let r = conv::residual(samples, &c_next, &z2)?;
    let grad = conv::grad_atoms(&r, &c_next);
    let arg: Vec<Vec<f64>> = y2
        .iter()
        .zip(&grad)
        .map(|(yk, gk)| yk.iter().zip(gk).map(|(y, g)| y - g / tau2).collect())
        .collect();
    let arg = Atoms::new(arg, q).map_err(|_| diverged())?;
    let p_next = prox::project_atoms(&arg);

    state.c_prev = std::mem::replace(&mut state.c_curr, c_next);
    state.p_prev = std::mem::replace(&mut state.p_curr, p_next);
    state.iter = iteration;

    let r = conv::residual(samples, &state.c_curr, &state.p_curr)?;
    state.data_term = conv::data_term(&r);
    state.objective =
        state.data_term + penalties(&state.c_curr, config.lambda_passive, config.lambda_active);
    state.psi = state.objective
        + state.gamma1 / 2.0 * dist_sq(state.c_curr.channels(), state.c_prev.channels())
        + state.gamma2 / 2.0 * dist_sq(state.p_curr.kernels(), state.p_prev.kernels());
    if !state.psi.is_finite() {
        return Err(diverged());
    }
    Ok(())
}

/// Runs the solver to convergence or `max_iter`, reporting each iteration
/// to `observer` as `(iteration, Ψ, data term)`.
pub fn solve_with_observer<F>(
    u: &AggregateSignal,
    config: &SolverConfig,
    mut observer: F,
) -> Result<SolveResult>
where
    F: FnMut(usize, f64, f64),
{
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = initialize(u, config, &mut rng)?;
    observer(0, state.psi, state.data_term);
    let mut psi_history = vec![state.psi];
    let mut converged = false;
    for _ in 0..config.max_iter {
        let psi_prev = state.psi;
        step(&mut state, u, config)?;
        psi_history.push(state.psi);
        observer(state.iter, state.psi, state.data_term);
        if state.psi == 0.0 {
            converged = true;
            break;
        }
        if psi_prev > 0.0 && (state.psi - psi_prev).abs() / psi_prev < config.rel_tol {
            converged = true;
            break;
        }
    }
    Ok(SolveResult {
        coefficients: state.c_curr,
        atoms: state.p_curr,
        psi_history,
        iterations: state.iter,
        converged,
        final_objective: state.objective,
    })
}

/// Runs the solver to convergence or `max_iter`.
pub fn solve(u: &AggregateSignal, config: &SolverConfig) -> Result<SolveResult> {
    solve_with_observer(u, config, |_, _, _| {})
}

/// Per-channel reconstructions `cⁱ∗pⁱ` on the normalized scale. Channel 1
/// is the passive prediction; the active prediction is the sum of the rest.
pub fn reconstruct_channels(result: &SolveResult) -> Vec<Vec<f64>> {
    (0..result.coefficients.num_channels())
        .map(|i| conv::reconstruct_channel(&result.coefficients, &result.atoms, i))
        .collect()
}
