//! Core value types of the disaggregation problem: the observed aggregate
//! signal, the atom dictionary, the placement coefficients, and the solver
//! configuration/state.
//!
//! An aggregate series `u` of length `m` is modelled as a sum of `N` channel
//! reconstructions `c^i * p^i`, where each atom `p^i` has length `2q+1` and
//! each coefficient series `c^i` has length `m+2q`. Channel 1 is the passive
//! channel (always-on devices), channels 2..N are active channels.

use std::collections::VecDeque;

use crate::error::{invalid, Result};

/// Slack for floating-point constraint-membership checks.
pub const TOL_FEAS: f64 = 1e-12;

fn check_all_finite(values: &[f64], what: &str) -> Result<()> {
    if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
        return Err(invalid(format!("{what}: non-finite entry at index {idx}")));
    }
    Ok(())
}

/// The observed household power series, normalized to `[0, 1]`.
///
/// The pre-normalization maximum is retained so predictions can be reported
/// in the original units.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSignal {
    samples: Vec<f64>,
    sample_period_seconds: u32,
    scale: f64,
}

impl AggregateSignal {
    /// Builds a signal from raw meter readings: negative readings (meter
    /// glitches) are clamped to zero, then everything is scaled by the raw
    /// maximum so the result lies in `[0, 1]`. An all-zero (or all-negative)
    /// input stays all-zero with unit scale.
    pub fn normalize(raw: &[f64], sample_period_seconds: u32) -> Result<Self> {
        if raw.is_empty() {
            return Err(invalid("aggregate signal must not be empty"));
        }
        if sample_period_seconds == 0 {
            return Err(invalid("sample period must be positive"));
        }
        check_all_finite(raw, "aggregate signal")?;
        let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (samples, scale) = if max > 0.0 {
            (raw.iter().map(|&v| v.max(0.0) / max).collect(), max)
        } else {
            (vec![0.0; raw.len()], 1.0)
        };
        Ok(Self {
            samples,
            sample_period_seconds,
            scale,
        })
    }

    /// Normalized samples, all in `[0, 1]`.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Number of samples `m`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_period_seconds(&self) -> u32 {
        self.sample_period_seconds
    }

    /// Pre-normalization maximum; multiply normalized values by this to
    /// recover original units.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Maps values on the normalized scale back to original units.
    pub fn denormalize(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&v| v * self.scale).collect()
    }
}

/// The `N` convolution kernels, one per channel, each of length `2q+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atoms {
    kernels: Vec<Vec<f64>>,
    half_width: usize,
}

impl Atoms {
    /// Wraps kernel data, checking dimensions and finiteness. Feasibility
    /// (nonnegativity, unit-ball membership) is a property of solution
    /// iterates, not of arbitrary points, and is checked separately via
    /// [`Atoms::check_feasible`].
    pub fn new(kernels: Vec<Vec<f64>>, half_width: usize) -> Result<Self> {
        if kernels.is_empty() {
            return Err(invalid("atoms: need at least one channel"));
        }
        let expect = 2 * half_width + 1;
        for (i, k) in kernels.iter().enumerate() {
            if k.len() != expect {
                return Err(invalid(format!(
                    "atoms: channel {} has length {}, expected 2q+1 = {expect}",
                    i + 1,
                    k.len()
                )));
            }
            check_all_finite(k, "atoms")?;
        }
        Ok(Self {
            kernels,
            half_width,
        })
    }

    /// All-zero atoms with `n` channels.
    pub fn zeros(n: usize, half_width: usize) -> Self {
        Self {
            kernels: vec![vec![0.0; 2 * half_width + 1]; n],
            half_width,
        }
    }

    pub fn num_channels(&self) -> usize {
        self.kernels.len()
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Kernel length `2q+1`.
    pub fn kernel_len(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Kernel of channel `i` (0-based).
    pub fn kernel(&self, i: usize) -> &[f64] {
        &self.kernels[i]
    }

    pub fn kernels(&self) -> &[Vec<f64>] {
        &self.kernels
    }

    /// Verifies every entry is nonnegative and every kernel satisfies
    /// `‖p^i‖₂ ≤ 1 + tol`.
    pub fn check_feasible(&self, tol: f64) -> Result<()> {
        for (i, k) in self.kernels.iter().enumerate() {
            if k.iter().any(|&v| v < 0.0) {
                return Err(invalid(format!("atoms: channel {} has a negative entry", i + 1)));
            }
            let norm = l2_norm(k);
            if norm > 1.0 + tol {
                return Err(invalid(format!(
                    "atoms: channel {} violates the unit ball, ‖p‖₂ = {norm}",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// The `N` coefficient series, one per channel, each of length `m+2q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    series: Vec<Vec<f64>>,
    signal_len: usize,
    half_width: usize,
}

impl Coefficients {
    pub fn new(series: Vec<Vec<f64>>, signal_len: usize, half_width: usize) -> Result<Self> {
        if series.is_empty() {
            return Err(invalid("coefficients: need at least one channel"));
        }
        let expect = signal_len + 2 * half_width;
        for (i, s) in series.iter().enumerate() {
            if s.len() != expect {
                return Err(invalid(format!(
                    "coefficients: channel {} has length {}, expected m+2q = {expect}",
                    i + 1,
                    s.len()
                )));
            }
            check_all_finite(s, "coefficients")?;
        }
        Ok(Self {
            series,
            signal_len,
            half_width,
        })
    }

    /// All-zero coefficients with `n` channels.
    pub fn zeros(n: usize, signal_len: usize, half_width: usize) -> Self {
        Self {
            series: vec![vec![0.0; signal_len + 2 * half_width]; n],
            signal_len,
            half_width,
        }
    }

    pub fn num_channels(&self) -> usize {
        self.series.len()
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Series of channel `i` (0-based).
    pub fn channel(&self, i: usize) -> &[f64] {
        &self.series[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.series
    }

    /// Verifies every entry is nonnegative (up to `-tol`).
    pub fn check_feasible(&self, tol: f64) -> Result<()> {
        for (i, s) in self.series.iter().enumerate() {
            if s.iter().any(|&v| v < -tol) {
                return Err(invalid(format!(
                    "coefficients: channel {} has a negative entry",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Checks that a coefficient/atom pair describes the same problem
/// (same channel count, same kernel half-width).
pub fn check_dims(c: &Coefficients, p: &Atoms) -> Result<()> {
    if c.num_channels() != p.num_channels() {
        return Err(invalid(format!(
            "channel count mismatch: {} coefficient channels vs {} atom channels",
            c.num_channels(),
            p.num_channels()
        )));
    }
    if c.half_width() != p.half_width() {
        return Err(invalid(format!(
            "half-width mismatch: coefficients use q = {}, atoms use q = {}",
            c.half_width(),
            p.half_width()
        )));
    }
    Ok(())
}

pub(crate) fn l2_norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Hyperparameters of the energy functional and the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Weight λ_p of the group-ℓ₂ penalty on the passive channel.
    pub lambda_passive: f64,
    /// Weight λ_a of the ℓ₁ penalty on each active channel.
    pub lambda_active: f64,
    /// Number of channels N (channel 1 passive, the rest active).
    pub num_channels: usize,
    /// Kernel half-width q; atoms span 2q+1 samples.
    pub half_width: usize,
    /// Margin ε of the step-size rule, in (0, 1).
    pub epsilon: f64,
    /// Upper bounds (ᾱ₁, ᾱ₂) for the extrapolation weights of each block.
    pub alpha_bar: (f64, f64),
    /// Upper bounds (β̄₁, β̄₂) for the gradient-point weights of each block.
    pub beta_bar: (f64, f64),
    /// Per-iteration extrapolation weight, applied to both blocks.
    pub alpha_step: f64,
    /// Per-iteration gradient-point weight, applied to both blocks.
    pub beta_step: f64,
    /// Relative-change stopping tolerance on the modified energy.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Seed for the feature-sampling initialization.
    pub seed: u64,
    /// Global multiplier on the τ rule; values above 1 shrink the steps.
    pub step_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda_passive: 0.05,
            lambda_active: 0.1,
            num_channels: 4,
            half_width: 30,
            epsilon: 0.01,
            alpha_bar: (0.75, 0.75),
            beta_bar: (0.75, 0.75),
            alpha_step: 0.7,
            beta_step: 0.7,
            rel_tol: 1e-6,
            max_iter: 2000,
            seed: 0,
            step_scale: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_passive > 0.0 && self.lambda_passive.is_finite()) {
            return Err(invalid("lambda_passive must be positive and finite"));
        }
        if !(self.lambda_active > 0.0 && self.lambda_active.is_finite()) {
            return Err(invalid("lambda_active must be positive and finite"));
        }
        if self.num_channels == 0 {
            return Err(invalid("num_channels must be at least 1"));
        }
        if self.half_width == 0 {
            return Err(invalid("half_width must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon must lie in (0, 1)"));
        }
        for (name, bar) in [("alpha_bar", self.alpha_bar)] {
            for (k, v) in [bar.0, bar.1].into_iter().enumerate() {
                if !(v > 0.0 && self.epsilon + v < 1.0) {
                    return Err(invalid(format!(
                        "{name}_{} must lie in (0, 1 - epsilon)",
                        k + 1
                    )));
                }
            }
        }
        for (k, v) in [self.beta_bar.0, self.beta_bar.1].into_iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("beta_bar_{} must be positive", k + 1)));
            }
        }
        let alpha_cap = self.alpha_bar.0.min(self.alpha_bar.1);
        if !(0.0..=alpha_cap).contains(&self.alpha_step) {
            return Err(invalid(format!(
                "alpha_step must lie in [0, min(alpha_bar)] = [0, {alpha_cap}]"
            )));
        }
        let beta_cap = self.beta_bar.0.min(self.beta_bar.1);
        if !(0.0..=beta_cap).contains(&self.beta_step) {
            return Err(invalid(format!(
                "beta_step must lie in [0, min(beta_bar)] = [0, {beta_cap}]"
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(invalid("step_scale must be positive and finite"));
        }
        Ok(())
    }
}

/// Running bookkeeping of the alternating solver.
///
/// Holds the two most recent iterates of each block, the modified energy,
/// the running maxima that substitute for a-priori Lipschitz bounds, and
/// the inertia weights γ derived from them.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub c_curr: Coefficients,
    pub c_prev: Coefficients,
    pub p_curr: Atoms,
    pub p_prev: Atoms,
    /// Modified energy Ψ at the current iterate.
    pub psi: f64,
    /// Objective F = R + penalties at the current iterate.
    pub objective: f64,
    /// Data term R at the current iterate.
    pub data_term: f64,
    pub iter: usize,
    /// Windowed maximum of the c-block Lipschitz bounds seen so far.
    pub l1_running_max: f64,
    /// Windowed maximum of the p-block Lipschitz bounds seen so far.
    pub l2_running_max: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub(crate) l1_window: VecDeque<f64>,
    pub(crate) l2_window: VecDeque<f64>,
}

impl SolverState {
    pub(crate) fn push_l1(&mut self, value: f64, window: usize) {
        push_windowed(&mut self.l1_window, value, window);
        self.l1_running_max = window_max(&self.l1_window);
    }

    pub(crate) fn push_l2(&mut self, value: f64, window: usize) {
        push_windowed(&mut self.l2_window, value, window);
        self.l2_running_max = window_max(&self.l2_window);
    }
}

fn push_windowed(window: &mut VecDeque<f64>, value: f64, cap: usize) {
    window.push_back(value);
    while window.len() > cap {
        window.pop_front();
    }
}

fn window_max(window: &VecDeque<f64>) -> f64 {
    window.iter().cloned().fold(0.0, f64::max)
}
