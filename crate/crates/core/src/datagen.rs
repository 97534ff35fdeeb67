//! Semi-synthetic household data: parametric device signatures placed on
//! random schedules, summed into an aggregate with per-device ground truth.
//!
//! Devices are described by shape, duration and amplitude ranges, an
//! expected activation count per day, and jitter fractions. Activation
//! times follow a Poisson process (exponential gaps); activations that
//! would overlap a previous activation of the same device are dropped.
//! Everything is driven by one seed, so a household renders identically
//! every time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::signal::AggregateSignal;

/// Signature envelope rendered for each activation.
#[derive(Debug, Clone, PartialEq)]
pub enum SignatureShape {
    /// Constant draw for the whole duration.
    Rectangular,
    /// Compressor-like cycle: one-sample startup spike, plateau, cosine
    /// tail-off over the final tenth of the duration.
    SpikedCycle { spike_fraction: f64 },
    /// Linear rise ending at full amplitude.
    Ramp,
    /// Two plateaus separated by a low-power stretch.
    DoublePulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceRole {
    Active,
    Passive,
}

/// One appliance class in a generated household.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec {
    /// Used for file naming; restricted to `[A-Za-z0-9_-]`.
    pub name: String,
    pub shape: SignatureShape,
    /// Inclusive nominal duration range in minutes.
    pub duration_minutes: (u32, u32),
    /// Inclusive nominal amplitude range.
    pub amplitude: (f64, f64),
    /// Expected activations per day (Poisson rate).
    pub activations_per_day: f64,
    /// Per-activation multiplicative amplitude perturbation, as a fraction.
    pub amplitude_jitter: f64,
    /// Per-activation multiplicative duration perturbation, as a fraction.
    pub duration_jitter: f64,
    pub role: DeviceRole,
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(invalid(format!(
                "device name {:?} must be nonempty and use only letters, digits, '_' or '-'",
                self.name
            )));
        }
        if self.duration_minutes.0 < 1 || self.duration_minutes.0 > self.duration_minutes.1 {
            return Err(invalid(format!(
                "device {}: duration range must satisfy 1 ≤ lo ≤ hi",
                self.name
            )));
        }
        if self.duration_minutes.1 > 24 * 60 {
            return Err(invalid(format!(
                "device {}: duration exceeds one day",
                self.name
            )));
        }
        if !(self.amplitude.0 > 0.0 && self.amplitude.0 <= self.amplitude.1)
            || !self.amplitude.1.is_finite()
        {
            return Err(invalid(format!(
                "device {}: amplitude range must satisfy 0 < lo ≤ hi",
                self.name
            )));
        }
        if !(self.activations_per_day >= 0.0 && self.activations_per_day.is_finite()) {
            return Err(invalid(format!(
                "device {}: activations_per_day must be a finite nonnegative number",
                self.name
            )));
        }
        for (label, j) in [
            ("amplitude_jitter", self.amplitude_jitter),
            ("duration_jitter", self.duration_jitter),
        ] {
            if !(0.0..1.0).contains(&j) {
                return Err(invalid(format!(
                    "device {}: {label} must lie in [0, 1)",
                    self.name
                )));
            }
        }
        if let SignatureShape::SpikedCycle { spike_fraction } = self.shape {
            if !(spike_fraction >= 0.0 && spike_fraction.is_finite()) {
                return Err(invalid(format!(
                    "device {}: spike_fraction must be nonnegative",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// A generation job: which devices, for how long, at what sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Household {
    pub devices: Vec<DeviceSpec>,
    pub days: u32,
    pub sample_period_seconds: u32,
    pub seed: u64,
}

/// Generator output: the normalized aggregate plus all raw ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedHousehold {
    pub aggregate: AggregateSignal,
    /// Aggregate in original units, formed as passive_truth + active_truth.
    pub aggregate_raw: Vec<f64>,
    pub per_device: Vec<(String, Vec<f64>)>,
    pub active_truth: Vec<f64>,
    pub passive_truth: Vec<f64>,
}

/// Four appliance classes that give a plausible household mix: an always-on
/// fridge plus three intermittent devices of very different durations. All
/// numbers are arbitrary but sized like real appliances (kW, minutes).
pub fn default_devices() -> Vec<DeviceSpec> {
    vec![
        DeviceSpec {
            name: "fridge".into(),
            shape: SignatureShape::SpikedCycle { spike_fraction: 0.8 },
            duration_minutes: (18, 30),
            amplitude: (0.10, 0.14),
            activations_per_day: 30.0,
            amplitude_jitter: 0.05,
            duration_jitter: 0.10,
            role: DeviceRole::Passive,
        },
        DeviceSpec {
            name: "heater".into(),
            shape: SignatureShape::Rectangular,
            duration_minutes: (45, 120),
            amplitude: (1.8, 2.2),
            activations_per_day: 3.0,
            amplitude_jitter: 0.05,
            duration_jitter: 0.15,
            role: DeviceRole::Active,
        },
        DeviceSpec {
            name: "washer".into(),
            shape: SignatureShape::DoublePulse,
            duration_minutes: (50, 90),
            amplitude: (1.6, 2.0),
            activations_per_day: 0.8,
            amplitude_jitter: 0.05,
            duration_jitter: 0.10,
            role: DeviceRole::Active,
        },
        DeviceSpec {
            name: "hair_dryer".into(),
            shape: SignatureShape::Ramp,
            duration_minutes: (4, 10),
            amplitude: (1.0, 1.4),
            activations_per_day: 1.5,
            amplitude_jitter: 0.10,
            duration_jitter: 0.20,
            role: DeviceRole::Active,
        },
    ]
}

/// Spiked compressor cycle: `amplitude·(1+spike_fraction)` on the first
/// sample, a plateau at `amplitude`, and a quarter-cosine decay over the
/// final tenth of the samples (at least one, at most all but the spike).
/// The maximum is always the spike sample.
pub fn spiked_cycle_signature(duration: usize, amplitude: f64, spike_fraction: f64) -> Vec<f64> {
    assert!(duration >= 2, "spiked cycle needs at least two samples");
    let mut out = vec![amplitude; duration];
    out[0] = amplitude * (1.0 + spike_fraction);
    let tail = (duration / 10).max(1).min(duration - 1);
    for t in 0..tail {
        let phase = std::f64::consts::FRAC_PI_2 * (t + 1) as f64 / (tail + 1) as f64;
        out[duration - tail + t] = amplitude * phase.cos();
    }
    out
}

/// Renders one activation of `shape` across `duration` samples, peaking at
/// `amplitude`.
pub fn render_signature(shape: &SignatureShape, duration: usize, amplitude: f64) -> Vec<f64> {
    assert!(duration >= 1, "signatures need at least one sample");
    match shape {
        SignatureShape::Rectangular => vec![amplitude; duration],
        SignatureShape::SpikedCycle { spike_fraction } => {
            if duration < 2 {
                vec![amplitude * (1.0 + spike_fraction)]
            } else {
                spiked_cycle_signature(duration, amplitude, *spike_fraction)
            }
        }
        SignatureShape::Ramp => (0..duration)
            .map(|t| amplitude * (t + 1) as f64 / duration as f64)
            .collect(),
        SignatureShape::DoublePulse => {
            let first = (duration * 2 / 5).max(1);
            let gap = (duration / 5).max(1);
            let mut out = vec![amplitude; duration];
            if first + gap < duration {
                for v in out.iter_mut().skip(first).take(gap) {
                    *v = 0.2 * amplitude;
                }
            }
            out
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn jittered(rng: &mut ChaCha8Rng, nominal: f64, jitter: f64) -> f64 {
    nominal * (1.0 + jitter * (2.0 * rng.random::<f64>() - 1.0))
}

/// Renders all devices of a household and sums them.
///
/// The aggregate is formed as `passive_truth + active_truth` samplewise,
/// with each truth series summed in device order, so the additivity
/// invariants hold by construction.
pub fn generate(household: &Household) -> Result<GeneratedHousehold> {
    if household.days == 0 {
        return Err(invalid("household must span at least one day"));
    }
    if household.sample_period_seconds == 0 || 86_400 % household.sample_period_seconds != 0 {
        return Err(invalid(
            "sample period must be positive and divide a day evenly",
        ));
    }
    if household.devices.is_empty() {
        return Err(invalid("household needs at least one device"));
    }
    for d in &household.devices {
        d.validate()?;
    }
    let samples_per_day = (86_400 / household.sample_period_seconds) as usize;
    let samples_per_minute = samples_per_day as f64 / (24.0 * 60.0);
    let total = samples_per_day * household.days as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(household.seed);
    let mut per_device: Vec<(String, Vec<f64>)> = Vec::with_capacity(household.devices.len());
    for spec in &household.devices {
        let mut series = vec![0.0; total];
        let nominal_minutes = if spec.duration_minutes.0 == spec.duration_minutes.1 {
            spec.duration_minutes.0
        } else {
            rng.random_range(spec.duration_minutes.0..=spec.duration_minutes.1)
        } as f64;
        let nominal_amplitude = uniform(&mut rng, spec.amplitude.0, spec.amplitude.1);
        let rate = spec.activations_per_day / samples_per_day as f64;
        if rate > 0.0 {
            let mut t = 0.0f64;
            let mut next_free = 0usize;
            loop {
                let u: f64 = rng.random();
                t += -(1.0 - u).ln() / rate;
                if !(t < total as f64) {
                    break;
                }
                let start = t as usize;
                if start < next_free {
                    continue;
                }
                let minutes = jittered(&mut rng, nominal_minutes, spec.duration_jitter);
                let duration = ((minutes * samples_per_minute).round() as usize).max(1);
                let amplitude = jittered(&mut rng, nominal_amplitude, spec.amplitude_jitter);
                let signature = render_signature(&spec.shape, duration, amplitude);
                for (offset, &v) in signature.iter().enumerate() {
                    let j = start + offset;
                    if j >= total {
                        break;
                    }
                    series[j] += v;
                }
                next_free = start + duration;
            }
        }
        per_device.push((spec.name.clone(), series));
    }

    let mut passive_truth = vec![0.0; total];
    let mut active_truth = vec![0.0; total];
    for (spec, (_, series)) in household.devices.iter().zip(&per_device) {
        let target = match spec.role {
            DeviceRole::Passive => &mut passive_truth,
            DeviceRole::Active => &mut active_truth,
        };
        for (acc, &v) in target.iter_mut().zip(series) {
            *acc += v;
        }
    }
    let aggregate_raw: Vec<f64> = passive_truth
        .iter()
        .zip(&active_truth)
        .map(|(p, a)| p + a)
        .collect();
    let aggregate = AggregateSignal::normalize(&aggregate_raw, household.sample_period_seconds)?;
    Ok(GeneratedHousehold {
        aggregate,
        aggregate_raw,
        per_device,
        active_truth,
        passive_truth,
    })
}
