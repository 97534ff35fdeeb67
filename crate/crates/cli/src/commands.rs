//! The three pipeline stages: generate, disaggregate, evaluate.

use std::path::Path;

use disagg_core::datagen::{self, DeviceRole};
use disagg_core::{ipalm, metrics, AggregateSignal};

use crate::config::{Mode, RunConfig};
use crate::csv_io;
use crate::error::{usage, CliError};

pub fn cmd_generate(config: &RunConfig) -> Result<(), CliError> {
    let household = config.household()?;
    let data = datagen::generate(&household)?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;

    csv_io::write_series(&dir.join("aggregate.csv"), &data.aggregate_raw)?;
    csv_io::write_series(&dir.join("truth_active.csv"), &data.active_truth)?;
    csv_io::write_series(&dir.join("truth_passive.csv"), &data.passive_truth)?;
    for (name, series) in &data.per_device {
        csv_io::write_series(&dir.join(format!("truth_{name}.csv")), series)?;
    }
    println!(
        "generated {} samples for {} devices into {}",
        data.aggregate_raw.len(),
        data.per_device.len(),
        dir.display()
    );
    Ok(())
}

pub fn cmd_disaggregate(config: &RunConfig) -> Result<(), CliError> {
    let aggregate_path = config.input_dir.join("aggregate.csv");
    let raw = csv_io::read_series(&aggregate_path)?;
    let u = AggregateSignal::normalize(&raw, config.sample_period_seconds)?;

    let solver_config = config.solver_config();
    let mut trace = Vec::with_capacity(solver_config.max_iter + 1);
    let result = ipalm::solve_with_observer(&u, &solver_config, |iter, psi, data_term| {
        trace.push((iter, psi, data_term));
    })?;

    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;

    let channels = ipalm::reconstruct_channels(&result);
    let m = u.len();
    let scale = u.scale();
    let mut active = vec![0.0; m];
    let mut passive = vec![0.0; m];
    for (i, channel) in channels.iter().enumerate() {
        let denormalized: Vec<f64> = channel.iter().map(|v| v * scale).collect();
        if i == 0 {
            passive.copy_from_slice(&denormalized);
        } else {
            for (a, v) in active.iter_mut().zip(&denormalized) {
                *a += v;
            }
        }
        csv_io::write_series(&dir.join(format!("pred_channel_{}.csv", i + 1)), &denormalized)?;
    }
    csv_io::write_series(&dir.join("pred_active.csv"), &active)?;
    csv_io::write_series(&dir.join("pred_passive.csv"), &passive)?;
    csv_io::write_atoms(&dir.join("atoms.csv"), result.atoms.kernels())?;
    csv_io::write_convergence(&dir.join("convergence.csv"), &trace)?;
    println!(
        "solved in {} iterations (converged: {}), final objective {:.6e}",
        result.iterations, result.converged, result.final_objective
    );
    Ok(())
}

/// One scored channel pair in the evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub channel: String,
    pub mcc: f64,
    pub mse: f64,
    pub degenerate: bool,
}

pub fn cmd_evaluate(config: &RunConfig) -> Result<Vec<Score>, CliError> {
    let dir = &config.input_dir;
    let pairs: Vec<(String, Vec<f64>, Vec<f64>)> = match config.mode {
        Mode::Activity => {
            let mut pairs = Vec::new();
            for name in ["active", "passive"] {
                let pred = csv_io::read_series(&dir.join(format!("pred_{name}.csv")))?;
                let truth = csv_io::read_series(&dir.join(format!("truth_{name}.csv")))?;
                pairs.push((name.to_string(), pred, truth));
            }
            pairs
        }
        Mode::Multichannel => multichannel_pairs(config, dir)?,
    };

    let aggregate = csv_io::read_series(&dir.join("aggregate.csv"))?;
    let scale = aggregate.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(scale > 0.0) {
        return Err(usage("aggregate signal has no positive samples to scale by"));
    }

    let mut scores = Vec::new();
    for (channel, pred, truth) in &pairs {
        if pred.len() != truth.len() {
            return Err(usage(format!(
                "channel {channel}: prediction has {} samples but truth has {}",
                pred.len(),
                truth.len()
            )));
        }
        scores.push(score_pair(channel, pred, truth, scale, config)?);
    }

    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", config.output_dir.display())))?;
    write_report(&config.output_dir.join("report.csv"), &scores)?;

    println!("channel          MCC_{:<3} MSE x 1e4", config.radius);
    for s in &scores {
        let flag = if s.degenerate { "  (degenerate)" } else { "" };
        println!(
            "{:<16} {:>7.4} {:>10.4}{flag}",
            s.channel,
            s.mcc,
            s.mse * 1e4
        );
    }
    Ok(scores)
}

/// Channel 1 scores against the passive group; the remaining channels are
/// assigned to active devices by minimizing the total normalized MSE over
/// all injective assignments.
fn multichannel_pairs(
    config: &RunConfig,
    dir: &Path,
) -> Result<Vec<(String, Vec<f64>, Vec<f64>)>, CliError> {
    let mut pairs = Vec::new();
    let passive_pred = csv_io::read_series(&dir.join("pred_channel_1.csv"))?;
    let passive_truth = csv_io::read_series(&dir.join("truth_passive.csv"))?;
    pairs.push(("passive".to_string(), passive_pred, passive_truth));

    let household = config.household()?;
    let active_names: Vec<&str> = household
        .devices
        .iter()
        .filter(|d| d.role == DeviceRole::Active)
        .map(|d| d.name.as_str())
        .collect();
    let mut truths = Vec::new();
    for name in &active_names {
        truths.push(csv_io::read_series(&dir.join(format!("truth_{name}.csv")))?);
    }
    let mut preds = Vec::new();
    for i in 2..=config.num_channels {
        preds.push(csv_io::read_series(
            &dir.join(format!("pred_channel_{i}.csv")),
        )?);
    }
    if truths.len().max(preds.len()) > 20 {
        return Err(usage(
            "multichannel matching supports at most 20 channels per side",
        ));
    }

    let assignment = best_assignment(&preds, &truths)?;
    for (pred_idx, truth_idx) in assignment {
        pairs.push((
            format!("ch{}:{}", pred_idx + 2, active_names[truth_idx]),
            preds[pred_idx].clone(),
            truths[truth_idx].clone(),
        ));
    }
    Ok(pairs)
}

/// Minimum-cost injective assignment of predictions to truths, by bitmask
/// dynamic programming over the truth set. Returns (pred, truth) index
/// pairs; when counts differ, the surplus side stays unmatched.
fn best_assignment(
    preds: &[Vec<f64>],
    truths: &[Vec<f64>],
) -> Result<Vec<(usize, usize)>, CliError> {
    let np = preds.len();
    let nt = truths.len();
    if np == 0 || nt == 0 {
        return Ok(Vec::new());
    }
    let mut cost = vec![vec![0.0f64; nt]; np];
    for (i, pred) in preds.iter().enumerate() {
        for (j, truth) in truths.iter().enumerate() {
            if pred.len() != truth.len() {
                return Err(usage(format!(
                    "prediction channel {} has {} samples but truth {} has {}",
                    i + 2,
                    pred.len(),
                    j,
                    truth.len()
                )));
            }
            cost[i][j] = metrics::mse(pred, truth)?;
        }
    }

    // The smaller side is consumed in order; the mask ranges over the
    // larger side, so the DP also chooses which of its channels match.
    let flip = np > nt;
    let (rows, cols) = if flip { (nt, np) } else { (np, nt) };
    let at = |i: usize, j: usize| if flip { cost[j][i] } else { cost[i][j] };

    // dp[mask] = least total cost after pairing the first popcount(mask)
    // ordered channels with exactly the masked channels.
    let full = 1usize << cols;
    let mut dp = vec![f64::INFINITY; full];
    let mut parent = vec![usize::MAX; full];
    dp[0] = 0.0;
    let mut order: Vec<usize> = (0..full).collect();
    order.sort_by_key(|m| m.count_ones());
    for &mask in &order {
        if !dp[mask].is_finite() {
            continue;
        }
        let i = mask.count_ones() as usize;
        if i >= rows {
            continue;
        }
        for j in 0..cols {
            let bit = 1usize << j;
            if mask & bit != 0 {
                continue;
            }
            let next = mask | bit;
            let candidate = dp[mask] + at(i, j);
            if candidate < dp[next] {
                dp[next] = candidate;
                parent[next] = j;
            }
        }
    }
    let mut best_mask = 0;
    let mut best = f64::INFINITY;
    for mask in 0..full {
        if mask.count_ones() as usize == rows && dp[mask] < best {
            best = dp[mask];
            best_mask = mask;
        }
    }
    let mut assignment = Vec::with_capacity(rows);
    let mut mask = best_mask;
    while mask != 0 {
        let j = parent[mask];
        let i = mask.count_ones() as usize - 1;
        assignment.push(if flip { (j, i) } else { (i, j) });
        mask &= !(1 << j);
    }
    assignment.reverse();
    Ok(assignment)
}

/// Binarization thresholds come from each channel's own truth maximum, so
/// activity detection is scale-free per channel. Errors are mean squared
/// differences after dividing both series by `scale`, the aggregate peak,
/// so every channel's MSE shares one unit and small channels are not
/// inflated by their own normalization.
fn score_pair(
    channel: &str,
    pred: &[f64],
    truth: &[f64],
    scale: f64,
    config: &RunConfig,
) -> Result<Score, CliError> {
    let (truth_bits, pred_bits) =
        metrics::binarize_with_threshold(pred, truth, config.threshold_fraction)?;
    let mcc = metrics::mcc_r(&truth_bits, &pred_bits, config.radius)?;
    let mse = 2.0 * metrics::mse(pred, truth)? / (scale * scale);
    let constant = |bits: &metrics::BinarySignal| {
        bits.bits().iter().all(|&b| b) || bits.bits().iter().all(|&b| !b)
    };
    Ok(Score {
        channel: channel.to_string(),
        mcc,
        mse,
        degenerate: constant(&truth_bits) || constant(&pred_bits),
    })
}

fn write_report(path: &Path, scores: &[Score]) -> Result<(), CliError> {
    use std::io::Write;
    let file = std::fs::File::create(path)
        .map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "channel,mcc_r,mse_x1e4,degenerate")?;
    for s in scores {
        writeln!(
            out,
            "{},{:.6},{:.6e},{}",
            s.channel,
            s.mcc,
            s.mse * 1e4,
            s.degenerate
        )?;
    }
    Ok(())
}
