//! Event-detection and reconstruction metrics.
//!
//! Activity detection works on binarized signals: both prediction and
//! ground truth are thresholded at a fraction of the ground truth's
//! maximum. Detection quality is the Matthews correlation coefficient with
//! a tolerance radius: true activity within `R` samples of a predicted
//! sample counts as a hit, so short alignment offsets are not penalized.
//! Reconstruction quality is a half-mean-squared error.

use crate::error::{invalid, Result};

/// A thresholded signal. Construction goes through [`binarize`] or
/// [`dilate`], which keep the entries boolean by type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinarySignal {
    bits: Vec<bool>,
}

impl BinarySignal {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// The four entries of the tolerant confusion matrix. True and false
/// positives are counted against the dilated truth; true and false
/// negatives against the raw truth, exactly as defined, so `tp + fn` can
/// exceed the number of truly active samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionCounts {
    pub true_positive: f64,
    pub true_negative: f64,
    pub false_positive: f64,
    pub false_negative: f64,
}

/// Thresholds both series at `fraction`·max(truth) and returns
/// `(truth_bits, pred_bits)`.
///
/// An all-zero ground truth makes the threshold 0, so every nonnegative
/// sample binarizes to 1; callers that can encounter empty channels should
/// detect that case up front and flag it instead of scoring it.
pub fn binarize_with_threshold(
    pred: &[f64],
    truth: &[f64],
    fraction: f64,
) -> Result<(BinarySignal, BinarySignal)> {
    if pred.len() != truth.len() {
        return Err(invalid(format!(
            "prediction length {} does not match truth length {}",
            pred.len(),
            truth.len()
        )));
    }
    let max = truth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let theta = fraction * max;
    let truth_bits = truth.iter().map(|&v| v >= theta).collect();
    let pred_bits = pred.iter().map(|&v| v >= theta).collect();
    Ok((BinarySignal::new(truth_bits), BinarySignal::new(pred_bits)))
}

/// [`binarize_with_threshold`] at the standard fraction 0.01.
pub fn binarize(pred: &[f64], truth: &[f64]) -> Result<(BinarySignal, BinarySignal)> {
    binarize_with_threshold(pred, truth, 0.01)
}

/// Windowed OR: output bit `i` is set iff some input bit within distance
/// `radius` is set. The window is clipped at the boundaries.
pub fn dilate(bits: &BinarySignal, radius: usize) -> BinarySignal {
    let m = bits.len();
    let mut ones_before = vec![0usize; m + 1];
    for (i, &b) in bits.bits().iter().enumerate() {
        ones_before[i + 1] = ones_before[i] + usize::from(b);
    }
    let out = (0..m)
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(m);
            ones_before[hi] > ones_before[lo]
        })
        .collect();
    BinarySignal::new(out)
}

/// Tolerant confusion counts at the given radius.
pub fn confusion_counts(
    truth_bits: &BinarySignal,
    pred_bits: &BinarySignal,
    radius: usize,
) -> Result<ConfusionCounts> {
    if truth_bits.len() != pred_bits.len() {
        return Err(invalid(format!(
            "bit-vector lengths differ: {} vs {}",
            truth_bits.len(),
            pred_bits.len()
        )));
    }
    let dilated = dilate(truth_bits, radius);
    let mut counts = ConfusionCounts {
        true_positive: 0.0,
        true_negative: 0.0,
        false_positive: 0.0,
        false_negative: 0.0,
    };
    for ((&u_raw, &u_dil), &pred) in truth_bits
        .bits()
        .iter()
        .zip(dilated.bits())
        .zip(pred_bits.bits())
    {
        match (pred, u_dil, u_raw) {
            (true, true, _) => counts.true_positive += 1.0,
            (true, false, _) => counts.false_positive += 1.0,
            (false, _, false) => counts.true_negative += 1.0,
            (false, _, true) => counts.false_negative += 1.0,
        }
    }
    Ok(counts)
}

/// Matthews correlation from the counts; any zero sum factor yields 0, the
/// "no relationship" value, since the quotient is undefined there.
pub fn mcc_from_counts(counts: &ConfusionCounts) -> f64 {
    let tp = counts.true_positive;
    let tn = counts.true_negative;
    let fp = counts.false_positive;
    let fneg = counts.false_negative;
    let factors = [tp + fp, tp + fneg, tn + fp, tn + fneg];
    if factors.iter().any(|&f| f == 0.0) {
        return 0.0;
    }
    (tp * tn - fp * fneg) / (factors[0] * factors[1] * factors[2] * factors[3]).sqrt()
}

/// Radius-tolerant Matthews correlation between binarized truth and
/// prediction. Radius 0 is the textbook MCC.
pub fn mcc_r(truth_bits: &BinarySignal, pred_bits: &BinarySignal, radius: usize) -> Result<f64> {
    Ok(mcc_from_counts(&confusion_counts(truth_bits, pred_bits, radius)?))
}

/// Half mean squared error: `(1/2m)·Σ (pred_i − truth_i)²`.
pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(invalid(format!(
            "prediction length {} does not match truth length {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(invalid("cannot score empty signals"));
    }
    let sum: f64 = pred
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / (2.0 * pred.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn bits(v: &[u8]) -> BinarySignal {
        BinarySignal::new(v.iter().map(|&b| b != 0).collect())
    }

    #[test]
    fn binarize_thresholds_at_a_hundredth_of_the_truth_maximum() {
        let truth = [0.0, 0.5, 1.0];
        let pred = [0.004, 0.02, 0.9];
        let (tb, pb) = binarize(&pred, &truth).unwrap();
        assert_eq!(tb, bits(&[0, 1, 1]));
        assert_eq!(pb, bits(&[0, 1, 1]));
    }

    #[test]
    fn binarize_agrees_on_identical_inputs() {
        let v = [0.3, 0.0, 2.0, 0.014];
        let (tb, pb) = binarize(&v, &v).unwrap();
        assert_eq!(tb, pb);
    }

    #[test]
    fn all_zero_truth_degenerates_to_all_ones() {
        let truth = [0.0, 0.0, 0.0];
        let pred = [0.0, 1.0, 0.5];
        let (tb, pb) = binarize(&pred, &truth).unwrap();
        assert_eq!(tb, bits(&[1, 1, 1]));
        assert_eq!(pb, bits(&[1, 1, 1]));
    }

    #[test]
    fn binarize_rejects_length_mismatch() {
        assert!(binarize(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn dilation_widens_by_the_radius() {
        assert_eq!(dilate(&bits(&[0, 1, 0, 0]), 0), bits(&[0, 1, 0, 0]));
        assert_eq!(dilate(&bits(&[0, 1, 0, 0]), 1), bits(&[1, 1, 1, 0]));
        assert_eq!(dilate(&bits(&[1, 1, 1, 1]), 3), bits(&[1, 1, 1, 1]));
        assert_eq!(dilate(&bits(&[1, 0, 0, 0, 0]), 2), bits(&[1, 1, 1, 0, 0]));
    }

    #[test]
    fn dilation_is_monotone_in_the_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..100 {
            let len = rng.random_range(1..40);
            let x = BinarySignal::new((0..len).map(|_| rng.random::<bool>()).collect());
            let r1 = rng.random_range(0..6usize);
            let r2 = rng.random_range(r1..8usize);
            let d1 = dilate(&x, r1);
            let d2 = dilate(&x, r2);
            for (a, b) in d1.bits().iter().zip(d2.bits()) {
                assert!(*b || !*a, "dilation lost a bit when the radius grew");
            }
        }
    }

    #[test]
    fn perfect_agreement_scores_one() {
        let x = bits(&[1, 0, 1, 1, 0, 0, 1]);
        assert_eq!(mcc_r(&x, &x, 0).unwrap(), 1.0);
    }

    #[test]
    fn fully_balanced_disagreement_scores_zero() {
        let truth = bits(&[1, 1, 0, 0]);
        let pred = bits(&[1, 0, 1, 0]);
        assert_eq!(mcc_r(&truth, &pred, 0).unwrap(), 0.0);
    }

    #[test]
    fn radius_one_rescues_a_neighboring_prediction() {
        let truth = bits(&[0, 1, 0, 0]);
        let pred = bits(&[0, 0, 1, 0]);
        let counts = confusion_counts(&truth, &pred, 1).unwrap();
        assert_eq!(counts.true_positive, 1.0);
        assert_eq!(counts.true_negative, 2.0);
        assert_eq!(counts.false_positive, 0.0);
        assert_eq!(counts.false_negative, 1.0);
        let expected = 2.0 / 12f64.sqrt();
        assert!((mcc_r(&truth, &pred, 1).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_counts_return_zero() {
        // No predicted positives at all: tp + fp = 0.
        let truth = bits(&[1, 0, 1]);
        let pred = bits(&[0, 0, 0]);
        assert_eq!(mcc_r(&truth, &pred, 0).unwrap(), 0.0);
    }

    #[test]
    fn mcc_stays_in_the_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..500 {
            let len = rng.random_range(1..32);
            let t = BinarySignal::new((0..len).map(|_| rng.random::<bool>()).collect());
            let p = BinarySignal::new((0..len).map(|_| rng.random::<bool>()).collect());
            let r = rng.random_range(0..4usize);
            let v = mcc_r(&t, &p, r).unwrap();
            assert!((-1.0..=1.0).contains(&v), "MCC {v} out of range");
        }
    }

    #[test]
    fn radius_zero_matches_a_brute_force_confusion_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..200 {
            let len = rng.random_range(1..=32);
            let t: Vec<bool> = (0..len).map(|_| rng.random()).collect();
            let p: Vec<bool> = (0..len).map(|_| rng.random()).collect();
            let (mut tp, mut tn, mut fp, mut fneg) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for (&a, &b) in t.iter().zip(&p) {
                match (a, b) {
                    (true, true) => tp += 1.0,
                    (false, false) => tn += 1.0,
                    (false, true) => fp += 1.0,
                    (true, false) => fneg += 1.0,
                }
            }
            let denom = (tp + fp) * (tp + fneg) * (tn + fp) * (tn + fneg);
            let expected = if denom == 0.0 {
                0.0
            } else {
                (tp * tn - fp * fneg) / denom.sqrt()
            };
            let got = mcc_r(&BinarySignal::new(t), &BinarySignal::new(p), 0).unwrap();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn mse_uses_the_half_mean_convention() {
        assert_eq!(mse(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(mse(&[0.7, 0.3], &[0.7, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn mse_is_symmetric_and_quadratically_homogeneous() {
        let a = [0.3, 1.7, 0.05, 2.4];
        let b = [0.1, 1.1, 0.0, 3.0];
        assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
        let a2: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let b2: Vec<f64> = b.iter().map(|v| 2.0 * v).collect();
        assert_eq!(mse(&a2, &b2).unwrap(), 4.0 * mse(&a, &b).unwrap());
    }
}
