//! Evaluation metrics for thresholded scores: error rates, cost, F-scores,
//! and the two AUC families. Class 1 is the positive class throughout.
//!
//! Counts convert exactly to `f64`, so every scalar metric is computed in
//! `f64` regardless of the score scalar type.

use thiserror::Error;

use crate::float::Float;
use crate::paradigms::{classify, ThresholdRule};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("label vectors differ in length: {expected} vs {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("label at index {index} is {found}, expected 0 or 1")]
    InvalidLabel { index: usize, found: u8 },
    #[error("no evaluated pairs")]
    EmptyInput,
    #[error("class {label} absent from the evaluated pairs")]
    MissingClass { label: u8 },
    #[error("cost weight {0} is not a positive finite number")]
    BadCost(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    /// Rows whose true label is 0.
    pub fn n_class0(&self) -> u64 {
        self.true_neg + self.false_pos
    }

    /// Rows whose true label is 1.
    pub fn n_class1(&self) -> u64 {
        self.true_pos + self.false_neg
    }
}

/// Overall risk plus the class-conditional error rates. A conditional rate
/// is `None` when its class is absent, never coerced to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates {
    pub risk: f64,
    /// P(predict 1 | class 0), estimated
    pub type1: Option<f64>,
    /// P(predict 0 | class 1), estimated
    pub type2: Option<f64>,
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch { expected: y_true.len(), got: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut cm = ConfusionMatrix { true_pos: 0, false_pos: 0, false_neg: 0, true_neg: 0 };
    for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        let bad = if t > 1 { Some(t) } else if p > 1 { Some(p) } else { None };
        if let Some(found) = bad {
            return Err(MetricsError::InvalidLabel { index: i, found });
        }
        match (t, p) {
            (0, 0) => cm.true_neg += 1,
            (0, _) => cm.false_pos += 1,
            (_, 0) => cm.false_neg += 1,
            _ => cm.true_pos += 1,
        }
    }
    Ok(cm)
}

pub fn error_rates(cm: &ConfusionMatrix) -> Result<ErrorRates, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let rate = |err: u64, class: u64| (class > 0).then(|| err as f64 / class as f64);
    Ok(ErrorRates {
        risk: (cm.false_pos + cm.false_neg) as f64 / total as f64,
        type1: rate(cm.false_pos, cm.n_class0()),
        type2: rate(cm.false_neg, cm.n_class1()),
    })
}

/// Empirical cost C0·π̂0·R̂0 + C1·π̂1·R̂1, computed in the algebraically
/// equal form (C0·FP + C1·FN)/n so that C0=C1=1 reproduces the risk bit for
/// bit.
pub fn cost(cm: &ConfusionMatrix, c0: f64, c1: f64) -> Result<f64, MetricsError> {
    for c in [c0, c1] {
        if !(c.is_finite() && c > 0.0) {
            return Err(MetricsError::BadCost(c));
        }
    }
    if cm.n_class0() == 0 {
        return Err(MetricsError::MissingClass { label: 0 });
    }
    if cm.n_class1() == 0 {
        return Err(MetricsError::MissingClass { label: 1 });
    }
    Ok((c0 * cm.false_pos as f64 + c1 * cm.false_neg as f64) / cm.total() as f64)
}

/// F-score for the chosen positive class, with undefined or zero precision
/// or recall collapsing to 0.
pub fn f_score(cm: &ConfusionMatrix, positive_class: u8) -> f64 {
    assert!(positive_class <= 1, "positive_class must be 0 or 1");
    let (hit, miss_p, miss_r) = if positive_class == 1 {
        (cm.true_pos, cm.false_pos, cm.false_neg)
    } else {
        (cm.true_neg, cm.false_neg, cm.false_pos)
    };
    if hit == 0 {
        return 0.0;
    }
    let precision = hit as f64 / (hit + miss_p) as f64;
    let recall = hit as f64 / (hit + miss_r) as f64;
    2.0 * precision * recall / (precision + recall)
}

fn checked_labels(scores_len: usize, y_true: &[u8]) -> Result<(u64, u64), MetricsError> {
    if scores_len != y_true.len() {
        return Err(MetricsError::LengthMismatch { expected: scores_len, got: y_true.len() });
    }
    if y_true.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut counts = [0u64; 2];
    for (i, &l) in y_true.iter().enumerate() {
        if l > 1 {
            return Err(MetricsError::InvalidLabel { index: i, found: l });
        }
        counts[usize::from(l)] += 1;
    }
    Ok((counts[0], counts[1]))
}

/// Probability that a random class-1 score exceeds a random class-0 score,
/// ties at half credit (the Mann–Whitney form of the ROC area).
pub fn roc_auc<F: Float>(scores: &[F], y_true: &[u8]) -> Result<f64, MetricsError> {
    let (n0, n1) = checked_labels(scores.len(), y_true)?;
    if n0 == 0 {
        return Err(MetricsError::MissingClass { label: 0 });
    }
    if n1 == 0 {
        return Err(MetricsError::MissingClass { label: 1 });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a].to_f64().unwrap_or(f64::NAN).total_cmp(&scores[b].to_f64().unwrap_or(f64::NAN))
    });
    // average 1-based ranks over tie runs, summed for class 1
    let mut rank_sum1 = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if y_true[idx] == 1 {
                rank_sum1 += avg_rank;
            }
        }
        i = j;
    }
    let n1f = n1 as f64;
    let u1 = rank_sum1 - n1f * (n1f + 1.0) / 2.0;
    Ok(u1 / (n0 as f64 * n1f))
}

/// Area under the precision-recall step curve by the average-precision
/// rule: thresholds at each distinct score, rectangles of width Δrecall.
/// Class 0 is scored by the negated scores.
pub fn pr_auc<F: Float>(
    scores: &[F],
    y_true: &[u8],
    positive_class: u8,
) -> Result<f64, MetricsError> {
    assert!(positive_class <= 1, "positive_class must be 0 or 1");
    let (n0, n1) = checked_labels(scores.len(), y_true)?;
    let n_pos = if positive_class == 1 { n1 } else { n0 };
    if n_pos == 0 {
        return Err(MetricsError::MissingClass { label: positive_class });
    }
    let signed: Vec<f64> = scores
        .iter()
        .map(|s| {
            let v = s.to_f64().unwrap_or(f64::NAN);
            if positive_class == 1 {
                v
            } else {
                -v
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..signed.len()).collect();
    order.sort_by(|&a, &b| signed[b].total_cmp(&signed[a]));
    let mut area = 0.0;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && signed[order[j]] == signed[order[i]] {
            j += 1;
        }
        let mut d_tp = 0u64;
        for &idx in &order[i..j] {
            if y_true[idx] == positive_class {
                d_tp += 1;
            }
        }
        let d_fp = (j - i) as u64 - d_tp;
        tp += d_tp;
        fp += d_fp;
        if d_tp > 0 {
            let precision = tp as f64 / (tp + fp) as f64;
            area += d_tp as f64 / n_pos as f64 * precision;
        }
        i = j;
    }
    Ok(area)
}

/// Everything the harness records for one evaluated cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub risk: f64,
    pub type1: f64,
    pub type2: f64,
    pub cost: f64,
    pub f0: f64,
    pub f1: f64,
    pub roc_auc: f64,
    pub pr_auc0: f64,
    pub pr_auc1: f64,
    pub pi0_hat: f64,
    pub pi1_hat: f64,
}

/// Thresholds the scores with `rule` and assembles the full metric set.
/// Requires both classes among `y_true`.
pub fn full_report<F: Float>(
    scores: &[F],
    rule: &ThresholdRule<F>,
    y_true: &[u8],
    c0: f64,
    c1: f64,
) -> Result<MetricsReport, MetricsError> {
    let y_pred = classify(scores, rule);
    let cm = confusion(y_true, &y_pred)?;
    if cm.n_class0() == 0 {
        return Err(MetricsError::MissingClass { label: 0 });
    }
    if cm.n_class1() == 0 {
        return Err(MetricsError::MissingClass { label: 1 });
    }
    let rates = error_rates(&cm)?;
    let pi0_hat = cm.n_class0() as f64 / cm.total() as f64;
    Ok(MetricsReport {
        risk: rates.risk,
        type1: rates.type1.expect("class 0 present"),
        type2: rates.type2.expect("class 1 present"),
        cost: cost(&cm, c0, c1)?,
        f0: f_score(&cm, 0),
        f1: f_score(&cm, 1),
        roc_auc: roc_auc(scores, y_true)?,
        pr_auc0: pr_auc(scores, y_true, 0)?,
        pr_auc1: pr_auc(scores, y_true, 1)?,
        pi0_hat,
        pi1_hat: 1.0 - pi0_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paradigms::{Paradigm, fixed_threshold};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_cm() -> ConfusionMatrix {
        // y = (0,0,0,1,1), prediction = (0,1,0,1,0)
        confusion(&[0, 0, 0, 1, 1], &[0, 1, 0, 1, 0]).unwrap()
    }

    #[test]
    fn confusion_counts_by_hand() {
        let cm = sample_cm();
        assert_eq!(cm, ConfusionMatrix { true_pos: 1, false_pos: 1, false_neg: 1, true_neg: 2 });
    }

    #[test]
    fn perfect_and_inverted_predictions() {
        let y = [0, 1, 0, 1];
        let cm = confusion(&y, &y).unwrap();
        assert_eq!((cm.false_pos, cm.false_neg), (0, 0));
        let flipped: Vec<u8> = y.iter().map(|&v| 1 - v).collect();
        let cm = confusion(&y, &flipped).unwrap();
        assert_eq!((cm.true_pos, cm.true_neg), (0, 0));
    }

    #[test]
    fn confusion_rejects_bad_input() {
        assert_eq!(
            confusion(&[0, 1], &[0]),
            Err(MetricsError::LengthMismatch { expected: 2, got: 1 })
        );
        assert_eq!(confusion(&[], &[]), Err(MetricsError::EmptyInput));
        assert_eq!(
            confusion(&[0, 2], &[0, 0]),
            Err(MetricsError::InvalidLabel { index: 1, found: 2 })
        );
    }

    #[test]
    fn error_rates_by_hand() {
        let r = error_rates(&sample_cm()).unwrap();
        assert_eq!(r.risk, 0.4);
        assert_eq!(r.type1, Some(1.0 / 3.0));
        assert_eq!(r.type2, Some(0.5));
    }

    #[test]
    fn absent_class_leaves_rate_undefined() {
        let cm = ConfusionMatrix { true_pos: 3, false_pos: 0, false_neg: 1, true_neg: 0 };
        let r = error_rates(&cm).unwrap();
        assert_eq!(r.type1, None);
        assert_eq!(r.type2, Some(0.25));
        assert_eq!(r.risk, 0.25);
    }

    #[test]
    fn cost_by_hand_and_risk_reduction() {
        let cm = sample_cm();
        let c = cost(&cm, 4.0, 1.0).unwrap();
        assert!((c - 1.0).abs() <= 1e-12);
        assert_eq!(cost(&cm, 1.0, 1.0).unwrap(), error_rates(&cm).unwrap().risk);
        let clean = ConfusionMatrix { true_pos: 2, false_pos: 0, false_neg: 0, true_neg: 2 };
        assert_eq!(cost(&clean, 7.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn cost_validates_inputs() {
        let cm = sample_cm();
        assert_eq!(cost(&cm, 0.0, 1.0), Err(MetricsError::BadCost(0.0)));
        assert_eq!(cost(&cm, 1.0, f64::NAN).is_err(), true);
        let one_class = ConfusionMatrix { true_pos: 2, false_pos: 0, false_neg: 1, true_neg: 0 };
        assert_eq!(cost(&one_class, 1.0, 1.0), Err(MetricsError::MissingClass { label: 0 }));
    }

    #[test]
    fn f_scores_by_hand() {
        let cm = sample_cm();
        assert!((f_score(&cm, 0) - 2.0 / 3.0).abs() <= 1e-12);
        assert!((f_score(&cm, 1) - 0.5).abs() <= 1e-12);
        let no_tn = ConfusionMatrix { true_pos: 2, false_pos: 1, false_neg: 1, true_neg: 0 };
        assert_eq!(f_score(&no_tn, 0), 0.0);
    }

    #[test]
    fn risk_identity_exact_over_small_matrices() {
        for tp in 0..8u64 {
            for fp in 0..8u64 {
                for fneg in 0..8u64 {
                    for tn in 0..8u64 {
                        let cm = ConfusionMatrix {
                            true_pos: tp,
                            false_pos: fp,
                            false_neg: fneg,
                            true_neg: tn,
                        };
                        let (n0, n1) = (cm.n_class0(), cm.n_class1());
                        if n0 == 0 || n1 == 0 {
                            continue;
                        }
                        let n = cm.total();
                        // rational identity (fp+fn)/n = π0·R0 + π1·R1, both
                        // sides over the common denominator n·n0·n1
                        let lhs = u128::from(fp + fneg) * u128::from(n0) * u128::from(n1);
                        let rhs = u128::from(n0) * u128::from(fp) * u128::from(n1)
                            + u128::from(n1) * u128::from(fneg) * u128::from(n0);
                        assert_eq!(lhs, rhs);
                        let r = error_rates(&cm).unwrap();
                        let pi0 = n0 as f64 / n as f64;
                        let float_sum =
                            pi0 * r.type1.unwrap() + (1.0 - pi0) * r.type2.unwrap();
                        assert!((r.risk - float_sum).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn roc_auc_frozen_example() {
        let auc = roc_auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap();
        assert!((auc - 0.75).abs() <= 1e-12);
    }

    #[test]
    fn roc_auc_extremes() {
        assert_eq!(roc_auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.5, 0.5, 0.5, 0.5], &[0, 0, 1, 1]).unwrap(), 0.5);
        assert_eq!(
            roc_auc(&[0.5, 0.6], &[1, 1]),
            Err(MetricsError::MissingClass { label: 0 })
        );
    }

    #[test]
    fn roc_auc_monotone_invariance_and_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scores: Vec<f64> = (0..40).map(|_| rng.random::<f64>()).collect();
        let y: Vec<u8> = (0..40).map(|i| u8::from(i % 3 == 0)).collect();
        let auc = roc_auc(&scores, &y).unwrap();
        let warped: Vec<f64> = scores.iter().map(|s| (4.0 * s).exp()).collect();
        assert!((roc_auc(&warped, &y).unwrap() - auc).abs() <= 1e-12);
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        assert!((roc_auc(&negated, &y).unwrap() + auc - 1.0).abs() <= 1e-12);
    }

    /// Trapezoidal integration of the empirical ROC curve, sweeping
    /// thresholds over distinct scores in descending order.
    fn roc_trapezoid(scores: &[f64], y: &[u8]) -> f64 {
        let mut thresholds: Vec<f64> = scores.to_vec();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let n1 = y.iter().filter(|&&l| l == 1).count() as f64;
        let n0 = y.len() as f64 - n1;
        let mut points = vec![(0.0, 0.0)];
        for t in thresholds.iter().rev() {
            let mut tp = 0.0;
            let mut fp = 0.0;
            for (s, &l) in scores.iter().zip(y) {
                if s >= t {
                    if l == 1 {
                        tp += 1.0;
                    } else {
                        fp += 1.0;
                    }
                }
            }
            points.push((fp / n0, tp / n1));
        }
        points.push((1.0, 1.0));
        points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum()
    }

    /// Average-precision over every distinct score as a threshold, with
    /// counts recomputed from scratch at each threshold.
    fn pr_sweep(scores: &[f64], y: &[u8], positive: u8) -> f64 {
        let signed: Vec<f64> =
            scores.iter().map(|&s| if positive == 1 { s } else { -s }).collect();
        let mut thresholds = signed.clone();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let n_pos = y.iter().filter(|&&l| l == positive).count() as f64;
        let mut area = 0.0;
        let mut prev_recall = 0.0;
        for t in thresholds.iter().rev() {
            let mut tp = 0.0;
            let mut predicted = 0.0;
            for (s, &l) in signed.iter().zip(y) {
                if s >= t {
                    predicted += 1.0;
                    if l == positive {
                        tp += 1.0;
                    }
                }
            }
            let recall = tp / n_pos;
            if recall > prev_recall {
                area += (recall - prev_recall) * (tp / predicted);
                prev_recall = recall;
            }
        }
        area
    }

    #[test]
    fn auc_matches_independent_oracles_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..60 {
            let n = rng.random_range(2..120);
            let mut scores: Vec<f64> = Vec::with_capacity(n);
            let mut y: Vec<u8> = Vec::with_capacity(n);
            for i in 0..n {
                // quantized scores force plenty of ties
                scores.push((rng.random::<f64>() * 8.0).round() / 8.0);
                y.push(if i < 2 { i as u8 } else { u8::from(rng.random::<f64>() < 0.4) });
            }
            let auc = roc_auc(&scores, &y).unwrap();
            assert!(
                (auc - roc_trapezoid(&scores, &y)).abs() <= 1e-12,
                "trial {trial}: ROC mismatch"
            );
            for class in [0u8, 1] {
                let ap = pr_auc(&scores, &y, class).unwrap();
                assert!(
                    (ap - pr_sweep(&scores, &y, class)).abs() <= 1e-12,
                    "trial {trial}: PR mismatch for class {class}"
                );
            }
        }
    }

    #[test]
    fn pr_auc_frozen_examples() {
        let scores = [0.1, 0.4, 0.35, 0.8];
        let y = [0u8, 0, 1, 1];
        // thresholds descending: 0.8 gives precision 1 at recall 1/2; 0.35
        // gives precision 2/3 at recall 1; the rectangle sum is 5/6
        let ap = pr_auc(&scores, &y, 1).unwrap();
        assert!((ap - 5.0 / 6.0).abs() <= 1e-12);
        assert_eq!(pr_auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1], 1).unwrap(), 1.0);
        // single PR point at (recall 1, precision = prevalence)
        let ap = pr_auc(&[0.5, 0.5, 0.5, 0.5], &[0, 1, 1, 1], 1).unwrap();
        assert!((ap - 0.75).abs() <= 1e-12);
    }

    #[test]
    fn pr_auc_class_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let scores: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let y: Vec<u8> = (0..50).map(|i| u8::from(i % 4 != 0)).collect();
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        let flipped: Vec<u8> = y.iter().map(|&l| 1 - l).collect();
        let a = pr_auc(&scores, &y, 0).unwrap();
        let b = pr_auc(&negated, &flipped, 1).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn full_report_on_a_perfect_scorer() {
        let y = [0u8, 1, 0, 1, 1];
        let scores: Vec<f64> = y.iter().map(|&l| f64::from(l)).collect();
        let rule = fixed_threshold(&Paradigm::Cc).unwrap();
        let rep = full_report(&scores, &rule, &y, 2.0, 1.0).unwrap();
        assert_eq!(rep.risk, 0.0);
        assert_eq!((rep.type1, rep.type2), (0.0, 0.0));
        assert_eq!(rep.cost, 0.0);
        assert_eq!((rep.f0, rep.f1), (1.0, 1.0));
        assert_eq!((rep.roc_auc, rep.pr_auc0, rep.pr_auc1), (1.0, 1.0, 1.0));
        assert_eq!(rep.pi0_hat + rep.pi1_hat, 1.0);
        assert_eq!(rep.pi0_hat, 0.4);
    }

    #[test]
    fn full_report_risk_identity_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let scores: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let y: Vec<u8> = (0..200).map(|_| u8::from(rng.random::<f64>() < 0.3)).collect();
        let rule = fixed_threshold::<f64>(&Paradigm::Cs { cost0: 3.0, cost1: 1.0 }).unwrap();
        let rep = full_report(&scores, &rule, &y, 3.0, 1.0).unwrap();
        let identity = rep.pi0_hat * rep.type1 + rep.pi1_hat * rep.type2;
        assert!((rep.risk - identity).abs() <= 1e-12);
        assert_eq!(
            full_report(&scores[..4], &rule, &[1, 1, 1, 1], 1.0, 1.0),
            Err(MetricsError::MissingClass { label: 0 })
        );
    }
}
