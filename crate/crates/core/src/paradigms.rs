//! Thresholding paradigms for score-based binary rules.
//!
//! A fitted learner emits scores in [0,1]; a paradigm turns them into labels
//! by fixing the cutoff:
//!
//! * accuracy-driven (`cc`): cutoff 1/2;
//! * cost-weighted (`cs`): cutoff `c0 / (c0 + c1)` where `c0` prices a
//!   class-0 miss and `c1` a class-1 miss;
//! * type-I-constrained (`np`): the cutoff is an order statistic of scores on
//!   held-out class-0 rows, picked so that `P(type-I error > alpha) <= delta`
//!   regardless of the score distribution.
//!
//! For the constrained paradigm the intended composition is: split the
//! training class-0 rows in two at random, resample and fit on {first half,
//! all class-1 rows}, then calibrate the cutoff on the untouched second half.
//! [`np_split`] performs the split; classification is always by strict
//! inequality (`score > cutoff` reads class 1).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::LabeledDataset;
use crate::float::{cast, Float};
use crate::learners::LearnerError;
use crate::matrix::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum ParadigmError {
    #[error("paradigm {found} has no fixed threshold")]
    WrongParadigm { found: &'static str },
    #[error(
        "{n} held-out class-0 rows cannot certify type-I control at alpha={alpha}, delta={delta}"
    )]
    SampleTooSmall { n: usize, alpha: f64, delta: f64 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Scoring(#[from] LearnerError),
}

/// How labels are derived from scores.
#[derive(Debug, Clone, PartialEq)]
pub enum Paradigm {
    /// Accuracy-driven: fixed cutoff 1/2.
    Cc,
    /// Cost-weighted: fixed cutoff `cost0 / (cost0 + cost1)`.
    Cs { cost0: f64, cost1: f64 },
    /// Type-I-error-constrained at level `alpha` with violation budget `delta`.
    Np { alpha: f64, delta: f64 },
}

impl Paradigm {
    pub fn tag(&self) -> &'static str {
        match self {
            Paradigm::Cc => "cc",
            Paradigm::Cs { .. } => "cs",
            Paradigm::Np { .. } => "np",
        }
    }
}

/// Where a cutoff came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleSource {
    Fixed,
    /// `rank`-th smallest of `n` held-out class-0 scores.
    OrderStatistic { rank: usize, n: usize },
}

/// A classification rule: label 1 iff `score > cutoff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRule<F> {
    pub cutoff: F,
    pub source: RuleSource,
}

/// Cutoff of the two fixed-threshold paradigms.
pub fn fixed_threshold<F: Float>(paradigm: &Paradigm) -> Result<ThresholdRule<F>, ParadigmError> {
    let cutoff = match paradigm {
        Paradigm::Cc => 0.5,
        Paradigm::Cs { cost0, cost1 } => {
            if !(cost0.is_finite() && cost1.is_finite() && *cost0 > 0.0 && *cost1 > 0.0) {
                return Err(ParadigmError::BadParameter(format!(
                    "cost weights must be finite and positive, got ({cost0}, {cost1})"
                )));
            }
            cost0 / (cost0 + cost1)
        }
        Paradigm::Np { .. } => return Err(ParadigmError::WrongParadigm { found: "np" }),
    };
    Ok(ThresholdRule { cutoff: cast::<F>(cutoff), source: RuleSource::Fixed })
}

fn check_levels(alpha: f64, delta: f64) -> Result<(), ParadigmError> {
    for (name, v) in [("alpha", alpha), ("delta", delta)] {
        if !v.is_finite() || v <= 0.0 || v >= 1.0 {
            return Err(ParadigmError::BadParameter(format!("{name} must lie in (0,1), got {v}")));
        }
    }
    Ok(())
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Smallest rank `k` such that taking the `k`-th smallest of `n` class-0
/// scores as cutoff bounds the type-I violation probability by `delta`:
/// the binomial tail `sum_{j=k}^{n} C(n,j) (1-alpha)^j alpha^(n-j)` is the
/// violation bound, and the sum is accumulated exactly in log space.
pub fn np_order_statistic_rank(
    n: usize,
    alpha: f64,
    delta: f64,
) -> Result<usize, ParadigmError> {
    check_levels(alpha, delta)?;
    if n == 0 {
        return Err(ParadigmError::SampleTooSmall { n, alpha, delta });
    }
    let ln_alpha = alpha.ln();
    let ln_beta = (1.0 - alpha).ln();
    let ln_delta = delta.ln();
    let ln_choose = |n: usize, k: usize| {
        libm::lgamma((n + 1) as f64) - libm::lgamma((k + 1) as f64)
            - libm::lgamma((n - k + 1) as f64)
    };
    let mut ln_sum = f64::NEG_INFINITY;
    let mut best = None;
    for k in (1..=n).rev() {
        let ln_term = ln_choose(n, k) + k as f64 * ln_beta + (n - k) as f64 * ln_alpha;
        ln_sum = log_add_exp(ln_sum, ln_term);
        if ln_sum <= ln_delta {
            best = Some(k);
        } else {
            break;
        }
    }
    best.ok_or(ParadigmError::SampleTooSmall { n, alpha, delta })
}

/// Calibrates a cutoff from held-out class-0 scores.
pub fn np_threshold_from_scores<F: Float>(
    scores: &[F],
    alpha: f64,
    delta: f64,
) -> Result<ThresholdRule<F>, ParadigmError> {
    let rank = np_order_statistic_rank(scores.len(), alpha, delta)?;
    let mut sorted: Vec<F> = scores.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("scores must not be NaN"));
    Ok(ThresholdRule {
        cutoff: sorted[rank - 1],
        source: RuleSource::OrderStatistic { rank, n: scores.len() },
    })
}

/// Scores `heldout_class0` with the model and calibrates the cutoff.
pub fn np_calibrate<F: Float>(
    model: &crate::learners::ScoringModel<F>,
    heldout_class0: &Matrix<F>,
    alpha: f64,
    delta: f64,
) -> Result<ThresholdRule<F>, ParadigmError> {
    check_levels(alpha, delta)?;
    let scores = model.score(heldout_class0)?;
    np_threshold_from_scores(&scores, alpha, delta)
}

/// Splits the class-0 rows of `train` at random: a `ratio` share goes into
/// the returned fit dataset (together with every class-1 row, original
/// order), the rest comes back as held-out class-0 features for calibration.
pub fn np_split<F: Float, R: Rng + ?Sized>(
    train: &LabeledDataset<F>,
    ratio: f64,
    rng: &mut R,
) -> Result<(LabeledDataset<F>, Matrix<F>), ParadigmError> {
    if !ratio.is_finite() || ratio <= 0.0 || ratio >= 1.0 {
        return Err(ParadigmError::BadParameter(format!(
            "split ratio must lie in (0,1), got {ratio}"
        )));
    }
    let mut class0 = train.class_indices(0);
    class0.shuffle(rng);
    let fit_count = (class0.len() as f64 * ratio).floor() as usize;
    let mut fit_idx: Vec<usize> = class0[..fit_count].to_vec();
    fit_idx.sort_unstable();
    let mut heldout_idx: Vec<usize> = class0[fit_count..].to_vec();
    heldout_idx.sort_unstable();
    fit_idx.extend(train.class_indices(1));
    let fit = train.take(&fit_idx);
    let heldout = train.features().take_rows(&heldout_idx);
    Ok((fit, heldout))
}

/// Applies a rule: label 1 iff the score strictly exceeds the cutoff.
pub fn classify<F: Float>(scores: &[F], rule: &ThresholdRule<F>) -> Vec<u8> {
    scores.iter().map(|s| u8::from(*s > rule.cutoff)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn accuracy_cutoff_is_half() {
        let rule = fixed_threshold::<f64>(&Paradigm::Cc).unwrap();
        assert_eq!(rule.cutoff, 0.5);
        assert_eq!(rule.source, RuleSource::Fixed);
    }

    #[test]
    fn cost_cutoff_formula() {
        let rule =
            fixed_threshold::<f64>(&Paradigm::Cs { cost0: 1.0, cost1: 1.0 }).unwrap();
        assert_eq!(rule.cutoff, 0.5);
        let rule =
            fixed_threshold::<f64>(&Paradigm::Cs { cost0: 128.0, cost1: 1.0 }).unwrap();
        assert!((rule.cutoff - 128.0 / 129.0).abs() <= 1e-15);
    }

    #[test]
    fn cost_cutoff_rejects_nonpositive_weights() {
        assert!(matches!(
            fixed_threshold::<f64>(&Paradigm::Cs { cost0: 0.0, cost1: 1.0 }),
            Err(ParadigmError::BadParameter(_))
        ));
    }

    #[test]
    fn constrained_paradigm_has_no_fixed_cutoff() {
        assert!(matches!(
            fixed_threshold::<f64>(&Paradigm::Np { alpha: 0.05, delta: 0.5 }),
            Err(ParadigmError::WrongParadigm { found: "np" })
        ));
    }

    /// Direct linear-space binomial tail, independent of the log-space path.
    fn brute_force_rank(n: usize, alpha: f64, delta: f64) -> Option<usize> {
        let mut best = None;
        let mut sum = 0.0f64;
        for k in (1..=n).rev() {
            let mut choose = 1.0f64;
            for i in 0..(n - k) {
                choose *= (n - i) as f64 / (i + 1) as f64;
            }
            let term = choose * (1.0 - alpha).powi(k as i32) * alpha.powi((n - k) as i32);
            sum += term;
            if sum <= delta {
                best = Some(k);
            } else {
                break;
            }
        }
        best
    }

    #[test]
    fn rank_frozen_values() {
        assert_eq!(np_order_statistic_rank(14, 0.05, 0.5).unwrap(), 14);
        assert_eq!(np_order_statistic_rank(20, 0.05, 0.5).unwrap(), 20);
        assert_eq!(np_order_statistic_rank(150, 0.05, 0.5).unwrap(), 144);
        assert_eq!(np_order_statistic_rank(300, 0.05, 0.5).unwrap(), 286);
        assert_eq!(np_order_statistic_rank(100, 0.1, 0.1).unwrap(), 95);
        assert_eq!(np_order_statistic_rank(500, 0.01, 0.05).unwrap(), 499);
    }

    #[test]
    fn rank_14_is_tight() {
        // at n=14 the tail from rank 13 is ~0.847 > 0.5, so 14 is forced
        let mut sum = 0.0;
        for k in 13..=14 {
            let mut choose = 1.0f64;
            for i in 0..(14 - k) {
                choose *= (14 - i) as f64 / (i + 1) as f64;
            }
            sum += choose * 0.95f64.powi(k as i32) * 0.05f64.powi((14 - k) as i32);
        }
        assert!((sum - 0.847).abs() < 5e-4, "tail from 13 = {sum}");
    }

    #[test]
    fn sample_too_small_below_fourteen() {
        for n in 0..14 {
            assert!(
                matches!(
                    np_order_statistic_rank(n, 0.05, 0.5),
                    Err(ParadigmError::SampleTooSmall { .. })
                ),
                "n = {n} should be infeasible"
            );
        }
    }

    #[test]
    fn rank_matches_brute_force_on_grid() {
        for &alpha in &[0.01, 0.05, 0.1] {
            for &delta in &[0.05, 0.5] {
                for n in 1..=300usize {
                    let expected = brute_force_rank(n, alpha, delta);
                    let got = np_order_statistic_rank(n, alpha, delta).ok();
                    assert_eq!(got, expected, "n={n} alpha={alpha} delta={delta}");
                }
            }
        }
    }

    #[test]
    fn rank_monotone_in_delta_and_alpha() {
        for n in [20usize, 57, 150, 290] {
            let mut prev = usize::MAX;
            for delta in [0.05, 0.1, 0.3, 0.5, 0.9] {
                if let Ok(k) = np_order_statistic_rank(n, 0.05, delta) {
                    assert!(k <= prev, "rank must not grow as delta loosens");
                    prev = k;
                }
            }
            let loose = np_order_statistic_rank(n, 0.2, 0.5).unwrap();
            let tight = np_order_statistic_rank(n, 0.05, 0.5).unwrap();
            assert!(loose <= tight, "looser alpha cannot need a higher rank");
        }
    }

    #[test]
    fn rank_rejects_bad_levels() {
        for (a, d) in [(0.0, 0.5), (1.0, 0.5), (0.05, 0.0), (0.05, 1.0), (f64::NAN, 0.5)] {
            assert!(matches!(
                np_order_statistic_rank(100, a, d),
                Err(ParadigmError::BadParameter(_))
            ));
        }
    }

    #[test]
    fn cutoff_is_the_ranked_order_statistic() {
        // scores 0.05, 0.10, ..., 1.00 in shuffled order; rank(20,.05,.5)=20
        let mut scores: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        scores.shuffle(&mut rng);
        let rule = np_threshold_from_scores(&scores, 0.05, 0.5).unwrap();
        assert_eq!(rule.cutoff, 1.0);
        assert_eq!(rule.source, RuleSource::OrderStatistic { rank: 20, n: 20 });
        // the cutoff always belongs to the score multiset
        assert!(scores.contains(&rule.cutoff));
    }

    #[test]
    fn classification_is_strict() {
        let rule = ThresholdRule { cutoff: 0.4, source: RuleSource::Fixed };
        assert_eq!(classify(&[0.39, 0.4, 0.41], &rule), vec![0, 0, 1]);
    }

    #[test]
    fn classification_survives_monotone_score_maps() {
        let scores = [0.1, 0.35, 0.4, 0.8, 0.2];
        let rule = ThresholdRule { cutoff: 0.35, source: RuleSource::Fixed };
        let base = classify(&scores, &rule);
        // strictly increasing map applied to scores and cutoff alike
        let mapped: Vec<f64> = scores.iter().map(|s| s * s + s).collect();
        let mapped_rule = ThresholdRule {
            cutoff: rule.cutoff * rule.cutoff + rule.cutoff,
            source: RuleSource::Fixed,
        };
        assert_eq!(classify(&mapped, &mapped_rule), base);
    }

    #[test]
    fn split_partitions_minority_and_keeps_majority() {
        let mut m = crate::matrix::Matrix::new(1);
        let mut labels = Vec::new();
        for i in 0..10 {
            m.push_row(&[i as f64]);
            labels.push(u8::from(i >= 7));
        }
        let ds = LabeledDataset::new(m, labels).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (fit, heldout) = np_split(&ds, 0.5, &mut rng).unwrap();
        assert_eq!(fit.class_count(0), 3);
        assert_eq!(fit.class_count(1), 3);
        assert_eq!(heldout.rows(), 4);
        // fit minority and heldout rows together recover the class-0 block
        let mut seen: Vec<f64> = fit
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == 0)
            .map(|(i, _)| fit.row(i)[0])
            .chain((0..heldout.rows()).map(|i| heldout.row(i)[0]))
            .collect();
        seen.sort_by(f64::total_cmp);
        assert_eq!(seen, (0..7).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let mut m = crate::matrix::Matrix::new(1);
        let mut labels = Vec::new();
        for i in 0..40 {
            m.push_row(&[i as f64]);
            labels.push(u8::from(i >= 20));
        }
        let ds = LabeledDataset::new(m, labels).unwrap();
        let (a, ha) = np_split(&ds, 0.5, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let (b, hb) = np_split(&ds, 0.5, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
    }

    #[test]
    fn split_rejects_degenerate_ratio() {
        let ds = LabeledDataset::new(Matrix::from_flat(vec![0.0, 1.0], 1), vec![0, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            np_split(&ds, 1.0, &mut rng),
            Err(ParadigmError::BadParameter(_))
        ));
    }

    #[test]
    fn violation_probability_within_budget_for_uniform_scores() {
        // population type-I error of the cutoff is exactly 1 - cutoff for
        // Uniform(0,1) scores, so delta-control is directly checkable
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let trials = 400;
        let mut violations = 0;
        for _ in 0..trials {
            let scores: Vec<f64> = (0..150).map(|_| rng.random::<f64>()).collect();
            let rule = np_threshold_from_scores(&scores, 0.05, 0.5).unwrap();
            if 1.0 - rule.cutoff > 0.05 {
                violations += 1;
            }
        }
        let frac = violations as f64 / trials as f64;
        // budget delta = 0.5, plus ~2 binomial standard errors
        assert!(frac <= 0.55, "violation fraction {frac}");
    }
}
