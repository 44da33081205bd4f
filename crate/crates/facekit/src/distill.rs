//! Teacher-student losses: temperature-softened targets for classifiers and
//! an outlier-aware regression loss for label sets that contain bad frames.
//!
//! The regression loss routes each sample by how far its label sits from the
//! teacher's prediction. Labels beyond the threshold are treated as
//! mislabelled: the student is pulled toward the teacher instead. Labels
//! within the threshold are trusted, and while the student is doing worse
//! than the teacher on such a sample (by a configurable margin) its squared
//! error is scaled up so the optimizer pays extra attention to it.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Temperature and mixing weight for classification distillation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftTargetConfig {
    /// Softmax temperature; higher flattens the target distribution.
    pub temperature: f64,
    /// Weight of the teacher term; `1 - alpha` weights the hard-label term.
    pub alpha: f64,
}

impl Default for SoftTargetConfig {
    fn default() -> Self {
        SoftTargetConfig {
            temperature: 2.0,
            alpha: 0.5,
        }
    }
}

impl SoftTargetConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidTemperature {
                got: self.temperature,
            });
        }
        if !(0.0..=1.0).contains(&self.alpha) || !self.alpha.is_finite() {
            return Err(Error::InvalidConfig {
                msg: format!("alpha must lie in [0, 1], got {}", self.alpha),
            });
        }
        Ok(())
    }
}

/// Temperature-softened class probabilities with max subtraction, so large
/// logits cannot overflow. Output sums to 1.
pub fn softened_probs(logits: &[f64], temperature: f64) -> Result<Vec<f64>> {
    let log_probs = softened_log_probs(logits, temperature)?;
    Ok(log_probs.iter().map(|&lp| lp.exp()).collect())
}

fn softened_log_probs(logits: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidTemperature { got: temperature });
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = logits.iter().map(|&z| (z - max) / temperature).collect();
    let log_sum = scaled.iter().map(|&s| s.exp()).sum::<f64>().ln();
    Ok(scaled.iter().map(|&s| s - log_sum).collect())
}

/// Batch classification loss blending softened teacher matching with plain
/// cross entropy on the true labels:
/// `alpha * T^2 * KL(teacher || student) + (1 - alpha) * CE(student, label)`,
/// averaged over the batch. The `T^2` factor keeps the teacher term's
/// gradient scale independent of the temperature.
///
/// At `alpha = 0` the teacher logits are never read; at `alpha = 1` the
/// labels are never read.
pub fn classification_distill_loss(
    student_logits: &Matrix,
    teacher_logits: &Matrix,
    labels: &[usize],
    cfg: &SoftTargetConfig,
) -> Result<f64> {
    cfg.validate()?;
    let batch = student_logits.rows();
    if batch == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    if teacher_logits.rows() != batch || teacher_logits.cols() != student_logits.cols() {
        return Err(Error::DimensionMismatch {
            expected: batch * student_logits.cols(),
            got: teacher_logits.rows() * teacher_logits.cols(),
        });
    }
    if labels.len() != batch {
        return Err(Error::LengthMismatch {
            left: batch,
            right: labels.len(),
        });
    }

    let t = cfg.temperature;
    let alpha = cfg.alpha;
    let mut total = 0.0;
    for i in 0..batch {
        let student = student_logits.row(i);
        let mut sample = 0.0;
        if alpha > 0.0 {
            let student_lp = softened_log_probs(student, t)?;
            let teacher_lp = softened_log_probs(teacher_logits.row(i), t)?;
            let kl: f64 = teacher_lp
                .iter()
                .zip(&student_lp)
                .map(|(&tp, &sp)| {
                    let p = tp.exp();
                    p * (tp - sp)
                })
                .sum();
            sample += alpha * t * t * kl;
        }
        if alpha < 1.0 {
            let label = labels[i];
            if label >= student.len() {
                return Err(Error::DimensionMismatch {
                    expected: student.len(),
                    got: label,
                });
            }
            let lp = softened_log_probs(student, 1.0)?;
            sample += (1.0 - alpha) * -lp[label];
        }
        total += sample;
    }
    Ok(total / batch as f64)
}

/// Routing and weighting for the outlier-aware regression loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArdConfig {
    /// Residual norm above which a label is treated as mislabelled (mu).
    pub threshold: f64,
    /// Scale applied while the student trails the teacher on a clean sample
    /// (v). Must exceed 1 or the branch would be a no-op.
    pub penalty: f64,
    /// Slack subtracted from the teacher's error before the comparison (b).
    pub margin: f64,
}

impl ArdConfig {
    pub fn new(threshold: f64, penalty: f64, margin: f64) -> Result<Self> {
        let cfg = ArdConfig {
            threshold,
            penalty,
            margin,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::InvalidConfig {
                msg: format!("outlier threshold must be positive, got {}", self.threshold),
            });
        }
        if !(self.penalty > 1.0) || !self.penalty.is_finite() {
            return Err(Error::InvalidConfig {
                msg: format!("penalty must exceed 1, got {}", self.penalty),
            });
        }
        if !(self.margin >= 0.0) || !self.margin.is_finite() {
            return Err(Error::InvalidConfig {
                msg: format!("margin must be non-negative, got {}", self.margin),
            });
        }
        Ok(())
    }
}

impl Default for ArdConfig {
    fn default() -> Self {
        ArdConfig {
            threshold: 1.0,
            penalty: 2.0,
            margin: 0.0,
        }
    }
}

/// One training batch seen by the regression loss: aligned rows of student
/// outputs, teacher outputs, and labels.
#[derive(Debug, Clone)]
pub struct DistillBatch {
    pub student: Matrix,
    pub teacher: Matrix,
    pub labels: Matrix,
}

impl DistillBatch {
    pub fn new(student: Matrix, teacher: Matrix, labels: Matrix) -> Result<Self> {
        let (rows, cols) = (student.rows(), student.cols());
        if rows == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        for (name, m) in [("teacher", &teacher), ("labels", &labels)] {
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::ChannelCountMismatch {
                    what: match name {
                        "teacher" => "teacher outputs",
                        _ => "labels",
                    },
                    expected: rows * cols,
                    got: m.rows() * m.cols(),
                });
            }
        }
        Ok(DistillBatch {
            student,
            teacher,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.student.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.student.rows() == 0
    }
}

fn norm_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Splits batch row indices into `(outliers, clean)` by whether the label is
/// farther than `mu` (Euclidean) from the teacher's output. Depends only on
/// labels and teacher outputs, never on the student.
pub fn partition_outliers(batch: &DistillBatch, mu: f64) -> (Vec<usize>, Vec<usize>) {
    let mut outliers = Vec::new();
    let mut clean = Vec::new();
    for i in 0..batch.len() {
        let dist = norm_sq(batch.labels.row(i), batch.teacher.row(i)).sqrt();
        if dist > mu {
            outliers.push(i);
        } else {
            clean.push(i);
        }
    }
    (outliers, clean)
}

/// Outlier-aware regression loss, averaged over the batch, with its analytic
/// gradient with respect to the student outputs.
///
/// Per sample: a label farther than `threshold` from the teacher contributes
/// `||student - teacher||^2` (match the teacher, ignore the label); a trusted
/// label contributes `||student - label||^2`, scaled by `penalty` while the
/// student's squared error plus `margin` is at least the teacher's. The
/// scaled branch also applies exactly at the switching surface.
pub fn ard_loss(batch: &DistillBatch, cfg: &ArdConfig) -> (f64, Matrix) {
    let b = batch.len();
    let cols = batch.student.cols();
    let mut grad = Matrix::zeros(b, cols);
    let mut total = 0.0;
    let inv_b = 1.0 / b as f64;

    for i in 0..b {
        let student = batch.student.row(i);
        let teacher = batch.teacher.row(i);
        let label = batch.labels.row(i);

        let label_residual = norm_sq(label, teacher).sqrt();
        let (target, scale): (&[f64], f64) = if label_residual > cfg.threshold {
            (teacher, 1.0)
        } else {
            let student_err = norm_sq(student, label);
            let teacher_err = norm_sq(teacher, label);
            if student_err + cfg.margin >= teacher_err {
                (label, cfg.penalty)
            } else {
                (label, 1.0)
            }
        };

        total += scale * norm_sq(student, target);
        let grow = grad.row_mut(i);
        for (g, (s, t)) in grow.iter_mut().zip(student.iter().zip(target)) {
            *g = 2.0 * scale * (s - t) * inv_b;
        }
    }

    (total * inv_b, grad)
}

/// Data-driven outlier threshold: median plus three median absolute
/// deviations of the teacher's label residual norms. Robust to the very
/// outliers it is meant to find. Floored at a tiny positive value so it stays
/// a valid threshold even for a perfect teacher.
pub fn robust_outlier_threshold(residual_norms: &[f64]) -> f64 {
    if residual_norms.is_empty() {
        return 1.0;
    }
    let med = median(residual_norms.to_vec());
    let deviations: Vec<f64> = residual_norms.iter().map(|&r| (r - med).abs()).collect();
    let mad = median(deviations);
    (med + 3.0 * mad).max(1e-12)
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_row(v: &[f64]) -> Matrix {
        Matrix::from_rows(&[v.to_vec()])
    }

    fn scalar_batch(label: f64, teacher: f64, student: f64) -> DistillBatch {
        DistillBatch::new(
            single_row(&[student]),
            single_row(&[teacher]),
            single_row(&[label]),
        )
        .unwrap()
    }

    #[test]
    fn softened_probs_equal_logits_are_uniform() {
        let p = softened_probs(&[0.0, 0.0], 1.0).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn softened_probs_unit_temperature_sigmoid() {
        let p = softened_probs(&[1.0, 0.0], 1.0).unwrap();
        assert!((p[0] - 0.7311).abs() < 1e-4);
        assert!((p[1] - 0.2689).abs() < 1e-4);
    }

    #[test]
    fn softened_probs_high_temperature_flattens() {
        let p = softened_probs(&[1.0, 0.0], 100.0).unwrap();
        assert!((p[0] - 0.5).abs() < 3e-3);
        assert!((p[1] - 0.5).abs() < 3e-3);
    }

    #[test]
    fn softened_probs_reject_bad_temperature() {
        assert!(matches!(
            softened_probs(&[1.0], 0.0),
            Err(Error::InvalidTemperature { .. })
        ));
        assert!(matches!(
            softened_probs(&[1.0], -2.0),
            Err(Error::InvalidTemperature { .. })
        ));
    }

    #[test]
    fn softened_probs_survive_huge_logits() {
        let p = softened_probs(&[1000.0, 999.0], 1.0).unwrap();
        assert!(p.iter().all(|&x| x.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classification_loss_zero_when_student_is_teacher_alpha_one() {
        let logits = Matrix::from_rows(&[vec![0.3, -1.2, 2.0], vec![1.0, 0.0, -0.5]]);
        let cfg = SoftTargetConfig {
            temperature: 3.0,
            alpha: 1.0,
        };
        let loss = classification_distill_loss(&logits, &logits, &[0, 2], &cfg).unwrap();
        assert!(loss.abs() < 1e-9);
    }

    #[test]
    fn classification_loss_alpha_zero_ignores_teacher_bitwise() {
        let student = Matrix::from_rows(&[vec![0.5, -0.3], vec![1.5, 0.2]]);
        let teacher_a = Matrix::from_rows(&[vec![9.0, -4.0], vec![0.0, 0.0]]);
        let teacher_b = Matrix::from_rows(&[vec![-2.0, 7.0], vec![3.3, 1.1]]);
        let cfg = SoftTargetConfig {
            temperature: 2.0,
            alpha: 0.0,
        };
        let la = classification_distill_loss(&student, &teacher_a, &[1, 0], &cfg).unwrap();
        let lb = classification_distill_loss(&student, &teacher_b, &[1, 0], &cfg).unwrap();
        assert_eq!(la.to_bits(), lb.to_bits());
    }

    #[test]
    fn classification_loss_matches_hand_computation() {
        // One sample, student [1, 0], teacher [0, 1], label 0, T = 1,
        // alpha = 0.5. Computed here from scalar first principles.
        let student = single_row(&[1.0, 0.0]);
        let teacher = single_row(&[0.0, 1.0]);
        let cfg = SoftTargetConfig {
            temperature: 1.0,
            alpha: 0.5,
        };
        let loss = classification_distill_loss(&student, &teacher, &[0], &cfg).unwrap();

        let sig = 1.0 / (1.0 + (-1.0f64).exp());
        let kl = (1.0 - sig) * ((1.0 - sig) / sig).ln() + sig * (sig / (1.0 - sig)).ln();
        let ce = -sig.ln();
        let expected = 0.5 * kl + 0.5 * ce;
        assert!((loss - expected).abs() < 1e-12, "{loss} vs {expected}");
    }

    #[test]
    fn partition_all_clean_when_teacher_matches_labels() {
        let m = Matrix::from_rows(&[vec![0.1, 0.2], vec![0.5, 0.6]]);
        let batch = DistillBatch::new(Matrix::zeros(2, 2), m.clone(), m).unwrap();
        let (outliers, clean) = partition_outliers(&batch, 0.5);
        assert!(outliers.is_empty());
        assert_eq!(clean, vec![0, 1]);
    }

    #[test]
    fn partition_tiny_threshold_flags_everything_off_teacher() {
        let labels = Matrix::from_rows(&[vec![1.0], vec![0.0]]);
        let teacher = Matrix::from_rows(&[vec![0.0], vec![0.5]]);
        let batch = DistillBatch::new(Matrix::zeros(2, 1), teacher, labels).unwrap();
        let (outliers, clean) = partition_outliers(&batch, 1e-12);
        assert_eq!(outliers, vec![0, 1]);
        assert!(clean.is_empty());
    }

    #[test]
    fn partition_scalar_example() {
        let batch = scalar_batch(1.0, 0.2, 0.0);
        let (outliers, clean) = partition_outliers(&batch, 0.5);
        assert_eq!(outliers, vec![0]);
        assert!(clean.is_empty());
    }

    #[test]
    fn ard_loss_outlier_pulls_student_to_teacher() {
        // Residual |1.0 - 0.2| = 0.8 > 0.5, so the target is the teacher:
        // (0.5 - 0.2)^2 = 0.09.
        let batch = scalar_batch(1.0, 0.2, 0.5);
        let cfg = ArdConfig::new(0.5, 2.0, 0.0).unwrap();
        let (loss, grad) = ard_loss(&batch, &cfg);
        assert!((loss - 0.09).abs() < 1e-15);
        assert!((grad[(0, 0)] - 2.0 * 0.3).abs() < 1e-12);
    }

    #[test]
    fn ard_loss_clean_sample_behind_teacher_is_scaled() {
        // Residual 0.05 <= 0.5 so the label is trusted. Student error 0.0036
        // >= teacher error 0.0025, so the penalty doubles it: 0.0072.
        let batch = scalar_batch(1.0, 0.95, 0.94);
        let cfg = ArdConfig::new(0.5, 2.0, 0.0).unwrap();
        let (loss, grad) = ard_loss(&batch, &cfg);
        assert!((loss - 0.0072).abs() < 1e-15);
        assert!((grad[(0, 0)] - 2.0 * 2.0 * (0.94 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn ard_loss_clean_sample_ahead_of_teacher_is_plain() {
        // Student error 0.0001 < teacher error 0.0025: no scaling.
        let batch = scalar_batch(1.0, 0.95, 0.99);
        let cfg = ArdConfig::new(0.5, 2.0, 0.0).unwrap();
        let (loss, grad) = ard_loss(&batch, &cfg);
        assert!((loss - 1e-4).abs() < 1e-12);
        assert!((grad[(0, 0)] - 2.0 * (0.99 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn ard_loss_zero_when_student_equals_teacher_on_outlier() {
        let batch = scalar_batch(1.0, 0.2, 0.2);
        let cfg = ArdConfig::new(0.5, 2.0, 0.0).unwrap();
        let (loss, grad) = ard_loss(&batch, &cfg);
        assert_eq!(loss, 0.0);
        assert_eq!(grad[(0, 0)], 0.0);
    }

    #[test]
    fn ard_loss_averages_over_batch() {
        let student = Matrix::from_rows(&[vec![0.5], vec![0.94]]);
        let teacher = Matrix::from_rows(&[vec![0.2], vec![0.95]]);
        let labels = Matrix::from_rows(&[vec![1.0], vec![1.0]]);
        let batch = DistillBatch::new(student, teacher, labels).unwrap();
        let cfg = ArdConfig::new(0.5, 2.0, 0.0).unwrap();
        let (loss, _) = ard_loss(&batch, &cfg);
        assert!((loss - 0.5 * (0.09 + 0.0072)).abs() < 1e-15);
    }

    #[test]
    fn ard_gradient_matches_central_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let cfg = ArdConfig::new(0.6, 2.0, 0.1).unwrap();
        let dims = 3;
        let h = 1e-6;
        let mut checked = 0;
        while checked < 50 {
            let rows = 4;
            let mut gen =
                |scale: f64| -> Vec<f64> { (0..dims).map(|_| scale * (rng.random::<f64>() - 0.5)).collect() };
            let student: Vec<Vec<f64>> = (0..rows).map(|_| gen(2.0)).collect();
            let teacher: Vec<Vec<f64>> = (0..rows).map(|_| gen(2.0)).collect();
            let labels: Vec<Vec<f64>> = (0..rows).map(|_| gen(2.0)).collect();
            let batch = DistillBatch::new(
                Matrix::from_rows(&student),
                Matrix::from_rows(&teacher),
                Matrix::from_rows(&labels),
            )
            .unwrap();
            if near_branch_boundary(&batch, &cfg, 1e-3) {
                continue;
            }
            let (_, grad) = ard_loss(&batch, &cfg);
            for r in 0..rows {
                for c in 0..dims {
                    let mut plus = batch.clone();
                    plus.student[(r, c)] += h;
                    let mut minus = batch.clone();
                    minus.student[(r, c)] -= h;
                    let numeric = (ard_loss(&plus, &cfg).0 - ard_loss(&minus, &cfg).0) / (2.0 * h);
                    let analytic = grad[(r, c)];
                    let denom = numeric.abs().max(analytic.abs()).max(1e-8);
                    assert!(
                        ((numeric - analytic) / denom).abs() < 1e-5,
                        "grad mismatch at ({r},{c}): {analytic} vs {numeric}"
                    );
                }
            }
            checked += 1;
        }
    }

    fn near_branch_boundary(batch: &DistillBatch, cfg: &ArdConfig, delta: f64) -> bool {
        for i in 0..batch.len() {
            let residual = norm_sq(batch.labels.row(i), batch.teacher.row(i)).sqrt();
            if (residual - cfg.threshold).abs() < delta {
                return true;
            }
            if residual <= cfg.threshold {
                let se = norm_sq(batch.student.row(i), batch.labels.row(i));
                let te = norm_sq(batch.teacher.row(i), batch.labels.row(i));
                if (se + cfg.margin - te).abs() < delta {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn robust_threshold_matches_hand_computation() {
        // median = 0.25, deviations [0.15, 0.05, 0.05, 0.75], MAD = 0.1.
        let mu = robust_outlier_threshold(&[0.1, 0.2, 0.3, 1.0]);
        let expected = 0.25 + 3.0 * 0.1;
        assert!((mu - expected).abs() < 1e-12, "{mu}");
    }

    #[test]
    fn config_validation_rejects_degenerate_settings() {
        assert!(ArdConfig::new(0.0, 2.0, 0.0).is_err());
        assert!(ArdConfig::new(1.0, 1.0, 0.0).is_err());
        assert!(ArdConfig::new(1.0, 2.0, -0.1).is_err());
        assert!(ArdConfig::new(1.0, 1.5, 0.5).is_ok());
    }

    proptest! {
        #[test]
        fn prop_softened_probs_sum_to_one_and_shift_invariant(
            logits in proptest::collection::vec(-30.0f64..30.0, 1..10),
            temperature in 0.1f64..20.0,
            shift in -50.0f64..50.0,
        ) {
            let p = softened_probs(&logits, temperature).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let shifted: Vec<f64> = logits.iter().map(|z| z + shift).collect();
            let q = softened_probs(&shifted, temperature).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn prop_partition_ignores_student_outputs(
            labels in proptest::collection::vec(-2.0f64..2.0, 4),
            teacher in proptest::collection::vec(-2.0f64..2.0, 4),
            student_a in proptest::collection::vec(-2.0f64..2.0, 4),
            student_b in proptest::collection::vec(-2.0f64..2.0, 4),
            mu in 0.01f64..3.0,
        ) {
            let mk = |student: &Vec<f64>| DistillBatch::new(
                Matrix::from_rows(&student.iter().map(|&s| vec![s]).collect::<Vec<_>>()),
                Matrix::from_rows(&teacher.iter().map(|&t| vec![t]).collect::<Vec<_>>()),
                Matrix::from_rows(&labels.iter().map(|&l| vec![l]).collect::<Vec<_>>()),
            ).unwrap();
            prop_assert_eq!(
                partition_outliers(&mk(&student_a), mu),
                partition_outliers(&mk(&student_b), mu)
            );
        }

        #[test]
        fn prop_ard_loss_is_nonnegative_and_zero_at_target(
            label in -2.0f64..2.0,
            teacher in -2.0f64..2.0,
            student in -2.0f64..2.0,
            mu in 0.01f64..2.0,
        ) {
            let cfg = ArdConfig::new(mu, 2.0, 0.0).unwrap();
            let (loss, _) = ard_loss(&scalar_batch(label, teacher, student), &cfg);
            prop_assert!(loss >= 0.0);

            // Student sitting exactly on the routed target always gives zero.
            let residual = (label - teacher).abs();
            let target = if residual > mu { teacher } else { label };
            let (zero_loss, _) = ard_loss(&scalar_batch(label, teacher, target), &cfg);
            prop_assert!(zero_loss.abs() < 1e-15);
        }
    }
}
