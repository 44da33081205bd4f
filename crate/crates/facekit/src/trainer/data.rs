//! Synthetic regression data with controlled label corruption.
//!
//! Ground truth is a smooth random function; a chosen fraction of training
//! labels is replaced with uniform noise so losses can be compared under
//! known contamination. Test labels are always clean.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    /// Fraction of training rows whose labels are replaced with noise.
    pub corrupt_fraction: f64,
    /// Corrupted labels are uniform in `[-noise_amplitude, noise_amplitude]`.
    pub noise_amplitude: f64,
    pub seed: u64,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec {
            n_train: 2000,
            n_test: 500,
            input_dim: 4,
            output_dim: 2,
            corrupt_fraction: 0.3,
            noise_amplitude: 2.0,
            seed: 7,
        }
    }
}

impl DataSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_test == 0 || self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidConfig {
                msg: "dataset sizes and dimensions must be positive".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.corrupt_fraction) {
            return Err(Error::InvalidConfig {
                msg: format!(
                    "corrupt fraction must lie in [0, 1], got {}",
                    self.corrupt_fraction
                ),
            });
        }
        if !(self.noise_amplitude > 0.0) || !self.noise_amplitude.is_finite() {
            return Err(Error::InvalidConfig {
                msg: format!(
                    "noise amplitude must be positive, got {}",
                    self.noise_amplitude
                ),
            });
        }
        Ok(())
    }
}

struct SinComponent {
    amplitude: f64,
    frequencies: Vec<f64>,
    phase: f64,
}

/// Smooth random target: each output is a tanh-squashed mixture of sines of
/// random frequency and phase, so values stay in (-1, 1).
pub struct TargetFunction {
    per_output: Vec<Vec<SinComponent>>,
    input_dim: usize,
}

impl TargetFunction {
    pub fn random(input_dim: usize, output_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let per_output = (0..output_dim)
            .map(|_| {
                (0..3)
                    .map(|_| SinComponent {
                        amplitude: 0.5 + 0.5 * rng.random::<f64>(),
                        frequencies: (0..input_dim)
                            .map(|_| 4.0 * rng.random::<f64>() - 2.0)
                            .collect(),
                        phase: std::f64::consts::TAU * rng.random::<f64>(),
                    })
                    .collect()
            })
            .collect();
        TargetFunction {
            per_output,
            input_dim,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.input_dim);
        self.per_output
            .iter()
            .map(|components| {
                components
                    .iter()
                    .map(|c| {
                        let dot: f64 = c.frequencies.iter().zip(x).map(|(f, v)| f * v).sum();
                        c.amplitude * (dot + c.phase).sin()
                    })
                    .sum::<f64>()
                    .tanh()
            })
            .collect()
    }

    pub fn eval_batch(&self, inputs: &Matrix) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..inputs.rows()).map(|r| self.eval(inputs.row(r))).collect();
        Matrix::from_rows(&rows)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub train_inputs: Matrix,
    /// Observed training labels, including any corrupted rows.
    pub train_labels: Matrix,
    /// Ground-truth training labels before corruption.
    pub train_clean: Matrix,
    /// Sorted row indices whose labels were replaced.
    pub corrupted: Vec<usize>,
    pub test_inputs: Matrix,
    pub test_labels: Matrix,
}

pub fn generate(spec: &DataSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let target = TargetFunction::random(spec.input_dim, spec.output_dim, &mut rng);

    let mut draw_inputs = |n: usize| {
        Matrix::from_fn(n, spec.input_dim, |_, _| 2.0 * rng.random::<f64>() - 1.0)
    };
    let train_inputs = draw_inputs(spec.n_train);
    let test_inputs = draw_inputs(spec.n_test);
    let train_clean = target.eval_batch(&train_inputs);
    let test_labels = target.eval_batch(&test_inputs);

    let mut train_labels = train_clean.clone();
    let n_corrupt = (spec.corrupt_fraction * spec.n_train as f64).round() as usize;
    let mut corrupted = choose_distinct(spec.n_train, n_corrupt, &mut rng);
    corrupted.sort_unstable();
    let a = spec.noise_amplitude;
    for &row in &corrupted {
        for v in train_labels.row_mut(row) {
            *v = a * (2.0 * rng.random::<f64>() - 1.0);
        }
    }

    Ok(SyntheticDataset {
        train_inputs,
        train_labels,
        train_clean,
        corrupted,
        test_inputs,
        test_labels,
    })
}

/// First `k` entries of a partial Fisher-Yates shuffle of `0..n`.
fn choose_distinct(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let k = k.min(n);
    for i in 0..k {
        let j = i + rng.random_range(0..n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let spec = DataSpec {
            n_train: 50,
            n_test: 20,
            ..DataSpec::default()
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.train_inputs.data(), b.train_inputs.data());
        assert_eq!(a.train_labels.data(), b.train_labels.data());
        assert_eq!(a.corrupted, b.corrupted);

        let c = generate(&DataSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a.train_inputs.data(), c.train_inputs.data());
    }

    #[test]
    fn corruption_count_is_rounded_fraction() {
        let spec = DataSpec {
            n_train: 100,
            n_test: 10,
            corrupt_fraction: 0.3,
            ..DataSpec::default()
        };
        let data = generate(&spec).unwrap();
        assert_eq!(data.corrupted.len(), 30);
        let mut seen = data.corrupted.clone();
        seen.dedup();
        assert_eq!(seen.len(), 30);

        for row in 0..100 {
            let observed = data.train_labels.row(row);
            let clean = data.train_clean.row(row);
            if data.corrupted.binary_search(&row).is_ok() {
                assert_ne!(observed, clean);
            } else {
                assert_eq!(observed, clean);
            }
        }
    }

    #[test]
    fn half_counts_round_away_from_zero() {
        let spec = DataSpec {
            n_train: 10,
            n_test: 5,
            corrupt_fraction: 0.25,
            ..DataSpec::default()
        };
        assert_eq!(generate(&spec).unwrap().corrupted.len(), 3);
    }

    #[test]
    fn zero_fraction_leaves_labels_untouched() {
        let spec = DataSpec {
            n_train: 40,
            n_test: 5,
            corrupt_fraction: 0.0,
            ..DataSpec::default()
        };
        let data = generate(&spec).unwrap();
        assert!(data.corrupted.is_empty());
        assert_eq!(data.train_labels.data(), data.train_clean.data());
    }

    #[test]
    fn full_fraction_corrupts_every_row() {
        let spec = DataSpec {
            n_train: 25,
            n_test: 5,
            corrupt_fraction: 1.0,
            ..DataSpec::default()
        };
        let data = generate(&spec).unwrap();
        assert_eq!(data.corrupted.len(), 25);
    }

    #[test]
    fn clean_labels_are_squashed_into_unit_interval() {
        let data = generate(&DataSpec {
            n_train: 200,
            n_test: 50,
            ..DataSpec::default()
        })
        .unwrap();
        assert!(data.train_clean.data().iter().all(|v| v.abs() < 1.0));
        assert!(data.test_labels.data().iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn target_function_is_stable_under_reuse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = TargetFunction::random(2, 1, &mut rng);
        let x = [0.25, -0.75];
        assert_eq!(f.eval(&x), f.eval(&x));
    }

    #[test]
    fn spec_validation_rejects_nonsense() {
        let mut spec = DataSpec::default();
        spec.corrupt_fraction = 1.5;
        assert!(generate(&spec).is_err());
        spec = DataSpec::default();
        spec.n_train = 0;
        assert!(generate(&spec).is_err());
        spec = DataSpec::default();
        spec.noise_amplitude = 0.0;
        assert!(generate(&spec).is_err());
    }
}
