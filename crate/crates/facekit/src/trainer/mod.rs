//! Mini-batch training for the small regressors, plus a self-contained
//! experiment that distills a teacher into a student under label corruption
//! and reports how the outlier-aware loss compares with plain squared error.

pub mod adam;
pub mod data;
pub mod model;
pub mod schedule;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distill::{ard_loss, robust_outlier_threshold, ArdConfig, DistillBatch};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use adam::{AdamConfig, AdamState};
pub use data::{generate, DataSpec, SyntheticDataset, TargetFunction};
pub use model::{mean_squared_error, DenseLayer, Gradients, ModelSpec, RegressorModel};
pub use schedule::TrainingSchedule;

/// Loss used by `fit_model`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainLoss {
    /// Mean squared error against the labels.
    SquaredError,
    /// Outlier-aware loss routed by a teacher model.
    Ard(ArdConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub schedule: TrainingSchedule,
    /// Seed for parameter initialization.
    pub init_seed: u64,
    /// Seed for per-epoch batch shuffling.
    pub shuffle_seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            schedule: TrainingSchedule::default(),
            init_seed: 1,
            shuffle_seed: 2,
        }
    }
}

/// Trains a fresh model of `spec` on `(inputs, labels)`. The teacher is
/// consulted only by the outlier-aware loss; `SquaredError` ignores it.
/// Returns the model and per-epoch mean losses. Fails with `Divergence` the
/// moment a batch loss stops being finite.
pub fn fit_model(
    spec: &ModelSpec,
    inputs: &Matrix,
    labels: &Matrix,
    teacher: Option<&RegressorModel>,
    loss: TrainLoss,
    opts: &FitOptions,
) -> Result<(RegressorModel, Vec<f64>)> {
    opts.schedule.validate()?;
    if inputs.rows() != labels.rows() {
        return Err(Error::LengthMismatch {
            left: inputs.rows(),
            right: labels.rows(),
        });
    }
    if inputs.rows() == 0 {
        return Err(Error::InvalidConfig {
            msg: "cannot train on an empty dataset".into(),
        });
    }
    if labels.cols() != spec.output_dim {
        return Err(Error::DimensionMismatch {
            expected: spec.output_dim,
            got: labels.cols(),
        });
    }
    if let TrainLoss::Ard(cfg) = &loss {
        cfg.validate()?;
        if teacher.is_none() {
            return Err(Error::InvalidConfig {
                msg: "the outlier-aware loss requires a teacher model".into(),
            });
        }
    }

    let mut model = RegressorModel::seeded(spec, opts.init_seed)?;
    let mut optimizer = AdamState::new(&model, AdamConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.shuffle_seed);

    let n = inputs.rows();
    let batch_size = opts.schedule.batch_size;
    let steps_per_epoch = opts.schedule.steps_per_epoch(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut epoch_losses = Vec::with_capacity(opts.schedule.total_epochs);
    let mut step = 0usize;

    for epoch in 0..opts.schedule.total_epochs {
        shuffle(&mut order, &mut rng);
        let mut epoch_total = 0.0;

        for (batch_idx, chunk) in order.chunks(batch_size).enumerate() {
            let batch_inputs = gather_rows(inputs, chunk);
            let batch_labels = gather_rows(labels, chunk);

            let mut activations = model.forward_cached(&batch_inputs)?;
            let outputs = activations.pop().expect("nonempty");

            let (batch_loss, grad_out) = match &loss {
                TrainLoss::SquaredError => squared_error_with_grad(&outputs, &batch_labels),
                TrainLoss::Ard(cfg) => {
                    let teacher_out = teacher.expect("checked above").forward(&batch_inputs)?;
                    let batch = DistillBatch::new(outputs.clone(), teacher_out, batch_labels)?;
                    ard_loss(&batch, cfg)
                }
            };
            if !batch_loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: batch_idx,
                });
            }
            epoch_total += batch_loss * chunk.len() as f64;

            activations.push(outputs);
            let grads = model.backward(&activations, &grad_out);
            let (lr, beta1) = opts.schedule.at(step, steps_per_epoch);
            optimizer.step(&mut model, &grads, lr, beta1);
            step += 1;
        }
        epoch_losses.push(epoch_total / n as f64);
    }

    if let (Some(first), Some(last)) = (epoch_losses.first(), epoch_losses.last()) {
        if last > first {
            log::warn!("training loss rose from {first:.6} to {last:.6}; check the learning rate");
        }
    }

    Ok((model, epoch_losses))
}

fn squared_error_with_grad(outputs: &Matrix, labels: &Matrix) -> (f64, Matrix) {
    let b = outputs.rows() as f64;
    let mut total = 0.0;
    let grad = Matrix::from_fn(outputs.rows(), outputs.cols(), |r, c| {
        let d = outputs[(r, c)] - labels[(r, c)];
        total += d * d;
        2.0 * d / b
    });
    (total / b, grad)
}

fn gather_rows(m: &Matrix, rows: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(rows.len(), m.cols());
    for (dst, &src) in rows.iter().enumerate() {
        out.row_mut(dst).copy_from_slice(m.row(src));
    }
    out
}

fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
}

/// Full distillation experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSpec,
    pub schedule: TrainingSchedule,
    /// Penalty applied while the student trails the teacher (v).
    pub penalty: f64,
    /// Slack in the trailing test (b).
    pub margin: f64,
    /// Outlier threshold; `None` derives it from the teacher's residuals.
    pub threshold: Option<f64>,
    /// Base seed for model initialization and shuffling.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: DataSpec::default(),
            schedule: TrainingSchedule::default(),
            penalty: 2.0,
            margin: 0.0,
            threshold: None,
            seed: 11,
        }
    }
}

impl ExperimentConfig {
    /// Configuration keys `from_map` understands.
    pub const CONFIG_KEYS: &'static [&'static str] = &[
        "train.epochs",
        "train.batch",
        "train.lr",
        "train.warmup",
        "train.rampdown",
        "train.seed",
        "distill.mu",
        "distill.v",
        "distill.b",
        "data.n_train",
        "data.n_test",
        "data.inputs",
        "data.outputs",
        "data.p",
        "data.noise",
        "data.seed",
    ];

    /// Defaults overridden by whatever the map provides.
    /// `distill.mu` accepts `auto` (derive from teacher residuals) or a number.
    pub fn from_map(map: &crate::config::ConfigMap) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        if let Some(epochs) = map.get_usize("train.epochs")? {
            cfg.schedule.total_epochs = epochs;
        }
        if let Some(batch) = map.get_usize("train.batch")? {
            cfg.schedule.batch_size = batch;
        }
        if let Some(lr) = map.get_f64("train.lr")? {
            cfg.schedule.base_lr = lr;
        }
        if let Some(factor) = map.get_f64("train.warmup")? {
            cfg.schedule.warmup_factor = factor;
        }
        if let Some(fraction) = map.get_f64("train.rampdown")? {
            cfg.schedule.rampdown_fraction = fraction;
        }
        if let Some(seed) = map.get_u64("train.seed")? {
            cfg.seed = seed;
        }
        match map.get("distill.mu") {
            None | Some("auto") => cfg.threshold = None,
            Some(raw) => {
                cfg.threshold = Some(raw.parse::<f64>().map_err(|_| Error::InvalidConfig {
                    msg: format!("distill.mu must be `auto` or a number, got {raw:?}"),
                })?);
            }
        }
        if let Some(v) = map.get_f64("distill.v")? {
            cfg.penalty = v;
        }
        if let Some(b) = map.get_f64("distill.b")? {
            cfg.margin = b;
        }
        if let Some(n) = map.get_usize("data.n_train")? {
            cfg.data.n_train = n;
        }
        if let Some(n) = map.get_usize("data.n_test")? {
            cfg.data.n_test = n;
        }
        if let Some(d) = map.get_usize("data.inputs")? {
            cfg.data.input_dim = d;
        }
        if let Some(d) = map.get_usize("data.outputs")? {
            cfg.data.output_dim = d;
        }
        if let Some(p) = map.get_f64("data.p")? {
            cfg.data.corrupt_fraction = p;
        }
        if let Some(a) = map.get_f64("data.noise")? {
            cfg.data.noise_amplitude = a;
        }
        if let Some(seed) = map.get_u64("data.seed")? {
            cfg.data.seed = seed;
        }
        cfg.schedule.validate()?;
        cfg.data.validate()?;
        if let Some(mu) = cfg.threshold {
            ArdConfig::new(mu, cfg.penalty, cfg.margin)?;
        } else {
            ArdConfig::new(1.0, cfg.penalty, cfg.margin)?;
        }
        Ok(cfg)
    }
}

/// Clean-test errors of everything the experiment trains, plus the settings
/// that shaped the run. Serializable for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub teacher_test_mse: f64,
    pub distilled_test_mse: f64,
    pub baseline_test_mse: f64,
    pub outlier_threshold: f64,
    pub flagged_outliers: usize,
    pub corrupted_rows: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub epochs: usize,
}

/// Everything the experiment produces.
pub struct ExperimentOutcome {
    pub teacher: RegressorModel,
    pub distilled: RegressorModel,
    pub baseline: RegressorModel,
    pub report: MetricsReport,
}

/// Runs the label-corruption study end to end: fit a teacher on clean
/// labels, derive (or take) the outlier threshold, then train two students
/// from identical initialization on the corrupted labels, one with the
/// outlier-aware loss and one with plain squared error.
pub fn run_distillation_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let data = generate(&cfg.data)?;
    let in_dim = cfg.data.input_dim;
    let out_dim = cfg.data.output_dim;

    let teacher_opts = FitOptions {
        schedule: cfg.schedule,
        init_seed: cfg.seed,
        shuffle_seed: cfg.seed ^ 0x9e37_79b9,
    };
    let (teacher, _) = fit_model(
        &ModelSpec::teacher(in_dim, out_dim),
        &data.train_inputs,
        &data.train_clean,
        None,
        TrainLoss::SquaredError,
        &teacher_opts,
    )?;

    let threshold = match cfg.threshold {
        Some(mu) => mu,
        None => {
            let preds = teacher.forward(&data.train_inputs)?;
            let residuals: Vec<f64> = (0..preds.rows())
                .map(|r| {
                    preds
                        .row(r)
                        .iter()
                        .zip(data.train_labels.row(r))
                        .map(|(p, y)| (p - y) * (p - y))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
            robust_outlier_threshold(&residuals)
        }
    };
    let ard_cfg = ArdConfig::new(threshold, cfg.penalty, cfg.margin)?;

    // Identical init and batch order so only the loss differs.
    let student_opts = FitOptions {
        schedule: cfg.schedule,
        init_seed: cfg.seed.wrapping_add(1),
        shuffle_seed: cfg.seed.wrapping_add(2),
    };
    let student_spec = ModelSpec::student(in_dim, out_dim);
    let (distilled, _) = fit_model(
        &student_spec,
        &data.train_inputs,
        &data.train_labels,
        Some(&teacher),
        TrainLoss::Ard(ard_cfg),
        &student_opts,
    )?;
    let (baseline, _) = fit_model(
        &student_spec,
        &data.train_inputs,
        &data.train_labels,
        None,
        TrainLoss::SquaredError,
        &student_opts,
    )?;

    let teacher_preds = teacher.forward(&data.train_inputs)?;
    let full_batch = DistillBatch::new(
        Matrix::zeros(data.train_inputs.rows(), out_dim),
        teacher_preds,
        data.train_labels.clone(),
    )?;
    let (flagged, _) = crate::distill::partition_outliers(&full_batch, threshold);

    let report = MetricsReport {
        teacher_test_mse: mean_squared_error(&teacher, &data.test_inputs, &data.test_labels)?,
        distilled_test_mse: mean_squared_error(&distilled, &data.test_inputs, &data.test_labels)?,
        baseline_test_mse: mean_squared_error(&baseline, &data.test_inputs, &data.test_labels)?,
        outlier_threshold: threshold,
        flagged_outliers: flagged.len(),
        corrupted_rows: data.corrupted.len(),
        n_train: cfg.data.n_train,
        n_test: cfg.data.n_test,
        epochs: cfg.schedule.total_epochs,
    };

    Ok(ExperimentOutcome {
        teacher,
        distilled,
        baseline,
        report,
    })
}
