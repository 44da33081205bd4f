//! Train a compact student from a large teacher when a third of the labels
//! are garbage.
//!
//! The experiment fits a wide teacher on clean labels, then trains two
//! identical students on the corrupted labels: one with plain squared error,
//! one with the outlier-aware loss that routes suspicious samples toward the
//! teacher instead of the label. Both students start from the same weights
//! and see the same batches.
//!
//! This is a scaled-down run; the full-size defaults live in
//! `ExperimentConfig::default()`.
//!
//! ```bash
//! cargo run --release -p facekit --example distill_training
//! ```

use facekit::trainer::{run_distillation_experiment, ExperimentConfig};

fn main() {
    let mut cfg = ExperimentConfig::default();
    cfg.data.n_train = 800;
    cfg.data.n_test = 200;
    cfg.schedule.total_epochs = 15;

    println!(
        "training on {} samples, {:.0}% corrupted, {} epochs...\n",
        cfg.data.n_train,
        100.0 * cfg.data.corrupt_fraction,
        cfg.schedule.total_epochs
    );
    let outcome = run_distillation_experiment(&cfg).expect("experiment");
    let r = &outcome.report;

    println!("clean-test mean squared error:");
    println!("  teacher            {:.5}", r.teacher_test_mse);
    println!("  student, robust    {:.5}", r.distilled_test_mse);
    println!("  student, plain     {:.5}", r.baseline_test_mse);

    println!("\noutlier handling:");
    println!("  derived threshold  {:.4}", r.outlier_threshold);
    println!(
        "  flagged {} of {} rows (corruption planted in {})",
        r.flagged_outliers, r.n_train, r.corrupted_rows
    );

    let gain = 100.0 * (1.0 - r.distilled_test_mse / r.baseline_test_mse);
    println!("\nrobust loss cut the student's test error by {gain:.1}%");
}
