//! Streaming post-processing for facial performance capture.
//!
//! A capture rig hands you one frame at a time: a vector of expression
//! weights driving a blendshape rig, plus tracked landmark positions. Raw
//! regressor output jitters, and naive smoothing either lags the performance
//! or flattens its peaks. This crate provides the post-processing stack for
//! that situation:
//!
//! - [`blendshape`]: expression weight vectors with their simplex
//!   constraints, projection of raw estimates onto the legal range, and
//!   linear mesh evaluation.
//! - [`filter`]: causal per-channel smoothing. A scalar Kalman stage, a
//!   sliding-window polynomial stage, or both in cascade.
//! - [`stream`]: frame records, CSV/JSONL encodings, the stateful pipeline,
//!   a multi-threaded batch runner, quality metrics, and synthetic signal
//!   generators with known ground truth.
//! - [`distill`] and [`trainer`]: a compact-student training study with an
//!   outlier-aware regression loss for corrupted labels, on synthetic data.
//! - [`config`] and [`cli`]: flat `key = value` settings and the thin
//!   `facekit` binary (`filter`, `evaluate`, `distill`, `bench`, `synth`).
//!
//! # Quickstart
//!
//! Smooth one noisy channel and keep the result on the legal weight range:
//!
//! ```
//! use facekit::blendshape::clamp_project;
//! use facekit::filter::{FilterConfig, HybridFilter};
//!
//! let mut filter = HybridFilter::new(&FilterConfig::default())?;
//! let mut smoothed = Vec::new();
//! for raw in [0.02, -0.01, 0.05, 0.91, 0.88, 0.93, 0.90, 0.89] {
//!     let estimate = filter.step(raw)?;
//!     smoothed.push(clamp_project(&[estimate])?[0]);
//! }
//! assert!(smoothed.iter().all(|w| (0.0..=1.0).contains(w)));
//! # Ok::<(), facekit::Error>(())
//! ```
//!
//! # Examples
//!
//! Each major capability has a runnable example; start with the one closest
//! to your use case.
//!
//! | example | shows |
//! |---|---|
//! | `filter_comparison` | Kalman vs polynomial vs cascade on one noisy pulse |
//! | `live_pipeline` | frame-at-a-time smoothing, the way a capture loop runs |
//! | `score_a_run` | per-channel jitter, lag, and peak metrics for a run |
//! | `blendshape_morph` | repairing raw weights and blending a tiny face rig |
//! | `kalman_behavior` | gain and settling behavior across q/r tunings |
//! | `inspect_kernel` | the fixed weight rows behind polynomial smoothing |
//! | `distill_training` | training a small student through corrupted labels |
//! | `signal_generator` | benchmark waveforms and lossless stream round trips |
//! | `bench_throughput` | full 192-channel load, streaming and threaded batch |
//!
//! ```bash
//! cargo run -p facekit --example filter_comparison
//! cargo run --release -p facekit --example bench_throughput
//! ```
//!
//! The same capabilities are reachable without writing code through the
//! bundled binary; `facekit --help` lists the subcommands.

pub mod blendshape;
pub mod cli;
pub mod config;
pub mod distill;
pub mod error;
pub mod filter;
pub mod matrix;
pub mod stream;
pub mod trainer;

pub use error::{Error, Result};
