//! Measure filtering throughput at a realistic channel load: 52 expression
//! weights plus 70 landmark points, 192 scalar channels per frame.
//!
//! The batch runner can split channels across worker threads; outputs are
//! identical to the single-thread run bit for bit, so the only difference
//! is speed.
//!
//! ```bash
//! cargo run --release -p facekit --example bench_throughput
//! ```

use std::time::Instant;

use facekit::filter::FilterConfig;
use facekit::stream::{filter_run, generate_stream, PipelineState, SynthSpec, Waveform};

fn main() {
    let spec = SynthSpec {
        wave: Waveform::Mixture,
        frames: 4000,
        sigma: 0.05,
        n_weights: 52,
        n_landmarks: 70,
        ..SynthSpec::default()
    };
    let (frames, _) = generate_stream(&spec).expect("generate");
    let cfg = FilterConfig::default();
    let channels = 52 + 2 * 70;

    // Frame-at-a-time, the way a live capture loop runs.
    let mut pipeline = PipelineState::new(52, 70, &cfg).expect("pipeline");
    let start = Instant::now();
    for sample in &frames {
        std::hint::black_box(pipeline.process(sample).expect("process"));
    }
    let live = start.elapsed();
    println!(
        "streaming, 1 thread:  {:>8.1} ms total, {:>9.0} frames/s",
        live.as_secs_f64() * 1e3,
        frames.len() as f64 / live.as_secs_f64()
    );

    // Whole-recording batch runs, one worker per channel group.
    let mut reference = None;
    for threads in [1, 2, 4, 8] {
        let start = Instant::now();
        let out = filter_run(&frames, &cfg, threads).expect("filter");
        let elapsed = start.elapsed();
        println!(
            "batch, {threads} thread(s):   {:>8.1} ms total, {:>9.0} frames/s",
            elapsed.as_secs_f64() * 1e3,
            frames.len() as f64 / elapsed.as_secs_f64()
        );
        match &reference {
            None => reference = Some(out),
            Some(single) => assert_eq!(single, &out, "thread count must not change output"),
        }
    }

    println!(
        "\n{} frames x {channels} channels; all batch runs byte-identical",
        frames.len()
    );
}
