//! Run the stateful pipeline the way a capture loop would: one frame in,
//! one frame out, no lookahead.
//!
//! Each weight channel and landmark coordinate is filtered independently;
//! filtered weight vectors are projected back onto the legal range before
//! they leave the pipeline.
//!
//! ```bash
//! cargo run -p facekit --example live_pipeline
//! ```

use std::time::Instant;

use facekit::filter::FilterConfig;
use facekit::stream::{generate_stream, PipelineState, SynthSpec, Waveform};

fn main() {
    let spec = SynthSpec {
        wave: Waveform::Step,
        frames: 40,
        sigma: 0.04,
        n_weights: 2,
        n_landmarks: 1,
        ..SynthSpec::default()
    };
    let (frames, _) = generate_stream(&spec).expect("generate");

    let cfg = FilterConfig::default();
    let mut pipeline = PipelineState::new(2, 1, &cfg).expect("pipeline");

    println!("frame    w0 raw  w0 smooth    w1 raw  w1 smooth   x0 smooth");
    let start = Instant::now();
    for sample in &frames {
        let out = pipeline.process(sample).expect("process");
        if sample.frame % 4 == 0 {
            println!(
                "{:>5} {:>9.4} {:>10.4} {:>9.4} {:>10.4} {:>11.4}",
                sample.frame,
                sample.weights[0],
                out.weights[0],
                sample.weights[1],
                out.weights[1],
                out.landmarks[0][0],
            );
        }
    }
    let elapsed = start.elapsed();

    println!(
        "\n{} frames x {} channels in {:.2?} ({:.0} frames/s)",
        frames.len(),
        4,
        elapsed,
        frames.len() as f64 / elapsed.as_secs_f64()
    );
    println!("w1 runs at half of w0's amplitude; the step lands a third of the way in.");
    println!("after the step the raw weights sum past 1, so the pipeline rescales them");
    println!("onto the legal simplex: smoothed w0 + w1 = 1 from then on.");
}
