//! Score a filtered recording channel by channel.
//!
//! `evaluate_run` compares two aligned streams and reports second-difference
//! jitter energy, cross-correlation lag, and peak retention per channel,
//! plus stream-wide aggregates. Scoring against the noisy input shows how
//! much jitter was removed; scoring against the clean truth shows what the
//! filtering cost.
//!
//! ```bash
//! cargo run -p facekit --example score_a_run
//! ```

use facekit::filter::FilterConfig;
use facekit::stream::{
    evaluate_run, filter_run, generate_stream, JitterReport, SynthSpec, Waveform,
};

fn main() {
    let spec = SynthSpec {
        wave: Waveform::Mixture,
        frames: 300,
        sigma: 0.05,
        n_weights: 2,
        n_landmarks: 1,
        ..SynthSpec::default()
    };
    let (noisy, clean) = generate_stream(&spec).expect("generate");
    let filtered = filter_run(&noisy, &FilterConfig::default(), 1).expect("filter");

    let vs_input = evaluate_run(&noisy, &filtered, &[]).expect("evaluate");
    let vs_truth = evaluate_run(&clean, &filtered, &[]).expect("evaluate");

    println!("against the noisy input (how much jitter went away):");
    print_report(&vs_input);
    println!("\nagainst the clean truth (what filtering cost):");
    print_report(&vs_truth);

    println!("\nper-channel view against the truth:");
    println!("{:<6} {:>14} {:>6} {:>12}", "chan", "jitter ratio", "lag", "peak kept");
    for c in &vs_truth.channels {
        println!(
            "{:<6} {:>14.4} {:>6} {:>12.4}",
            c.name, c.jitter_ratio, c.lag, c.peak_retention
        );
    }
}

fn print_report(report: &JitterReport) {
    println!(
        "  {} frames, {} channels: jitter ratio {:.4}, median lag {:.1}, min peak {:.4}",
        report.frames,
        report.channels.len(),
        report.jitter_ratio,
        report.median_lag,
        report.min_peak_retention
    );
}
