//! Quality metrics for a filtered recording against its reference input.
//!
//! Jitter is measured as second-difference energy, latency as the argmax of
//! the mean-removed cross-correlation, and amplitude preservation as the
//! ratio of series maxima.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{ChannelLayout, FrameSample};

/// Maximum latency considered when locating the correlation peak.
pub const DEFAULT_MAX_LAG: usize = 30;

/// Sum of squared second differences; zero for series shorter than 3.
pub fn second_difference_energy(series: &[f64]) -> f64 {
    series
        .windows(3)
        .map(|w| {
            let d = w[2] - 2.0 * w[1] + w[0];
            d * d
        })
        .sum()
}

/// Lag (in frames) at which the filtered series best matches the reference:
/// argmax over `0..=max_lag` of the cross-correlation after removing each
/// series' mean. Ties resolve to the smallest lag.
pub fn cross_correlation_lag(reference: &[f64], filtered: &[f64], max_lag: usize) -> usize {
    let n = reference.len().min(filtered.len());
    if n < 2 {
        return 0;
    }
    let mean = |s: &[f64]| s[..n].iter().sum::<f64>() / n as f64;
    let (ref_mean, filt_mean) = (mean(reference), mean(filtered));

    let mut best = (0usize, f64::NEG_INFINITY);
    for lag in 0..=max_lag.min(n - 1) {
        let mut c = 0.0;
        for i in 0..n - lag {
            c += (reference[i] - ref_mean) * (filtered[i + lag] - filt_mean);
        }
        if c > best.1 {
            best = (lag, c);
        }
    }
    best.0
}

/// Ratio of series maxima, `max(filtered) / max(reference)`; 1.0 when the
/// reference peak is too small to divide by.
pub fn peak_retention(reference: &[f64], filtered: &[f64]) -> f64 {
    let peak = |s: &[f64]| s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ref_peak = peak(reference);
    if !ref_peak.is_finite() || ref_peak.abs() < 1e-12 {
        return 1.0;
    }
    peak(filtered) / ref_peak
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMetrics {
    pub name: String,
    pub reference_energy: f64,
    pub filtered_energy: f64,
    /// `filtered_energy / reference_energy`, 1.0 when the reference is flat.
    pub jitter_ratio: f64,
    pub lag: usize,
    pub peak_retention: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JitterReport {
    pub frames: usize,
    pub channels: Vec<ChannelMetrics>,
    /// Total filtered energy over total reference energy.
    pub jitter_ratio: f64,
    pub median_lag: f64,
    pub min_peak_retention: f64,
    pub mean_frame_ms: f64,
    pub max_frame_ms: f64,
}

fn ratio_or_one(num: f64, den: f64) -> f64 {
    if den.abs() < 1e-30 {
        1.0
    } else {
        num / den
    }
}

/// Compares a filtered run against its reference, channel by channel.
/// `timings_ms` may be empty when per-frame timing was not collected.
pub fn evaluate_run(
    reference: &[FrameSample],
    filtered: &[FrameSample],
    timings_ms: &[f64],
) -> Result<JitterReport> {
    if reference.len() != filtered.len() {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: filtered.len(),
        });
    }
    let frames = reference.len();
    let layout = reference
        .first()
        .map(ChannelLayout::of)
        .unwrap_or(ChannelLayout {
            n_weights: 0,
            n_landmarks: 0,
        });
    for sample in filtered {
        layout.check(sample)?;
    }

    let mut channels = Vec::with_capacity(layout.channels());
    let mut lags = Vec::with_capacity(layout.channels());
    let (mut ref_total, mut filt_total) = (0.0, 0.0);
    for c in 0..layout.channels() {
        let ref_col: Vec<f64> = reference.iter().map(|s| layout.value(s, c)).collect();
        let filt_col: Vec<f64> = filtered.iter().map(|s| layout.value(s, c)).collect();
        let reference_energy = second_difference_energy(&ref_col);
        let filtered_energy = second_difference_energy(&filt_col);
        let lag = cross_correlation_lag(&ref_col, &filt_col, DEFAULT_MAX_LAG);
        lags.push(lag as f64);
        ref_total += reference_energy;
        filt_total += filtered_energy;
        channels.push(ChannelMetrics {
            name: layout.channel_name(c),
            reference_energy,
            filtered_energy,
            jitter_ratio: ratio_or_one(filtered_energy, reference_energy),
            lag,
            peak_retention: peak_retention(&ref_col, &filt_col),
        });
    }

    lags.sort_by(f64::total_cmp);
    let median_lag = match lags.len() {
        0 => 0.0,
        n if n % 2 == 1 => lags[n / 2],
        n => 0.5 * (lags[n / 2 - 1] + lags[n / 2]),
    };
    let min_peak_retention = if channels.is_empty() {
        1.0
    } else {
        channels
            .iter()
            .map(|c| c.peak_retention)
            .fold(f64::INFINITY, f64::min)
    };

    let (mean_frame_ms, max_frame_ms) = if timings_ms.is_empty() {
        (0.0, 0.0)
    } else {
        (
            timings_ms.iter().sum::<f64>() / timings_ms.len() as f64,
            timings_ms.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    };

    Ok(JitterReport {
        frames,
        channels,
        jitter_ratio: ratio_or_one(filt_total, ref_total),
        median_lag,
        min_peak_retention,
        mean_frame_ms,
        max_frame_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames_from(series: &[f64]) -> Vec<FrameSample> {
        series
            .iter()
            .enumerate()
            .map(|(k, &v)| FrameSample {
                frame: k as u64,
                t: k as f64 / 60.0,
                weights: vec![v],
                landmarks: vec![],
            })
            .collect()
    }

    fn sine(n: usize) -> Vec<f64> {
        (0..n).map(|k| (k as f64 * 0.2).sin()).collect()
    }

    #[test]
    fn second_difference_energy_oracle() {
        let e = second_difference_energy(&[0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((e - 6.0).abs() < 1e-15);
        assert_eq!(second_difference_energy(&[1.0, 2.0]), 0.0);
        assert_eq!(second_difference_energy(&[0.0, 1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn identical_runs_score_perfectly() {
        let run = frames_from(&sine(100));
        let report = evaluate_run(&run, &run, &[]).unwrap();
        assert_eq!(report.frames, 100);
        assert!((report.jitter_ratio - 1.0).abs() < 1e-12);
        assert_eq!(report.median_lag, 0.0);
        assert!((report.min_peak_retention - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_delay_is_detected() {
        let base = sine(120);
        let delayed: Vec<f64> = (0..120)
            .map(|k| if k < 3 { base[0] } else { base[k - 3] })
            .collect();
        let lag = cross_correlation_lag(&base, &delayed, DEFAULT_MAX_LAG);
        assert_eq!(lag, 3);

        let report = evaluate_run(&frames_from(&base), &frames_from(&delayed), &[]).unwrap();
        assert_eq!(report.median_lag, 3.0);
    }

    #[test]
    fn smoothing_reduces_the_jitter_ratio() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let noisy: Vec<f64> = sine(200)
            .iter()
            .map(|v| v + 0.1 * (rng.random::<f64>() - 0.5))
            .collect();
        // Width-5 moving average as a stand-in smoother.
        let smoothed: Vec<f64> = (0..noisy.len())
            .map(|k| {
                let lo = k.saturating_sub(2);
                let hi = (k + 3).min(noisy.len());
                noisy[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            })
            .collect();
        let report = evaluate_run(&frames_from(&noisy), &frames_from(&smoothed), &[]).unwrap();
        assert!(report.jitter_ratio < 0.2, "{}", report.jitter_ratio);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let a = frames_from(&sine(10));
        let b = frames_from(&sine(9));
        assert!(matches!(
            evaluate_run(&a, &b, &[]),
            Err(Error::LengthMismatch { left: 10, right: 9 })
        ));
    }

    #[test]
    fn channel_shape_mismatch_is_rejected() {
        let a = frames_from(&sine(10));
        let mut b = frames_from(&sine(10));
        b[4].weights.push(0.0);
        assert!(matches!(
            evaluate_run(&a, &b, &[]),
            Err(Error::ChannelCountMismatch { .. })
        ));
    }

    #[test]
    fn empty_runs_produce_a_neutral_report() {
        let report = evaluate_run(&[], &[], &[]).unwrap();
        assert_eq!(report.frames, 0);
        assert_eq!(report.jitter_ratio, 1.0);
        assert_eq!(report.min_peak_retention, 1.0);
    }

    #[test]
    fn timings_are_aggregated() {
        let run = frames_from(&sine(10));
        let report = evaluate_run(&run, &run, &[0.1, 0.3, 0.2]).unwrap();
        assert!((report.mean_frame_ms - 0.2).abs() < 1e-12);
        assert!((report.max_frame_ms - 0.3).abs() < 1e-12);
    }

    #[test]
    fn flat_reference_guards_divisions() {
        let flat = frames_from(&vec![0.5; 20]);
        let report = evaluate_run(&flat, &flat, &[]).unwrap();
        assert_eq!(report.jitter_ratio, 1.0);
        assert_eq!(report.channels[0].jitter_ratio, 1.0);
        assert_eq!(report.channels[0].peak_retention, 1.0);
    }

    #[test]
    fn report_round_trips_through_json() {
        let run = frames_from(&sine(30));
        let report = evaluate_run(&run, &run, &[0.05]).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: JitterReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
