//! Synthetic capture streams with known ground truth.
//!
//! Each channel follows a deterministic waveform; Gaussian noise of chosen
//! sigma is layered on top. Generators return both the noisy stream and the
//! clean one so filters can be scored against truth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

use super::FrameSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Waveform {
    /// 0 until a third of the way in, then full amplitude.
    Step,
    /// Raised-cosine bump, 40 frames wide, centered a third of the way in.
    Pulse,
    /// Slow raised sine with a 120-frame period, range `[0, amplitude]`.
    Sine,
    /// Mean of the other three.
    Mixture,
}

impl Waveform {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "step" => Ok(Waveform::Step),
            "pulse" => Ok(Waveform::Pulse),
            "sine" => Ok(Waveform::Sine),
            "mixture" => Ok(Waveform::Mixture),
            other => Err(Error::InvalidConfig {
                msg: format!(
                    "unknown waveform {other:?}, expected step, pulse, sine, or mixture"
                ),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Waveform::Step => "step",
            Waveform::Pulse => "pulse",
            Waveform::Sine => "sine",
            Waveform::Mixture => "mixture",
        }
    }

    /// Clean value at frame `k` of `frames`.
    pub fn value(self, k: usize, frames: usize, amplitude: f64) -> f64 {
        let onset = frames / 3;
        match self {
            Waveform::Step => {
                if k >= onset {
                    amplitude
                } else {
                    0.0
                }
            }
            Waveform::Pulse => {
                let d = k as f64 - onset as f64;
                if d.abs() <= 20.0 {
                    0.5 * amplitude * (1.0 + (std::f64::consts::PI * d / 20.0).cos())
                } else {
                    0.0
                }
            }
            Waveform::Sine => {
                0.5 * amplitude * (1.0 - (std::f64::consts::TAU * k as f64 / 120.0).cos())
            }
            Waveform::Mixture => {
                (Waveform::Step.value(k, frames, amplitude)
                    + Waveform::Pulse.value(k, frames, amplitude)
                    + Waveform::Sine.value(k, frames, amplitude))
                    / 3.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub wave: Waveform,
    pub frames: usize,
    /// Standard deviation of the added Gaussian noise.
    pub sigma: f64,
    pub amplitude: f64,
    pub n_weights: usize,
    pub n_landmarks: usize,
    pub seed: u64,
    /// Frames per second; sets the `t` column.
    pub frame_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            wave: Waveform::Mixture,
            frames: 300,
            sigma: 0.05,
            amplitude: 1.0,
            n_weights: 1,
            n_landmarks: 1,
            seed: 17,
            frame_rate: 60.0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig {
                msg: format!("noise sigma must be non-negative, got {}", self.sigma),
            });
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidConfig {
                msg: format!("amplitude must be positive, got {}", self.amplitude),
            });
        }
        if !(self.frame_rate > 0.0) || !self.frame_rate.is_finite() {
            return Err(Error::InvalidConfig {
                msg: format!("frame rate must be positive, got {}", self.frame_rate),
            });
        }
        if self.n_weights + self.n_landmarks == 0 {
            return Err(Error::InvalidConfig {
                msg: "the stream needs at least one channel".into(),
            });
        }
        Ok(())
    }
}

/// Generates `(noisy, clean)` streams of `spec.frames` samples each.
/// Weight channel `c` carries the waveform scaled by `1 / (c + 1)`;
/// landmark coordinates trace the waveform around per-landmark offsets.
pub fn generate_stream(spec: &SynthSpec) -> Result<(Vec<FrameSample>, Vec<FrameSample>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.sigma).map_err(|e| Error::InvalidConfig {
        msg: format!("invalid noise sigma: {e}"),
    })?;

    let mut noisy = Vec::with_capacity(spec.frames);
    let mut clean = Vec::with_capacity(spec.frames);
    for k in 0..spec.frames {
        let v = spec.wave.value(k, spec.frames, spec.amplitude);
        let t = k as f64 / spec.frame_rate;

        let clean_weights: Vec<f64> =
            (0..spec.n_weights).map(|c| v / (c + 1) as f64).collect();
        let clean_landmarks: Vec<[f64; 2]> = (0..spec.n_landmarks)
            .map(|j| {
                let offset = 10.0 * (j + 1) as f64;
                [offset + v, -offset - v]
            })
            .collect();

        let noisy_weights: Vec<f64> = clean_weights
            .iter()
            .map(|w| w + noise.sample(&mut rng))
            .collect();
        let noisy_landmarks: Vec<[f64; 2]> = clean_landmarks
            .iter()
            .map(|p| [p[0] + noise.sample(&mut rng), p[1] + noise.sample(&mut rng)])
            .collect();

        clean.push(FrameSample {
            frame: k as u64,
            t,
            weights: clean_weights,
            landmarks: clean_landmarks,
        });
        noisy.push(FrameSample {
            frame: k as u64,
            t,
            weights: noisy_weights,
            landmarks: noisy_landmarks,
        });
    }
    Ok((noisy, clean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn waveform_shapes_match_their_definitions() {
        let n = 300;
        let a = 2.0;
        // Step switches exactly at n/3.
        assert_eq!(Waveform::Step.value(99, n, a), 0.0);
        assert_eq!(Waveform::Step.value(100, n, a), a);
        // Pulse peaks at the center at full amplitude, zero beyond 20 frames.
        assert!((Waveform::Pulse.value(100, n, a) - a).abs() < 1e-12);
        assert_eq!(Waveform::Pulse.value(79, n, a), 0.0);
        assert_eq!(Waveform::Pulse.value(121, n, a), 0.0);
        assert!((Waveform::Pulse.value(120, n, a)).abs() < 1e-12);
        // Sine starts at 0, peaks at half period.
        assert_eq!(Waveform::Sine.value(0, n, a), 0.0);
        assert!((Waveform::Sine.value(60, n, a) - a).abs() < 1e-12);
        // Mixture stays within [0, amplitude].
        for k in 0..n {
            let v = Waveform::Mixture.value(k, n, a);
            assert!((0.0..=a).contains(&v), "frame {k}: {v}");
        }
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let spec = SynthSpec::default();
        let (a, _) = generate_stream(&spec).unwrap();
        let (b, _) = generate_stream(&spec).unwrap();
        assert_eq!(a, b);
        let (c, _) = generate_stream(&SynthSpec { seed: 18, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_sigma_leaves_the_clean_signal_untouched() {
        let spec = SynthSpec {
            sigma: 0.0,
            ..SynthSpec::default()
        };
        let (noisy, clean) = generate_stream(&spec).unwrap();
        assert_eq!(noisy, clean);
    }

    #[test]
    fn noise_variance_tracks_sigma() {
        let spec = SynthSpec {
            frames: 4000,
            sigma: 0.05,
            ..SynthSpec::default()
        };
        let (noisy, clean) = generate_stream(&spec).unwrap();
        let mut residuals = Vec::new();
        for (n, c) in noisy.iter().zip(&clean) {
            residuals.push(n.weights[0] - c.weights[0]);
            residuals.push(n.landmarks[0][0] - c.landmarks[0][0]);
            residuals.push(n.landmarks[0][1] - c.landmarks[0][1]);
        }
        let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
        let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
            / residuals.len() as f64;
        let target = spec.sigma * spec.sigma;
        assert!(
            (var - target).abs() < 0.2 * target,
            "variance {var} vs sigma^2 {target}"
        );
    }

    #[test]
    fn frames_and_times_advance_uniformly() {
        let spec = SynthSpec {
            frames: 10,
            frame_rate: 50.0,
            ..SynthSpec::default()
        };
        let (noisy, _) = generate_stream(&spec).unwrap();
        for (k, s) in noisy.iter().enumerate() {
            assert_eq!(s.frame, k as u64);
            assert!((s.t - k as f64 / 50.0).abs() < 1e-15);
        }
    }

    #[test]
    fn weight_channels_scale_down_harmonically() {
        let spec = SynthSpec {
            n_weights: 3,
            n_landmarks: 0,
            sigma: 0.0,
            wave: Waveform::Sine,
            ..SynthSpec::default()
        };
        let (_, clean) = generate_stream(&spec).unwrap();
        let s = &clean[60];
        assert!((s.weights[1] - s.weights[0] / 2.0).abs() < 1e-15);
        assert!((s.weights[2] - s.weights[0] / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_frames_produce_empty_streams() {
        let spec = SynthSpec {
            frames: 0,
            ..SynthSpec::default()
        };
        let (noisy, clean) = generate_stream(&spec).unwrap();
        assert!(noisy.is_empty() && clean.is_empty());
    }

    #[test]
    fn waveform_names_parse_and_round_trip() {
        for wave in [
            Waveform::Step,
            Waveform::Pulse,
            Waveform::Sine,
            Waveform::Mixture,
        ] {
            assert_eq!(Waveform::parse(wave.name()).unwrap(), wave);
        }
        assert!(Waveform::parse("triangle").is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SynthSpec {
            sigma: -0.1,
            ..SynthSpec::default()
        };
        assert!(generate_stream(&spec).is_err());
        spec = SynthSpec {
            amplitude: 0.0,
            ..SynthSpec::default()
        };
        assert!(generate_stream(&spec).is_err());
        spec = SynthSpec {
            n_weights: 0,
            n_landmarks: 0,
            ..SynthSpec::default()
        };
        assert!(generate_stream(&spec).is_err());
    }
}
