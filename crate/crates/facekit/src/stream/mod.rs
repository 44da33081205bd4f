//! Frame streams: the per-frame record type, a stateful smoothing pipeline,
//! and a batch runner that filters whole recordings (optionally across
//! threads, one worker per group of channels).

pub mod io;
pub mod metrics;
pub mod synth;

use serde::{Deserialize, Serialize};

use crate::blendshape::clamp_project;
use crate::error::{Error, Result};
use crate::filter::{filter_series, FilterConfig, HybridFilter};

pub use io::{read_stream, write_stream, StreamFormat};
pub use metrics::{evaluate_run, ChannelMetrics, JitterReport};
pub use synth::{generate_stream, SynthSpec, Waveform};

/// One tracked frame: expression weights plus 2D landmark positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSample {
    pub frame: u64,
    /// Capture time in seconds.
    pub t: f64,
    pub weights: Vec<f64>,
    pub landmarks: Vec<[f64; 2]>,
}

impl FrameSample {
    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::NonFinite {
                context: "frame timestamp",
            });
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite {
                context: "expression weights",
            });
        }
        if self
            .landmarks
            .iter()
            .any(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::NonFinite {
                context: "landmark positions",
            });
        }
        Ok(())
    }
}

/// Fixed channel arrangement of a stream: all weights first, then the
/// interleaved x/y coordinates of each landmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelLayout {
    pub n_weights: usize,
    pub n_landmarks: usize,
}

impl ChannelLayout {
    pub fn of(sample: &FrameSample) -> Self {
        ChannelLayout {
            n_weights: sample.weights.len(),
            n_landmarks: sample.landmarks.len(),
        }
    }

    pub fn channels(&self) -> usize {
        self.n_weights + 2 * self.n_landmarks
    }

    pub fn check(&self, sample: &FrameSample) -> Result<()> {
        if sample.weights.len() != self.n_weights {
            return Err(Error::ChannelCountMismatch {
                what: "expression weights",
                expected: self.n_weights,
                got: sample.weights.len(),
            });
        }
        if sample.landmarks.len() != self.n_landmarks {
            return Err(Error::ChannelCountMismatch {
                what: "landmarks",
                expected: self.n_landmarks,
                got: sample.landmarks.len(),
            });
        }
        Ok(())
    }

    /// Value of channel `channel` in `sample`, following layout order.
    pub fn value(&self, sample: &FrameSample, channel: usize) -> f64 {
        if channel < self.n_weights {
            sample.weights[channel]
        } else {
            let k = channel - self.n_weights;
            sample.landmarks[k / 2][k % 2]
        }
    }

    /// Human-readable channel name: `w3`, `x1`, `y1`.
    pub fn channel_name(&self, channel: usize) -> String {
        if channel < self.n_weights {
            format!("w{channel}")
        } else {
            let k = channel - self.n_weights;
            let axis = if k % 2 == 0 { 'x' } else { 'y' };
            format!("{axis}{}", k / 2)
        }
    }
}

/// Stateful per-channel smoothing for live streams. Every channel gets its
/// own filter; all of them share one smoothing kernel. Filtered weight
/// vectors are projected back onto the valid expression region.
pub struct PipelineState {
    layout: ChannelLayout,
    filters: Vec<HybridFilter>,
}

impl PipelineState {
    pub fn new(n_weights: usize, n_landmarks: usize, cfg: &FilterConfig) -> Result<Self> {
        let layout = ChannelLayout {
            n_weights,
            n_landmarks,
        };
        if layout.channels() == 0 {
            return Err(Error::InvalidConfig {
                msg: "a pipeline needs at least one channel".into(),
            });
        }
        let proto = HybridFilter::new(cfg)?;
        let filters = vec![proto; layout.channels()];
        Ok(PipelineState { layout, filters })
    }

    pub fn layout(&self) -> ChannelLayout {
        self.layout
    }

    /// Smooths one frame, producing exactly one output frame.
    pub fn process(&mut self, sample: &FrameSample) -> Result<FrameSample> {
        self.layout.check(sample)?;
        sample.validate()?;

        let mut weights = Vec::with_capacity(self.layout.n_weights);
        for (c, filter) in self.filters[..self.layout.n_weights].iter_mut().enumerate() {
            weights.push(filter.step(sample.weights[c])?);
        }
        let weights = clamp_project(&weights)?;

        let mut landmarks = Vec::with_capacity(self.layout.n_landmarks);
        for (k, point) in sample.landmarks.iter().enumerate() {
            let base = self.layout.n_weights + 2 * k;
            let x = self.filters[base].step(point[0])?;
            let y = self.filters[base + 1].step(point[1])?;
            landmarks.push([x, y]);
        }

        Ok(FrameSample {
            frame: sample.frame,
            t: sample.t,
            weights,
            landmarks,
        })
    }

    pub fn reset(&mut self) {
        for f in &mut self.filters {
            f.reset();
        }
    }
}

/// Checks shape, finiteness, and strictly increasing frame numbers.
pub fn validate_stream(samples: &[FrameSample], layout: &ChannelLayout) -> Result<()> {
    let mut prev: Option<u64> = None;
    for sample in samples {
        layout.check(sample)?;
        sample.validate()?;
        if let Some(p) = prev {
            if sample.frame <= p {
                return Err(Error::NonMonotoneFrame {
                    prev: p,
                    got: sample.frame,
                });
            }
        }
        prev = Some(sample.frame);
    }
    Ok(())
}

/// Filters a complete recording. Channels are independent, so `threads > 1`
/// splits them across scoped worker threads; results are identical to the
/// single-threaded path. One output frame per input frame.
pub fn filter_run(
    samples: &[FrameSample],
    cfg: &FilterConfig,
    threads: usize,
) -> Result<Vec<FrameSample>> {
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    cfg.validate()?;
    let layout = ChannelLayout::of(&samples[0]);
    validate_stream(samples, &layout)?;

    let n = samples.len();
    let channels = layout.channels();
    let mut columns: Vec<Vec<f64>> = (0..channels)
        .map(|c| samples.iter().map(|s| layout.value(s, c)).collect())
        .collect();

    let workers = threads.max(1).min(channels);
    if workers <= 1 {
        for col in &mut columns {
            *col = filter_series(col, cfg)?;
        }
    } else {
        let chunk = channels.div_ceil(workers);
        let results: Vec<Result<()>> = std::thread::scope(|scope| {
            let handles: Vec<_> = columns
                .chunks_mut(chunk)
                .map(|cols| {
                    scope.spawn(move || -> Result<()> {
                        for col in cols {
                            *col = filter_series(col, cfg)?;
                        }
                        Ok(())
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("filter worker panicked"))
                .collect()
        });
        for r in results {
            r?;
        }
    }

    let mut out = Vec::with_capacity(n);
    for (i, sample) in samples.iter().enumerate() {
        let raw: Vec<f64> = (0..layout.n_weights).map(|w| columns[w][i]).collect();
        let weights = clamp_project(&raw)?;
        let landmarks: Vec<[f64; 2]> = (0..layout.n_landmarks)
            .map(|k| {
                let base = layout.n_weights + 2 * k;
                [columns[base][i], columns[base + 1][i]]
            })
            .collect();
        out.push(FrameSample {
            frame: sample.frame,
            t: sample.t,
            weights,
            landmarks,
        });
    }
    Ok(out)
}
