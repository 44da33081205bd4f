//! Per-channel temporal smoothing with zero frame delay.
//!
//! The default arrangement is a cascade: each incoming sample is fused by a
//! Kalman filter, the posterior estimate is pushed into a sliding window, and
//! once the window is full a Savitzky-Golay polynomial fit evaluated at the
//! newest sample produces the output. Until then the Kalman estimate itself
//! is emitted, so every input yields exactly one output and a live stream
//! never stalls. Either stage can also run alone.

pub mod kalman;
pub mod savgol;

use std::sync::Arc;

pub use kalman::{KalmanConfig, KalmanModel, KalmanState};
pub use savgol::{design_matrix, smoothing_matrix, EvalMode, SgKernel};

use crate::error::{Error, Result};

/// Which stages run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionMode {
    KalmanOnly,
    SgOnly,
    Cascade,
}

impl CompositionMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "kalman" => Ok(CompositionMode::KalmanOnly),
            "sg" => Ok(CompositionMode::SgOnly),
            "cascade" => Ok(CompositionMode::Cascade),
            other => Err(Error::InvalidConfig {
                msg: format!("unknown filter mode {other:?}, expected kalman, sg, or cascade"),
            }),
        }
    }
}

/// Sliding-window polynomial stage parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SgConfig {
    pub radius: usize,
    pub order: usize,
    pub mode: EvalMode,
}

impl Default for SgConfig {
    fn default() -> Self {
        SgConfig {
            radius: 4,
            order: 2,
            mode: EvalMode::Endpoint,
        }
    }
}

/// Complete per-channel filter description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub kalman: KalmanConfig,
    pub sg: SgConfig,
    pub mode: CompositionMode,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            kalman: KalmanConfig::default(),
            sg: SgConfig::default(),
            mode: CompositionMode::Cascade,
        }
    }
}

impl FilterConfig {
    /// Configuration keys `from_map` understands.
    pub const CONFIG_KEYS: &'static [&'static str] = &[
        "mode",
        "kalman.model",
        "kalman.q",
        "kalman.r",
        "kalman.p0",
        "sg.radius",
        "sg.order",
        "sg.mode",
    ];

    /// Defaults overridden by whatever the map provides. Unknown keys are
    /// the caller's concern (`ConfigMap::ensure_known`); values here are
    /// validated as a whole.
    pub fn from_map(map: &crate::config::ConfigMap) -> Result<Self> {
        let mut cfg = FilterConfig::default();
        if let Some(name) = map.get("mode") {
            cfg.mode = CompositionMode::parse(name)?;
        }
        if let Some(name) = map.get("kalman.model") {
            cfg.kalman.model = KalmanModel::parse(name)?;
        }
        if let Some(q) = map.get_f64("kalman.q")? {
            cfg.kalman.q = q;
        }
        if let Some(r) = map.get_f64("kalman.r")? {
            cfg.kalman.r = r;
        }
        if let Some(p0) = map.get_f64("kalman.p0")? {
            cfg.kalman.initial_covariance = p0;
        }
        if let Some(radius) = map.get_usize("sg.radius")? {
            cfg.sg.radius = radius;
        }
        if let Some(order) = map.get_usize("sg.order")? {
            cfg.sg.order = order;
        }
        if let Some(name) = map.get("sg.mode") {
            cfg.sg.mode = EvalMode::parse(name)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.kalman.validate()?;
        // Surfaces kernel problems (radius 0, order too high) at config time.
        SgKernel::new(self.sg.radius, self.sg.order, self.sg.mode)?;
        Ok(())
    }
}

/// Fixed-capacity ring of the most recent samples, oldest first.
#[derive(Debug, Clone)]
struct RingWindow {
    buf: Vec<f64>,
    start: usize,
    len: usize,
}

impl RingWindow {
    fn new(capacity: usize) -> Self {
        RingWindow {
            buf: vec![0.0; capacity],
            start: 0,
            len: 0,
        }
    }

    fn push(&mut self, x: f64) {
        let cap = self.buf.len();
        if self.len < cap {
            self.buf[(self.start + self.len) % cap] = x;
            self.len += 1;
        } else {
            self.buf[self.start] = x;
            self.start = (self.start + 1) % cap;
        }
    }

    fn is_full(&self) -> bool {
        self.len == self.buf.len()
    }

    /// Dot product with `weights`, oldest sample matched to `weights[0]`.
    fn dot(&self, weights: &[f64]) -> f64 {
        debug_assert_eq!(weights.len(), self.len);
        let cap = self.buf.len();
        let head = cap - self.start;
        if self.len <= head {
            return weights
                .iter()
                .zip(&self.buf[self.start..self.start + self.len])
                .map(|(w, x)| w * x)
                .sum();
        }
        let (w_head, w_tail) = weights.split_at(head);
        let front: f64 = w_head
            .iter()
            .zip(&self.buf[self.start..])
            .map(|(w, x)| w * x)
            .sum();
        let back: f64 = w_tail
            .iter()
            .zip(&self.buf[..self.len - head])
            .map(|(w, x)| w * x)
            .sum();
        front + back
    }

    fn reset(&mut self) {
        self.start = 0;
        self.len = 0;
    }
}

/// Streaming smoother for one scalar channel.
///
/// Feed samples with [`HybridFilter::step`]; each call returns the estimate
/// for that frame. State is owned per channel, while the polynomial kernel is
/// immutable and shared.
#[derive(Debug, Clone)]
pub struct HybridFilter {
    mode: CompositionMode,
    kalman_cfg: KalmanConfig,
    kalman: Option<KalmanState>,
    kernel: Arc<SgKernel>,
    window: RingWindow,
}

impl HybridFilter {
    pub fn new(cfg: &FilterConfig) -> Result<Self> {
        let kernel = Arc::new(SgKernel::new(cfg.sg.radius, cfg.sg.order, cfg.sg.mode)?);
        HybridFilter::with_kernel(cfg, kernel)
    }

    /// Builds a filter around an existing kernel so wide pipelines can share
    /// one weight table across all channels. The kernel must match `cfg.sg`.
    pub fn with_kernel(cfg: &FilterConfig, kernel: Arc<SgKernel>) -> Result<Self> {
        cfg.kalman.validate()?;
        if kernel.radius() != cfg.sg.radius
            || kernel.order() != cfg.sg.order
            || kernel.mode() != cfg.sg.mode
        {
            return Err(Error::InvalidConfig {
                msg: "shared kernel does not match the filter configuration".into(),
            });
        }
        let window = RingWindow::new(kernel.window_len());
        Ok(HybridFilter {
            mode: cfg.mode,
            kalman_cfg: cfg.kalman,
            kalman: None,
            kernel,
            window,
        })
    }

    /// Consumes one sample and returns the estimate for the same frame.
    pub fn step(&mut self, z: f64) -> Result<f64> {
        if !z.is_finite() {
            return Err(Error::NonFinite {
                context: "filter input sample",
            });
        }
        match self.mode {
            CompositionMode::KalmanOnly => self.kalman_pass(z),
            CompositionMode::SgOnly => Ok(self.window_pass(z)),
            CompositionMode::Cascade => {
                let fused = self.kalman_pass(z)?;
                Ok(self.window_pass(fused))
            }
        }
    }

    fn kalman_pass(&mut self, z: f64) -> Result<f64> {
        match &mut self.kalman {
            None => {
                // First observation seeds the state; a constant stream is
                // tracked exactly from frame one.
                self.kalman = Some(KalmanState::seeded(z, &self.kalman_cfg));
                Ok(z)
            }
            Some(state) => {
                state.predict(&self.kalman_cfg);
                state.update(z, &self.kalman_cfg)?;
                Ok(state.estimate())
            }
        }
    }

    fn window_pass(&mut self, x: f64) -> f64 {
        self.window.push(x);
        if self.window.is_full() {
            self.window.dot(self.kernel.weights())
        } else {
            x
        }
    }

    /// Forgets all history; the next sample starts a fresh stream.
    pub fn reset(&mut self) {
        self.kalman = None;
        self.window.reset();
    }

    pub fn kernel(&self) -> &Arc<SgKernel> {
        &self.kernel
    }
}

/// Runs a whole series through a fresh filter. Equivalent to folding
/// [`HybridFilter::step`] over the samples in order.
pub fn filter_series(series: &[f64], cfg: &FilterConfig) -> Result<Vec<f64>> {
    let mut filter = HybridFilter::new(cfg)?;
    series.iter().map(|&z| filter.step(z)).collect()
}
