//! Scalar-observation Kalman filtering for per-channel signals.
//!
//! Two process models are offered. The random walk tracks a single value and
//! is the default for blendshape weights and landmark coordinates; the
//! constant-velocity model carries `[value, velocity]` and follows ramps
//! without steady-state lag. Either way the observation is the scalar channel
//! sample, so the innovation is scalar and the update needs no matrix
//! inversion.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KalmanModel {
    RandomWalk,
    ConstantVelocity,
}

impl KalmanModel {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "rw" | "random-walk" => Ok(KalmanModel::RandomWalk),
            "cv" | "constant-velocity" => Ok(KalmanModel::ConstantVelocity),
            other => Err(Error::InvalidConfig {
                msg: format!("unknown kalman model {other:?}, expected rw or cv"),
            }),
        }
    }
}

/// Noise model for one channel.
///
/// `q` is the per-frame process noise variance added on predict, `r` the
/// measurement noise variance. Both must be non-negative and not both zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanConfig {
    pub model: KalmanModel,
    pub q: f64,
    pub r: f64,
    /// Prior variance used when the first observation seeds the state.
    pub initial_covariance: f64,
}

impl Default for KalmanConfig {
    fn default() -> Self {
        KalmanConfig {
            model: KalmanModel::RandomWalk,
            q: 1e-2,
            r: 1e-2,
            initial_covariance: 1.0,
        }
    }
}

impl KalmanConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.q) || !ok(self.r) || !ok(self.initial_covariance) {
            return Err(Error::InvalidConfig {
                msg: format!(
                    "kalman noise parameters must be finite and non-negative (q={}, r={}, p0={})",
                    self.q, self.r, self.initial_covariance
                ),
            });
        }
        if self.q == 0.0 && self.r == 0.0 {
            return Err(Error::InvalidConfig {
                msg: "kalman q and r cannot both be zero".into(),
            });
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        match self.model {
            KalmanModel::RandomWalk => 1,
            KalmanModel::ConstantVelocity => 2,
        }
    }
}

/// Filter state: estimate `x` and covariance `p`. For the random walk only
/// the first component is live; the rest stays zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub x: [f64; 2],
    pub p: [[f64; 2]; 2],
}

impl KalmanState {
    /// Fresh state with estimate `x0` (zero velocity) and covariance `p0 * I`.
    pub fn new(x0: f64, p0: f64, cfg: &KalmanConfig) -> Self {
        let mut p = [[0.0; 2]; 2];
        for d in 0..cfg.dim() {
            p[d][d] = p0;
        }
        KalmanState { x: [x0, 0.0], p }
    }

    /// State seeded from the first observation of a stream.
    pub fn seeded(z: f64, cfg: &KalmanConfig) -> Self {
        KalmanState::new(z, cfg.initial_covariance, cfg)
    }

    /// Estimate of the observed quantity.
    pub fn estimate(&self) -> f64 {
        self.x[0]
    }

    /// Time update: push the state through the process model and inflate the
    /// covariance by `q` on each live diagonal.
    pub fn predict(&mut self, cfg: &KalmanConfig) {
        match cfg.model {
            KalmanModel::RandomWalk => {
                self.p[0][0] += cfg.q;
            }
            KalmanModel::ConstantVelocity => {
                self.x[0] += self.x[1];
                let [[p00, p01], [p10, p11]] = self.p;
                self.p = [
                    [p00 + p01 + p10 + p11 + cfg.q, p01 + p11],
                    [p10 + p11, p11 + cfg.q],
                ];
            }
        }
    }

    /// Measurement update with observation `z`. Returns the gain applied to
    /// the observed component, which always lies in `[0, 1]`.
    pub fn update(&mut self, z: f64, cfg: &KalmanConfig) -> Result<f64> {
        let s = self.p[0][0] + cfg.r;
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::DegenerateInnovation);
        }
        let k0 = self.p[0][0] / s;
        let k1 = match cfg.model {
            KalmanModel::RandomWalk => 0.0,
            KalmanModel::ConstantVelocity => self.p[1][0] / s,
        };

        let innovation = z - self.x[0];
        // Convex form keeps x0 exactly z when the gain saturates at 1 (r = 0).
        self.x[0] = (1.0 - k0) * self.x[0] + k0 * z;
        self.x[1] += k1 * innovation;

        let [[p00, p01], [p10, p11]] = self.p;
        let mut p = [
            [(1.0 - k0) * p00, (1.0 - k0) * p01],
            [p10 - k1 * p00, p11 - k1 * p01],
        ];
        let off = 0.5 * (p[0][1] + p[1][0]);
        p[0][1] = off;
        p[1][0] = off;
        self.p = p;

        Ok(k0)
    }
}
