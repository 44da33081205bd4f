//! Learning-rate and momentum schedule.
//!
//! Three phases over the full run: a geometric warmup across the first
//! epoch, inverse-square-root decay after it, and a cosine rampdown to zero
//! over the tail of training. The first-moment decay `beta1` eases from 0.9
//! to 0.5 inside the rampdown so the optimizer stops coasting as the rate
//! dies.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingSchedule {
    pub total_epochs: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    /// Warmup starts at `base_lr / warmup_factor`.
    pub warmup_factor: f64,
    /// Fraction of total steps spent ramping down to zero.
    pub rampdown_fraction: f64,
}

impl Default for TrainingSchedule {
    fn default() -> Self {
        TrainingSchedule {
            total_epochs: 40,
            batch_size: 64,
            base_lr: 1e-3,
            warmup_factor: 100.0,
            rampdown_fraction: 0.15,
        }
    }
}

impl TrainingSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.total_epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig {
                msg: "epochs and batch size must be positive".into(),
            });
        }
        if !(self.base_lr > 0.0) || !self.base_lr.is_finite() {
            return Err(Error::InvalidConfig {
                msg: format!("base learning rate must be positive, got {}", self.base_lr),
            });
        }
        if !(self.warmup_factor >= 1.0) || !self.warmup_factor.is_finite() {
            return Err(Error::InvalidConfig {
                msg: format!("warmup factor must be at least 1, got {}", self.warmup_factor),
            });
        }
        if !(0.0..1.0).contains(&self.rampdown_fraction) {
            return Err(Error::InvalidConfig {
                msg: format!(
                    "rampdown fraction must lie in [0, 1), got {}",
                    self.rampdown_fraction
                ),
            });
        }
        Ok(())
    }

    /// `(learning_rate, beta1)` for global step `step` (0-based across all
    /// epochs). Steps at or past the end pin to the final values (0, 0.5).
    pub fn at(&self, step: usize, steps_per_epoch: usize) -> (f64, f64) {
        let s0 = steps_per_epoch.max(1);
        let total = self.total_epochs * s0;

        let mut lr = if step < s0 {
            if s0 == 1 {
                self.base_lr
            } else {
                let exponent = (step as f64 - (s0 - 1) as f64) / (s0 - 1) as f64;
                self.base_lr * self.warmup_factor.powf(exponent)
            }
        } else {
            self.base_lr * (s0 as f64 / step as f64).sqrt()
        };

        let mut beta1 = 0.9;
        if self.rampdown_fraction > 0.0 {
            let window = ((self.rampdown_fraction * total as f64).round() as usize).max(1);
            let start = total.saturating_sub(window);
            if step >= start {
                let last = total - 1;
                let u = if step >= last || last == start {
                    1.0
                } else {
                    (step - start) as f64 / (last - start) as f64
                };
                let c = if u >= 1.0 {
                    0.0
                } else {
                    0.5 * (1.0 + (std::f64::consts::PI * u).cos())
                };
                lr *= c;
                beta1 = 0.5 + 0.4 * c;
            }
        }
        (lr, beta1)
    }

    pub fn steps_per_epoch(&self, n_samples: usize) -> usize {
        n_samples.div_ceil(self.batch_size).max(1)
    }
}
