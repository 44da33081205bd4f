//! Savitzky-Golay polynomial smoothing over odd sliding windows.
//!
//! A window of `2n + 1` samples at unit-spaced offsets `t = -n..=n` is fitted
//! with a least-squares polynomial; the smoothed value is that polynomial
//! evaluated either at the window centre or at the newest sample. The fit is
//! linear in the window contents, so each evaluation point collapses to a
//! fixed weight row that is computed once per kernel and reused every frame.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Where the fitted polynomial is evaluated.
///
/// `Center` reproduces the classic zero-phase smoother but describes the
/// middle of the window, `n` frames in the past. `Endpoint` evaluates at the
/// newest sample so a causal stream gets an estimate for the current frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Center,
    Endpoint,
}

impl EvalMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "center" => Ok(EvalMode::Center),
            "endpoint" => Ok(EvalMode::Endpoint),
            other => Err(Error::InvalidKernel {
                msg: format!("unknown evaluation mode {other:?}, expected center or endpoint"),
            }),
        }
    }
}

/// Vandermonde design matrix for a window of radius `radius` and a polynomial
/// with `order + 1` coefficients: row `i` is `[1, t, t^2, ..]` at
/// `t = i - radius`.
pub fn design_matrix(radius: usize, order: usize) -> Result<Matrix> {
    check_kernel_params(radius, order)?;
    let width = 2 * radius + 1;
    let mut h = Matrix::zeros(width, order + 1);
    for i in 0..width {
        let t = i as f64 - radius as f64;
        let mut power = 1.0;
        for j in 0..=order {
            h[(i, j)] = power;
            power *= t;
        }
    }
    Ok(h)
}

fn check_kernel_params(radius: usize, order: usize) -> Result<()> {
    if radius == 0 {
        return Err(Error::InvalidKernel {
            msg: "window radius must be at least 1".into(),
        });
    }
    if order > radius {
        return Err(Error::InvalidKernel {
            msg: format!("polynomial order {order} exceeds window radius {radius}"),
        });
    }
    Ok(())
}

/// `(H^T H)^-1 H^T` for the given window: maps a window directly to the
/// fitted polynomial coefficients.
fn fit_matrix(radius: usize, order: usize) -> Result<Matrix> {
    let h = design_matrix(radius, order)?;
    let gram = h.t_dot(&h);
    let ht = h.transpose();
    solve_linear(&gram, &ht).ok_or_else(|| Error::InvalidKernel {
        msg: format!("normal equations are singular for radius {radius}, order {order}"),
    })
}

/// Full smoothing projection `H (H^T H)^-1 H^T`. Row `j` holds the weights
/// that produce the fitted value at offset `t = j - radius`. Idempotent:
/// applying it twice equals applying it once.
pub fn smoothing_matrix(radius: usize, order: usize) -> Result<Matrix> {
    let h = design_matrix(radius, order)?;
    let fit = fit_matrix(radius, order)?;
    Ok(h.dot(&fit))
}

/// Gauss-Jordan with partial pivoting. `a` is square and small; returns
/// `None` when a pivot collapses.
fn solve_linear(a: &Matrix, b: &Matrix) -> Option<Matrix> {
    let k = a.rows();
    assert_eq!(a.cols(), k, "coefficient matrix must be square");
    assert_eq!(b.rows(), k, "right-hand side rows");
    let m = b.cols();
    let width = k + m;

    let mut aug = vec![0.0f64; k * width];
    let mut scale: f64 = 1.0;
    for r in 0..k {
        for c in 0..k {
            aug[r * width + c] = a[(r, c)];
            scale = scale.max(a[(r, c)].abs());
        }
        for c in 0..m {
            aug[r * width + k + c] = b[(r, c)];
        }
    }

    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&p, &q| {
                aug[p * width + col]
                    .abs()
                    .total_cmp(&aug[q * width + col].abs())
            })
            .unwrap();
        let pivot = aug[pivot_row * width + col];
        if pivot.abs() < 1e-12 * scale {
            return None;
        }
        if pivot_row != col {
            for c in 0..width {
                aug.swap(pivot_row * width + c, col * width + c);
            }
        }
        let inv = 1.0 / pivot;
        for c in 0..width {
            aug[col * width + c] *= inv;
        }
        for r in 0..k {
            if r == col {
                continue;
            }
            let factor = aug[r * width + col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..width {
                aug[r * width + c] -= factor * aug[col * width + c];
            }
        }
    }

    Some(Matrix::from_fn(k, m, |r, c| aug[r * width + k + c]))
}

/// Precomputed smoothing kernel for one `(radius, order, mode)` choice.
///
/// Immutable and shareable across any number of channels. Orders up to the
/// radius are accepted; genuine smoothing wants `order < radius`, which all
/// shipped defaults satisfy.
#[derive(Debug, Clone)]
pub struct SgKernel {
    radius: usize,
    order: usize,
    mode: EvalMode,
    weights: Vec<f64>,
    fit: Matrix,
}

impl SgKernel {
    pub fn new(radius: usize, order: usize, mode: EvalMode) -> Result<Self> {
        let h = design_matrix(radius, order)?;
        let fit = fit_matrix(radius, order)?;
        let eval_row = match mode {
            EvalMode::Center => radius,
            EvalMode::Endpoint => 2 * radius,
        };
        let width = 2 * radius + 1;
        let mut weights = vec![0.0f64; width];
        for (c, w) in weights.iter_mut().enumerate() {
            *w = (0..=order).map(|k| h[(eval_row, k)] * fit[(k, c)]).sum();
        }
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Ok(SgKernel {
            radius,
            order,
            mode,
            weights,
            fit,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn window_len(&self) -> usize {
        2 * self.radius + 1
    }

    /// Weight row applied to a full window, oldest sample first. Sums to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Least-squares polynomial coefficients `[a0, a1, ..]` for a full
    /// window, constant term first.
    pub fn fit(&self, window: &[f64]) -> Result<Vec<f64>> {
        self.check_window(window)?;
        let mut coeffs = vec![0.0f64; self.order + 1];
        for (k, coeff) in coeffs.iter_mut().enumerate() {
            *coeff = window
                .iter()
                .enumerate()
                .map(|(c, &x)| self.fit[(k, c)] * x)
                .sum();
        }
        Ok(coeffs)
    }

    /// Smoothed value at the kernel's evaluation point.
    pub fn smooth(&self, window: &[f64]) -> Result<f64> {
        self.check_window(window)?;
        Ok(self
            .weights
            .iter()
            .zip(window)
            .map(|(w, x)| w * x)
            .sum())
    }

    fn check_window(&self, window: &[f64]) -> Result<()> {
        if window.len() != self.window_len() {
            return Err(Error::WindowNotFull {
                have: window.len(),
                need: self.window_len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn design_matrix_radius_one_linear() {
        let h = design_matrix(1, 1).unwrap();
        assert_eq!(h.rows(), 3);
        assert_eq!(h.cols(), 2);
        assert_eq!(h.row(0), &[1.0, -1.0]);
        assert_eq!(h.row(1), &[1.0, 0.0]);
        assert_eq!(h.row(2), &[1.0, 1.0]);
    }

    #[test]
    fn design_matrix_radius_two_quadratic() {
        let h = design_matrix(2, 2).unwrap();
        assert_eq!(h.rows(), 5);
        for (i, t) in (-2i32..=2).enumerate() {
            let t = t as f64;
            assert_eq!(h.row(i), &[1.0, t, t * t]);
        }
    }

    #[test]
    fn gram_matrix_radius_one_linear() {
        let h = design_matrix(1, 1).unwrap();
        let gram = h.t_dot(&h);
        assert_eq!(gram.row(0), &[3.0, 0.0]);
        assert_eq!(gram.row(1), &[0.0, 2.0]);
    }

    #[test]
    fn rejects_unsolvable_kernels() {
        assert!(matches!(
            design_matrix(0, 0),
            Err(Error::InvalidKernel { .. })
        ));
        assert!(matches!(
            design_matrix(1, 2),
            Err(Error::InvalidKernel { .. })
        ));
        assert!(matches!(
            SgKernel::new(2, 3, EvalMode::Center),
            Err(Error::InvalidKernel { .. })
        ));
    }

    #[test]
    fn fit_line_through_1_2_4() {
        let kernel = SgKernel::new(1, 1, EvalMode::Center).unwrap();
        let coeffs = kernel.fit(&[1.0, 2.0, 4.0]).unwrap();
        assert!((coeffs[0] - 7.0 / 3.0).abs() < 1e-12);
        assert!((coeffs[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn fit_constant_window_recovers_constant() {
        let kernel = SgKernel::new(3, 2, EvalMode::Center).unwrap();
        let coeffs = kernel.fit(&[4.25; 7]).unwrap();
        assert!((coeffs[0] - 4.25).abs() < 1e-12);
        assert!(coeffs[1].abs() < 1e-12);
        assert!(coeffs[2].abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_exact_line() {
        let kernel = SgKernel::new(3, 1, EvalMode::Endpoint).unwrap();
        let window: Vec<f64> = (-3..=3).map(|t| 2.0 + 3.0 * t as f64).collect();
        let coeffs = kernel.fit(&window).unwrap();
        assert!((coeffs[0] - 2.0).abs() < 1e-12);
        assert!((coeffs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_center_and_endpoint_of_1_2_4() {
        let center = SgKernel::new(1, 1, EvalMode::Center).unwrap();
        assert!((center.smooth(&[1.0, 2.0, 4.0]).unwrap() - 7.0 / 3.0).abs() < 1e-12);

        let endpoint = SgKernel::new(1, 1, EvalMode::Endpoint).unwrap();
        assert!((endpoint.smooth(&[1.0, 2.0, 4.0]).unwrap() - 23.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_constant_window_is_exact() {
        for mode in [EvalMode::Center, EvalMode::Endpoint] {
            let kernel = SgKernel::new(4, 2, mode).unwrap();
            let out = kernel.smooth(&[0.37; 9]).unwrap();
            assert!((out - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_rejects_partial_window() {
        let kernel = SgKernel::new(2, 1, EvalMode::Center).unwrap();
        assert!(matches!(
            kernel.smooth(&[1.0, 2.0]),
            Err(Error::WindowNotFull { have: 2, need: 5 })
        ));
        assert!(kernel.fit(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn weights_sum_to_one_for_all_small_kernels() {
        for radius in 1..=7 {
            for order in 0..=radius {
                for mode in [EvalMode::Center, EvalMode::Endpoint] {
                    let kernel = SgKernel::new(radius, order, mode).unwrap();
                    let sum: f64 = kernel.weights().iter().sum();
                    assert!(
                        (sum - 1.0).abs() < 1e-12,
                        "radius {radius} order {order} {mode:?}: sum {sum}"
                    );
                }
            }
        }
    }

    #[test]
    fn smoothing_matrix_is_idempotent() {
        for radius in 1..=5 {
            for order in 0..=radius {
                let p = smoothing_matrix(radius, order).unwrap();
                let pp = p.dot(&p);
                for r in 0..p.rows() {
                    for c in 0..p.cols() {
                        assert!(
                            (pp[(r, c)] - p[(r, c)]).abs() < 1e-9,
                            "radius {radius} order {order} at ({r},{c})"
                        );
                    }
                }
            }
        }
    }

    fn eval_poly(coeffs: &[f64], t: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    proptest! {
        #[test]
        fn prop_polynomial_windows_are_reproduced_exactly(
            radius in 1usize..=7,
            order_frac in 0.0f64..=1.0,
            coeffs in proptest::collection::vec(-2.0f64..2.0, 1..=7),
            endpoint in proptest::bool::ANY,
        ) {
            let mode = if endpoint { EvalMode::Endpoint } else { EvalMode::Center };
            let order = (radius as f64 * order_frac) as usize;
            let degree = coeffs.len().saturating_sub(1).min(order);
            let coeffs = &coeffs[..=degree];
            let kernel = SgKernel::new(radius, order, mode).unwrap();
            let window: Vec<f64> = (0..kernel.window_len())
                .map(|i| eval_poly(coeffs, i as f64 - radius as f64))
                .collect();
            let t_eval = match mode {
                EvalMode::Center => 0.0,
                EvalMode::Endpoint => radius as f64,
            };
            let expected = eval_poly(coeffs, t_eval);
            let got = kernel.smooth(&window).unwrap();
            let scale = window.iter().fold(1.0f64, |a, &x| a.max(x.abs()));
            prop_assert!((got - expected).abs() < 1e-9 * scale,
                "radius {} order {} {:?}: got {}, expected {}", radius, order, mode, got, expected);
        }

        #[test]
        fn prop_smoothing_row_matches_projection_row(
            radius in 1usize..=6,
            order_frac in 0.0f64..=1.0,
        ) {
            let order = (radius as f64 * order_frac) as usize;
            let p = smoothing_matrix(radius, order).unwrap();
            for (mode, row) in [(EvalMode::Center, radius), (EvalMode::Endpoint, 2 * radius)] {
                let kernel = SgKernel::new(radius, order, mode).unwrap();
                for (a, b) in kernel.weights().iter().zip(p.row(row)) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
