//! Look inside the polynomial smoothing kernels.
//!
//! Every (radius, order, mode) choice collapses to a fixed weight row that
//! is dotted with the sample window. The weights always sum to 1, and any
//! window that already lies on a polynomial of the fitted order passes
//! through unchanged.
//!
//! ```bash
//! cargo run -p facekit --example inspect_kernel
//! ```

use facekit::filter::{EvalMode, SgKernel};

fn main() {
    for (radius, order) in [(2, 1), (3, 2), (4, 2)] {
        println!("radius {radius}, order {order}:");
        for mode in [EvalMode::Center, EvalMode::Endpoint] {
            let kernel = SgKernel::new(radius, order, mode).expect("valid kernel");
            let pretty: Vec<String> =
                kernel.weights().iter().map(|w| format!("{w:+.4}")).collect();
            println!("  {:<9} [{}]", format!("{mode:?}"), pretty.join(", "));
            let sum: f64 = kernel.weights().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        println!();
    }
    println!("center weights are symmetric; endpoint weights lean on recent samples\n");

    // A quadratic window passes through an order-2 kernel untouched.
    let kernel = SgKernel::new(4, 2, EvalMode::Endpoint).expect("valid kernel");
    let quadratic = |t: f64| 0.3 + 0.2 * t - 0.05 * t * t;
    let window: Vec<f64> = (0..kernel.window_len())
        .map(|i| quadratic(i as f64 - 4.0))
        .collect();
    let smoothed = kernel.smooth(&window).expect("full window");
    println!("quadratic window, endpoint value {:.6}", quadratic(4.0));
    println!("smoothed estimate              {smoothed:.6}");
    println!("difference                     {:.2e}", (smoothed - quadratic(4.0)).abs());

    // The same window with a spike is pulled back toward the fit.
    let mut spiked = window.clone();
    let last = spiked.len() - 1;
    spiked[last] += 0.5;
    let repaired = kernel.smooth(&spiked).expect("full window");
    println!("\nafter a +0.5 spike on the newest sample: {repaired:.6}");
}
