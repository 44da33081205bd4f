//! Watch a scalar Kalman filter settle, and see how q and r trade lag
//! against smoothing.
//!
//! The filter is seeded on the first observation, so there is no start-up
//! transient toward an arbitrary prior. With r = 0 the gain saturates at 1
//! and the filter passes measurements through exactly.
//!
//! ```bash
//! cargo run -p facekit --example kalman_behavior
//! ```

use facekit::filter::{KalmanConfig, KalmanModel, KalmanState};

fn main() {
    // Unit step observed without noise: how fast does each tuning settle?
    println!("step response (measurement jumps 0 -> 1 at frame 5):\n");
    println!("{:>7} {:>12} {:>12} {:>12}", "frame", "q/r = 0.01", "q/r = 1", "q/r = 100");

    let tunings = [
        KalmanConfig { q: 1e-4, r: 1e-2, ..KalmanConfig::default() },
        KalmanConfig { q: 1e-2, r: 1e-2, ..KalmanConfig::default() },
        KalmanConfig { q: 1.0, r: 1e-2, ..KalmanConfig::default() },
    ];
    let mut states: Vec<KalmanState> =
        tunings.iter().map(|cfg| KalmanState::seeded(0.0, cfg)).collect();

    for frame in 0..15 {
        let z = if frame >= 5 { 1.0 } else { 0.0 };
        let mut row = format!("{frame:>7}");
        for (state, cfg) in states.iter_mut().zip(&tunings) {
            state.predict(cfg);
            state.update(z, cfg).expect("well-formed config");
            row.push_str(&format!(" {:>12.5}", state.estimate()));
        }
        println!("{row}");
    }
    println!("\nlarger q trusts new measurements more: faster settling, less smoothing.");

    // Zero measurement noise: the estimate is the measurement, bit for bit.
    let exact = KalmanConfig {
        model: KalmanModel::RandomWalk,
        q: 1e-2,
        r: 0.0,
        initial_covariance: 1.0,
    };
    let mut state = KalmanState::seeded(0.25, &exact);
    state.predict(&exact);
    state.update(0.7071067811865476, &exact).expect("update");
    assert_eq!(state.estimate(), 0.7071067811865476);
    println!("with r = 0 the filter reproduces the measurement exactly: {}", state.estimate());
}
