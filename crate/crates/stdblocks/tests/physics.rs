//! Pendulum physics checked against closed-form oracles.

use blockflow_core::testing::Harness;
use blockflow_core::Parameters;
use stdblocks::Pendulum;

const G: f64 = 9.81;

fn free_swing(theta0: f64, length: f64, h: f64, steps: usize) -> Vec<[f64; 2]> {
    let params = Parameters::new()
        .with("mass", 1.0)
        .with("length", length)
        .with("damping", 0.0)
        .with("theta0", theta0);
    let mut plant = Harness::new(Box::new(Pendulum::default()), params).with_step_size(h);
    plant.start(1).unwrap();
    (0..steps)
        .map(|_| {
            let y = plant.step_f64(&[&[0.0]]).unwrap().remove(0);
            [y[0], y[1]]
        })
        .collect()
}

fn energy(state: [f64; 2], m: f64, l: f64) -> f64 {
    0.5 * m * l * l * state[1] * state[1] + m * G * l * (1.0 - state[0].cos())
}

#[test]
fn undamped_energy_drift_stays_below_five_percent() {
    let trace = free_swing(0.01, 1.0, 1e-3, 10_000);
    let e0 = energy(trace[0], 1.0, 1.0);
    let drift = trace
        .iter()
        .map(|s| (energy(*s, 1.0, 1.0) - e0).abs() / e0)
        .fold(0.0, f64::max);
    assert!(drift < 0.05, "relative energy drift {drift}");
}

/// Mean period between upward zero crossings, interpolated linearly.
fn measured_period(trace: &[[f64; 2]], h: f64) -> f64 {
    let mut crossings = Vec::new();
    for k in 1..trace.len() {
        let (a, b) = (trace[k - 1][0], trace[k][0]);
        if a < 0.0 && b >= 0.0 {
            crossings.push((k - 1) as f64 * h + h * (-a) / (b - a));
        }
    }
    assert!(crossings.len() >= 3, "too few crossings");
    (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64
}

#[test]
fn small_angle_period_matches_linearized_solution() {
    for length in [0.5, 1.0, 2.0] {
        let h = 1e-3;
        let trace = free_swing(0.01, length, h, 20_000);
        let expected = 2.0 * std::f64::consts::PI * (length / G).sqrt();
        let period = measured_period(&trace, h);
        let rel = (period - expected).abs() / expected;
        assert!(rel < 0.02, "l={length}: period {period} vs {expected} ({rel})");
    }
}
