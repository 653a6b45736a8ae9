//! Closed-loop runs end to end.

use std::path::PathBuf;

use iesp::sim::{compute_metrics, load_scenario, run, trace_csv_string, Scenario, SpeedHold};
use iesp::stability::{reference_slip_angle, SlipAngleEstimator};
use iesp::vehicle::VehicleParameters;

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    load_scenario(&path).unwrap()
}

#[test]
fn zero_speed_stays_at_rest() {
    let mut sc = scenario("minimal.toml");
    sc.initial_speed_km_h = 0.0;
    sc.duration_s = 2.0;
    sc.driver.speed_hold = SpeedHold::Off;
    let out = run(&sc).unwrap();
    assert!(out.fault.is_none());
    for s in &out.trace.samples {
        assert!(s.speed < 1e-6, "t {} speed {}", s.t, s.speed);
        assert_eq!(s.throttle, 0.0);
        assert_eq!(s.delta_m_yaw, 0.0);
        assert!(s.state.position[0].abs() < 1e-6);
    }
}

#[test]
fn samples_at_controller_period() {
    let sc = scenario("minimal.toml");
    let out = run(&sc).unwrap();
    let period = sc.controller_period();
    assert!((out.trace.period - period).abs() < 1e-12);
    for w in out.trace.samples.windows(2) {
        assert!((w[1].t - w[0].t - period).abs() < 1e-9);
    }
    let expected = (sc.duration_s / period).round() as usize;
    assert!(out.trace.len().abs_diff(expected) <= 1, "{} samples", out.trace.len());
}

#[test]
fn straight_cruise_tracks_path() {
    let out = run(&scenario("minimal.toml")).unwrap();
    let m = compute_metrics(&out.trace);
    assert!(!m.spin);
    assert!(m.max_error_m < 0.05, "{}", m.max_error_m);
    assert!((m.final_speed_m_s - 60.0 / 3.6).abs() < 0.5, "{}", m.final_speed_m_s);
}

#[test]
fn max_error_bounds_running_mean() {
    let out = run(&scenario("headline_burst.toml")).unwrap();
    let m = compute_metrics(&out.trace);
    let last = out.trace.last().unwrap();
    assert!(m.max_error_m >= last.error_mean);
    assert!(m.max_error_m >= m.max_mean_error_m);
}

#[test]
fn reruns_are_identical() {
    let sc = scenario("straight_burst_150.toml");
    let a = trace_csv_string(&run(&sc).unwrap().trace);
    let b = trace_csv_string(&run(&sc).unwrap().trace);
    assert_eq!(a, b);
}

#[test]
fn disabling_abs_locks_wheels_in_panic_stop() {
    let mut sc = scenario("panic_stop.toml");
    sc.controllers.abs = false;
    let out = run(&sc).unwrap();
    let locked = out
        .trace
        .samples
        .iter()
        .filter(|s| s.speed > 1.0 && s.sigma.iter().any(|&x| x <= -0.9))
        .count();
    assert!(locked > 100, "{locked} locked samples");
}

#[test]
fn estimator_converges_on_steady_circle() {
    // Synthetic signals of a steady turn: speed, yaw rate and slip angle are
    // constant and the acceleration is centripetal.
    let p = VehicleParameters::default();
    let (k_us, k_ps) = (0.0003, 0.0107);
    let (delta, v) = (0.03_f64, 20.0_f64);
    let r = v * delta.tan() / (p.wheelbase_m * (1.0 + k_us * v * v));
    let beta = reference_slip_angle(delta, v, p.wheelbase_m, p.gc_to_rear_m, k_us, k_ps);
    let (a_long, a_trasv) = (-v * r * beta.sin(), v * r * beta.cos());
    let tau = 0.3;
    let dt = 0.01;
    let mut est = SlipAngleEstimator::new(tau, 1.0);
    let steps = (3.0 * tau / dt).round() as usize;
    for _ in 0..steps {
        est.update(a_long, a_trasv, r, v, beta, dt);
    }
    let rel = (est.beta() - beta).abs() / beta.abs();
    assert!(rel <= 0.05, "beta {beta}, estimate {}, rel {rel}", est.beta());
}

