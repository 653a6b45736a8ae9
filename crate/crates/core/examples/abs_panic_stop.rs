//! Full brake from 100 km/h with and without the anti-lock modulator.

use std::path::Path;

use iesp::sim::{load_scenario, run, SimTrace};

fn stopping(trace: &SimTrace) -> (f64, f64) {
    let start = trace.samples[0].state.position;
    let stop = trace.samples.iter().find(|s| s.speed < 0.1).unwrap_or(trace.last().unwrap());
    let d = (stop.state.position[0] - start[0]).hypot(stop.state.position[1] - start[1]);
    (stop.t, d)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/panic_stop.toml");
    let mut sc = load_scenario(&path)?;
    for abs in [true, false] {
        sc.controllers.abs = abs;
        let trace = run(&sc)?.trace;
        let (t, d) = stopping(&trace);
        let locked = trace
            .samples
            .iter()
            .filter(|s| s.speed > 1.0 && s.sigma.iter().any(|&x| x <= -0.9))
            .count();
        println!(
            "anti-lock {:<5} stopped at {t:.2} s after {d:.1} m, {:.2} s with a wheel locked",
            abs,
            locked as f64 * trace.period
        );
    }
    Ok(())
}
