//! The fuzzy pilot following an S-bend without any burst.

use iesp::autopilot::{Bend, Trajectory};
use iesp::sim::{compute_metrics, run, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let road = Trajectory::new(
        Default::default(),
        [Bend::straight(50.0), Bend::arc(150.0, 120.0), Bend::arc(150.0, -120.0), Bend::straight(200.0)],
    );
    for kmh in [50.0, 70.0, 90.0] {
        let sc = Scenario::new("s-bend", 20.0, kmh, road.clone());
        let out = run(&sc)?;
        let m = compute_metrics(&out.trace);
        let peak_steer = out.trace.samples.iter().map(|s| s.steer.abs()).fold(0.0, f64::max);
        println!(
            "{kmh:>4.0} km/h: max error {:.3} m, mean {:.3} m, peak steer {:.3} rad",
            m.max_error_m, m.max_mean_error_m, peak_steer
        );
    }
    Ok(())
}
