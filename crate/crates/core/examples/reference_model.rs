//! Reference yaw rate and slip angle of the single-track model across speed
//! for a fixed steering angle, with the adherence limit.

use iesp::stability::{IespConfig, ReferenceState};
use iesp::vehicle::VehicleParameters;

fn main() {
    let p = VehicleParameters::default();
    let cfg = IespConfig::default();
    let delta = 0.03;
    println!("steer {delta} rad");
    println!("{:>5} {:>8} {:>9} {:>8} {:>9}", "km/h", "r_ref", "beta_ref", "r_limit", "pursued");
    for kmh in (20..=200).step_by(20) {
        let r = ReferenceState::compute(&cfg, &p, delta, kmh as f64 / 3.6);
        println!(
            "{kmh:>5} {:>8.4} {:>8.2}° {:>8.4} {:>9.4}",
            r.psi_dot_ref,
            r.beta_ref.to_degrees(),
            r.psi_dot_limit,
            r.operative_yaw_rate()
        );
    }
}
