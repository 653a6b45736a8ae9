//! Prints the corrective yaw moment surface over slip-angle and yaw-rate
//! error, then the torque cut over the limit excess.

use iesp::config::{delta_m_yaw_rules, torque_cut_rules};
use iesp::stability::{corrective_yaw_moment, torque_cut};

fn main() {
    let rules = delta_m_yaw_rules();
    let beta: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.02).collect();
    let rate: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.1).collect();

    print!("{:>8}", "b \\ r");
    for r in &rate {
        print!("{r:>9.2}");
    }
    println!();
    for &b in &beta {
        print!("{b:>8.2}");
        for &r in &rate {
            print!("{:>9.0}", corrective_yaw_moment(&rules, b, r));
        }
        println!();
    }

    let cut = torque_cut_rules();
    println!("\nlimit excess [rad/s] -> torque cut [%]");
    for i in 0..=10 {
        let x = i as f64 * 0.03;
        println!("{x:>6.2} {:>6.1}", torque_cut(&cut, x));
    }
}
