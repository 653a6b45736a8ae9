//! Friction curves of the inflated tyre and the direction-dependent
//! coefficient of a burst tyre.

use iesp::tyre::{DeflatedFrictionModel, InflatedFrictionModel};

fn main() {
    let m = InflatedFrictionModel::default();
    println!("sigma  mu_long | alpha[deg]  mu_trasv");
    for i in 0..=12 {
        let sigma = i as f64 * 0.05;
        let alpha = (i as f64).to_radians();
        println!(
            "{sigma:5.2} {:8.3} | {:10.0} {:9.3}",
            m.pure_long(sigma),
            alpha.to_degrees(),
            m.pure_trasv(alpha)
        );
    }

    println!("\ncombined at sigma 0.05");
    for deg in [0.0, 2.0, 4.0, 8.0] {
        let (l, t) = m.friction(-0.05, f64::to_radians(deg));
        println!("alpha {deg:3.0} deg: long {l:7.3} trasv {t:6.3}");
    }

    let burst = DeflatedFrictionModel {
        mu_long_burst: 0.3,
        mu_trasv_burst: 0.05,
    };
    println!("\nburst tyre, direction of sliding relative to the wheel plane");
    for deg in [0.0, 30.0, 60.0, 90.0] {
        println!("{deg:3.0} deg: mu {:.3}", burst.friction(f64::to_radians(deg)));
    }
}
