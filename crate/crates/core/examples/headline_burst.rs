//! Rear tyre burst in a right bend at 95 km/h, with and without the
//! stability program. Writes traces and plots under `out/headline_*`.

use std::path::Path;

use iesp::sim::{compute_metrics, export, load_scenario, run};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/headline_burst.toml");
    let mut sc = load_scenario(&path)?;
    for iesp in [false, true] {
        sc.controllers.iesp = iesp;
        let out = run(&sc)?;
        let m = compute_metrics(&out.trace);
        let dir = Path::new("out").join(if iesp { "headline_on" } else { "headline_off" });
        export(&dir, &out.trace, &m, None, true)?;
        println!(
            "stability program {:<5} max |beta| {:7.2} deg, spin {}, max error {:6.2} m -> {}",
            iesp,
            m.max_abs_beta_deg,
            m.spin_time_s.map_or("no".to_string(), |t| format!("at {t:.2} s")),
            m.max_error_m,
            dir.display()
        );
    }
    Ok(())
}
