//! Every burst position, with and without the stability program, run in
//! parallel. Prints the sweep table as CSV.

use std::path::Path;

use iesp::sim::sweep_files;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let table = sweep_files(&dir.join("headline_burst.toml"), &dir.join("burst_wheels.grid.toml"), 4)?;
    print!("{}", table.to_csv());
    Ok(())
}
