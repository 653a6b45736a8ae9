//! Scenarios, the closed-loop run, metrics, export and sweeps.

pub mod export;
pub mod metrics;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use export::{export, read_trace_csv, trace_csv_string, write_trace_csv, Exported};
pub use metrics::{compute_metrics, RunMetrics};
pub use run::{run, RunOutcome, Sample, SimTrace, Simulation};
pub use scenario::{load_scenario, Controllers, Driver, PedalStep, RuleFiles, RuleSet, Scenario, SpeedHold};
pub use sweep::{sweep, sweep_files, Grid, SweepRow, SweepTable};
