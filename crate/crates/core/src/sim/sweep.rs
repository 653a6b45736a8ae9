//! Parameter sweeps: a scenario template, a grid of overrides, one metrics
//! row per grid point.

use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{ScenarioError, ValidationIssue};

use super::export::{metrics_header, metrics_values};
use super::metrics::{compute_metrics, RunMetrics};
use super::run::run;
use super::scenario::{read_table, Scenario};

/// One swept key: a dotted path into the scenario table and its values.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub key: String,
    pub values: Vec<toml::Value>,
}

/// Cartesian product of axes; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(rename = "axis", default)]
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let grid: Grid = toml::from_str(text).map_err(|e: toml::de::Error| ScenarioError::Parse {
            path: None,
            message: e.to_string(),
        })?;
        let mut issues = Vec::new();
        if grid.axes.is_empty() {
            issues.push(ValidationIssue {
                field: "axis".into(),
                message: "grid needs at least one axis".into(),
            });
        }
        for (i, a) in grid.axes.iter().enumerate() {
            if a.values.is_empty() {
                issues.push(ValidationIssue {
                    field: format!("axis[{i}].values"),
                    message: "must not be empty".into(),
                });
            }
            if a.key.is_empty() || a.key.split('.').any(str::is_empty) {
                issues.push(ValidationIssue {
                    field: format!("axis[{i}].key"),
                    message: "must be a dotted key path".into(),
                });
            }
        }
        if issues.is_empty() {
            Ok(grid)
        } else {
            Err(ScenarioError::Invalid(issues))
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ScenarioError::Parse { path: None, message } => ScenarioError::Parse {
                path: Some(path.to_path_buf()),
                message,
            },
            other => other,
        })
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.iter().map(|a| a.values.len()).product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values of grid point `index`, one per axis.
    pub fn point(&self, index: usize) -> Vec<&toml::Value> {
        let mut rest = index;
        let mut out = vec![&self.axes[0].values[0]; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            out[i] = &a.values[rest % a.values.len()];
            rest /= a.values.len();
        }
        out
    }
}

/// Sets `key` (dotted) in `table`, creating intermediate tables.
pub fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), String> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().ok_or_else(|| "empty key".to_string())?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| format!("`{p}` in `{key}` is not a table"))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub point: Vec<toml::Value>,
    pub metrics: RunMetrics,
    pub fault: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub keys: Vec<String>,
    pub rows: Vec<SweepRow>,
}

fn render_value(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["index".to_string()];
        header.extend(self.keys.iter().cloned());
        header.extend(metrics_header().into_iter().map(String::from));
        header.push("fault".into());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.index.to_string()];
            rec.extend(r.point.iter().map(render_value));
            rec.extend(metrics_values(&r.metrics));
            rec.push(r.fault.clone().unwrap_or_default());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Builds and validates every grid point's scenario. All problems across all
/// points are reported together.
pub fn expand(template: &toml::Table, grid: &Grid, base: Option<&Path>) -> Result<Vec<Scenario>, ScenarioError> {
    let mut scenarios = Vec::with_capacity(grid.len());
    let mut issues = Vec::new();
    for i in 0..grid.len() {
        let mut table = template.clone();
        for (axis, value) in grid.axes.iter().zip(grid.point(i)) {
            if let Err(message) = set_dotted(&mut table, &axis.key, value.clone()) {
                issues.push(ValidationIssue {
                    field: format!("grid point {i}: {}", axis.key),
                    message,
                });
            }
        }
        match Scenario::from_table(table, base) {
            Ok(s) => scenarios.push(s),
            Err(ScenarioError::Invalid(v)) => issues.extend(v.into_iter().map(|v| ValidationIssue {
                field: format!("grid point {i}: {}", v.field),
                message: v.message,
            })),
            Err(ScenarioError::Parse { message, .. }) => issues.push(ValidationIssue {
                field: format!("grid point {i}"),
                message,
            }),
            Err(e) => return Err(e),
        }
    }
    if issues.is_empty() {
        Ok(scenarios)
    } else {
        Err(ScenarioError::Invalid(issues))
    }
}

/// Runs every grid point on a pool of `jobs` threads. Row order follows
/// the grid index whatever the scheduling.
pub fn sweep(template: &toml::Table, grid: &Grid, base: Option<&Path>, jobs: usize) -> Result<SweepTable, ScenarioError> {
    let scenarios = expand(template, grid, base)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ScenarioError::Parse {
            path: None,
            message: format!("cannot start worker pool: {e}"),
        })?;
    let rows = pool.install(|| {
        scenarios
            .par_iter()
            .enumerate()
            .map(|(i, sc)| {
                let point = grid.point(i).into_iter().cloned().collect();
                match run(sc) {
                    Ok(out) => SweepRow {
                        index: i,
                        point,
                        metrics: compute_metrics(&out.trace),
                        fault: out.fault.map(|f| f.to_string()),
                    },
                    Err(e) => SweepRow {
                        index: i,
                        point,
                        metrics: RunMetrics::default(),
                        fault: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    Ok(SweepTable {
        keys: grid.axes.iter().map(|a| a.key.clone()).collect(),
        rows,
    })
}

/// File-based sweep: template scenario plus grid file.
pub fn sweep_files(template: &Path, grid: &Path, jobs: usize) -> Result<SweepTable, ScenarioError> {
    let table = read_table(template)?;
    let grid = Grid::from_file(grid)?;
    let base = template.parent().unwrap_or_else(|| Path::new("."));
    sweep(&table, &grid, Some(base), jobs)
}
