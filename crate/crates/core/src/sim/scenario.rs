//! Scenario files: everything needed to reproduce one closed-loop run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autopilot::{AutopilotConfig, Bend, Trajectory};
use crate::config;
use crate::error::{ScenarioError, ValidationIssue};
use crate::fuzzy::FuzzyRuleBase;
use crate::stability::IespConfig;
use crate::tyre::{BurstEvent, InflatedFrictionModel};
use crate::vehicle::VehicleParameters;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub duration_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    /// Plant steps per controller tick.
    #[serde(default = "default_controller_every")]
    pub controller_every: u32,
    pub initial_speed_km_h: f64,
    #[serde(default)]
    pub vehicle: VehicleParameters,
    #[serde(default)]
    pub tyre: InflatedFrictionModel,
    #[serde(default)]
    pub burst: Option<BurstEvent>,
    #[serde(default)]
    pub controllers: Controllers,
    #[serde(default)]
    pub iesp: IespConfig,
    #[serde(default)]
    pub autopilot: AutopilotConfig,
    #[serde(default)]
    pub rules: RuleFiles,
    #[serde(default = "straight_road")]
    pub trajectory: Trajectory,
    #[serde(default)]
    pub driver: Driver,
}

fn default_dt() -> f64 {
    0.001
}

fn default_controller_every() -> u32 {
    10
}

fn straight_road() -> Trajectory {
    Trajectory::new(Default::default(), [Bend::straight(1000.0); 4])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Controllers {
    pub iesp: bool,
    pub abs: bool,
}

impl Default for Controllers {
    fn default() -> Self {
        Self { iesp: true, abs: true }
    }
}

/// Optional rule-base overrides. Relative paths are resolved against the
/// scenario file's directory; missing entries use the shipped rule bases.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFiles {
    pub autopilot: Option<PathBuf>,
    pub delta_m_yaw: Option<PathBuf>,
    pub torque_cut: Option<PathBuf>,
    pub abs: Option<PathBuf>,
}

/// The four rule bases a run needs.
#[derive(Debug, Clone)]
pub struct RuleSet {
    pub autopilot: FuzzyRuleBase,
    pub delta_m_yaw: FuzzyRuleBase,
    pub torque_cut: FuzzyRuleBase,
    pub abs: FuzzyRuleBase,
}

impl RuleSet {
    pub fn load(files: &RuleFiles) -> Result<Self, ScenarioError> {
        let pick = |path: &Option<PathBuf>, fallback: fn() -> FuzzyRuleBase| match path {
            Some(p) => FuzzyRuleBase::from_file(p).map_err(ScenarioError::from),
            None => Ok(fallback()),
        };
        Ok(Self {
            autopilot: pick(&files.autopilot, config::autopilot_rules)?,
            delta_m_yaw: pick(&files.delta_m_yaw, config::delta_m_yaw_rules)?,
            torque_cut: pick(&files.torque_cut, config::torque_cut_rules)?,
            abs: pick(&files.abs, config::abs_rules)?,
        })
    }
}

/// How the throttle is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedHold {
    /// No throttle.
    Off,
    /// Hold the initial speed for the whole run.
    #[default]
    Always,
    /// Hold the initial speed until the burst, then keep the throttle where
    /// it was.
    UntilBurst,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Driver {
    pub speed_hold: SpeedHold,
    /// Brake pedal steps; each value holds until the next entry.
    pub pedal: Vec<PedalStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedalStep {
    pub t_s: f64,
    pub brake: f64,
}

impl Driver {
    /// Brake pedal position at time `t`.
    pub fn brake_at(&self, t: f64) -> f64 {
        self.pedal
            .iter()
            .take_while(|p| p.t_s <= t)
            .last()
            .map_or(0.0, |p| p.brake)
    }
}

impl Scenario {
    /// A scenario on `trajectory` with every other setting at its default.
    pub fn new(name: &str, duration_s: f64, initial_speed_km_h: f64, trajectory: Trajectory) -> Self {
        Self {
            name: name.to_string(),
            duration_s,
            dt_s: default_dt(),
            controller_every: default_controller_every(),
            initial_speed_km_h,
            vehicle: VehicleParameters::default(),
            tyre: InflatedFrictionModel::default(),
            burst: None,
            controllers: Controllers::default(),
            iesp: IespConfig::default(),
            autopilot: AutopilotConfig::default(),
            rules: RuleFiles::default(),
            trajectory,
            driver: Driver::default(),
        }
    }

    pub fn initial_speed_m_s(&self) -> f64 {
        self.initial_speed_km_h / 3.6
    }

    pub fn controller_period(&self) -> f64 {
        self.dt_s * f64::from(self.controller_every)
    }

    /// Parses TOML text. Relative rule paths are resolved against `base`.
    pub fn from_toml_str(text: &str, base: Option<&Path>) -> Result<Self, ScenarioError> {
        let value: toml::Table = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            path: None,
            message: e.to_string(),
        })?;
        Self::from_table(value, base)
    }

    /// Builds and validates a scenario from an already parsed table.
    pub fn from_table(table: toml::Table, base: Option<&Path>) -> Result<Self, ScenarioError> {
        let mut scenario: Scenario = table.try_into().map_err(|e: toml::de::Error| ScenarioError::Parse {
            path: None,
            message: e.to_string(),
        })?;
        if let Some(base) = base {
            scenario.rules.resolve(base);
        }
        let issues = scenario.validate();
        if issues.is_empty() {
            Ok(scenario)
        } else {
            Err(ScenarioError::Invalid(issues))
        }
    }

    /// Every violated invariant, each with the dotted key it concerns.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let mut push = |field: &str, message: &str| {
            issues.push(ValidationIssue {
                field: field.to_string(),
                message: message.to_string(),
            })
        };
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            push("duration_s", "must be > 0");
        }
        if !(self.dt_s.is_finite() && self.dt_s > 0.0) {
            push("dt_s", "must be > 0");
        } else if self.dt_s > 0.01 {
            push("dt_s", "must not exceed 0.01 s");
        }
        if self.controller_every == 0 {
            push("controller_every", "must be >= 1");
        }
        if !(self.initial_speed_km_h.is_finite() && self.initial_speed_km_h >= 0.0) {
            push("initial_speed_km_h", "must be >= 0");
        }
        for (field, message) in self.vehicle.validate() {
            push(&format!("vehicle.{field}"), &message);
        }
        if let Err(m) = self.tyre.validate() {
            push("tyre", &m);
        }
        if let Some(b) = &self.burst {
            if !(b.t_start.is_finite() && b.t_start >= 0.0) {
                push("burst.t_start_s", "must be >= 0");
            } else if b.t_start >= self.duration_s {
                push("burst.t_start_s", "must be earlier than duration_s");
            }
            if !(b.duration.is_finite() && b.duration > 0.0) {
                push("burst.duration_s", "must be > 0");
            }
            if let Err(m) = b.target.validate() {
                push("burst.target", &m);
            }
        }
        for (field, message) in self.iesp.validate() {
            push(&format!("iesp.{field}"), &message);
        }
        for (field, message) in self.trajectory.validate() {
            push(&format!("trajectory.{field}"), &message);
        }
        let mut last = f64::NEG_INFINITY;
        for (i, p) in self.driver.pedal.iter().enumerate() {
            if !(0.0..=1.0).contains(&p.brake) {
                push(&format!("driver.pedal[{i}].brake"), "must be within [0, 1]");
            }
            if !(p.t_s.is_finite() && p.t_s >= last) {
                push(&format!("driver.pedal[{i}].t_s"), "times must be finite and non-decreasing");
            }
            last = p.t_s;
        }
        for (name, path) in self.rules.entries() {
            if let Some(path) = path {
                if let Err(e) = FuzzyRuleBase::from_file(path) {
                    push(&format!("rules.{name}"), &e.to_string());
                }
            }
        }
        issues
    }
}

impl RuleFiles {
    fn entries(&self) -> [(&'static str, &Option<PathBuf>); 4] {
        [
            ("autopilot", &self.autopilot),
            ("delta_m_yaw", &self.delta_m_yaw),
            ("torque_cut", &self.torque_cut),
            ("abs", &self.abs),
        ]
    }

    fn resolve(&mut self, base: &Path) {
        for p in [&mut self.autopilot, &mut self.delta_m_yaw, &mut self.torque_cut, &mut self.abs]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// Reads the raw table of a scenario file without validating it.
pub fn read_table(path: &Path) -> Result<toml::Table, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e: toml::de::Error| ScenarioError::Parse {
        path: Some(path.to_path_buf()),
        message: e.to_string(),
    })
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let table = read_table(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Scenario::from_table(table, Some(base)).map_err(|e| match e {
        ScenarioError::Parse { path: None, message } => ScenarioError::Parse {
            path: Some(path.to_path_buf()),
            message,
        },
        other => other,
    })
}
