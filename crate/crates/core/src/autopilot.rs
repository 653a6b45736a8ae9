//! Driver replacement: a four-bend reference path, the kinematic
//! (Ackermann) steering feed-forward and a fuzzy feedback correction,
//! summed and clamped to the steering range.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::fuzzy::FuzzyRuleBase;
use crate::vehicle::{VehicleParameters, VehicleState};

/// Constant-curvature path piece. Curvature is positive for a left bend,
/// zero for a straight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bend {
    pub length_m: f64,
    #[serde(default)]
    pub curvature_1_m: f64,
}

impl Bend {
    pub fn straight(length_m: f64) -> Self {
        Self {
            length_m,
            curvature_1_m: 0.0,
        }
    }

    /// Arc of radius `radius` turning right (`radius < 0`) or left.
    pub fn arc(length_m: f64, radius: f64) -> Self {
        Self {
            length_m,
            curvature_1_m: 1.0 / radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    #[serde(default)]
    pub x_m: f64,
    #[serde(default)]
    pub y_m: f64,
    #[serde(default)]
    pub heading_rad: f64,
}

/// Exactly four bends joined with continuous position and heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    #[serde(default)]
    pub start: Pose,
    pub bends: [Bend; 4],
}

/// A sampled point of the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub curvature: f64,
    /// Set when the requested arc length was outside the path and clamped.
    pub clamped: bool,
}

impl PathPoint {
    /// Signed curvature radius; infinite on straights.
    pub fn radius(&self) -> f64 {
        if self.curvature == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.curvature
        }
    }
}

impl Trajectory {
    pub fn new(start: Pose, bends: [Bend; 4]) -> Self {
        Self { start, bends }
    }

    pub fn validate(&self) -> Vec<(String, String)> {
        let mut bad = Vec::new();
        for (i, b) in self.bends.iter().enumerate() {
            if !(b.length_m.is_finite() && b.length_m > 0.0) {
                bad.push((format!("bends[{i}].length_m"), "must be > 0".into()));
            }
            if !b.curvature_1_m.is_finite() {
                bad.push((format!("bends[{i}].curvature_1_m"), "must be finite".into()));
            } else if (b.curvature_1_m * b.length_m).abs() >= TAU {
                bad.push((
                    format!("bends[{i}]"),
                    "a single bend must turn less than a full circle".into(),
                ));
            }
        }
        bad
    }

    pub fn total_length(&self) -> f64 {
        self.bends.iter().map(|b| b.length_m).sum()
    }

    /// Start pose of every bend.
    fn junctions(&self) -> [(f64, f64, f64, f64); 4] {
        let mut out = [(0.0, 0.0, 0.0, 0.0); 4];
        let (mut s0, mut x, mut y, mut h) = (0.0, self.start.x_m, self.start.y_m, self.start.heading_rad);
        for (i, b) in self.bends.iter().enumerate() {
            out[i] = (s0, x, y, h);
            let (x1, y1, h1) = advance(x, y, h, b.curvature_1_m, b.length_m);
            x = x1;
            y = y1;
            h = h1;
            s0 += b.length_m;
        }
        out
    }

    /// Position, heading and curvature at arc length `s`, clamped to the path.
    pub fn eval(&self, s: f64) -> PathPoint {
        let total = self.total_length();
        let clamped = !(0.0..=total).contains(&s);
        let s = s.clamp(0.0, total);
        let junctions = self.junctions();
        let mut idx = 3;
        for i in 0..4 {
            if s < junctions[i].0 + self.bends[i].length_m {
                idx = i;
                break;
            }
        }
        let (s0, x0, y0, h0) = junctions[idx];
        let k = self.bends[idx].curvature_1_m;
        let (x, y, heading) = advance(x0, y0, h0, k, s - s0);
        PathPoint {
            s,
            x,
            y,
            heading,
            curvature: k,
            clamped,
        }
    }

    /// Closest path point to `(px, py)`. With `window = Some((lo, hi))`
    /// only arc lengths inside that interval are considered.
    pub fn project(&self, px: f64, py: f64, window: Option<(f64, f64)>) -> PathPoint {
        let junctions = self.junctions();
        let (lo, hi) = window.unwrap_or((0.0, self.total_length()));
        let mut best: Option<(f64, PathPoint)> = None;
        for (i, b) in self.bends.iter().enumerate() {
            let (s0, x0, y0, h0) = junctions[i];
            let (a, z) = ((lo - s0).max(0.0), (hi - s0).min(b.length_m));
            if a > z {
                continue;
            }
            let local = project_on_bend(x0, y0, h0, b.curvature_1_m, b.length_m, px, py).clamp(a, z);
            for u in [local, a, z] {
                let p = self.eval(s0 + u);
                let d = (p.x - px).hypot(p.y - py);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, p));
                }
            }
        }
        best.map(|(_, p)| p).unwrap_or_else(|| self.eval(lo))
    }

    /// Distance from `(px, py)` to the nearest point of the whole path.
    pub fn distance(&self, px: f64, py: f64) -> f64 {
        let p = self.project(px, py, None);
        (p.x - px).hypot(p.y - py)
    }
}

fn advance(x: f64, y: f64, h: f64, k: f64, ds: f64) -> (f64, f64, f64) {
    if k == 0.0 {
        (x + ds * h.cos(), y + ds * h.sin(), h)
    } else {
        let h1 = h + k * ds;
        (
            x + (h1.sin() - h.sin()) / k,
            y - (h1.cos() - h.cos()) / k,
            h1,
        )
    }
}

// Unclamped local arc length of the closest point on the bend's line or circle.
fn project_on_bend(x0: f64, y0: f64, h0: f64, k: f64, len: f64, px: f64, py: f64) -> f64 {
    if k == 0.0 {
        return (px - x0) * h0.cos() + (py - y0) * h0.sin();
    }
    let r = 1.0 / k;
    let (cx, cy) = (x0 - r * h0.sin(), y0 + r * h0.cos());
    let start = (y0 - cy).atan2(x0 - cx);
    let here = (py - cy).atan2(px - cx);
    // swept angle in the direction of travel, in [0, 2pi)
    let swept = ((here - start) * k.signum()).rem_euclid(TAU);
    let arc = swept / k.abs();
    // past the end: pick whichever end of the arc is nearer in angle
    if arc > len && swept - len * k.abs() > TAU - swept {
        swept - TAU
    } else {
        arc
    }
}

/// Signed lateral offset (left of the path positive), heading and course
/// errors, and progress along the path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackingError {
    pub lateral_offset: f64,
    /// Body yaw minus path heading.
    pub heading_error: f64,
    /// Direction of travel minus path heading.
    pub course_error: f64,
    pub progress: f64,
}

impl TrackingError {
    pub fn from_point(path: &PathPoint, x: f64, y: f64, yaw: f64, course: f64) -> Self {
        let (dx, dy) = (x - path.x, y - path.y);
        let lateral_offset = -dx * path.heading.sin() + dy * path.heading.cos();
        Self {
            lateral_offset,
            heading_error: wrap_angle(yaw - path.heading),
            course_error: wrap_angle(course - path.heading),
            progress: path.s,
        }
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

/// Ackermann steering angle `atan(l / rho)`; zero on straights.
pub fn kinematic_steer(params: &VehicleParameters, radius: f64) -> f64 {
    (params.wheelbase_m / radius).atan()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AutopilotConfig {
    /// Look-ahead time of the preview lateral error [s].
    pub preview_time_s: f64,
    pub preview_min_m: f64,
    /// Speed at which the rule base's lateral universe is expressed; the
    /// lateral input is scaled by `(reference / V)^2`.
    pub reference_speed_m_s: f64,
    pub min_speed_m_s: f64,
    /// Magnitude limit of the fuzzy correction [rad].
    pub correction_limit_rad: f64,
    /// Progress search window behind / ahead of the last projection [m].
    pub search_back_m: f64,
    pub search_ahead_m: f64,
}

impl Default for AutopilotConfig {
    fn default() -> Self {
        Self {
            preview_time_s: 1.0,
            preview_min_m: 5.0,
            reference_speed_m_s: 20.0,
            min_speed_m_s: 5.0,
            correction_limit_rad: 0.12,
            search_back_m: 5.0,
            search_ahead_m: 60.0,
        }
    }
}

/// One steering decision.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PilotCommand {
    pub steer: f64,
    pub kinematic: f64,
    pub correction: f64,
    pub tracking: TrackingError,
    pub curvature: f64,
    /// The path is exhausted; the last steering angle is held.
    pub end_of_course: bool,
}

/// Kinematic pilot plus fuzzy feedback pilot, acting in parallel.
#[derive(Debug, Clone)]
pub struct Autopilot {
    rules: FuzzyRuleBase,
    config: AutopilotConfig,
    progress: f64,
    last_steer: f64,
}

impl Autopilot {
    pub fn new(rules: FuzzyRuleBase, config: AutopilotConfig) -> Self {
        Self {
            rules,
            config,
            progress: 0.0,
            last_steer: 0.0,
        }
    }

    pub fn rules(&self) -> &FuzzyRuleBase {
        &self.rules
    }

    pub fn config(&self) -> &AutopilotConfig {
        &self.config
    }

    /// Arc length around which the next projection searches.
    pub fn progress(&self) -> f64 {
        self.progress
    }

    pub fn set_progress(&mut self, s: f64) {
        self.progress = s.max(0.0);
    }

    /// Fuzzy steering correction. Positive lateral offset or an excess of
    /// yaw rate to the left both produce a rightward (negative) correction.
    /// The lateral input is the offset of a point previewed along the
    /// direction of travel.
    pub fn fuzzy_correction(&self, err: &TrackingError, curvature: f64, yaw_rate: f64, speed: f64) -> f64 {
        let cfg = &self.config;
        let v = speed.max(cfg.min_speed_m_s);
        let preview = (v * cfg.preview_time_s).max(cfg.preview_min_m);
        let lateral = err.lateral_offset + preview * err.course_error.sin();
        let scale = (cfg.reference_speed_m_s / v).powi(2);
        let yaw_err = yaw_rate - curvature * speed;
        let out = self
            .rules
            .evaluate(&[lateral * scale, yaw_err])
            .map(|c| c.value)
            .unwrap_or(0.0);
        out.clamp(-cfg.correction_limit_rad, cfg.correction_limit_rad)
    }

    /// Steering command for the current state.
    pub fn command(&mut self, params: &VehicleParameters, traj: &Trajectory, state: &VehicleState) -> PilotCommand {
        let [x, y, _] = state.position;
        let window = (
            (self.progress - self.config.search_back_m).max(0.0),
            self.progress + self.config.search_ahead_m,
        );
        let point = traj.project(x, y, Some(window));
        // Progress only moves forward while the car does.
        if point.s > self.progress || state.velocity[0] <= 0.0 {
            self.progress = point.s;
        }
        // Sideways travel is not informative at a crawl; use the body axis.
        let course = if state.speed() > 1.0 { state.course() } else { state.yaw() };
        let tracking = TrackingError::from_point(&point, x, y, state.yaw(), course);
        if point.s >= traj.total_length() {
            return PilotCommand {
                steer: self.last_steer,
                tracking,
                curvature: point.curvature,
                end_of_course: true,
                ..Default::default()
            };
        }
        let kinematic = kinematic_steer(params, point.radius());
        let correction = self.fuzzy_correction(&tracking, point.curvature, state.yaw_rate(), state.speed());
        let steer = (kinematic + correction).clamp(-params.max_steer_rad, params.max_steer_rad);
        self.last_steer = steer;
        PilotCommand {
            steer,
            kinematic,
            correction,
            tracking,
            curvature: point.curvature,
            end_of_course: false,
        }
    }
}
