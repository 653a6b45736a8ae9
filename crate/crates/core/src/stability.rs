//! The stability program: single-track reference responses, slip-angle
//! estimation, the yaw-moment and torque-cut fuzzy controllers and the
//! yaw-moment dispenser.
//!
//! Yaw quantities (`beta`, yaw rate, their errors) are positive to the left.
//! The corrective moment `delta_m_yaw` follows the brake side instead:
//! positive means "brake the right-hand wheels", i.e. a clockwise moment
//! seen from above.

use serde::{Deserialize, Serialize};

use crate::corner::{Corner, PerWheel};
use crate::fuzzy::FuzzyRuleBase;
use crate::vehicle::{VehicleParameters, WheelLoads, GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IespConfig {
    /// Understeer coefficient of the yaw-rate reference [s^2/m^2].
    pub k_us: f64,
    /// Understeer coefficient of the slip-angle reference [s^2/m^2].
    pub k_ps: f64,
    /// Transversal friction assumed by the adherence limit.
    pub mu_y_max: f64,
    /// Speed floor for the adherence limit and the estimator [m/s].
    pub v_floor_m_s: f64,
    /// Leak time constant of the slip-angle estimator [s].
    pub tau_beta_s: f64,
    /// Diagnostic slip-angle limits for dry and icy roads [deg].
    pub beta_dry_limit_deg: f64,
    pub beta_icy_limit_deg: f64,
}

impl Default for IespConfig {
    fn default() -> Self {
        Self {
            k_us: 0.0003,
            k_ps: 0.0107,
            mu_y_max: 0.9,
            v_floor_m_s: 1.0,
            tau_beta_s: 0.3,
            beta_dry_limit_deg: 12.0,
            beta_icy_limit_deg: 2.0,
        }
    }
}

impl IespConfig {
    pub fn validate(&self) -> Vec<(String, String)> {
        let mut bad = Vec::new();
        if !(self.k_us >= 0.0) {
            bad.push(("k_us".into(), "must be >= 0".into()));
        }
        if !(self.k_ps >= 0.0) {
            bad.push(("k_ps".into(), "must be >= 0".into()));
        }
        for (name, v) in [
            ("mu_y_max", self.mu_y_max),
            ("v_floor_m_s", self.v_floor_m_s),
            ("tau_beta_s", self.tau_beta_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bad.push((name.into(), "must be > 0".into()));
            }
        }
        bad
    }
}

/// Yaw-rate reference `tan(delta) / (l (1 + k_us V^2)) * V`.
pub fn reference_yaw_rate(delta: f64, speed: f64, wheelbase: f64, k_us: f64) -> f64 {
    delta.tan() / (wheelbase * (1.0 + k_us * speed * speed)) * speed
}

/// Slip-angle reference `tan(delta) / (l (1 + k_us V^2)) * (b - k_ps V^2)`.
pub fn reference_slip_angle(
    delta: f64,
    speed: f64,
    wheelbase: f64,
    gc_to_rear: f64,
    k_us: f64,
    k_ps: f64,
) -> f64 {
    let v2 = speed * speed;
    delta.tan() / (wheelbase * (1.0 + k_us * v2)) * (gc_to_rear - k_ps * v2)
}

/// Largest yaw rate the lateral friction can sustain, `mu g / V`.
pub fn yaw_rate_limit(mu_y_max: f64, speed: f64, v_floor: f64) -> f64 {
    mu_y_max * GRAVITY / speed.max(v_floor)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceState {
    pub psi_dot_ref: f64,
    pub beta_ref: f64,
    pub psi_dot_limit: f64,
}

impl ReferenceState {
    pub fn compute(config: &IespConfig, params: &VehicleParameters, delta: f64, speed: f64) -> Self {
        Self {
            psi_dot_ref: reference_yaw_rate(delta, speed, params.wheelbase_m, config.k_us),
            beta_ref: reference_slip_angle(
                delta,
                speed,
                params.wheelbase_m,
                params.gc_to_rear_m,
                config.k_us,
                config.k_ps,
            ),
            psi_dot_limit: yaw_rate_limit(config.mu_y_max, speed, config.v_floor_m_s),
        }
    }

    /// The yaw-rate target actually pursued: the smaller of reference and
    /// limit in magnitude, with the reference's sign.
    pub fn operative_yaw_rate(&self) -> f64 {
        self.psi_dot_ref.abs().min(self.psi_dot_limit).copysign(self.psi_dot_ref)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StabilityErrors {
    pub e_beta: f64,
    pub e_psi_dot: f64,
    /// Amount by which the reference yaw rate exceeds the adherence limit.
    pub limit_excess: f64,
}

pub fn compute_errors(
    beta: f64,
    beta_ref: f64,
    psi_dot: f64,
    psi_dot_ref: f64,
    psi_dot_limit: f64,
) -> StabilityErrors {
    let reference = ReferenceState {
        psi_dot_ref,
        beta_ref,
        psi_dot_limit,
    };
    StabilityErrors {
        e_beta: beta - beta_ref,
        e_psi_dot: psi_dot - reference.operative_yaw_rate(),
        limit_excess: psi_dot_ref.abs() - psi_dot_limit,
    }
}

/// Slip-angle observer: integrates the kinematic slip-angle rate from the
/// lateral and longitudinal accelerations and the yaw rate, leaking towards
/// the single-track reference with time constant `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipAngleEstimator {
    beta: f64,
    tau: f64,
    v_floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipEstimate {
    pub beta: f64,
    /// False when the speed was below the floor and the estimate was held.
    pub valid: bool,
}

impl SlipAngleEstimator {
    pub fn new(tau: f64, v_floor: f64) -> Self {
        Self {
            beta: 0.0,
            tau,
            v_floor,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Advances the estimate by `dt`. `a_long`/`a_trasv` are the horizontal
    /// GC accelerations along/across the body axis (forward, left positive).
    pub fn update(&mut self, a_long: f64, a_trasv: f64, yaw_rate: f64, speed: f64, target: f64, dt: f64) -> SlipEstimate {
        if speed < self.v_floor || !(dt > 0.0) {
            return SlipEstimate {
                beta: self.beta,
                valid: false,
            };
        }
        let (s, c) = self.beta.sin_cos();
        let rate = (a_trasv * c - a_long * s) / speed - yaw_rate - (self.beta - target) / self.tau;
        let limit = std::f64::consts::FRAC_PI_2;
        self.beta = (self.beta + rate * dt).clamp(-limit, limit);
        SlipEstimate {
            beta: self.beta,
            valid: true,
        }
    }
}

/// Corrective yaw moment from the slip-angle and yaw-rate errors.
pub fn corrective_yaw_moment(rules: &FuzzyRuleBase, e_beta: f64, e_psi_dot: f64) -> f64 {
    rules.evaluate(&[e_beta, e_psi_dot]).map(|c| c.value).unwrap_or(0.0)
}

/// Engine torque cut in percent for a given adherence-limit excess.
pub fn torque_cut(rules: &FuzzyRuleBase, limit_excess: f64) -> f64 {
    rules
        .evaluate(&[limit_excess])
        .map(|c| c.value)
        .unwrap_or(0.0)
        .clamp(0.0, 100.0)
}

/// Per-wheel brake requests from a corrective yaw moment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dispensed {
    pub m_front: f64,
    pub m_rear: f64,
    pub brake_front: f64,
    pub brake_rear: f64,
    pub brake_delta: PerWheel<f64>,
    /// Rear torque that would have had to be negative and was moved to the
    /// opposite wheel.
    pub dropped: f64,
    /// Total load was zero; nothing dispensed.
    pub fault: bool,
}

/// Splits `delta_m_yaw` between the axles in proportion to their vertical
/// load and converts each share to brake torque with `2 r_w / c`, `c` being
/// half the axle width. The front share goes to a single wheel (right for a
/// positive moment). The rear share is nominally a `+/-` pair; brakes cannot
/// push, so the negative half is dropped and the positive side doubled.
pub fn dispense(delta_m_yaw: f64, loads: &WheelLoads, params: &VehicleParameters) -> Dispensed {
    let total = loads.total();
    if !(total > 0.0) {
        return Dispensed {
            fault: true,
            ..Default::default()
        };
    }
    let front = loads.get(Corner::FrontLeft) + loads.get(Corner::FrontRight);
    let m_front = front / total * delta_m_yaw;
    // the rear share by difference keeps the sum exact
    let m_rear = delta_m_yaw - m_front;
    let r = params.wheel_radius_m;
    let brake_front = 2.0 * r / (0.5 * params.track_front_m) * m_front;
    let brake_rear = 2.0 * r / (0.5 * params.track_rear_m) * m_rear;

    let mut brake_delta = [0.0; 4];
    let side = |m: f64, left: Corner, right: Corner| if m >= 0.0 { right } else { left };
    brake_delta[side(m_front, Corner::FrontLeft, Corner::FrontRight).index()] = brake_front.abs();
    let half = 0.5 * brake_rear.abs();
    brake_delta[side(m_rear, Corner::RearLeft, Corner::RearRight).index()] = 2.0 * half;
    Dispensed {
        m_front,
        m_rear,
        brake_front,
        brake_rear,
        brake_delta,
        dropped: half,
        fault: false,
    }
}

/// Sensor values consumed by one controller tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IespInputs {
    pub steer: f64,
    pub speed: f64,
    pub yaw_rate: f64,
    /// Horizontal GC accelerations in the body heading frame
    /// (forward, left positive).
    pub a_long: f64,
    pub a_trasv: f64,
    pub loads: Option<WheelLoads>,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IespOutput {
    pub reference: ReferenceState,
    pub beta_estimate: f64,
    pub estimate_valid: bool,
    pub errors: StabilityErrors,
    pub delta_m_yaw: f64,
    pub torque_cut_percent: f64,
    pub dispensed: Dispensed,
}

/// Stateful stability controller; owns the estimator.
#[derive(Debug, Clone)]
pub struct IespController {
    config: IespConfig,
    yaw_rules: FuzzyRuleBase,
    cut_rules: FuzzyRuleBase,
    estimator: SlipAngleEstimator,
}

impl IespController {
    pub fn new(config: IespConfig, yaw_rules: FuzzyRuleBase, cut_rules: FuzzyRuleBase) -> Self {
        Self {
            estimator: SlipAngleEstimator::new(config.tau_beta_s, config.v_floor_m_s),
            config,
            yaw_rules,
            cut_rules,
        }
    }

    pub fn config(&self) -> &IespConfig {
        &self.config
    }

    pub fn yaw_rules(&self) -> &FuzzyRuleBase {
        &self.yaw_rules
    }

    pub fn cut_rules(&self) -> &FuzzyRuleBase {
        &self.cut_rules
    }

    pub fn tick(&mut self, params: &VehicleParameters, input: &IespInputs) -> IespOutput {
        let reference = ReferenceState::compute(&self.config, params, input.steer, input.speed);
        let est = self.estimator.update(
            input.a_long,
            input.a_trasv,
            input.yaw_rate,
            input.speed,
            reference.beta_ref,
            input.dt,
        );
        let errors = compute_errors(
            est.beta,
            reference.beta_ref,
            input.yaw_rate,
            reference.psi_dot_ref,
            reference.psi_dot_limit,
        );
        // Below the floor speed nothing meaningful can be corrected.
        let (delta_m_yaw, cut) = if est.valid {
            (
                corrective_yaw_moment(&self.yaw_rules, errors.e_beta, errors.e_psi_dot),
                torque_cut(&self.cut_rules, errors.limit_excess),
            )
        } else {
            (0.0, 0.0)
        };
        let loads = input.loads.unwrap_or_else(|| crate::vehicle::vertical_loads(params, 0.0, 0.0));
        let dispensed = dispense(delta_m_yaw, &loads, params);
        IespOutput {
            reference,
            beta_estimate: est.beta,
            estimate_valid: est.valid,
            errors,
            delta_m_yaw,
            torque_cut_percent: cut,
            dispensed,
        }
    }
}
