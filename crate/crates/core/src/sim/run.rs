//! The closed loop: plant at `dt`, controllers every `controller_every`
//! steps with zero-order hold in between.

use crate::abs::{brake_distributor, raw_demand, AbsController, BrakeDemand};
use crate::autopilot::{wrap_angle, Autopilot};
use crate::corner::PerWheel;
use crate::error::{ScenarioError, SimFault};
use crate::integrator::rk4_step;
use crate::stability::{IespController, IespInputs, IespOutput};
use crate::vehicle::{
    evaluate, load_transfer_inputs, vertical_loads, ActuationSet, PlantInputs, PlantOutputs, VehicleState,
    STATE_LEN,
};

use super::scenario::{RuleSet, Scenario, SpeedHold};

/// Below this speed the course angle is meaningless and `beta` is held.
const BETA_MIN_SPEED: f64 = 0.5;
const CRUISE_KP: f64 = 0.4;
const CRUISE_KI: f64 = 0.15;

/// One controller-rate sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub t: f64,
    pub state: VehicleState,
    pub speed: f64,
    pub steer: f64,
    pub steer_kinematic: f64,
    pub steer_correction: f64,
    pub throttle: f64,
    pub engine_torque: f64,
    pub brake_torque: PerWheel<f64>,
    pub delta_m_yaw: f64,
    pub torque_cut: f64,
    /// Measured slip angle, unwrapped so that spins accumulate [rad].
    pub beta: f64,
    pub beta_est: f64,
    pub beta_ref: f64,
    pub psi_dot: f64,
    pub psi_dot_ref: f64,
    pub psi_dot_limit: f64,
    pub e_beta: f64,
    pub e_psi_dot: f64,
    pub limit_excess: f64,
    pub sigma: PerWheel<f64>,
    pub alpha: PerWheel<f64>,
    pub load: PerWheel<f64>,
    pub lateral_offset: f64,
    /// Distance from the GC to the nearest path point [m].
    pub error: f64,
    /// Cumulative mean of `error` [m].
    pub error_mean: f64,
    /// Estimated slip angle beyond the dry / icy physical limits.
    pub beta_over_dry: bool,
    pub beta_over_icy: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub period: f64,
    pub samples: Vec<Sample>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trace: SimTrace,
    /// Set when the plant left its valid envelope; the trace ends there.
    pub fault: Option<SimFault>,
}

/// Runs a scenario, loading its rule bases.
pub fn run(scenario: &Scenario) -> Result<RunOutcome, ScenarioError> {
    let rules = RuleSet::load(&scenario.rules)?;
    Ok(Simulation::new(scenario, rules).run())
}

/// A single closed-loop run. Owns all controller state.
pub struct Simulation<'a> {
    sc: &'a Scenario,
    pilot: Autopilot,
    iesp: IespController,
    abs: AbsController,
    state: [f64; STATE_LEN],
    act: ActuationSet,
    prev_sigma: Option<PerWheel<f64>>,
    cruise_integral: f64,
    /// Last speed-hold output, kept after the hold ends.
    cruise_throttle: f64,
    beta: f64,
    error_sum: f64,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario, rules: RuleSet) -> Self {
        let start = scenario.trajectory.start;
        let state = VehicleState::rolling(
            &scenario.vehicle,
            start.x_m,
            start.y_m,
            start.heading_rad,
            scenario.initial_speed_m_s(),
        );
        Self {
            sc: scenario,
            pilot: Autopilot::new(rules.autopilot, scenario.autopilot),
            iesp: IespController::new(scenario.iesp, rules.delta_m_yaw, rules.torque_cut),
            abs: AbsController::new(rules.abs),
            state: state.to_array(),
            act: ActuationSet::default(),
            prev_sigma: None,
            cruise_integral: 0.0,
            cruise_throttle: 0.0,
            beta: 0.0,
            error_sum: 0.0,
        }
    }

    fn plant_inputs<'b>(sc: &'b Scenario, act: &'b ActuationSet) -> PlantInputs<'b> {
        PlantInputs {
            params: &sc.vehicle,
            tyre: &sc.tyre,
            burst: sc.burst.as_ref(),
            actuation: act,
        }
    }

    pub fn run(mut self) -> RunOutcome {
        let sc = self.sc;
        let steps = (sc.duration_s / sc.dt_s).round() as usize;
        let every = sc.controller_every as usize;
        let mut trace = SimTrace {
            period: sc.controller_period(),
            samples: Vec::with_capacity(steps / every + 1),
        };
        let mut fault = None;
        for step in 0..=steps {
            let t = step as f64 * sc.dt_s;
            if step % every == 0 {
                match self.controller_tick(t, trace.samples.len()) {
                    Ok(sample) => trace.samples.push(sample),
                    Err(f) => {
                        fault = Some(f);
                        break;
                    }
                }
            }
            if step == steps {
                break;
            }
            let act = self.act;
            let inputs = Self::plant_inputs(sc, &act);
            match rk4_step(t, &self.state, sc.dt_s, |t, y| evaluate(t, y, &inputs).map(|(d, _)| d)) {
                Ok(next) => self.state = next,
                Err(f) => {
                    fault = Some(f);
                    break;
                }
            }
        }
        RunOutcome { trace, fault }
    }

    /// Reads the sensors, updates every controller and the held actuation,
    /// and returns the sample describing this instant.
    fn controller_tick(&mut self, t: f64, index: usize) -> Result<Sample, SimFault> {
        let sc = self.sc;
        let p = &sc.vehicle;
        let ctrl_dt = sc.controller_period();
        let state = VehicleState::from_array(&self.state);
        let (_, out): (_, PlantOutputs) = evaluate(t, &self.state, &Self::plant_inputs(sc, &self.act))?;

        let speed = state.speed();
        let yaw = state.yaw();
        let (s, c) = yaw.sin_cos();
        let [ax, ay, _] = out.accel_world;
        let a_long = ax * c + ay * s;
        let a_trasv = -ax * s + ay * c;
        let (load_long, load_trasv) = load_transfer_inputs(a_long, a_trasv);
        let loads = vertical_loads(p, load_long, load_trasv);
        let sigma = out.contacts.map(|k| k.sigma);
        let sigma_rate = match self.prev_sigma {
            Some(prev) => std::array::from_fn(|i| (sigma[i] - prev[i]) / ctrl_dt),
            None => [0.0; 4],
        };
        self.prev_sigma = Some(sigma);

        // Steering.
        let pilot = self.pilot.command(p, &sc.trajectory, &state);
        let steer = pilot.steer;

        // Stability program; always evaluated so the trace carries its
        // references, applied only when enabled.
        let iesp = self.iesp.tick(
            p,
            &IespInputs {
                steer,
                speed,
                yaw_rate: state.yaw_rate(),
                a_long,
                a_trasv,
                loads: Some(loads),
                dt: ctrl_dt,
            },
        );
        let applied = if sc.controllers.iesp {
            iesp
        } else {
            IespOutput {
                delta_m_yaw: 0.0,
                torque_cut_percent: 0.0,
                dispensed: Default::default(),
                ..iesp
            }
        };

        let pedal = sc.driver.brake_at(t);

        // Brakes.
        let iesp_delta = applied.dispensed.brake_delta;
        let raw = if sc.controllers.abs {
            self.abs.brake_modulator(
                p,
                &BrakeDemand {
                    pedal,
                    iesp_delta,
                    sigma,
                    sigma_rate,
                },
            )
        } else {
            raw_demand(p, pedal, &iesp_delta)
        };
        let brake_torque = if raw.iter().any(|&v| v > 0.0) {
            brake_distributor(p, &raw, load_long, load_trasv).torque
        } else {
            [0.0; 4]
        };

        // Engine.
        let braking: f64 = brake_torque.iter().sum();
        let throttle = self.throttle(t, speed, braking, ctrl_dt);
        let engine_torque = throttle * p.max_drive_torque_nm * (1.0 - applied.torque_cut_percent / 100.0);

        self.act = ActuationSet {
            steer,
            throttle,
            brake_torque,
            engine_torque,
        };

        // Diagnostics.
        if speed > BETA_MIN_SPEED {
            let raw_beta = state.course() - yaw;
            self.beta += wrap_angle(raw_beta - self.beta);
        }
        let error = sc.trajectory.distance(state.position[0], state.position[1]);
        self.error_sum += error;
        let cfg = self.iesp.config();
        Ok(Sample {
            t,
            state,
            speed,
            steer,
            steer_kinematic: pilot.kinematic,
            steer_correction: pilot.correction,
            throttle,
            engine_torque,
            brake_torque,
            delta_m_yaw: applied.delta_m_yaw,
            torque_cut: applied.torque_cut_percent,
            beta: self.beta,
            beta_est: iesp.beta_estimate,
            beta_ref: iesp.reference.beta_ref,
            psi_dot: state.yaw_rate(),
            psi_dot_ref: iesp.reference.psi_dot_ref,
            psi_dot_limit: iesp.reference.psi_dot_limit,
            e_beta: iesp.errors.e_beta,
            e_psi_dot: iesp.errors.e_psi_dot,
            limit_excess: iesp.errors.limit_excess,
            sigma,
            alpha: out.contacts.map(|k| k.alpha),
            load: out.contacts.map(|k| k.load),
            lateral_offset: pilot.tracking.lateral_offset,
            error,
            error_mean: self.error_sum / (index + 1) as f64,
            beta_over_dry: iesp.beta_estimate.abs() > cfg.beta_dry_limit_deg.to_radians(),
            beta_over_icy: iesp.beta_estimate.abs() > cfg.beta_icy_limit_deg.to_radians(),
        })
    }

    /// Speed hold. Never fights the brakes: the total brake torque is taken
    /// off the drive torque and the integrator is frozen while braking.
    fn throttle(&mut self, t: f64, speed: f64, brake_total: f64, dt: f64) -> f64 {
        let sc = self.sc;
        let p = &sc.vehicle;
        let yield_to = |throttle: f64| (throttle - brake_total / p.max_drive_torque_nm).max(0.0);
        let holding = match sc.driver.speed_hold {
            SpeedHold::Off => return 0.0,
            SpeedHold::Always => true,
            SpeedHold::UntilBurst => sc.burst.is_none_or(|b| t < b.t_start),
        };
        if !holding {
            return yield_to(self.cruise_throttle);
        }
        let target = sc.initial_speed_m_s();
        let drag = 0.5 * p.air_density_kg_m3 * p.drag_area_m2 * target * target;
        let feed_forward = drag * p.wheel_radius_m / p.max_drive_torque_nm;
        let err = target - speed;
        let raw = feed_forward + CRUISE_KP * err + CRUISE_KI * self.cruise_integral;
        if brake_total <= 0.0 && (0.0..=1.0).contains(&raw) {
            self.cruise_integral += err * dt;
        }
        self.cruise_throttle = if target > 0.0 { raw.clamp(0.0, 1.0) } else { 0.0 };
        yield_to(self.cruise_throttle)
    }
}
