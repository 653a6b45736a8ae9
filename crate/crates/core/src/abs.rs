//! Anti-blockage layer: fuzzy brake modulator followed by a brake
//! distributor that weights each wheel by its share of the vertical load.

use crate::corner::{Corner, PerWheel};
use crate::fuzzy::FuzzyRuleBase;
use crate::vehicle::{vertical_loads, VehicleParameters};

/// Inputs of one modulator tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BrakeDemand {
    /// Brake pedal, `[0, 1]`.
    pub pedal: f64,
    /// Extra torque requested by the stability program [N m].
    pub iesp_delta: PerWheel<f64>,
    /// Longitudinal slip per wheel (negative while braking).
    pub sigma: PerWheel<f64>,
    /// Time derivative of `sigma` [1/s].
    pub sigma_rate: PerWheel<f64>,
}

/// Final brake torque per wheel, within `[0, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BrakeCommand {
    pub torque: PerWheel<f64>,
}

/// Pedal plus stability request, clamped to the actuator range. This is what
/// the brakes receive when the anti-lock layer is disabled.
pub fn raw_demand(params: &VehicleParameters, pedal: f64, iesp_delta: &PerWheel<f64>) -> PerWheel<f64> {
    let pedal = pedal.clamp(0.0, 1.0);
    Corner::ALL.map(|c| {
        let max = params.max_brake_torque(c);
        (pedal * max + iesp_delta[c.index()]).clamp(0.0, max)
    })
}

#[derive(Debug, Clone)]
pub struct AbsController {
    rules: FuzzyRuleBase,
}

impl AbsController {
    /// `rules` maps braking-slip magnitude and its rate to a torque
    /// multiplier in `[0, 1]`.
    pub fn new(rules: FuzzyRuleBase) -> Self {
        Self { rules }
    }

    pub fn rules(&self) -> &FuzzyRuleBase {
        &self.rules
    }

    /// Multiplier applied to the demand of a wheel at slip `sigma` changing
    /// at `sigma_rate`.
    pub fn multiplier(&self, sigma: f64, sigma_rate: f64) -> f64 {
        let slip = (-sigma).max(0.0);
        // rate of the braking-slip magnitude; driving slip counts as steady
        let rate = if sigma < 0.0 { -sigma_rate } else { 0.0 };
        self.rules
            .evaluate(&[slip, rate])
            .map(|c| c.value)
            .unwrap_or(1.0)
            .clamp(0.0, 1.0)
    }

    /// Demanded torque scaled back as a wheel approaches lock.
    pub fn brake_modulator(&self, params: &VehicleParameters, demand: &BrakeDemand) -> PerWheel<f64> {
        let raw = raw_demand(params, demand.pedal, &demand.iesp_delta);
        Corner::ALL.map(|c| {
            let i = c.index();
            raw[i] * self.multiplier(demand.sigma[i], demand.sigma_rate[i])
        })
    }
}

/// Scales each wheel's torque by `4 * N_i / sum(N)` with loads from the GC
/// accelerations (`a_long` positive decelerating, `a_trasv` positive to the
/// right), then clamps to the actuator range. Unloaded wheels get nothing.
pub fn brake_distributor(
    params: &VehicleParameters,
    raw: &PerWheel<f64>,
    a_long: f64,
    a_trasv: f64,
) -> BrakeCommand {
    let loads = vertical_loads(params, a_long, a_trasv);
    let total = loads.total();
    let torque = Corner::ALL.map(|c| {
        let n = loads.get(c);
        if n <= 0.0 || total <= 0.0 {
            return 0.0;
        }
        (raw[c.index()] * 4.0 * n / total).clamp(0.0, params.max_brake_torque(c))
    });
    BrakeCommand { torque }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;

    fn abs() -> AbsController {
        AbsController::new(config::abs_rules())
    }

    #[test]
    fn no_demand_no_torque() {
        let p = VehicleParameters::default();
        assert_eq!(abs().brake_modulator(&p, &BrakeDemand::default()), [0.0; 4]);
    }

    #[test]
    fn pass_through_without_slip() {
        let p = VehicleParameters::default();
        let d = BrakeDemand {
            pedal: 0.4,
            ..Default::default()
        };
        let t = abs().brake_modulator(&p, &d);
        assert!((t[0] - 0.4 * p.max_brake_torque_front_nm).abs() < 1e-12);
        assert!((t[3] - 0.4 * p.max_brake_torque_rear_nm).abs() < 1e-12);
    }

    #[test]
    fn deep_slip_releases() {
        let p = VehicleParameters::default();
        let d = BrakeDemand {
            pedal: 1.0,
            sigma: [-0.5; 4],
            ..Default::default()
        };
        let t = abs().brake_modulator(&p, &d);
        assert!(t[0] < p.max_brake_torque_front_nm);
        assert!(t[2] < p.max_brake_torque_rear_nm);
    }

    #[test]
    fn monotone_in_pedal() {
        let p = VehicleParameters::default();
        let a = abs();
        for sigma in [0.0, -0.05, -0.12, -0.2, -0.6] {
            for rate in [-4.0, 0.0, 3.0] {
                let mut last = -1.0;
                for k in 0..=20 {
                    let d = BrakeDemand {
                        pedal: k as f64 / 20.0,
                        sigma: [sigma; 4],
                        sigma_rate: [rate; 4],
                        ..Default::default()
                    };
                    let t = a.brake_modulator(&p, &d)[0];
                    assert!(t >= last);
                    last = t;
                }
            }
        }
    }

    #[test]
    fn iesp_request_reaches_only_its_wheel() {
        let p = VehicleParameters::default();
        let d = BrakeDemand {
            iesp_delta: [0.0, 0.0, 300.0, 0.0],
            ..Default::default()
        };
        let raw = abs().brake_modulator(&p, &d);
        let cmd = brake_distributor(&p, &raw, 0.0, 0.0);
        assert!(cmd.torque[2] > 0.0);
        assert_eq!(cmd.torque[0], 0.0);
        assert_eq!(cmd.torque[1], 0.0);
        assert_eq!(cmd.torque[3], 0.0);
    }

    #[test]
    fn static_split_follows_axle_loads() {
        let p = VehicleParameters {
            gc_to_rear_m: 1.5,
            ..Default::default()
        };
        let cmd = brake_distributor(&p, &[500.0; 4], 0.0, 0.0);
        let ratio = cmd.torque[0] / cmd.torque[2];
        assert!((ratio - 1.5 / 1.1).abs() < 1e-12);
    }

    #[test]
    fn braking_shifts_torque_forward() {
        let p = VehicleParameters::default();
        let still = brake_distributor(&p, &[500.0; 4], 0.0, 0.0);
        let braking = brake_distributor(&p, &[500.0; 4], 3.0, 0.0);
        let share = |c: &BrakeCommand| (c.torque[0] + c.torque[1]) / c.torque.iter().sum::<f64>();
        assert!(share(&braking) > share(&still));
    }

    #[test]
    fn lifted_wheel_gets_no_torque() {
        let p = VehicleParameters::default();
        let cmd = brake_distributor(&p, &[800.0; 4], 0.0, 30.0);
        assert_eq!(cmd.torque[1], 0.0);
        assert!(cmd
            .torque
            .iter()
            .zip(Corner::ALL)
            .all(|(t, c)| *t >= 0.0 && *t <= p.max_brake_torque(c)));
    }
}
