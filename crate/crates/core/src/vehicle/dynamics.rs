//! Newton-Euler equations of the car body plus wheel spin.
//!
//! Ground reactions act at the contact patches, directly below the
//! suspension attachments. Wheels are massless in heave, so each vertical
//! load is the suspension force of its corner: preload, spring, damper,
//! anti-roll bar and bump stop.

use crate::corner::{Corner, PerWheel};
use crate::error::SimFault;
use crate::tyre::{compute_slip, tyre_force, BurstEvent, InflatedFrictionModel, TyreContactState};

use super::{
    add, cross, mat_t_vec, mat_vec, rotation, ActuationSet, SuspensionCorner, VehicleParameters,
    VehicleState, GRAVITY,
};

pub const STATE_LEN: usize = 16;

/// Brake torque fades in over this wheel speed so a stopped wheel is held
/// rather than driven backwards [rad/s].
const BRAKE_SPIN_EPS: f64 = 2.0;
/// A flat tyre's wheel relaxes to pure rolling with this time constant [s].
const FLAT_ROLL_TAU: f64 = 0.05;
const BUMP_STOP_FACTOR: f64 = 10.0;
/// Pitch or roll beyond this is treated as a rollover / singular attitude.
const ATTITUDE_LIMIT: f64 = 1.2;

#[derive(Debug, Clone, Copy)]
pub struct PlantInputs<'a> {
    pub params: &'a VehicleParameters,
    pub tyre: &'a InflatedFrictionModel,
    pub burst: Option<&'a BurstEvent>,
    pub actuation: &'a ActuationSet,
}

impl PlantInputs<'_> {
    fn blend(&self, corner: Corner, t: f64) -> f64 {
        match self.burst {
            Some(b) if b.wheel == corner => b.inflation_blend(t),
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantOutputs {
    pub contacts: PerWheel<TyreContactState>,
    pub suspension: PerWheel<SuspensionCorner>,
    /// Kinematic GC acceleration, world frame.
    pub accel_world: [f64; 3],
}

/// State derivative of the packed state vector at time `t`, together with
/// the contact quantities computed on the way.
pub fn evaluate(
    t: f64,
    y: &[f64; STATE_LEN],
    inputs: &PlantInputs<'_>,
) -> Result<([f64; STATE_LEN], PlantOutputs), SimFault> {
    let p = inputs.params;
    let act = inputs.actuation;
    if !act.steer.is_finite()
        || !act.engine_torque.is_finite()
        || act.brake_torque.iter().any(|v| !v.is_finite())
    {
        return Err(SimFault {
            time: t,
            message: "non-finite actuation".into(),
        });
    }
    let s = VehicleState::from_array(y);
    let [phi, theta, psi] = s.euler;
    if phi.abs() > ATTITUDE_LIMIT || theta.abs() > ATTITUDE_LIMIT {
        return Err(SimFault {
            time: t,
            message: format!("attitude out of envelope (roll {phi:.3}, pitch {theta:.3})"),
        });
    }
    let rot = rotation(s.euler);
    let v_world = mat_vec(&rot, &s.velocity);
    let omega_world = mat_vec(&rot, &s.rates);
    let suspension = s.suspension(p);
    let [static_front, static_rear] = p.static_wheel_loads();

    // Vertical loads.
    let mut spring = [0.0; 4];
    for c in Corner::ALL {
        let i = c.index();
        let (pre, k, damp) = if c.is_front() {
            (static_front, p.spring_front_n_per_m, p.damper_front_ns_per_m)
        } else {
            (static_rear, p.spring_rear_n_per_m, p.damper_rear_ns_per_m)
        };
        let d = suspension[i].deflection;
        let mut f = pre + k * d + damp * suspension[i].rate;
        if d > p.suspension_travel_m {
            f += BUMP_STOP_FACTOR * k * (d - p.suspension_travel_m);
        }
        spring[i] = f;
    }
    for (left, right, front) in [(0, 1, true), (2, 3, false)] {
        let c = p.track(front);
        let arb = if front {
            p.anti_roll_front_nm_per_rad
        } else {
            p.anti_roll_rear_nm_per_rad
        };
        let axle_roll = (suspension[left].deflection - suspension[right].deflection) / c;
        let f = arb * axle_roll / c;
        spring[left] += f;
        spring[right] -= f;
    }
    let loads = spring.map(|f| f.max(0.0));

    let mut force = [0.0, 0.0, -p.mass_kg * GRAVITY];
    let mut moment = [0.0; 3];
    let v_h = v_world[0].hypot(v_world[1]);
    let drag = 0.5 * p.air_density_kg_m3 * p.drag_area_m2 * v_h;
    force[0] -= drag * v_world[0];
    force[1] -= drag * v_world[1];

    let mut contacts = [TyreContactState::default(); 4];
    let mut dspin = [0.0; 4];
    for c in Corner::ALL {
        let i = c.index();
        let attach = mat_vec(&rot, &p.corner_offset(c));
        // contact patch relative to the GC, on the ground plane
        let lever = [attach[0], attach[1], -s.position[2]];
        let v_patch = add(v_world, cross(omega_world, lever));
        let heading = psi + if c.is_front() { act.steer } else { 0.0 };
        let (sh, ch) = heading.sin_cos();
        let v_long = v_patch[0] * ch + v_patch[1] * sh;
        let v_lat = -v_patch[0] * sh + v_patch[1] * ch;
        let slip = compute_slip(
            s.wheel_spin[i],
            p.wheel_radius_m,
            v_long,
            v_lat,
            p.slip_speed_floor_m_s,
        );
        let blend = inputs.blend(c, t);
        let deflated = inputs.burst.map(|b| b.target).unwrap_or_default();
        let f = tyre_force(
            inputs.tyre,
            &deflated,
            slip,
            v_long,
            v_lat,
            loads[i],
            blend,
            p.slip_speed_floor_m_s,
        );
        let ground = [
            f.f_long * ch - f.f_trasv * sh,
            f.f_long * sh + f.f_trasv * ch,
            loads[i],
        ];
        force = add(force, ground);
        moment = add(moment, cross(lever, ground));
        contacts[i] = TyreContactState {
            sigma: slip.sigma,
            alpha: slip.alpha,
            load: loads[i],
            inflation_blend: blend,
            f_long: f.f_long,
            f_trasv: f.f_trasv,
        };

        let drive_share = if c.is_front() {
            0.5 * p.drive_split_front
        } else {
            0.5 * (1.0 - p.drive_split_front)
        };
        let spin = s.wheel_spin[i];
        // viscous limited-slip coupling to the other wheel on the axle
        let coupling = if drive_share > 0.0 {
            p.diff_coupling_nms_per_rad * (s.wheel_spin[i ^ 1] - spin)
        } else {
            0.0
        };
        let brake = act.brake_torque[i].max(0.0) * (spin / BRAKE_SPIN_EPS).clamp(-1.0, 1.0);
        let torque = act.engine_torque * drive_share + coupling - brake - f.f_long_inflated * p.wheel_radius_m;
        dspin[i] = torque / p.wheel_inertia_kgm2
            + (1.0 - blend) * (v_long / p.wheel_radius_m - spin) / FLAT_ROLL_TAU;
    }

    let f_body = mat_t_vec(&rot, &force);
    let m_body = mat_t_vec(&rot, &moment);
    let (dv, dw) = rigid_body_accel(p, s.velocity, s.rates, f_body, m_body);

    let mut dy = [0.0; STATE_LEN];
    dy[0..3].copy_from_slice(&v_world);
    let (sf, cf) = phi.sin_cos();
    let tt = theta.tan();
    let [pr, q, r] = s.rates;
    dy[3] = pr + (q * sf + r * cf) * tt;
    dy[4] = q * cf - r * sf;
    dy[5] = (q * sf + r * cf) / theta.cos();
    dy[6..9].copy_from_slice(&dv);
    dy[9..12].copy_from_slice(&dw);
    dy[12..16].copy_from_slice(&dspin);

    let accel_world = [
        force[0] / p.mass_kg,
        force[1] / p.mass_kg,
        force[2] / p.mass_kg,
    ];
    Ok((
        dy,
        PlantOutputs {
            contacts,
            suspension,
            accel_world,
        },
    ))
}

/// Newton-Euler in body axes with a diagonal inertia tensor.
pub(crate) fn rigid_body_accel(
    p: &VehicleParameters,
    velocity: [f64; 3],
    rates: [f64; 3],
    force: [f64; 3],
    moment: [f64; 3],
) -> ([f64; 3], [f64; 3]) {
    let inertia = p.inertia_kgm2;
    let iw = [
        inertia[0] * rates[0],
        inertia[1] * rates[1],
        inertia[2] * rates[2],
    ];
    let gyro = cross(rates, iw);
    let coriolis = cross(rates, velocity);
    let dv = [0, 1, 2].map(|k| force[k] / p.mass_kg - coriolis[k]);
    let dw = [0, 1, 2].map(|k| (moment[k] - gyro[k]) / inertia[k]);
    (dv, dw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::rk4_step;

    fn run(
        state: VehicleState,
        params: &VehicleParameters,
        tyre: &InflatedFrictionModel,
        act: &ActuationSet,
        seconds: f64,
        mut each: impl FnMut(&VehicleState),
    ) -> VehicleState {
        let dt = 1e-3;
        let inputs = PlantInputs {
            params,
            tyre,
            burst: None,
            actuation: act,
        };
        let mut y = state.to_array();
        let steps = (seconds / dt).round() as usize;
        for n in 0..steps {
            y = rk4_step(n as f64 * dt, &y, dt, |t, y| evaluate(t, y, &inputs).map(|r| r.0)).unwrap();
            each(&VehicleState::from_array(&y));
        }
        VehicleState::from_array(&y)
    }

    #[test]
    fn rest_is_equilibrium() {
        let p = VehicleParameters::default();
        let s = VehicleState::rolling(&p, 0.0, 0.0, 0.3, 0.0);
        let inputs = PlantInputs {
            params: &p,
            tyre: &InflatedFrictionModel::default(),
            burst: None,
            actuation: &ActuationSet::default(),
        };
        let (dy, out) = evaluate(0.0, &s.to_array(), &inputs).unwrap();
        for v in dy {
            assert!(v.abs() < 1e-9, "{dy:?}");
        }
        let total: f64 = out.contacts.iter().map(|c| c.load).sum();
        assert!((total - p.mass_kg * GRAVITY).abs() < 1e-6);
    }

    #[test]
    fn pure_yaw_moment() {
        let p = VehicleParameters::default();
        let (dv, dw) = rigid_body_accel(&p, [0.0; 3], [0.0; 3], [0.0; 3], [0.0, 0.0, 1250.0]);
        assert_eq!(dv, [0.0; 3]);
        assert_eq!(dw, [0.0, 0.0, 1250.0 / p.inertia_kgm2[2]]);
    }

    #[test]
    fn free_spin_keeps_yaw_rate() {
        let p = VehicleParameters::default();
        let mut s = VehicleState::rolling(&p, 0.0, 0.0, 0.0, 0.0);
        s.rates = [0.0, 0.0, 0.4];
        let tyre = InflatedFrictionModel {
            mu_long_max: 1e-12,
            mu_trasv_max: 1e-12,
            ..Default::default()
        };
        let inputs = PlantInputs {
            params: &p,
            tyre: &tyre,
            burst: None,
            actuation: &ActuationSet::default(),
        };
        let (dy, _) = evaluate(0.0, &s.to_array(), &inputs).unwrap();
        assert!(dy[11].abs() < 1e-9);
        assert!((dy[5] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn coasting_drag_deceleration() {
        let p = VehicleParameters::default();
        let s = VehicleState::rolling(&p, 0.0, 0.0, 0.0, 30.0);
        let inputs = PlantInputs {
            params: &p,
            tyre: &InflatedFrictionModel::default(),
            burst: None,
            actuation: &ActuationSet::default(),
        };
        let (dy, _) = evaluate(0.0, &s.to_array(), &inputs).unwrap();
        let drag = 0.5 * p.air_density_kg_m3 * p.drag_area_m2 * 900.0;
        assert!((dy[6] + drag / p.mass_kg).abs() < 1e-9);
    }

    #[test]
    fn straight_run_has_no_lateral_velocity() {
        let p = VehicleParameters::default();
        let act = ActuationSet {
            engine_torque: 400.0,
            ..Default::default()
        };
        let end = run(
            VehicleState::rolling(&p, 0.0, 0.0, 0.0, 20.0),
            &p,
            &InflatedFrictionModel::default(),
            &act,
            3.0,
            |s| assert!(s.velocity[1].abs() < 1e-9),
        );
        assert!(end.position[0] > 55.0);
    }

    #[test]
    fn frictionless_energy_is_conserved() {
        let p = VehicleParameters {
            damper_front_ns_per_m: 1e-12,
            damper_rear_ns_per_m: 1e-12,
            drag_area_m2: 1e-12,
            ..Default::default()
        };
        let tyre = InflatedFrictionModel {
            mu_long_max: 1e-12,
            mu_trasv_max: 1e-12,
            ..Default::default()
        };
        let mut s = VehicleState::rolling(&p, 0.0, 0.0, 0.0, 20.0);
        s.position[2] += 0.02;
        s.rates = [0.1, -0.05, 0.0];
        let energy = |s: &VehicleState| {
            let v = s.velocity;
            let w = s.rates;
            let i = p.inertia_kgm2;
            let kin = 0.5 * p.mass_kg * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
                + 0.5 * (i[0] * w[0] * w[0] + i[1] * w[1] * w[1] + i[2] * w[2] * w[2])
                + 0.5 * p.wheel_inertia_kgm2 * s.wheel_spin.iter().map(|x| x * x).sum::<f64>();
            let susp = s.suspension(&p);
            let [sf, sr] = p.static_wheel_loads();
            let mut pot = p.mass_kg * GRAVITY * s.position[2];
            for c in Corner::ALL {
                let (n0, k) = if c.is_front() {
                    (sf, p.spring_front_n_per_m)
                } else {
                    (sr, p.spring_rear_n_per_m)
                };
                let d = susp[c.index()].deflection;
                pot += n0 * d + 0.5 * k * d * d;
            }
            for (l, r, front) in [(0, 1, true), (2, 3, false)] {
                let arb = if front {
                    p.anti_roll_front_nm_per_rad
                } else {
                    p.anti_roll_rear_nm_per_rad
                };
                let roll = (susp[l].deflection - susp[r].deflection) / p.track(front);
                pot += 0.5 * arb * roll * roll;
            }
            kin + pot
        };
        let e0 = energy(&s);
        let mut worst: f64 = 0.0;
        run(s, &p, &tyre, &ActuationSet::default(), 10.0, |st| {
            worst = worst.max(((energy(st) - e0) / e0).abs());
        });
        assert!(worst < 1e-3, "relative drift {worst}");
    }

    #[test]
    fn non_finite_actuation_faults() {
        let p = VehicleParameters::default();
        let s = VehicleState::rolling(&p, 0.0, 0.0, 0.0, 10.0);
        let act = ActuationSet {
            steer: f64::NAN,
            ..Default::default()
        };
        let inputs = PlantInputs {
            params: &p,
            tyre: &InflatedFrictionModel::default(),
            burst: None,
            actuation: &act,
        };
        assert!(evaluate(1.5, &s.to_array(), &inputs).is_err());
    }
}
