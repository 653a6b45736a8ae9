//! Lumped-mass car: parameters, state, actuation and the load-transfer
//! formulas the controllers use.

mod dynamics;

pub use dynamics::{evaluate, PlantInputs, PlantOutputs, STATE_LEN};

use serde::{Deserialize, Serialize};

use crate::corner::{Corner, PerWheel};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleParameters {
    pub mass_kg: f64,
    pub wheelbase_m: f64,
    /// GC to rear axle.
    pub gc_to_rear_m: f64,
    pub gc_height_m: f64,
    /// Full front axle width.
    pub track_front_m: f64,
    /// Full rear axle width.
    pub track_rear_m: f64,
    pub wheel_radius_m: f64,
    /// Principal inertias about body x, y, z.
    pub inertia_kgm2: [f64; 3],
    pub wheel_inertia_kgm2: f64,
    pub spring_front_n_per_m: f64,
    pub spring_rear_n_per_m: f64,
    pub damper_front_ns_per_m: f64,
    pub damper_rear_ns_per_m: f64,
    pub anti_roll_front_nm_per_rad: f64,
    pub anti_roll_rear_nm_per_rad: f64,
    /// Compression or extension beyond which the bump stop engages.
    pub suspension_travel_m: f64,
    /// Drag coefficient times frontal area.
    pub drag_area_m2: f64,
    pub air_density_kg_m3: f64,
    /// Total drive torque at the wheels at full throttle.
    pub max_drive_torque_nm: f64,
    /// Share of drive torque sent to the front axle.
    pub drive_split_front: f64,
    /// Viscous coupling between the two wheels of an axle, torque per unit
    /// of spin difference. Zero is an open differential.
    pub diff_coupling_nms_per_rad: f64,
    pub max_brake_torque_front_nm: f64,
    pub max_brake_torque_rear_nm: f64,
    pub max_steer_rad: f64,
    /// Slip-denominator floor at crawling speed.
    pub slip_speed_floor_m_s: f64,
}

impl Default for VehicleParameters {
    fn default() -> Self {
        Self {
            mass_kg: 1500.0,
            wheelbase_m: 2.6,
            gc_to_rear_m: 1.3,
            gc_height_m: 0.55,
            track_front_m: 1.5,
            track_rear_m: 1.5,
            wheel_radius_m: 0.3,
            inertia_kgm2: [550.0, 2200.0, 2500.0],
            wheel_inertia_kgm2: 1.2,
            spring_front_n_per_m: 35_000.0,
            spring_rear_n_per_m: 32_000.0,
            damper_front_ns_per_m: 3_500.0,
            damper_rear_ns_per_m: 3_200.0,
            anti_roll_front_nm_per_rad: 45_000.0,
            anti_roll_rear_nm_per_rad: 10_000.0,
            suspension_travel_m: 0.1,
            drag_area_m2: 0.65,
            air_density_kg_m3: 1.225,
            max_drive_torque_nm: 3_000.0,
            drive_split_front: 0.5,
            diff_coupling_nms_per_rad: 40.0,
            max_brake_torque_front_nm: 2_500.0,
            max_brake_torque_rear_nm: 1_500.0,
            max_steer_rad: 0.5,
            slip_speed_floor_m_s: crate::tyre::DEFAULT_SLIP_SPEED_FLOOR,
        }
    }
}

impl VehicleParameters {
    /// Returns one message per violated constraint.
    pub fn validate(&self) -> Vec<(String, String)> {
        let mut bad = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                bad.push((name.to_string(), format!("must be > 0, got {v}")));
            }
        };
        positive("mass_kg", self.mass_kg);
        positive("wheelbase_m", self.wheelbase_m);
        positive("gc_to_rear_m", self.gc_to_rear_m);
        positive("gc_height_m", self.gc_height_m);
        positive("track_front_m", self.track_front_m);
        positive("track_rear_m", self.track_rear_m);
        positive("wheel_radius_m", self.wheel_radius_m);
        for (i, v) in self.inertia_kgm2.iter().enumerate() {
            positive(&format!("inertia_kgm2[{i}]"), *v);
        }
        positive("wheel_inertia_kgm2", self.wheel_inertia_kgm2);
        positive("spring_front_n_per_m", self.spring_front_n_per_m);
        positive("spring_rear_n_per_m", self.spring_rear_n_per_m);
        positive("damper_front_ns_per_m", self.damper_front_ns_per_m);
        positive("damper_rear_ns_per_m", self.damper_rear_ns_per_m);
        positive("anti_roll_front_nm_per_rad", self.anti_roll_front_nm_per_rad);
        positive("anti_roll_rear_nm_per_rad", self.anti_roll_rear_nm_per_rad);
        positive("suspension_travel_m", self.suspension_travel_m);
        positive("drag_area_m2", self.drag_area_m2);
        positive("air_density_kg_m3", self.air_density_kg_m3);
        positive("max_drive_torque_nm", self.max_drive_torque_nm);
        positive("max_brake_torque_front_nm", self.max_brake_torque_front_nm);
        positive("max_brake_torque_rear_nm", self.max_brake_torque_rear_nm);
        positive("max_steer_rad", self.max_steer_rad);
        positive("slip_speed_floor_m_s", self.slip_speed_floor_m_s);
        if self.gc_to_rear_m >= self.wheelbase_m {
            bad.push((
                "gc_to_rear_m".to_string(),
                "must be smaller than wheelbase_m".to_string(),
            ));
        }
        if !(self.diff_coupling_nms_per_rad >= 0.0) {
            bad.push((
                "diff_coupling_nms_per_rad".to_string(),
                "must be non-negative".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&self.drive_split_front) {
            bad.push((
                "drive_split_front".to_string(),
                "must lie in [0, 1]".to_string(),
            ));
        }
        bad
    }

    /// GC to front axle.
    pub fn gc_to_front(&self) -> f64 {
        self.wheelbase_m - self.gc_to_rear_m
    }

    pub fn track(&self, front: bool) -> f64 {
        if front {
            self.track_front_m
        } else {
            self.track_rear_m
        }
    }

    /// Axle roll stiffness: coil springs plus anti-roll bar [N m/rad].
    pub fn roll_stiffness(&self, front: bool) -> f64 {
        let (k, arb) = if front {
            (self.spring_front_n_per_m, self.anti_roll_front_nm_per_rad)
        } else {
            (self.spring_rear_n_per_m, self.anti_roll_rear_nm_per_rad)
        };
        let c = self.track(front);
        0.5 * k * c * c + arb
    }

    pub fn max_brake_torque(&self, corner: Corner) -> f64 {
        if corner.is_front() {
            self.max_brake_torque_front_nm
        } else {
            self.max_brake_torque_rear_nm
        }
    }

    /// Body-frame position of the suspension attachment above each contact
    /// patch, relative to the GC (x forward, y left, z up).
    pub fn corner_offset(&self, corner: Corner) -> [f64; 3] {
        let x = if corner.is_front() {
            self.gc_to_front()
        } else {
            -self.gc_to_rear_m
        };
        let half = 0.5 * self.track(corner.is_front());
        let y = if corner.is_left() { half } else { -half };
        [x, y, 0.0]
    }

    /// Static wheel loads `[front, rear]` per wheel.
    pub fn static_wheel_loads(&self) -> [f64; 2] {
        let w = self.mass_kg * GRAVITY;
        let front = w * self.gc_to_rear_m / self.wheelbase_m * 0.5;
        let rear = w * self.gc_to_front() / self.wheelbase_m * 0.5;
        [front, rear]
    }
}

/// Vertical wheel loads from GC accelerations, as the controllers compute
/// them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelLoads {
    pub loads: PerWheel<f64>,
    /// Set when a formula load went negative and was clamped to zero.
    pub lifted: bool,
}

impl WheelLoads {
    pub fn total(&self) -> f64 {
        self.loads.iter().sum()
    }

    pub fn get(&self, corner: Corner) -> f64 {
        self.loads[corner.index()]
    }
}

/// Longitudinal transfer `m * a_long * h_G / l`, with `a_long` positive for
/// deceleration.
pub fn longitudinal_transfer(params: &VehicleParameters, a_long: f64) -> f64 {
    params.mass_kg * a_long * params.gc_height_m / params.wheelbase_m
}

/// Roll transfer `[front, rear]` split by the axle roll stiffness ratio,
/// with `a_trasv` positive towards the right of the car.
pub fn roll_transfer(params: &VehicleParameters, a_trasv: f64) -> [f64; 2] {
    let c = 0.5 * (params.track_front_m + params.track_rear_m);
    let total = params.mass_kg / c * params.gc_height_m * a_trasv;
    let rear = total / (1.0 + params.roll_stiffness(true) / params.roll_stiffness(false));
    [total - rear, rear]
}

/// Four wheel loads from GC accelerations.
///
/// `a_long` is positive when the car decelerates, `a_trasv` positive when it
/// accelerates towards its right. Braking then loads the front pair and a
/// right-hand turn loads the left side. Loads below zero are clamped.
pub fn vertical_loads(params: &VehicleParameters, a_long: f64, a_trasv: f64) -> WheelLoads {
    let [front_s, rear_s] = params.static_wheel_loads();
    let dfv = longitudinal_transfer(params, a_long);
    let [roll_f, roll_r] = roll_transfer(params, a_trasv);
    let raw = [
        front_s + dfv + roll_f,
        front_s + dfv - roll_f,
        rear_s - dfv + roll_r,
        rear_s - dfv - roll_r,
    ];
    let lifted = raw.iter().any(|&v| v < 0.0);
    WheelLoads {
        loads: raw.map(|v| v.max(0.0)),
        lifted,
    }
}

/// Converts body-frame accelerations (x forward, y left) to the
/// `(a_long, a_trasv)` pair of [`vertical_loads`].
pub fn load_transfer_inputs(ax_forward: f64, ay_left: f64) -> (f64, f64) {
    (-ax_forward, -ay_left)
}

/// Integrated degrees of freedom. Suspension deflection of the massless
/// wheels follows from the body pose, see [`VehicleState::suspension`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    /// GC position, world frame, z up [m].
    pub position: [f64; 3],
    /// Roll, pitch, yaw [rad].
    pub euler: [f64; 3],
    /// GC velocity in body axes [m/s].
    pub velocity: [f64; 3],
    /// Body angular rates p, q, r [rad/s].
    pub rates: [f64; 3],
    /// Wheel spin [rad/s].
    pub wheel_spin: PerWheel<f64>,
}

/// Compression (positive) and compression rate of one suspension corner.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SuspensionCorner {
    pub deflection: f64,
    pub rate: f64,
}

impl VehicleState {
    /// Car at rest on level ground at its static ride height, heading `yaw`,
    /// rolling forward at `speed`.
    pub fn rolling(params: &VehicleParameters, x: f64, y: f64, yaw: f64, speed: f64) -> Self {
        Self {
            position: [x, y, params.gc_height_m],
            euler: [0.0, 0.0, yaw],
            velocity: [speed, 0.0, 0.0],
            rates: [0.0; 3],
            wheel_spin: [speed / params.wheel_radius_m; 4],
        }
    }

    pub fn to_array(&self) -> [f64; STATE_LEN] {
        let mut a = [0.0; STATE_LEN];
        a[0..3].copy_from_slice(&self.position);
        a[3..6].copy_from_slice(&self.euler);
        a[6..9].copy_from_slice(&self.velocity);
        a[9..12].copy_from_slice(&self.rates);
        a[12..16].copy_from_slice(&self.wheel_spin);
        a
    }

    pub fn from_array(a: &[f64; STATE_LEN]) -> Self {
        let take3 = |i: usize| [a[i], a[i + 1], a[i + 2]];
        Self {
            position: take3(0),
            euler: take3(3),
            velocity: take3(6),
            rates: take3(9),
            wheel_spin: [a[12], a[13], a[14], a[15]],
        }
    }

    pub fn yaw(&self) -> f64 {
        self.euler[2]
    }

    /// Body-to-world rotation (z-y-x Euler sequence).
    pub fn rotation(&self) -> [[f64; 3]; 3] {
        rotation(self.euler)
    }

    /// GC velocity in the world frame.
    pub fn world_velocity(&self) -> [f64; 3] {
        mat_vec(&self.rotation(), &self.velocity)
    }

    /// Horizontal GC speed.
    pub fn speed(&self) -> f64 {
        let v = self.world_velocity();
        v[0].hypot(v[1])
    }

    /// Yaw rate (time derivative of the yaw angle).
    pub fn yaw_rate(&self) -> f64 {
        let [phi, theta, _] = self.euler;
        let [_, q, r] = self.rates;
        (q * phi.sin() + r * phi.cos()) / theta.cos()
    }

    /// Direction of the horizontal GC velocity in the world frame.
    pub fn course(&self) -> f64 {
        let v = self.world_velocity();
        v[1].atan2(v[0])
    }

    pub fn suspension(&self, params: &VehicleParameters) -> PerWheel<SuspensionCorner> {
        let rot = self.rotation();
        let omega = self.rates;
        Corner::ALL.map(|c| {
            let r = params.corner_offset(c);
            let p = mat_vec(&rot, &r);
            let v_body = add(self.velocity, cross(omega, r));
            let v = mat_vec(&rot, &v_body);
            SuspensionCorner {
                deflection: params.gc_height_m - (self.position[2] + p[2]),
                rate: -v[2],
            }
        })
    }
}

/// Everything the plant takes from the actuators over one hold interval.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuationSet {
    /// Road-wheel steering angle, positive to the left [rad].
    pub steer: f64,
    /// Accelerator pedal, `[0, 1]`.
    pub throttle: f64,
    pub brake_torque: PerWheel<f64>,
    /// Total drive torque at the wheels after any cut [N m].
    pub engine_torque: f64,
}

pub(crate) fn rotation(euler: [f64; 3]) -> [[f64; 3]; 3] {
    let [phi, theta, psi] = euler;
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    [
        [cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf],
        [sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf],
        [-st, ct * sf, ct * cf],
    ]
}

pub(crate) fn mat_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub(crate) fn mat_t_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_split() {
        let p = VehicleParameters {
            gc_to_rear_m: 1.1,
            ..Default::default()
        };
        let l = vertical_loads(&p, 0.0, 0.0);
        let w = p.mass_kg * GRAVITY;
        assert!((l.loads[0] + l.loads[1] - w * 1.1 / 2.6).abs() < 1e-9);
        assert!((l.loads[2] + l.loads[3] - w * 1.5 / 2.6).abs() < 1e-9);
        assert!(!l.lifted);
    }

    #[test]
    fn braking_transfer_value() {
        let p = VehicleParameters::default();
        assert!((longitudinal_transfer(&p, 3.0) - 951.923_076_923).abs() < 1e-6);
        let l = vertical_loads(&p, 3.0, 0.0);
        let [fs, _] = p.static_wheel_loads();
        assert!((l.loads[0] - fs - 951.923_076_923).abs() < 1e-6);
    }

    #[test]
    fn right_turn_loads_left_side() {
        let p = VehicleParameters::default();
        let (al, at) = load_transfer_inputs(0.0, -7.0);
        let l = vertical_loads(&p, al, at);
        assert!(l.get(Corner::FrontLeft) > l.get(Corner::FrontRight));
        assert!(l.get(Corner::RearLeft) > l.get(Corner::RearRight));
        // stiffer front roll takes the larger share
        let [f, r] = roll_transfer(&p, at);
        assert!(f > r);
    }

    #[test]
    fn lift_is_clamped_and_flagged() {
        let p = VehicleParameters::default();
        let l = vertical_loads(&p, 0.0, 30.0);
        assert!(l.lifted);
        assert!(l.loads.iter().all(|&v| v >= 0.0));
        assert_eq!(l.get(Corner::FrontRight), 0.0);
    }

    #[test]
    fn rotation_is_orthonormal() {
        let r = rotation([0.1, -0.2, 2.5]);
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn defaults_validate() {
        assert!(VehicleParameters::default().validate().is_empty());
        let bad = VehicleParameters {
            gc_to_rear_m: 3.0,
            mass_kg: -1.0,
            ..Default::default()
        };
        let issues = bad.validate();
        assert_eq!(issues.len(), 2);
    }

    #[test]
    fn state_array_round_trip() {
        let s = VehicleState {
            position: [1.0, 2.0, 3.0],
            euler: [0.1, 0.2, 0.3],
            velocity: [4.0, 5.0, 6.0],
            rates: [0.4, 0.5, 0.6],
            wheel_spin: [7.0, 8.0, 9.0, 10.0],
        };
        assert_eq!(VehicleState::from_array(&s.to_array()), s);
    }
}
