//! Tyre-road contact for intact, deflated and deflating tyres.
//!
//! Sign conventions: `sigma > 0` is driving slip, `sigma < 0` braking slip,
//! `-1` is a locked wheel. `alpha` is positive when the contact patch slides
//! to the left of the wheel plane. Friction coefficients carry the sign of
//! the slip that produces them; [`tyre_force`] turns them into forces that
//! oppose the sliding.

use serde::{Deserialize, Serialize};

use crate::corner::Corner;

/// Denominator floor used by [`compute_slip`] at crawling speed [m/s].
pub const DEFAULT_SLIP_SPEED_FLOOR: f64 = 0.5;
/// Upper clamp for driving slip.
pub const SIGMA_CAP: f64 = 1.0;

/// Semi-empirical friction for a correctly inflated tyre.
///
/// The pure-slip curves rise smoothly to their peak (`sigma_p`, `alpha_p`) and
/// then relax towards `tail * max` at full sliding. Combined slip splits the
/// pure-slip coefficients along the direction of the normalized slip vector,
/// which keeps every combined point on the friction ellipse spanned by the
/// two pure-slip values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InflatedFrictionModel {
    pub mu_long_max: f64,
    pub mu_trasv_max: f64,
    pub sigma_p: f64,
    /// Slip angle at peak lateral friction [rad].
    pub alpha_p_rad: f64,
    /// Fraction of `mu_long_max` left at `sigma = 1`.
    pub long_tail: f64,
    /// Fraction of `mu_trasv_max` approached at 90 degrees of slip angle.
    pub trasv_tail: f64,
}

impl Default for InflatedFrictionModel {
    fn default() -> Self {
        Self {
            mu_long_max: 0.9,
            mu_trasv_max: 0.9,
            sigma_p: 0.15,
            alpha_p_rad: 7f64.to_radians(),
            long_tail: 0.75,
            trasv_tail: 0.8,
        }
    }
}

/// Rise-and-relax curve on normalized slip `s` (peak at `s = 1`, value 1).
/// Past the peak it decays to `tail` at `s_end`; `s_end = inf` means an
/// asymptote.
fn peak_curve(s: f64, tail: f64, s_end: f64) -> f64 {
    if s <= 1.0 {
        0.5 * s * (3.0 - s * s)
    } else {
        let g = |x: f64| 2.0 / (x + 1.0 / x);
        let g_end = if s_end.is_finite() { g(s_end) } else { 0.0 };
        let shape = ((g(s.min(s_end)) - g_end) / (1.0 - g_end)).max(0.0);
        tail + (1.0 - tail) * shape
    }
}

impl InflatedFrictionModel {
    pub fn validate(&self) -> Result<(), String> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.mu_long_max) || !pos(self.mu_trasv_max) {
            return Err("friction maxima must be > 0".into());
        }
        if !(self.sigma_p > 0.0 && self.sigma_p < 1.0) {
            return Err("sigma_p must lie in (0, 1)".into());
        }
        if !(self.alpha_p_rad > 0.0 && self.alpha_p_rad < std::f64::consts::FRAC_PI_2) {
            return Err("alpha_p_rad must lie in (0, pi/2)".into());
        }
        if !(0.0..=1.0).contains(&self.long_tail) || !(0.0..=1.0).contains(&self.trasv_tail) {
            return Err("tail fractions must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// Pure longitudinal coefficient for slip magnitude `|sigma|`.
    pub fn pure_long(&self, sigma: f64) -> f64 {
        let s = sigma.abs().min(1.0) / self.sigma_p;
        self.mu_long_max * peak_curve(s, self.long_tail, 1.0 / self.sigma_p)
    }

    /// Pure lateral coefficient for slip angle magnitude `|alpha|`.
    pub fn pure_trasv(&self, alpha: f64) -> f64 {
        let s = self.lateral_slip(alpha);
        self.mu_trasv_max * peak_curve(s, self.trasv_tail, f64::INFINITY)
    }

    fn lateral_slip(&self, alpha: f64) -> f64 {
        let a = alpha.abs().min(std::f64::consts::FRAC_PI_2);
        a.tan() / self.alpha_p_rad.tan()
    }

    /// Combined-slip coefficients `(mu_long, mu_trasv)`, signed like
    /// `(sigma, alpha)`.
    ///
    /// Below `sigma_p` the pair lies on the ellipse whose semi-axes are the
    /// pure-slip values at the same `sigma` and `alpha`. At and past `sigma_p`
    /// the slip direction keeps turning longitudinal, so the lateral share
    /// saturates and then shrinks as the wheel approaches lock.
    pub fn friction(&self, sigma: f64, alpha: f64) -> (f64, f64) {
        let s_long = sigma.abs() / self.sigma_p;
        let s_lat = self.lateral_slip(alpha);
        if s_long == 0.0 && s_lat == 0.0 {
            return (0.0, 0.0);
        }
        let theta = s_lat.atan2(s_long);
        let mu_long = self.pure_long(sigma) * theta.cos();
        let mu_trasv = self.pure_trasv(alpha) * theta.sin();
        (mu_long.copysign(sigma), mu_trasv.copysign(alpha))
    }
}

/// Elliptic polar friction of a flat tyre: depends only on the direction of
/// the contact-patch velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeflatedFrictionModel {
    pub mu_long_burst: f64,
    pub mu_trasv_burst: f64,
}

impl Default for DeflatedFrictionModel {
    fn default() -> Self {
        Self {
            mu_long_burst: 0.05,
            mu_trasv_burst: 0.05,
        }
    }
}

impl DeflatedFrictionModel {
    pub fn validate(&self) -> Result<(), String> {
        let ok = |v: f64| v > 0.0 && v <= 1.0;
        if ok(self.mu_long_burst) && ok(self.mu_trasv_burst) {
            Ok(())
        } else {
            Err("burst friction semi-axes must lie in (0, 1]".into())
        }
    }

    /// Coefficient for a patch velocity pointing `direction` radians off the
    /// wheel plane.
    pub fn friction(&self, direction: f64) -> f64 {
        let (s, c) = direction.sin_cos();
        ((self.mu_long_burst * c).powi(2) + (self.mu_trasv_burst * s).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurstEvent {
    pub wheel: Corner,
    #[serde(rename = "t_start_s")]
    pub t_start: f64,
    #[serde(rename = "duration_s", default = "default_deflation")]
    pub duration: f64,
    #[serde(default)]
    pub target: DeflatedFrictionModel,
}

fn default_deflation() -> f64 {
    3.0
}

impl BurstEvent {
    pub fn new(wheel: Corner, t_start: f64, target: DeflatedFrictionModel) -> Self {
        Self {
            wheel,
            t_start,
            duration: default_deflation(),
            target,
        }
    }

    /// 1 while intact, 0 once fully deflated, linear in between.
    pub fn inflation_blend(&self, t: f64) -> f64 {
        if t <= self.t_start {
            1.0
        } else if t >= self.t_start + self.duration {
            0.0
        } else {
            1.0 - (t - self.t_start) / self.duration
        }
    }
}

/// Longitudinal slip and slip angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Slip {
    pub sigma: f64,
    pub alpha: f64,
}

/// `sigma = (omega*r - v_long) / max(|v_long|, floor)`, clamped to
/// `[-1, SIGMA_CAP]`; `alpha = atan2(v_lat, max(|v_long|, floor))`.
pub fn compute_slip(omega: f64, radius: f64, v_long: f64, v_lat: f64, floor: f64) -> Slip {
    let den = v_long.abs().max(floor);
    let sigma = ((omega * radius - v_long) / den).clamp(-1.0, SIGMA_CAP);
    let alpha = v_lat.atan2(den);
    Slip { sigma, alpha }
}

/// Per-wheel contact snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TyreContactState {
    pub sigma: f64,
    pub alpha: f64,
    pub load: f64,
    pub inflation_blend: f64,
    pub f_long: f64,
    pub f_trasv: f64,
}

/// Forces at one contact patch in the wheel frame (x along the wheel
/// heading, y to its left).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContactForce {
    pub f_long: f64,
    pub f_trasv: f64,
    /// Longitudinal part coming from the inflated carcass; this is what
    /// reacts on the wheel spin.
    pub f_long_inflated: f64,
}

/// Blended tyre force for load `load`, slip `slip` and patch velocity
/// `(v_long, v_lat)`. `blend = 1` is fully inflated.
pub fn tyre_force(
    inflated: &InflatedFrictionModel,
    deflated: &DeflatedFrictionModel,
    slip: Slip,
    v_long: f64,
    v_lat: f64,
    load: f64,
    blend: f64,
    speed_floor: f64,
) -> ContactForce {
    if load <= 0.0 {
        return ContactForce::default();
    }
    let blend = blend.clamp(0.0, 1.0);
    let (mut fx, mut fy, mut fx_inf) = (0.0, 0.0, 0.0);
    if blend > 0.0 {
        let (mu_l, mu_t) = inflated.friction(slip.sigma, slip.alpha);
        fx_inf = blend * mu_l * load;
        fx += fx_inf;
        fy -= blend * mu_t * load;
    }
    if blend < 1.0 {
        let speed = v_long.hypot(v_lat);
        if speed > 0.0 {
            let mu = deflated.friction(v_lat.atan2(v_long));
            // ramps in below the floor so a parked car feels no force
            let ramp = (speed / speed_floor).min(1.0);
            let mag = (1.0 - blend) * mu * load * ramp;
            fx -= mag * v_long / speed;
            fy -= mag * v_lat / speed;
        }
    }
    ContactForce {
        f_long: fx,
        f_trasv: fy,
        f_long_inflated: fx_inf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> InflatedFrictionModel {
        InflatedFrictionModel::default()
    }

    #[test]
    fn free_rolling_has_no_slip() {
        let s = compute_slip(20.0 / 0.3, 0.3, 20.0, 0.0, 2.0);
        assert!(s.sigma.abs() < 1e-12);
        assert_eq!(s.alpha, 0.0);
    }

    #[test]
    fn locked_wheel_is_minus_one() {
        assert_eq!(compute_slip(0.0, 0.3, 20.0, 0.0, 2.0).sigma, -1.0);
    }

    #[test]
    fn slip_angle_from_velocity_ratio() {
        let s = compute_slip(20.0 / 0.3, 0.3, 20.0, 2.0, 2.0);
        assert!((s.alpha - 0.0997).abs() < 5e-5);
    }

    #[test]
    fn standstill_is_regularized() {
        let s = compute_slip(0.0, 0.3, 0.0, 1e-9, 2.0);
        assert_eq!(s.sigma, 0.0);
        assert!(s.alpha.abs() < 1e-9);
    }

    #[test]
    fn no_slip_no_friction() {
        assert_eq!(model().friction(0.0, 0.0), (0.0, 0.0));
    }

    #[test]
    fn pure_longitudinal_peak() {
        let m = model();
        let (l, t) = m.friction(m.sigma_p, 0.0);
        assert!((l - 0.9).abs() < 1e-12);
        assert_eq!(t, 0.0);
        let (l, _) = m.friction(-1.0, 0.0);
        assert!((l + 0.75 * 0.9).abs() < 1e-12);
    }

    #[test]
    fn pure_lateral_peak_at_alpha_p() {
        let m = model();
        let (_, t) = m.friction(0.0, m.alpha_p_rad);
        assert!((t - 0.9).abs() < 1e-12);
    }

    #[test]
    fn combined_point_on_ellipse() {
        let m = model();
        let (sigma, alpha) = (m.sigma_p / 2.0, 4f64.to_radians());
        let (l, t) = m.friction(sigma, alpha);
        let l0 = m.friction(sigma, 0.0).0;
        let t0 = m.friction(0.0, alpha).1;
        let r = (l / l0).powi(2) + (t / t0).powi(2) - 1.0;
        assert!(r.abs() < 1e-9, "residual {r}");
    }

    #[test]
    fn deflated_semi_axes() {
        let d = DeflatedFrictionModel {
            mu_long_burst: 0.3,
            mu_trasv_burst: 0.1,
        };
        assert!((d.friction(0.0) - 0.3).abs() < 1e-15);
        assert!((d.friction(std::f64::consts::FRAC_PI_2) - 0.1).abs() < 1e-15);
        let c = DeflatedFrictionModel::default();
        assert!((c.friction(std::f64::consts::FRAC_PI_4) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn blend_schedule() {
        let e = BurstEvent::new(Corner::RearRight, 6.0, DeflatedFrictionModel::default());
        assert_eq!(e.inflation_blend(5.0), 1.0);
        assert_eq!(e.inflation_blend(9.0), 0.0);
        assert!((e.inflation_blend(7.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_load_zero_force() {
        let f = tyre_force(
            &model(),
            &DeflatedFrictionModel::default(),
            Slip { sigma: -0.2, alpha: 0.1 },
            20.0,
            2.0,
            0.0,
            0.5,
            2.0,
        );
        assert_eq!(f, ContactForce::default());
    }

    #[test]
    fn deflated_force_magnitude() {
        // Sliding straight ahead on a flat tyre: pure drag mu * N.
        let f = tyre_force(
            &model(),
            &DeflatedFrictionModel::default(),
            Slip::default(),
            20.0,
            0.0,
            4000.0,
            0.0,
            2.0,
        );
        assert!((f.f_long.hypot(f.f_trasv) - 200.0).abs() < 1e-9);
        assert!(f.f_long < 0.0);
        assert_eq!(f.f_long_inflated, 0.0);
    }

    #[test]
    fn intact_blend_matches_inflated_path() {
        let m = model();
        let slip = Slip { sigma: -0.07, alpha: 0.03 };
        let f = tyre_force(&m, &DeflatedFrictionModel::default(), slip, 25.0, 0.75, 3500.0, 1.0, 2.0);
        let (l, t) = m.friction(slip.sigma, slip.alpha);
        assert_eq!(f.f_long, l * 3500.0);
        assert_eq!(f.f_trasv, -t * 3500.0);
    }

    proptest! {
        #[test]
        fn ellipse_bound_below_peak(sigma in -0.1499f64..0.1499, alpha in -1.5f64..1.5) {
            let m = model();
            let (l, t) = m.friction(sigma, alpha);
            let norm = (l / m.mu_long_max).powi(2) + (t / m.mu_trasv_max).powi(2);
            prop_assert!(norm <= 1.0 + 1e-12);
        }

        #[test]
        fn lateral_saturates_past_peak(sigma in 0.15f64..1.0, alpha in -1.5f64..1.5) {
            let m = model();
            let at_peak = m.friction(m.sigma_p, alpha).1.abs();
            prop_assert!(m.friction(sigma, alpha).1.abs() <= at_peak + 1e-12);
            prop_assert!(m.friction(-sigma, alpha).1.abs() <= at_peak + 1e-12);
        }

        #[test]
        fn deflated_is_even(dir in -3.2f64..3.2, a in 0.01f64..1.0, b in 0.01f64..1.0) {
            let d = DeflatedFrictionModel { mu_long_burst: a, mu_trasv_burst: b };
            prop_assert!((d.friction(dir) - d.friction(-dir)).abs() < 1e-15);
        }

        #[test]
        fn force_continuous_in_blend(b in 0.0f64..1.0, db in -1e-7f64..1e-7) {
            let m = model();
            let slip = Slip { sigma: -0.05, alpha: 0.05 };
            let f = |bl: f64| tyre_force(&m, &DeflatedFrictionModel::default(), slip, 20.0, 1.0, 4000.0, bl, 2.0);
            let (f1, f2) = (f(b), f((b + db).clamp(0.0, 1.0)));
            prop_assert!((f1.f_long - f2.f_long).abs() < 1e-3);
            prop_assert!((f1.f_trasv - f2.f_trasv).abs() < 1e-3);
        }
    }

    #[test]
    fn onset_is_monotone() {
        let m = model();
        let mut last = 0.0;
        for i in 0..=300 {
            let s = m.sigma_p * i as f64 / 300.0;
            let v = m.friction(s, 0.0).0;
            assert!(v >= last);
            last = v;
        }
        let mut last = 0.0;
        for i in 0..=300 {
            let a = m.alpha_p_rad * i as f64 / 300.0;
            let v = m.friction(0.0, a).1;
            assert!(v >= last);
            last = v;
        }
    }
}
