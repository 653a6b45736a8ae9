//! Fixed-step classical Runge-Kutta.

use crate::error::SimFault;

/// One RK4 step of `y' = f(t, y)`. Returns a fault if `f` fails or the new
/// state is not finite.
pub fn rk4_step<const N: usize, F>(
    t: f64,
    y: &[f64; N],
    dt: f64,
    mut f: F,
) -> Result<[f64; N], SimFault>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], SimFault>,
{
    let axpy = |base: &[f64; N], k: &[f64; N], h: f64| {
        let mut out = *base;
        for (o, d) in out.iter_mut().zip(k) {
            *o += h * d;
        }
        out
    };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * dt, &axpy(y, &k1, 0.5 * dt))?;
    let k3 = f(t + 0.5 * dt, &axpy(y, &k2, 0.5 * dt))?;
    let k4 = f(t + dt, &axpy(y, &k3, dt))?;
    let mut next = *y;
    for i in 0..N {
        next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if let Some(i) = next.iter().position(|v| !v.is_finite()) {
        return Err(SimFault {
            time: t + dt,
            message: format!("state component {i} is not finite"),
        });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_is_identity() {
        let y = [1.0, -2.0, 3.5];
        let next = rk4_step(0.0, &y, 0.01, |_, _| Ok([0.0; 3])).unwrap();
        assert_eq!(next, y);
    }

    #[test]
    fn constant_acceleration_is_exact() {
        // [x, v] with v' = a
        let a = 3.0;
        let dt = 1e-3;
        let mut y = [0.0, 2.0];
        for n in 0..1000 {
            y = rk4_step(n as f64 * dt, &y, dt, |_, s| Ok([s[1], a])).unwrap();
        }
        let t = 1.0;
        assert!((y[1] - (2.0 + a * t)).abs() < 1e-12);
        assert!((y[0] - (2.0 * t + 0.5 * a * t * t)).abs() < 1e-12);
    }

    #[test]
    fn non_finite_state_faults() {
        let err = rk4_step(0.5, &[1.0], 0.1, |_, _| Ok([f64::INFINITY])).unwrap_err();
        assert!((err.time - 0.6).abs() < 1e-12);
    }

    #[test]
    fn halving_step_cuts_error_sixteenfold() {
        let err = |dt: f64| {
            let omega = 1.3;
            let f = |_: f64, s: &[f64; 4]| Ok([s[2], s[3], -omega * omega * s[0], -omega * omega * s[1]]);
            let mut y = [10.0, 0.0, 0.0, 13.0];
            let steps = (4.0 / dt).round() as usize;
            for n in 0..steps {
                y = rk4_step(n as f64 * dt, &y, dt, f).unwrap();
            }
            let t = steps as f64 * dt;
            ((y[0] - 10.0 * (omega * t).cos()).powi(2) + (y[1] - 10.0 * (omega * t).sin()).powi(2)).sqrt()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }
}
