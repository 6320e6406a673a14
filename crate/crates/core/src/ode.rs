//! Classical 4th-order Runge-Kutta helpers for the small ODE systems used by
//! the profile, monodromy and radial-orbit solvers, plus an adaptive
//! integrator that records finite-time escape.

use crate::error::{Error, Result};

/// One classical RK4 step for `y' = f(t, y)`; `f` writes the derivative of
/// `y` into its third argument.
pub fn rk4_step<F>(f: &F, t: f64, y: &[f64], dt: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    f(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    f(t + 0.5 * dt, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    f(t + 0.5 * dt, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + dt * k3[i];
    }
    f(t + dt, &tmp, &mut k4);

    (0..n)
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrates `y' = f(t, y)` from `t0` to `t0 + steps * dt` with fixed steps.
pub fn rk4_integrate<F>(f: &F, t0: f64, y0: &[f64], dt: f64, steps: usize) -> Vec<f64>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let mut y = y0.to_vec();
    let mut t = t0;
    for _ in 0..steps {
        y = rk4_step(f, t, &y, dt);
        t += dt;
    }
    y
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarOutcome {
    /// `y` reached the escape threshold at this time.
    Escaped { time: f64, value: f64 },
    /// `t_max` reached first; final value reported.
    Finished { value: f64 },
}

/// Adaptive RK4 (step-doubling error control) for a scalar ODE `y' = f(t,y)`,
/// stopping when `y >= escape_threshold` or at `t_max`.
pub fn integrate_scalar_adaptive<F>(
    f: F,
    t0: f64,
    y0: f64,
    escape_threshold: f64,
    t_max: f64,
    tol: f64,
) -> Result<ScalarOutcome>
where
    F: Fn(f64, f64) -> f64,
{
    let sys = |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = f(t, y[0]);
    let mut t = t0;
    let mut y = y0;
    let mut dt = (t_max - t0) / 1e4;
    let dt_min = (t_max - t0) * 1e-15;
    let mut forced = 0usize;
    while t < t_max {
        if y >= escape_threshold {
            return Ok(ScalarOutcome::Escaped { time: t, value: y });
        }
        let dt_eff = dt.min(t_max - t);
        let full = rk4_step(&sys, t, &[y], dt_eff)[0];
        let half = rk4_step(&sys, t, &[y], 0.5 * dt_eff)[0];
        let two = rk4_step(&sys, t + 0.5 * dt_eff, &[half], 0.5 * dt_eff)[0];
        let err = (two - full).abs() / 15.0;
        let scale = tol * (1.0 + y.abs());
        if err <= scale || dt_eff <= dt_min {
            t += dt_eff;
            y = two;
            if !y.is_finite() {
                return Ok(ScalarOutcome::Escaped { time: t, value: y });
            }
            // forced minimal steps occur in the last instants before a
            // blow-up; a long run of them without escape is a stall
            if dt_eff <= dt_min && err > scale {
                forced += 1;
                if forced > 100_000 {
                    return Err(Error::Numerical(format!(
                        "adaptive step underflow at t = {t}, y = {y}"
                    )));
                }
            } else {
                forced = 0;
            }
        }
        let factor = if err > 0.0 {
            (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        dt = (dt_eff * factor).max(dt_min);
    }
    Ok(ScalarOutcome::Finished { value: y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rk4_exponential_decay() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let y = rk4_integrate(&f, 0.0, &[1.0], 1e-3, 1000);
        assert_relative_eq!(y[0], (-1.0f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn rk4_oscillator_energy() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let y = rk4_integrate(&f, 0.0, &[1.0, 0.0], 1e-3, 6283);
        let energy = y[0] * y[0] + y[1] * y[1];
        assert_relative_eq!(energy, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn adaptive_finds_blowup_time() {
        // y' = y^2 from y0 = 1 blows up at t = 1
        let out = integrate_scalar_adaptive(|_, y| y * y, 0.0, 1.0, 1e8, 2.0, 1e-10).unwrap();
        match out {
            ScalarOutcome::Escaped { time, .. } => {
                assert!((time - 1.0).abs() < 1e-4, "escape at {time}");
            }
            _ => panic!("expected escape"),
        }
    }

    #[test]
    fn adaptive_decay_finishes() {
        let out = integrate_scalar_adaptive(|_, y| -y, 0.0, 1.0, 1e8, 5.0, 1e-10).unwrap();
        match out {
            ScalarOutcome::Finished { value } => {
                assert_relative_eq!(value, (-5.0f64).exp(), max_relative = 1e-6);
            }
            _ => panic!("expected completion"),
        }
    }
}
