//! Lyapunov functionals for the zero equilibrium: the p-th power integrals
//! W_p, the energy-type functional V, its dissipation rate, coercivity
//! constants, and empirical decay verification on simulation logs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::DiagnosticsLog;
use crate::grid::Field;
use crate::params::{proportionality_holds, ParamSet};
use crate::C64;

/// `W_p(u) = int |u|^p`.
pub fn eval_wp(u: &Field, p: f64) -> Result<f64> {
    if p < 2.0 {
        return Err(Error::InvalidParams(format!("p = {p} must be >= 2")));
    }
    Ok(u.norm_lp_pow(p))
}

/// `V(u) = (a/2)||grad u||^2 - b W_{s1+2}/(s1+2) + c W_{s2+2}/(s2+2) - (k/2)||u||^2`.
pub fn eval_v(u: &Field, p: &ParamSet) -> f64 {
    0.5 * p.a * u.grad_sq() - p.b * u.norm_lp_pow(p.sigma1 + 2.0) / (p.sigma1 + 2.0)
        + p.c * u.norm_lp_pow(p.sigma2 + 2.0) / (p.sigma2 + 2.0)
        - 0.5 * p.k * u.norm_l2_sq()
}

/// Dissipation rate
/// `Vdot(u) = -int |a Lap u + b|u|^{s1}u - c|u|^{s2}u + k u|^2`,
/// valid under the proportionality hypothesis `alpha/a = beta/b = gamma/c`
/// (checked; violations are an error, since the formula does not hold
/// otherwise).
pub fn eval_vdot(u: &Field, p: &ParamSet) -> Result<f64> {
    if !proportionality_holds(p) {
        return Err(Error::Hypothesis(
            "Vdot formula requires alpha/a = beta/b = gamma/c".into(),
        ));
    }
    let lap = u.laplacian();
    let mut acc = 0.0;
    for (idx, (&z, &lz)) in u.values().iter().zip(lap.values()).enumerate() {
        let m = z.norm();
        let w = p.a * lz
            + (p.b * crate::grid::pow_abs(m, p.sigma1) - p.c * crate::grid::pow_abs(m, p.sigma2)
                + p.k)
                * z;
        acc += u.grid().quad_weight(idx) * w.norm_sqr();
    }
    Ok(-acc)
}

/// Coercivity constant M with `V(u) >= M ||u||_{H1}^2` under the `k < 0`
/// hypothesis set, from the interpolation chain
/// `W_{s1+2} <= (s1/s2) W_{s2+2} + ((s2-s1)/s2) W_2` applied to the focusing
/// term (only its positive part matters).
pub fn coercivity_constant(p: &ParamSet) -> Result<f64> {
    p.validate()?;
    if !(p.k < 0.0) {
        return Err(Error::Hypothesis("coercivity derivation needs k < 0".into()));
    }
    if !(p.sigma1 < p.sigma2) {
        return Err(Error::Hypothesis("coercivity derivation needs sigma1 < sigma2".into()));
    }
    let bp = p.b.max(0.0);
    let damping_slack = p.c / (p.sigma2 + 2.0) - bp * p.sigma1 / ((p.sigma1 + 2.0) * p.sigma2);
    if damping_slack < 0.0 {
        return Err(Error::Hypothesis(
            "damping term does not absorb the interpolated focusing term".into(),
        ));
    }
    let m = (0.5 * p.a).min(0.5 * p.k.abs() - bp * (p.sigma2 - p.sigma1) / ((p.sigma1 + 2.0) * p.sigma2));
    if !(m > 0.0) {
        return Err(Error::Hypothesis(format!("coercivity constant {m} is not positive")));
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `W_p` for a p whose series the log actually carries
    /// (2, sigma1+2 or sigma2+2).
    Lp(f64),
    /// Squared H1 norm.
    H1,
    V,
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovSample {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovReport {
    pub functional: String,
    pub samples: Vec<LyapunovSample>,
    pub monotone: bool,
    /// Least-squares slope of ln(value) vs t over the second half of the run
    /// (0 when the functional is not positive there).
    pub decay_rate_estimate: f64,
}

const MONOTONE_TOL: f64 = 1e-8;

/// Extracts the selected functional from a diagnostics log and checks
/// nonincrease up to per-step tolerance `1e-8 (1 + |value|)`.
pub fn verify_decay(log: &DiagnosticsLog, which: Functional) -> Result<LyapunovReport> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    let (name, values): (String, Vec<f64>) = match which {
        Functional::Lp(p) => {
            let series: Vec<f64> = if close(p, 2.0) {
                log.rows.iter().map(|r| r.l2_sq).collect()
            } else if close(p, log.sigma1 + 2.0) {
                log.rows.iter().map(|r| r.lp_sigma1).collect()
            } else if close(p, log.sigma2 + 2.0) {
                log.rows.iter().map(|r| r.lp_sigma2).collect()
            } else {
                return Err(Error::MissingInput(format!(
                    "the log carries W_p only for p in {{2, {}, {}}}, not {p}",
                    log.sigma1 + 2.0,
                    log.sigma2 + 2.0
                )));
            };
            (format!("W_{p}"), series)
        }
        Functional::H1 => (
            "H1_sq".into(),
            log.rows.iter().map(|r| r.l2_sq + r.grad_sq).collect(),
        ),
        Functional::V => ("V".into(), log.rows.iter().map(|r| r.v).collect()),
    };
    let samples: Vec<LyapunovSample> = log
        .rows
        .iter()
        .zip(&values)
        .map(|(r, &v)| LyapunovSample { t: r.t, value: v })
        .collect();
    let monotone = values
        .windows(2)
        .all(|w| w[1] <= w[0] + MONOTONE_TOL * (1.0 + w[0].abs()));

    let half = &samples[samples.len() / 2..];
    let decay_rate_estimate = if half.len() >= 2 && half.iter().all(|s| s.value > 0.0) {
        // least squares ln(value) = rate * t + const
        let n = half.len() as f64;
        let st: f64 = half.iter().map(|s| s.t).sum();
        let sy: f64 = half.iter().map(|s| s.value.ln()).sum();
        let stt: f64 = half.iter().map(|s| s.t * s.t).sum();
        let sty: f64 = half.iter().map(|s| s.t * s.value.ln()).sum();
        let den = n * stt - st * st;
        if den.abs() > 0.0 {
            (n * sty - st * sy) / den
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(LyapunovReport {
        functional: name,
        samples,
        monotone,
        decay_rate_estimate,
    })
}

/// Pointwise check `V(u) >= M ||u||_{H1}^2` for one field.
pub fn coercivity_gap(u: &Field, p: &ParamSet) -> Result<f64> {
    let m = coercivity_constant(p)?;
    Ok(eval_v(u, p) - m * u.norm_h1_sq())
}

#[allow(dead_code)]
fn _type_uses(_: C64) {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{Integrator, Scheme, SolverConfig};
    use crate::grid::{BoundaryCondition, Grid};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn sine_field(n: usize) -> Field {
        let g = Grid::interval(0.0, 1.0, n).unwrap();
        Field::from_real_fn(g, BoundaryCondition::Dirichlet, |x, _| (PI * x).sin())
    }

    fn h1_params() -> ParamSet {
        ParamSet {
            a: 1.0,
            alpha: 0.5,
            b: 0.1,
            beta: 0.05,
            c: 1.0,
            gamma: 0.5,
            k: -1.0,
            sigma1: 1.0,
            sigma2: 2.0,
        }
    }

    #[test]
    fn wp_examples() {
        let u = sine_field(2001);
        assert_relative_eq!(eval_wp(&u, 2.0).unwrap(), 0.5, max_relative = 1e-6);
        assert_relative_eq!(eval_wp(&u, 4.0).unwrap(), 0.375, max_relative = 1e-6);
        assert!(eval_wp(&u, 1.0).is_err());
    }

    #[test]
    fn v_examples() {
        let u = sine_field(2001);
        let p0 = ParamSet {
            a: 1.0,
            alpha: 0.0,
            b: 0.0,
            beta: 0.0,
            c: 0.0,
            gamma: 0.0,
            k: 0.0,
            sigma1: 2.0,
            sigma2: 4.0,
        };
        assert_relative_eq!(eval_v(&u, &p0), PI * PI / 4.0, max_relative = 1e-5);
        let vb = eval_v(&u, &ParamSet { b: 1.0, ..p0 });
        let vb2 = eval_v(&u, &ParamSet { b: 2.0, ..p0 });
        assert!(vb2 < vb && vb < eval_v(&u, &p0));
    }

    #[test]
    fn vdot_nonpositive_and_guarded() {
        let p = h1_params();
        let g = Grid::interval(0.0, 1.0, 257).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let m1: usize = rng.gen_range(1..6);
            let m2: usize = rng.gen_range(1..6);
            let (c1, c2): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let u = Field::from_fn(g, BoundaryCondition::Dirichlet, |x, _| {
                C64::new(
                    c1 * (m1 as f64 * PI * x).sin(),
                    c2 * (m2 as f64 * PI * x).sin(),
                )
            });
            assert!(eval_vdot(&u, &p).unwrap() <= 0.0);
        }
        let bad = ParamSet { beta: 0.3, ..p };
        let u = sine_field(65);
        assert!(matches!(eval_vdot(&u, &bad), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn coercivity_on_random_fields() {
        let p = h1_params();
        let m = coercivity_constant(&p).unwrap();
        assert!(m > 0.0 && m <= 0.5);
        let g = Grid::interval(0.0, 1.0, 257).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let amp: f64 = rng.gen_range(0.0..2.0);
            let modes: Vec<(f64, f64)> =
                (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let u = Field::from_fn(g, BoundaryCondition::Dirichlet, |x, _| {
                let mut z = C64::new(0.0, 0.0);
                for (j, (re, im)) in modes.iter().enumerate() {
                    z += C64::new(*re, *im) * ((j + 1) as f64 * PI * x).sin();
                }
                amp * z
            });
            let gap = coercivity_gap(&u, &p).unwrap();
            assert!(gap >= -1e-12, "gap {gap}");
        }
    }

    #[test]
    fn decay_rate_of_linear_flow() {
        let g = Grid::interval(0.0, 1.0, 129).unwrap();
        let p = ParamSet {
            b: 0.0,
            beta: 0.0,
            c: 0.0,
            gamma: 0.0,
            alpha: 0.0,
            a: 1.0,
            k: -0.5,
            sigma1: 2.0,
            sigma2: 4.0,
        };
        let integ = Integrator::new(
            g,
            BoundaryCondition::Dirichlet,
            p,
            Scheme::EigenbasisExponential,
        )
        .unwrap();
        let u0 = Field::from_real_fn(g, BoundaryCondition::Dirichlet, |x, _| (PI * x).sin());
        let cfg = SolverConfig::new(1e-3, 0.5, Scheme::EigenbasisExponential);
        let (_, log, _) = integ.run(&u0, &cfg).unwrap();
        let rep = verify_decay(&log, Functional::Lp(2.0)).unwrap();
        assert!(rep.monotone);
        assert_relative_eq!(
            rep.decay_rate_estimate,
            2.0 * (p.k - p.a * PI * PI),
            max_relative = 1e-3
        );
        // requesting a W_p the log does not carry is a missing-input error
        assert!(matches!(
            verify_decay(&log, Functional::Lp(3.5)),
            Err(Error::MissingInput(_))
        ));
    }

    #[test]
    fn zero_trajectory_report() {
        let g = Grid::interval(0.0, 1.0, 33).unwrap();
        let p = h1_params();
        let integ = Integrator::new(
            g,
            BoundaryCondition::Dirichlet,
            p,
            Scheme::EigenbasisExponential,
        )
        .unwrap();
        let u0 = Field::zeros(g, BoundaryCondition::Dirichlet);
        let cfg = SolverConfig::new(1e-2, 0.1, Scheme::EigenbasisExponential);
        let (_, log, _) = integ.run(&u0, &cfg).unwrap();
        let rep = verify_decay(&log, Functional::V).unwrap();
        assert!(rep.monotone);
        assert_eq!(rep.decay_rate_estimate, 0.0);
    }
}
