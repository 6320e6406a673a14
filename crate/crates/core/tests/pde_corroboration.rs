//! Cross-module check: a Neumann PDE run started near a stable periodic
//! orbit relaxes to the orbit circle at a rate consistent with the largest
//! nontrivial Floquet multiplier.

use cgl_core::evolution::{Integrator, Scheme, SolverConfig};
use cgl_core::floquet::{build_orbit, monodromy};
use cgl_core::grid::{BoundaryCondition, Field, Grid};
use cgl_core::params::ParamSet;
use cgl_core::C64;
use std::f64::consts::PI;

/// L2 distance between the moduli of two fields. Measuring against a
/// reference run of the same scheme (instead of the exact circle) cancels
/// the integrator's own O(dt^2) radius bias, which would otherwise floor
/// the decay.
fn modulus_distance(u: &Field, v: &Field) -> f64 {
    let g = u.grid();
    let mut s = 0.0;
    for (idx, (a, b)) in u.values().iter().zip(v.values()).enumerate() {
        let d = a.norm() - b.norm();
        s += g.quad_weight(idx) * d * d;
    }
    s.sqrt()
}

#[test]
fn stable_orbit_relaxation_rate_matches_multiplier() {
    let p = ParamSet {
        a: 1.0,
        alpha: 0.0,
        b: -1.0,
        beta: 1.0,
        c: 0.0,
        gamma: 0.0,
        k: 1.0,
        sigma1: 2.0,
        sigma2: 4.0,
    };
    let orbit = build_orbit(&p).unwrap();
    let (_, mults) = monodromy(&orbit, 0.0).unwrap();
    let nontrivial = mults.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let predicted_rate = nontrivial.ln() / orbit.period;

    let g = Grid::interval(0.0, 1.0, 9).unwrap();
    let u0 = Field::from_fn(g, BoundaryCondition::Neumann, |x, _| {
        C64::new(orbit.r0 + 0.01 * (1.0 + 0.5 * (PI * x).cos()), 0.0)
    });
    let ref0 = Field::from_fn(g, BoundaryCondition::Neumann, |_, _| {
        C64::new(orbit.r0, 0.0)
    });
    let integ = Integrator::new(g, BoundaryCondition::Neumann, p, Scheme::EigenbasisExponential)
        .unwrap();
    let t_period = orbit.period;
    let cfg = SolverConfig::new(1e-3, t_period, Scheme::EigenbasisExponential);

    let (u1, _, _) = integ.run(&u0, &cfg).unwrap();
    let (ref1, _, _) = integ.run(&ref0, &cfg).unwrap();
    let d0 = modulus_distance(&u0, &ref0);
    let d1 = modulus_distance(&u1, &ref1);
    assert!(d1 < d0, "no relaxation: {d0} -> {d1}");
    let measured_rate = (d1 / d0).ln() / t_period;

    // consistent within a factor of 2 over one period
    assert!(
        measured_rate <= predicted_rate / 2.0 && measured_rate >= predicted_rate * 2.0,
        "measured {measured_rate}, predicted {predicted_rate}"
    );
}
