//! Equation coefficients in raw and trigonometric normal form, plus the
//! regime classifier that evaluates every stability / existence / blow-up
//! hypothesis as an explicit inequality with both sides reported.
//!
//! Inequalities are compared exactly as computed, with no tolerance slack;
//! each leaf records whether a non-strict hypothesis happened to hold
//! strictly. The proportionality hypothesis alpha/a = beta/b = gamma/c is
//! the one exception (relative tolerance 1e-12), and the ratio for a zero
//! coefficient pair is dropped.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Field};

/// Coefficients of
/// `u_t = (a+i alpha) Lap u + (b+i beta)|u|^s1 u - (c+i gamma)|u|^s2 u + k u`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub c: f64,
    pub gamma: f64,
    pub k: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl ParamSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) {
            return Err(Error::InvalidParams(format!("a = {} must be > 0", self.a)));
        }
        if !(self.sigma1 > 0.0) || !(self.sigma2 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "sigma1 = {}, sigma2 = {} must both be > 0",
                self.sigma1, self.sigma2
            )));
        }
        for (name, v) in [
            ("a", self.a),
            ("alpha", self.alpha),
            ("b", self.b),
            ("beta", self.beta),
            ("c", self.c),
            ("gamma", self.gamma),
            ("k", self.k),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }
}

/// Coefficients of the normalized form
/// `u_t = e^{i theta} Lap u + e^{i gamma1}|u|^s1 u + chi e^{i gamma2}|u|^s2 u + k u`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigParamSet {
    pub theta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub chi: i32,
    pub k: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl TrigParamSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta.abs() < PI / 2.0) {
            return Err(Error::InvalidParams(format!(
                "theta = {} must satisfy |theta| < pi/2",
                self.theta
            )));
        }
        for (name, g) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(g > -PI && g <= PI) {
                return Err(Error::InvalidParams(format!(
                    "{name} = {g} must lie in (-pi, pi]"
                )));
            }
        }
        if self.chi * self.chi != 1 {
            return Err(Error::InvalidParams(format!(
                "chi = {} must be +1 or -1",
                self.chi
            )));
        }
        if !(self.sigma1 > 0.0) || !(self.sigma2 > 0.0) {
            return Err(Error::InvalidParams("sigma exponents must be > 0".into()));
        }
        Ok(())
    }
}

/// Result of [`to_trig_form`]: the phase data plus the moduli that were
/// divided out. The forms describe the same equation iff all moduli are 1.
#[derive(Debug, Clone, Serialize)]
pub struct TrigForm {
    pub trig: TrigParamSet,
    /// `(|a + i alpha|, |b + i beta|, |c + i gamma|)`
    pub moduli: (f64, f64, f64),
    pub exact_equivalence: bool,
}

pub fn to_trig_form(p: &ParamSet) -> Result<TrigForm> {
    p.validate()?;
    if p.b == 0.0 && p.beta == 0.0 {
        return Err(Error::ConversionUndefined(
            "(b, beta) = (0, 0): gamma1 is undefined".into(),
        ));
    }
    if p.c == 0.0 && p.gamma == 0.0 {
        return Err(Error::ConversionUndefined(
            "(c, gamma) = (0, 0): gamma2 is undefined".into(),
        ));
    }
    let m1 = p.a.hypot(p.alpha);
    let m2 = p.b.hypot(p.beta);
    let m3 = p.c.hypot(p.gamma);
    // chi e^{i gamma2} = -(c + i gamma)/|c + i gamma| realized with chi = -1
    let trig = TrigParamSet {
        theta: p.alpha.atan2(p.a),
        gamma1: p.beta.atan2(p.b),
        gamma2: p.gamma.atan2(p.c),
        chi: -1,
        k: p.k,
        sigma1: p.sigma1,
        sigma2: p.sigma2,
    };
    Ok(TrigForm {
        trig,
        moduli: (m1, m2, m3),
        exact_equivalence: m1 == 1.0 && m2 == 1.0 && m3 == 1.0,
    })
}

/// One evaluated hypothesis: `lhs relation rhs`.
#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub name: String,
    pub satisfied: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: String,
    /// For non-strict relations: whether it held with strict inequality.
    pub strict: bool,
}

fn cond(name: &str, lhs: f64, relation: &str, rhs: f64) -> Condition {
    let (satisfied, strict) = match relation {
        "<=" => (lhs <= rhs, lhs < rhs),
        "<" => (lhs < rhs, lhs < rhs),
        ">=" => (lhs >= rhs, lhs > rhs),
        ">" => (lhs > rhs, lhs > rhs),
        "==" => (lhs == rhs, false),
        "!=" => (lhs != rhs, lhs != rhs),
        _ => unreachable!("unknown relation {relation}"),
    };
    Condition {
        name: name.to_string(),
        satisfied,
        lhs,
        rhs,
        relation: relation.to_string(),
        strict,
    }
}

/// Conjunction of named conditions for one hypothesis branch.
#[derive(Debug, Clone, Serialize)]
pub struct BranchReport {
    pub satisfied: bool,
    pub conditions: Vec<Condition>,
    pub failed: Vec<String>,
}

impl BranchReport {
    fn from_conditions(conditions: Vec<Condition>) -> Self {
        let failed: Vec<String> = conditions
            .iter()
            .filter(|c| !c.satisfied)
            .map(|c| c.name.clone())
            .collect();
        BranchReport {
            satisfied: failed.is_empty(),
            conditions,
            failed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitCase {
    /// `c = 0`, `b k < 0`
    Case1C0,
    /// `k = 0`, `b c > 0`
    Case2K0,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrbitParams {
    pub r0: f64,
    pub freq: f64,
    /// `2 pi / |freq|`; infinite when the orbit degenerates to an
    /// equilibrium circle (`freq = 0`).
    pub period: f64,
    pub degenerate: bool,
    pub case: OrbitCase,
}

/// Radius, frequency and period of the spatially homogeneous periodic orbit,
/// when the parameters admit one.
pub fn periodic_orbit_params(p: &ParamSet) -> Result<Option<OrbitParams>> {
    p.validate()?;
    let (r0, case) = if p.c == 0.0 && p.b * p.k < 0.0 {
        ((-p.k / p.b).powf(1.0 / p.sigma1), OrbitCase::Case1C0)
    } else if p.k == 0.0 && p.b * p.c > 0.0 && p.sigma2 > p.sigma1 {
        ((p.b / p.c).powf(1.0 / (p.sigma2 - p.sigma1)), OrbitCase::Case2K0)
    } else {
        return Ok(None);
    };
    let freq = p.beta * r0.powf(p.sigma1) - p.gamma * r0.powf(p.sigma2);
    let degenerate = freq == 0.0;
    let period = if degenerate {
        f64::INFINITY
    } else {
        2.0 * PI / freq.abs()
    };
    Ok(Some(OrbitParams {
        r0,
        freq,
        period,
        degenerate,
        case,
    }))
}

/// Relative tolerance for the proportionality hypothesis
/// `alpha/a = beta/b = gamma/c`.
pub const PROPORTIONALITY_TOL: f64 = 1e-12;

/// Checks `alpha/a = beta/b = gamma/c` within [`PROPORTIONALITY_TOL`];
/// ratios with a zero denominator coefficient are dropped.
pub fn proportionality_holds(p: &ParamSet) -> bool {
    let mut ratios = vec![p.alpha / p.a];
    if p.b != 0.0 {
        ratios.push(p.beta / p.b);
    }
    if p.c != 0.0 {
        ratios.push(p.gamma / p.c);
    }
    let scale = ratios.iter().fold(0.0f64, |m, r| m.max(r.abs())).max(1.0);
    ratios
        .iter()
        .all(|r| (r - ratios[0]).abs() <= PROPORTIONALITY_TOL * scale)
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub spec_version: u32,
    pub lebesgue_p: f64,
    pub dimension: u32,
    pub domain_volume: Option<f64>,
    pub global_existence: BranchReport,
    pub lp_stable: BranchReport,
    pub lp_asymptotically_stable: BranchReport,
    /// `p = 2` decay on a bounded domain with `k > 0`; requires the volume.
    pub l2_decay_bounded_domain: Option<BranchReport>,
    pub h1_stable: BranchReport,
    pub blow_up_admissible: BranchReport,
    pub periodic_orbit_case: Option<OrbitCase>,
}

impl RegimeReport {
    /// The bounded-domain `p = 2` branch; explicit requests without a domain
    /// volume are an error rather than a silent skip.
    pub fn l2_decay_bounded(&self) -> Result<&BranchReport> {
        self.l2_decay_bounded_domain.as_ref().ok_or_else(|| {
            Error::MissingInput(
                "bounded-domain L2 branch requires domain_volume > 0".into(),
            )
        })
    }
}

/// Evaluates every hypothesis branch for `p`. `domain_volume`
/// enables the bounded-domain branches; `dimension` enters only through the
/// Poincare-type thresholds and the admissible Lebesgue range.
pub fn classify(
    p: &ParamSet,
    lebesgue_p: f64,
    domain_volume: Option<f64>,
    dimension: u32,
) -> Result<RegimeReport> {
    p.validate()?;
    if lebesgue_p < 2.0 {
        return Err(Error::InvalidParams(format!(
            "Lebesgue exponent p = {lebesgue_p} must be >= 2"
        )));
    }
    if dimension < 1 {
        return Err(Error::InvalidParams("dimension must be >= 1".into()));
    }
    if let Some(v) = domain_volume {
        if !(v > 0.0) {
            return Err(Error::InvalidParams(format!(
                "domain_volume = {v} must be > 0"
            )));
        }
    }
    let n = dimension;
    let abs_k = p.k.abs();

    let global_existence = BranchReport::from_conditions(vec![
        cond("sigma1_positive", 0.0, "<", p.sigma1),
        cond("sigma1_below_sigma2", p.sigma1, "<", p.sigma2),
        cond("c_positive", p.c, ">", 0.0),
        cond("alpha_nonzero", p.alpha, "!=", 0.0),
        cond(
            "gamma_over_alpha_nonneg",
            if p.alpha != 0.0 {
                p.gamma / p.alpha
            } else {
                f64::NAN
            },
            ">=",
            0.0,
        ),
    ]);

    // L^p admissible range: [2, 2N/(N-2)] for N > 2, [2, infinity) otherwise
    let p_range = if n > 2 {
        cond("p_within_sobolev_range", lebesgue_p, "<=", 2.0 * n as f64 / (n as f64 - 2.0))
    } else {
        cond("p_within_sobolev_range", lebesgue_p, "<", f64::INFINITY)
    };
    let mut lp_conds = vec![
        cond("sigma1_below_sigma2", p.sigma1, "<", p.sigma2),
        p_range.clone(),
        cond("k_nonpositive", p.k, "<=", 0.0),
        cond("dispersion_vs_diffusion", p.alpha.abs() * (lebesgue_p - 2.0) / 2.0, "<=", p.a),
        cond("focusing_vs_damping", p.b * p.sigma1 / p.sigma2, "<=", p.c),
        cond("focusing_vs_driving", p.b * (p.sigma2 - p.sigma1) / p.sigma2, "<=", abs_k),
    ];
    let lp_stable = BranchReport::from_conditions(lp_conds.clone());
    // asymptotic variant: k strictly negative, last inequality strict
    lp_conds[2] = cond("k_negative", p.k, "<", 0.0);
    lp_conds[5] = cond(
        "focusing_vs_driving_strict",
        p.b * (p.sigma2 - p.sigma1) / p.sigma2,
        "<",
        abs_k,
    );
    let lp_asymptotically_stable = BranchReport::from_conditions(lp_conds);

    let poincare_threshold = domain_volume
        .map(|v| (v / unit_ball_volume(n)).powf(-2.0 / n as f64));
    let l2_decay_bounded_domain = poincare_threshold.map(|thr| {
        BranchReport::from_conditions(vec![
            cond("sigma1_below_sigma2", p.sigma1, "<", p.sigma2),
            cond("k_positive", p.k, ">", 0.0),
            cond("focusing_vs_damping", p.b * p.sigma1 / p.sigma2, "<=", p.c),
            cond(
                "driven_growth_below_poincare",
                p.b.max(0.0) * (p.sigma2 - p.sigma1) / p.sigma2 + p.k,
                "<",
                p.a * thr,
            ),
        ])
    });

    let prop_ok = proportionality_holds(p);
    let mut h1_conds = vec![
        cond("sigma1_below_sigma2", p.sigma1, "<", p.sigma2),
        Condition {
            name: "proportionality".into(),
            satisfied: prop_ok,
            lhs: p.alpha / p.a,
            rhs: if p.b != 0.0 { p.beta / p.b } else { p.alpha / p.a },
            relation: "==".into(),
            strict: false,
        },
        cond(
            "potential_focusing_vs_damping",
            p.b / (p.sigma1 + 2.0) * p.sigma1 / p.sigma2,
            "<=",
            p.c / (p.sigma2 + 2.0),
        ),
    ];
    if p.k < 0.0 {
        h1_conds.push(cond("k_negative", p.k, "<", 0.0));
        h1_conds.push(cond(
            "focusing_vs_half_driving",
            p.b * (p.sigma2 - p.sigma1) / p.sigma2,
            "<=",
            abs_k / 2.0,
        ));
        h1_conds.push(cond(
            "focusing_below_damping_and_driving",
            p.b * (p.sigma1 + 1.0),
            "<",
            p.c.min(abs_k),
        ));
    } else if p.k == 0.0 {
        if let Some(thr) = poincare_threshold {
            h1_conds.push(cond(
                "focusing_below_damping_and_poincare",
                p.b * (p.sigma1 + 1.0),
                "<",
                p.c.min(thr),
            ));
        } else {
            h1_conds.push(Condition {
                name: "bounded_domain_volume_provided".into(),
                satisfied: false,
                lhs: f64::NAN,
                rhs: 0.0,
                relation: ">".into(),
                strict: false,
            });
        }
    } else {
        h1_conds.push(cond("k_nonpositive", p.k, "<=", 0.0));
    }
    let h1_stable = BranchReport::from_conditions(h1_conds);

    // blow-up admissibility of the energy criterion: k >= 0, and either the
    // second power is not damping (c <= 0, i.e. nu <= 0) or sigma2 <= sigma1
    let mut bu = vec![cond("k_nonnegative", p.k, ">=", 0.0)];
    if p.c <= 0.0 {
        bu.push(cond("nu_nonpositive", p.c, "<=", 0.0));
    } else {
        bu.push(cond("sigma2_at_most_sigma1", p.sigma2, "<=", p.sigma1));
    }
    let blow_up_admissible = BranchReport::from_conditions(bu);

    let periodic_orbit_case = periodic_orbit_params(p)?.map(|o| o.case);

    Ok(RegimeReport {
        spec_version: 1,
        lebesgue_p,
        dimension,
        domain_volume,
        global_existence,
        lp_stable,
        lp_asymptotically_stable,
        l2_decay_bounded_domain,
        h1_stable,
        blow_up_admissible,
        periodic_orbit_case,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupEnergy {
    pub energy: f64,
    /// Whether the energy criterion applies: `nu <= 0`, or `nu > 0` with
    /// `sigma2 <= sigma1`. (`k >= 0` is part of the equation form and is the
    /// caller's responsibility; it does not enter the functional.)
    pub hypotheses_hold: bool,
}

/// Energy `E(u0) = int( |grad u0|^2/2 - |u0|^{s1+2}/(s1+2) + nu |u0|^{s2+2}/(s2+2) )`.
/// Negative energy certifies finite-time blow-up for the damped equation
/// `u_t = e^{i theta}[Lap u + |u|^{s1}u - nu|u|^{s2}u] + ku` with `k >= 0`.
pub fn blowup_energy(
    u0: &Field,
    theta: f64,
    nu: f64,
    sigma1: f64,
    sigma2: f64,
) -> Result<BlowupEnergy> {
    if u0.bc() != BoundaryCondition::Dirichlet {
        return Err(Error::InvalidParams(
            "blow-up energy is defined for Dirichlet fields".into(),
        ));
    }
    if !(theta.abs() < PI / 2.0) {
        return Err(Error::InvalidParams(format!(
            "theta = {theta} must satisfy |theta| < pi/2"
        )));
    }
    if !(sigma1 > 0.0) || !(sigma2 > 0.0) {
        return Err(Error::InvalidParams("sigma exponents must be > 0".into()));
    }
    let energy = 0.5 * u0.grad_sq() - u0.norm_lp_pow(sigma1 + 2.0) / (sigma1 + 2.0)
        + nu * u0.norm_lp_pow(sigma2 + 2.0) / (sigma2 + 2.0);
    let hypotheses_hold = nu <= 0.0 || sigma2 <= sigma1;
    Ok(BlowupEnergy {
        energy,
        hypotheses_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::C64;
    use approx::assert_relative_eq;

    fn base() -> ParamSet {
        ParamSet {
            a: 1.0,
            alpha: 0.0,
            b: 1.0,
            beta: 0.0,
            c: 1.0,
            gamma: 0.0,
            k: 0.0,
            sigma1: 2.0,
            sigma2: 4.0,
        }
    }

    #[test]
    fn trig_form_examples() {
        let f = to_trig_form(&base()).unwrap();
        assert_eq!(f.trig.theta, 0.0);
        assert_eq!(f.trig.gamma1, 0.0);
        assert_eq!(f.trig.chi, -1);
        assert_eq!(f.trig.gamma2, 0.0);
        assert_eq!(f.moduli, (1.0, 1.0, 1.0));
        assert!(f.exact_equivalence);

        let f = to_trig_form(&ParamSet {
            alpha: 1.0,
            ..base()
        })
        .unwrap();
        assert_relative_eq!(f.trig.theta, PI / 4.0);
        assert_relative_eq!(f.moduli.0, 2f64.sqrt());
        assert!(!f.exact_equivalence);

        let f = to_trig_form(&ParamSet {
            b: 0.0,
            beta: 1.0,
            ..base()
        })
        .unwrap();
        assert_relative_eq!(f.trig.gamma1, PI / 2.0);
    }

    #[test]
    fn trig_form_rejects_zero_pairs() {
        assert!(matches!(
            to_trig_form(&ParamSet {
                b: 0.0,
                ..base()
            }),
            Err(Error::ConversionUndefined(_))
        ));
        assert!(matches!(
            to_trig_form(&ParamSet {
                c: 0.0,
                ..base()
            }),
            Err(Error::ConversionUndefined(_))
        ));
    }

    #[test]
    fn trig_form_round_trip() {
        let p = ParamSet {
            a: 0.7,
            alpha: -1.3,
            b: 0.2,
            beta: 0.9,
            c: -0.4,
            gamma: 1.1,
            k: 0.3,
            sigma1: 1.5,
            sigma2: 3.0,
        };
        let f = to_trig_form(&p).unwrap();
        let t = f.trig;
        let rebuild = [
            (f.moduli.0 * t.theta.cos(), f.moduli.0 * t.theta.sin(), p.a, p.alpha),
            (f.moduli.1 * t.gamma1.cos(), f.moduli.1 * t.gamma1.sin(), p.b, p.beta),
            // the damping pair carries the explicit minus sign:
            // -(c + i gamma) = chi |.| e^{i gamma2} with chi = -1
            (f.moduli.2 * t.gamma2.cos(), f.moduli.2 * t.gamma2.sin(), p.c, p.gamma),
        ];
        for (re, im, want_re, want_im) in rebuild {
            assert_relative_eq!(re, want_re, max_relative = 1e-14);
            assert_relative_eq!(im, want_im, max_relative = 1e-14);
        }
    }

    #[test]
    fn global_existence_examples() {
        let ok = ParamSet {
            alpha: 1.0,
            gamma: 0.0,
            sigma1: 1.0,
            sigma2: 2.0,
            ..base()
        };
        let r = classify(&ok, 2.0, None, 1).unwrap();
        assert!(r.global_existence.satisfied);

        let bad = ParamSet { alpha: 0.0, ..ok };
        let r = classify(&bad, 2.0, None, 1).unwrap();
        assert!(!r.global_existence.satisfied);
        assert!(r.global_existence.failed.contains(&"alpha_nonzero".to_string()));
    }

    #[test]
    fn h1_stable_worked_example() {
        let p = ParamSet {
            a: 1.0,
            alpha: 0.5,
            b: 0.1,
            beta: 0.05,
            c: 1.0,
            gamma: 0.5,
            k: -1.0,
            sigma1: 1.0,
            sigma2: 2.0,
        };
        assert!(proportionality_holds(&p));
        let r = classify(&p, 2.0, None, 1).unwrap();
        assert!(r.h1_stable.satisfied, "failed: {:?}", r.h1_stable.failed);
        let get = |name: &str| {
            r.h1_stable
                .conditions
                .iter()
                .find(|c| c.name == name)
                .unwrap()
        };
        let c = get("focusing_below_damping_and_driving");
        assert_relative_eq!(c.lhs, 0.2);
        assert_relative_eq!(c.rhs, 1.0);
        let c = get("focusing_vs_half_driving");
        assert_relative_eq!(c.lhs, 0.05);
        assert_relative_eq!(c.rhs, 0.5);
        let c = get("potential_focusing_vs_damping");
        assert_relative_eq!(c.lhs, 0.1 / 6.0);
        assert_relative_eq!(c.rhs, 0.25);
        assert!(r.global_existence.satisfied);
        assert!(r.lp_stable.satisfied);
        assert!(r.lp_asymptotically_stable.satisfied);
    }

    #[test]
    fn bounded_branch_requires_volume() {
        let r = classify(&base(), 2.0, None, 1).unwrap();
        assert!(matches!(
            r.l2_decay_bounded(),
            Err(Error::MissingInput(_))
        ));
        let r = classify(&base(), 2.0, Some(1.0), 1).unwrap();
        assert!(r.l2_decay_bounded().is_ok());
    }

    #[test]
    fn classify_scale_consistency() {
        // the b/c ratio conditions are invariant under scaling (b, beta) and
        // (c, gamma) by the same positive constant
        let p = ParamSet {
            b: 0.3,
            beta: 0.1,
            c: 0.5,
            gamma: 0.2,
            k: -0.4,
            sigma1: 1.0,
            sigma2: 3.0,
            ..base()
        };
        for s in [0.1, 2.0, 17.0] {
            let q = ParamSet {
                b: s * p.b,
                beta: s * p.beta,
                c: s * p.c,
                gamma: s * p.gamma,
                ..p
            };
            let rp = classify(&p, 2.0, None, 1).unwrap();
            let rq = classify(&q, 2.0, None, 1).unwrap();
            for name in ["focusing_vs_damping"] {
                let f = |r: &RegimeReport| {
                    r.lp_stable
                        .conditions
                        .iter()
                        .find(|c| c.name == name)
                        .unwrap()
                        .satisfied
                };
                assert_eq!(f(&rp), f(&rq), "scale {s} broke {name}");
            }
            let g = |r: &RegimeReport| {
                r.h1_stable
                    .conditions
                    .iter()
                    .find(|c| c.name == "potential_focusing_vs_damping")
                    .unwrap()
                    .satisfied
            };
            assert_eq!(g(&rp), g(&rq));
        }
    }

    #[test]
    fn periodic_orbit_examples() {
        let p1 = ParamSet {
            b: -1.0,
            k: 1.0,
            c: 0.0,
            beta: 1.0,
            gamma: 0.0,
            sigma1: 2.0,
            ..base()
        };
        let o = periodic_orbit_params(&p1).unwrap().unwrap();
        assert_eq!(o.case, OrbitCase::Case1C0);
        assert_relative_eq!(o.r0, 1.0);
        assert_relative_eq!(o.freq, 1.0);
        assert_relative_eq!(o.period, 2.0 * PI);

        let p2 = ParamSet {
            b: 1.0,
            c: 1.0,
            k: 0.0,
            beta: 2.0,
            gamma: 1.0,
            sigma1: 1.0,
            sigma2: 3.0,
            ..base()
        };
        let o = periodic_orbit_params(&p2).unwrap().unwrap();
        assert_eq!(o.case, OrbitCase::Case2K0);
        assert_relative_eq!(o.r0, 1.0);
        assert_relative_eq!(o.freq, 1.0);

        let p3 = ParamSet {
            b: 2.0,
            c: 1.0,
            k: 0.0,
            sigma1: 1.0,
            sigma2: 2.0,
            ..base()
        };
        let o = periodic_orbit_params(&p3).unwrap().unwrap();
        assert_relative_eq!(o.r0, 2.0);

        // defining equation residual
        for p in [p1, p2, p3] {
            let o = periodic_orbit_params(&p).unwrap().unwrap();
            let res = p.b * o.r0.powf(p.sigma1) - p.c * o.r0.powf(p.sigma2) + p.k;
            assert!(res.abs() < 1e-12 * p.k.abs().max(1.0));
        }

        // c and k both nonzero: neither case applies
        assert!(periodic_orbit_params(&ParamSet { k: 1.0, ..base() })
            .unwrap()
            .is_none());
    }

    #[test]
    fn degenerate_orbit_flagged() {
        let p = ParamSet {
            b: -1.0,
            k: 1.0,
            c: 0.0,
            beta: 0.0,
            gamma: 0.0,
            sigma1: 2.0,
            ..base()
        };
        let o = periodic_orbit_params(&p).unwrap().unwrap();
        assert!(o.degenerate);
        assert!(o.period.is_infinite());
    }

    #[test]
    fn blowup_energy_examples() {
        let g = Grid::interval(0.0, 1.0, 2001).unwrap();
        let zero = Field::zeros(g, BoundaryCondition::Dirichlet);
        assert_eq!(
            blowup_energy(&zero, 0.0, 0.0, 2.0, 4.0).unwrap().energy,
            0.0
        );

        let u = Field::from_real_fn(g, BoundaryCondition::Dirichlet, |x, _| {
            6.0 * (PI * x).sin()
        });
        let e = blowup_energy(&u, 0.0, 0.0, 2.0, 4.0).unwrap();
        let exact = 9.0 * PI * PI - 121.5;
        assert!((e.energy - exact).abs() < 1e-3, "E = {}", e.energy);
        assert!(e.energy < 0.0);
        assert!(e.hypotheses_hold);

        let small = u.scale(C64::new(1e-3 / 6.0, 0.0));
        let e = blowup_energy(&small, 0.0, 0.0, 2.0, 4.0).unwrap();
        assert!(e.energy > 0.0);
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert_eq!(unit_ball_volume(2), PI);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0);
        assert_relative_eq!(unit_ball_volume(4), PI * PI / 2.0, max_relative = 1e-14);
    }
}
