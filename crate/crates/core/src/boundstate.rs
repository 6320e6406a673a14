//! Explicit 1D bound-states `u = e^{i omega t} phi(x)` on the (truncated)
//! real line: the phase parameter d, the angles gamma_j, the reduced NLS
//! coefficients (epsilon, eta_j), the positive even profile psi, the complex
//! assembly `phi = psi exp(i d ln psi)`, and the residual of the stationary
//! equation.
//!
//! The stationary equation used for the residual is the elliptic form
//! `i omega phi = e^{i theta} phi'' + e^{i gamma1}|phi|^{s1} phi
//!  + chi e^{i gamma2}|phi|^{s2} phi + k phi`
//! rewritten as
//! `phi'' = omega e^{i tt} phi + i k e^{i tt} phi - e^{i tg1}|phi|^{s1} phi
//!  - chi e^{i tg2}|phi|^{s2} phi`
//! with tt = pi/2 - theta, tg_j = gamma_j - theta. (A published restatement
//! carries the chi term with the opposite sign; the sign used here is forced
//! by the elliptic form and by the profile equation below.)

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{pow_abs, Grid};
use crate::ode;
use crate::C64;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundStateSpec {
    pub theta: f64,
    pub omega: f64,
    pub k: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub chi: i32,
}

impl BoundStateSpec {
    pub fn new(theta: f64, omega: f64, k: f64, sigma1: f64, sigma2: f64, chi: i32) -> Result<Self> {
        if !(theta.abs() < PI / 2.0) {
            return Err(Error::InvalidParams(format!(
                "theta = {theta} must satisfy |theta| < pi/2"
            )));
        }
        if !(sigma1 > 0.0) || !(sigma2 > 0.0) {
            return Err(Error::InvalidParams("sigma exponents must be > 0".into()));
        }
        if chi * chi != 1 {
            return Err(Error::InvalidParams(format!("chi = {chi} must be +1 or -1")));
        }
        let s = Self {
            theta,
            omega,
            k,
            sigma1,
            sigma2,
            chi,
        };
        if s.denominator() == 0.0 {
            return Err(Error::Hypothesis(
                "omega cos(theta) + k sin(theta) = 0".into(),
            ));
        }
        Ok(s)
    }

    fn denominator(&self) -> f64 {
        self.omega * self.theta.cos() + self.k * self.theta.sin()
    }
}

/// Coefficients of the reduced real profile equation
/// `psi'' = eps psi - eta1 psi^{s1+1} - chi eta2 psi^{s2+1}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NlsCoeffs {
    pub d: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub epsilon: f64,
    pub eta1: f64,
    pub eta2: f64,
}

/// `d = (k cos t - w sin t + sqrt(w^2 + k^2)) / (w cos t + k sin t)`; the
/// "+" square root is the branch that makes epsilon positive.
pub fn compute_d(spec: &BoundStateSpec) -> Result<f64> {
    let den = spec.denominator();
    if den == 0.0 {
        return Err(Error::Hypothesis(
            "omega cos(theta) + k sin(theta) = 0".into(),
        ));
    }
    let num = spec.k * spec.theta.cos() - spec.omega * spec.theta.sin()
        + spec.omega.hypot(spec.k);
    Ok(num / den)
}

fn wrap_angle(x: f64) -> f64 {
    let y = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    if y <= -PI {
        PI
    } else {
        y
    }
}

/// The unique angle in (-pi, pi] with
/// `tan(gamma - theta) = d(sigma+4) / (sigma+2-2d^2)` and
/// `d sin(gamma-theta) + cos(gamma-theta) > 0`: the two-argument arctangent
/// branch, since `d*N + D = (sigma+2)(1+d^2) > 0` for N = d(sigma+4),
/// D = sigma+2-2d^2.
pub fn compute_gamma(d: f64, theta: f64, sigma: f64) -> f64 {
    let n = d * (sigma + 4.0);
    let dd = sigma + 2.0 - 2.0 * d * d;
    wrap_angle(theta + n.atan2(dd))
}

pub fn compute_coeffs(spec: &BoundStateSpec) -> Result<NlsCoeffs> {
    let d = compute_d(spec)?;
    let gamma1 = compute_gamma(d, spec.theta, spec.sigma1);
    let gamma2 = compute_gamma(d, spec.theta, spec.sigma2);
    let epsilon = spec.omega.hypot(spec.k) / (1.0 + d * d);
    if !(epsilon > 0.0) {
        return Err(Error::Hypothesis(format!(
            "epsilon = {epsilon} must be positive (omega = k = 0?)"
        )));
    }
    let eta = |sigma: f64, gamma: f64| -> Result<f64> {
        let n = d * (sigma + 4.0);
        let dd = sigma + 2.0 - 2.0 * d * d;
        let closed = (sigma + 2.0) / n.hypot(dd);
        // cross-check against the direct trigonometric definition
        let direct = (d * (gamma - spec.theta).sin() + (gamma - spec.theta).cos())
            / (1.0 + d * d);
        if (closed - direct).abs() > 1e-12 * closed.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "eta cross-check failed: closed {closed} vs direct {direct}"
            )));
        }
        Ok(closed)
    };
    Ok(NlsCoeffs {
        d,
        gamma1,
        gamma2,
        epsilon,
        eta1: eta(spec.sigma1, gamma1)?,
        eta2: eta(spec.sigma2, gamma2)?,
    })
}

/// `G(z) = -eps + 2 eta1 z^{s1}/(s1+2) + 2 chi eta2 z^{s2}/(s2+2)`; its first
/// positive root is the peak value psi(0), by the first integral at the
/// turning point.
fn peak_function(c: &NlsCoeffs, chi: i32, s1: f64, s2: f64) -> impl Fn(f64) -> f64 + '_ {
    let chi = chi as f64;
    move |z: f64| {
        -c.epsilon + 2.0 * c.eta1 * z.powf(s1) / (s1 + 2.0)
            + 2.0 * chi * c.eta2 * z.powf(s2) / (s2 + 2.0)
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) < 0 <= f(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// First positive root of the peak function.
pub fn peak_value(c: &NlsCoeffs, chi: i32, s1: f64, s2: f64) -> Result<f64> {
    let g = peak_function(c, chi, s1, s2);
    if !(c.eta1 > 0.0) {
        return Err(Error::InvalidParams("eta1 must be > 0".into()));
    }
    if chi == 1 || c.eta2 == 0.0 {
        // G is increasing where positive terms dominate; double an upper bound
        let mut hi = (c.epsilon * (s1 + 2.0) / (2.0 * c.eta1)).powf(1.0 / s1);
        let mut tries = 0;
        while g(hi) < 0.0 {
            hi *= 2.0;
            tries += 1;
            if tries > 200 {
                return Err(Error::NoRoot("peak function stays negative".into()));
            }
        }
        Ok(bisect(g, 0.0, hi))
    } else {
        // chi = -1: G rises then falls; the maximum is at z*
        if s2 <= s1 {
            return Err(Error::InvalidParams(
                "chi = -1 requires sigma1 < sigma2".into(),
            ));
        }
        let zstar = (s1 * c.eta1 * (s2 + 2.0) / (s2 * c.eta2 * (s1 + 2.0)))
            .powf(1.0 / (s2 - s1));
        if g(zstar) <= 0.0 {
            return Err(Error::NoRoot(format!(
                "peak function maximum G({zstar:.6}) = {:.3e} <= 0 (eta2 too large)",
                g(zstar)
            )));
        }
        Ok(bisect(g, 0.0, zstar))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// Whether the peak function has a positive root at all; when false the
    /// parameters are inadmissible for the structural reason that no
    /// turning point exists.
    pub root_found: bool,
    pub z0: Option<f64>,
    /// `s1 eta1 z0^{s1-s2}/(s1+2) - s2 eta2/(s2+2)`
    pub bracket: Option<f64>,
    /// `z0^{s2} * bracket`; admissibility is its positivity
    pub condition_value: Option<f64>,
}

/// Decidable form of the chi = -1 existence condition: positivity of
/// `z0^{s2} [ s1 eta1 z0^{s1-s2}/(s1+2) - s2 eta2/(s2+2) ]` at the first
/// positive root z0 of the peak function.
pub fn admissibility_chi_minus(
    coeffs: &NlsCoeffs,
    sigma1: f64,
    sigma2: f64,
) -> Result<AdmissibilityReport> {
    if !(sigma1 < sigma2) {
        return Err(Error::InvalidParams(
            "admissibility check requires sigma1 < sigma2".into(),
        ));
    }
    match peak_value(coeffs, -1, sigma1, sigma2) {
        Err(Error::NoRoot(_)) => Ok(AdmissibilityReport {
            admissible: false,
            root_found: false,
            z0: None,
            bracket: None,
            condition_value: None,
        }),
        Err(e) => Err(e),
        Ok(z0) => {
            let bracket = sigma1 * coeffs.eta1 * z0.powf(sigma1 - sigma2) / (sigma1 + 2.0)
                - sigma2 * coeffs.eta2 / (sigma2 + 2.0);
            let condition_value = z0.powf(sigma2) * bracket;
            Ok(AdmissibilityReport {
                admissible: condition_value > 0.0,
                root_found: true,
                z0: Some(z0),
                bracket: Some(bracket),
                condition_value: Some(condition_value),
            })
        }
    }
}

/// Positive even profile on a symmetric interval, with its integrated
/// derivative (needed for first-integral checks at tight tolerances).
#[derive(Debug, Clone)]
pub struct Profile {
    pub grid: Grid,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub x0: f64,
    pub coeffs: NlsCoeffs,
    pub chi: i32,
    pub sigma1: f64,
    pub sigma2: f64,
}

/// Truncation length so that `x0 exp(-sqrt(eps) L) < 1e-9` comfortably.
pub fn default_length(epsilon: f64) -> f64 {
    (25.0 / epsilon.sqrt()).max(20.0)
}

/// Integrates the profile equation outward from the turning point with fixed
/// RK4 steps `h = L/n` (Taylor-started), stabilized in the tail by projecting
/// the derivative onto the zero level set of the first integral, then
/// mirrored to (-L, L). A step-halved rerun must agree to 1e-6 * psi(0).
pub fn solve_profile(
    coeffs: &NlsCoeffs,
    chi: i32,
    sigma1: f64,
    sigma2: f64,
    length: f64,
    n: usize,
) -> Result<Profile> {
    if chi * chi != 1 {
        return Err(Error::InvalidParams(format!("chi = {chi} must be +1 or -1")));
    }
    if !(coeffs.epsilon > 0.0) || !(coeffs.eta1 > 0.0) || coeffs.eta2 < 0.0 {
        return Err(Error::InvalidParams(
            "profile solve needs eps > 0, eta1 > 0, eta2 >= 0".into(),
        ));
    }
    if chi == -1 && coeffs.eta2 > 0.0 {
        let adm = admissibility_chi_minus(coeffs, sigma1, sigma2)?;
        if !adm.admissible {
            return Err(Error::Hypothesis(
                "chi = -1 parameters fail the admissibility condition".into(),
            ));
        }
    }
    let x0 = peak_value(coeffs, chi, sigma1, sigma2)?;
    let half = integrate_half(coeffs, chi, sigma1, sigma2, x0, length, n)?;
    let halved = integrate_half(coeffs, chi, sigma1, sigma2, x0, length, 2 * n)?;
    let mut discrepancy = 0.0f64;
    for i in 0..=n {
        discrepancy = discrepancy.max((half.0[i] - halved.0[2 * i]).abs());
    }
    let tolerance = 1e-6 * x0;
    if discrepancy > tolerance {
        return Err(Error::StepSize {
            discrepancy,
            tolerance,
        });
    }

    let grid = Grid::interval(-length, length, 2 * n + 1)?;
    let mut psi = vec![0.0; 2 * n + 1];
    let mut dpsi = vec![0.0; 2 * n + 1];
    for i in 0..=n {
        psi[n + i] = half.0[i];
        psi[n - i] = half.0[i];
        dpsi[n + i] = half.1[i];
        dpsi[n - i] = -half.1[i];
    }
    dpsi[n] = 0.0;
    Ok(Profile {
        grid,
        psi,
        dpsi,
        x0,
        coeffs: *coeffs,
        chi,
        sigma1,
        sigma2,
    })
}

fn integrate_half(
    c: &NlsCoeffs,
    chi: i32,
    s1: f64,
    s2: f64,
    x0: f64,
    length: f64,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let chif = chi as f64;
    let rhs = move |psi: f64| -> f64 {
        c.epsilon * psi - c.eta1 * pow_abs(psi, s1) * psi - chif * c.eta2 * pow_abs(psi, s2) * psi
    };
    let drhs = move |psi: f64| -> f64 {
        c.epsilon
            - c.eta1 * (s1 + 1.0) * pow_abs(psi, s1)
            - chif * c.eta2 * (s2 + 1.0) * pow_abs(psi, s2)
    };
    // (psi')^2 = psi^2 * g(psi) on the zero level set of the first integral
    let gsq = move |psi: f64| -> f64 {
        c.epsilon - 2.0 * c.eta1 * pow_abs(psi, s1) / (s1 + 2.0)
            - 2.0 * chif * c.eta2 * pow_abs(psi, s2) / (s2 + 2.0)
    };
    let sys = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = rhs(y[0]);
    };

    let h = length / n as f64;
    let mut psi = Vec::with_capacity(n + 1);
    let mut dpsi = Vec::with_capacity(n + 1);
    psi.push(x0);
    dpsi.push(0.0);

    // Taylor start through the psi' = 0 turning point: psi'''' (0) = f'(x0) f(x0)
    let f0 = rhs(x0);
    let f40 = drhs(x0) * f0;
    let mut y = vec![
        x0 + 0.5 * f0 * h * h + f40 * h.powi(4) / 24.0,
        f0 * h + f40 * h.powi(3) / 6.0,
    ];
    let tail_switch = 0.1 * x0;
    for i in 1..=n {
        if y[0] < tail_switch && y[1] < 0.0 {
            // past the peak the homoclinic orbit is unstable under forward
            // integration; pin the derivative to the first-integral manifold,
            // where transverse errors contract instead of growing like
            // exp(sqrt(eps) x)
            let g = gsq(y[0]).max(0.0);
            y[1] = -y[0] * g.sqrt();
        }
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::Numerical(format!(
                "profile integration diverged near x = {}",
                i as f64 * h
            )));
        }
        psi.push(y[0]);
        dpsi.push(y[1]);
        if i < n {
            y = ode::rk4_step(&sys, i as f64 * h, &y, h);
            if y[0] < 1e-305 {
                y[0] = 1e-305;
                y[1] = -y[0] * c.epsilon.sqrt();
            }
        }
    }
    Ok((psi, dpsi))
}

impl Profile {
    /// First integral
    /// `H = (psi')^2 - eps psi^2 + 2 eta1 psi^{s1+2}/(s1+2) + 2 chi eta2 psi^{s2+2}/(s2+2)`,
    /// identically zero on the homoclinic orbit.
    pub fn first_integral(&self, i: usize) -> f64 {
        let c = &self.coeffs;
        let p = self.psi[i];
        let dp = self.dpsi[i];
        dp * dp - c.epsilon * p * p
            + 2.0 * c.eta1 * pow_abs(p, self.sigma1) * p * p / (self.sigma1 + 2.0)
            + 2.0 * self.chi as f64 * c.eta2 * pow_abs(p, self.sigma2) * p * p
                / (self.sigma2 + 2.0)
    }

    pub fn max_first_integral(&self) -> f64 {
        (0..self.psi.len())
            .map(|i| self.first_integral(i).abs())
            .fold(0.0, f64::max)
    }

    /// Log-slope of psi over the last decade above `floor`, for comparison
    /// against the linearized decay rate `-sqrt(eps)`.
    pub fn tail_log_slope(&self, floor: f64) -> Option<f64> {
        let n = self.psi.len();
        let mid = n / 2;
        let lo = self.psi[n - 1].max(floor) * 10.0;
        let hi = lo * 10.0;
        let mut first = None;
        let mut last = None;
        for i in mid..n {
            if self.psi[i] <= hi && self.psi[i] >= lo {
                if first.is_none() {
                    first = Some(i);
                }
                last = Some(i);
            }
        }
        let (i0, i1) = (first?, last?);
        if i1 <= i0 {
            return None;
        }
        let h = self.grid.hx();
        Some((self.psi[i1].ln() - self.psi[i0].ln()) / ((i1 - i0) as f64 * h))
    }

    pub fn is_strictly_decreasing_right(&self) -> bool {
        let n = self.psi.len();
        let mid = n / 2;
        self.psi[mid..].windows(2).all(|w| w[1] < w[0])
    }
}

#[derive(Debug, Clone)]
pub struct BoundState {
    pub grid: Grid,
    pub phi: Vec<C64>,
    pub coeffs: NlsCoeffs,
    pub chi: i32,
    pub sigma1: f64,
    pub sigma2: f64,
}

/// `phi = psi exp(i d ln psi)`, with phi = 0 where psi underflows below
/// 1e-300 (the continuous extension, since |phi| = psi -> 0).
pub fn assemble(profile: &Profile, d: f64) -> BoundState {
    let phi = profile
        .psi
        .iter()
        .map(|&p| {
            if p < 1e-300 {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar(p, d * p.ln())
            }
        })
        .collect();
    BoundState {
        grid: profile.grid,
        phi,
        coeffs: profile.coeffs,
        chi: profile.chi,
        sigma1: profile.sigma1,
        sigma2: profile.sigma2,
    }
}

/// Discrete L2 residual of the stationary equation in the form
/// `phi'' - omega e^{i tt} phi - i k e^{i tt} phi + e^{i tg1}|phi|^{s1} phi
///  + chi e^{i tg2}|phi|^{s2} phi = 0`,
/// evaluated on interior nodes where |phi| is above the underflow floor.
pub fn residual_bs(bs: &BoundState, spec: &BoundStateSpec) -> f64 {
    let tt = PI / 2.0 - spec.theta;
    let tg1 = bs.coeffs.gamma1 - spec.theta;
    let tg2 = bs.coeffs.gamma2 - spec.theta;
    let e_tt = C64::from_polar(1.0, tt);
    let e_g1 = C64::from_polar(1.0, tg1);
    let e_g2 = C64::from_polar(1.0, tg2);
    let chi = bs.chi as f64;
    let h = bs.grid.hx();
    let n = bs.phi.len();
    let mut acc = 0.0;
    for i in 1..n - 1 {
        let p = bs.phi[i];
        let m = p.norm();
        if m < 1e-250 {
            continue;
        }
        let d2 = (bs.phi[i - 1] - 2.0 * p + bs.phi[i + 1]) / (h * h);
        let r = d2 - spec.omega * e_tt * p - C64::new(0.0, spec.k) * e_tt * p
            + e_g1 * pow_abs(m, spec.sigma1) * p
            + chi * e_g2 * pow_abs(m, spec.sigma2) * p;
        acc += h * r.norm_sqr();
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec_basic() -> BoundStateSpec {
        BoundStateSpec::new(0.0, 1.0, 0.0, 2.0, 4.0, 1).unwrap()
    }

    #[test]
    fn d_examples() {
        assert_relative_eq!(compute_d(&spec_basic()).unwrap(), 1.0);
        let s = BoundStateSpec::new(PI / 4.0, 1.0, 1.0, 2.0, 4.0, 1).unwrap();
        assert_relative_eq!(compute_d(&s).unwrap(), 1.0, max_relative = 1e-14);
        assert!(matches!(
            BoundStateSpec::new(0.0, 0.0, 1.0, 2.0, 4.0, 1),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn gamma_examples() {
        assert_relative_eq!(compute_gamma(1.0, 0.0, 2.0), 3.0f64.atan());
        assert_relative_eq!(compute_gamma(1.0, 0.0, 4.0), 2.0f64.atan());
        assert_relative_eq!(compute_gamma(2.0f64.sqrt(), 0.0, 2.0), PI / 2.0);
    }

    #[test]
    fn coeff_examples() {
        let c = compute_coeffs(&spec_basic()).unwrap();
        assert_relative_eq!(c.epsilon, 0.5);
        assert_relative_eq!(c.eta1, 2.0 / 10f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(c.eta2, 6.0 / 80f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn sign_condition_identity() {
        for d in [-3.0, -0.5, 0.0, 0.7, 1.0, 2.0f64.sqrt(), 5.0] {
            for sigma in [0.5, 1.0, 2.0, 4.0] {
                for theta in [0.0, 0.4, -1.1] {
                    let g = compute_gamma(d, theta, sigma);
                    let lhs = d * (g - theta).sin() + (g - theta).cos();
                    let n = d * (sigma + 4.0);
                    let dd = sigma + 2.0 - 2.0 * d * d;
                    let rhs = (sigma + 2.0) * (1.0 + d * d) / n.hypot(dd);
                    assert!(lhs > 0.0);
                    assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn admissibility_examples() {
        let c = NlsCoeffs {
            d: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            epsilon: 1.0,
            eta1: 1.0,
            eta2: 0.0,
        };
        let r = admissibility_chi_minus(&c, 2.0, 4.0).unwrap();
        assert!(r.admissible);
        assert_relative_eq!(r.z0.unwrap(), 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(r.bracket.unwrap(), 0.25, max_relative = 1e-10);

        let r = admissibility_chi_minus(&NlsCoeffs { eta2: 0.01, ..c }, 2.0, 4.0).unwrap();
        assert!(r.admissible);

        let r = admissibility_chi_minus(&NlsCoeffs { eta2: 10.0, ..c }, 2.0, 4.0).unwrap();
        assert!(!r.admissible);
        assert!(!r.root_found);
    }

    fn sech_coeffs(eps: f64) -> NlsCoeffs {
        NlsCoeffs {
            d: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            epsilon: eps,
            eta1: 1.0,
            eta2: 0.0,
        }
    }

    #[test]
    fn sech_oracle() {
        let p = solve_profile(&sech_coeffs(1.0), 1, 2.0, 4.0, 10.0, 4096).unwrap();
        assert_relative_eq!(p.x0, 2f64.sqrt(), max_relative = 1e-12);
        let mut max_err = 0.0f64;
        for (i, &v) in p.psi.iter().enumerate() {
            let (x, _) = p.grid.coords(i);
            let exact = 2f64.sqrt() / x.cosh();
            max_err = max_err.max((v - exact).abs());
        }
        assert!(max_err < 1e-8, "max error {max_err}");
        let (x1, _) = p.grid.coords(0);
        assert_relative_eq!(x1, -10.0);
    }

    #[test]
    fn sech_scaling_oracle() {
        let p = solve_profile(&sech_coeffs(4.0), 1, 2.0, 4.0, 10.0, 4096).unwrap();
        let n = p.psi.len();
        for i in (0..n).step_by(512) {
            let (x, _) = p.grid.coords(i);
            let exact = 2.0 * 2f64.sqrt() / (2.0 * x).cosh();
            assert!((p.psi[i] - exact).abs() < 1e-7, "x = {x}");
        }
    }

    #[test]
    fn two_power_peak_value() {
        let c = NlsCoeffs {
            d: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            epsilon: 1.0,
            eta1: 1.0,
            eta2: 1.0,
        };
        let x0 = peak_value(&c, 1, 2.0, 4.0).unwrap();
        assert_relative_eq!(x0, 1.0665171, max_relative = 1e-6);
        // t = x0^2 solves t^2/3 + t/2 - 1 = 0
        let t = x0 * x0;
        assert!((t * t / 3.0 + t / 2.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_integral_and_decay() {
        let spec = spec_basic();
        let c = compute_coeffs(&spec).unwrap();
        let length = default_length(c.epsilon);
        let p = solve_profile(&c, 1, spec.sigma1, spec.sigma2, length, 4096).unwrap();
        let scale = (c.epsilon * p.x0 * p.x0).max(1.0);
        assert!(p.max_first_integral() < 1e-8 * scale);
        assert!(p.is_strictly_decreasing_right());
        let slope = p.tail_log_slope(1e-300).unwrap();
        assert_relative_eq!(slope, -c.epsilon.sqrt(), max_relative = 0.01);
    }

    #[test]
    fn assemble_examples() {
        let p = solve_profile(&sech_coeffs(1.0), 1, 2.0, 4.0, 10.0, 1024).unwrap();
        let bs0 = assemble(&p, 0.0);
        assert!(bs0.phi.iter().all(|z| z.im == 0.0));
        let bs1 = assemble(&p, 1.0);
        let mid = p.psi.len() / 2;
        assert_relative_eq!(bs1.phi[mid].norm(), 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(bs1.phi[mid].arg(), 0.5 * 2f64.ln(), max_relative = 1e-9);
    }

    #[test]
    fn residual_zero_field() {
        let p = solve_profile(&sech_coeffs(1.0), 1, 2.0, 4.0, 10.0, 256).unwrap();
        let mut bs = assemble(&p, 0.0);
        for z in &mut bs.phi {
            *z = C64::new(0.0, 0.0);
        }
        assert_eq!(residual_bs(&bs, &spec_basic()), 0.0);
    }

    #[test]
    fn residual_converges_second_order() {
        let spec = spec_basic();
        let c = compute_coeffs(&spec).unwrap();
        let mut res = Vec::new();
        for n in [1024, 2048] {
            let p = solve_profile(&c, 1, spec.sigma1, spec.sigma2, 20.0, n).unwrap();
            let bs = assemble(&p, c.d);
            res.push(residual_bs(&bs, &spec));
        }
        let order = (res[0] / res[1]).log2();
        assert!(order >= 1.9, "order {order}, residuals {res:?}");
    }
}
