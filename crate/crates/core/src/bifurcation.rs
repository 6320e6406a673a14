//! Lyapunov-Schmidt bifurcation from a double Dirichlet eigenvalue on the
//! square: the branching polynomial P(alpha) and its roots, the inner
//! fixed-point solve for the orthogonal remainder y, the outer Newton solve
//! for (lambda, alpha), branch continuation in eps, and the leading-order
//! asymptotic check for lambda(eps).

use serde::Serialize;

use crate::eigen::{eigenbasis, EigenBasis};
use crate::error::{Error, Result};
use crate::grid::{pow_abs, BoundaryCondition, Field, Grid};
use crate::C64;

/// Two orthonormal real eigenfunctions spanning a double eigenvalue of the
/// Dirichlet Laplacian.
#[derive(Debug, Clone)]
pub struct DoubleEigenpair {
    pub lambda0: f64,
    pub u1: Field,
    pub u2: Field,
}

const ORTHO_TOL: f64 = 1e-10;

impl DoubleEigenpair {
    pub fn new(lambda0: f64, u1: Field, u2: Field) -> Result<Self> {
        u1.check_compatible(&u2)?;
        for u in [&u1, &u2] {
            if (u.norm_l2_sq() - 1.0).abs() > ORTHO_TOL {
                return Err(Error::InvalidParams(
                    "eigenfunctions must be L2-normalized".into(),
                ));
            }
        }
        if u1.inner(&u2)?.norm() > ORTHO_TOL {
            return Err(Error::InvalidParams(
                "eigenfunctions must be L2-orthogonal".into(),
            ));
        }
        Ok(DoubleEigenpair { lambda0, u1, u2 })
    }
}

/// The canonical double pair on the square (-1,1)^2: eigenvalue 5 pi^2 / 4
/// with mode indices (1,2) and (2,1).
pub fn square_pair(n: usize) -> Result<DoubleEigenpair> {
    square_pair_impl(n, false)
}

/// Same eigenspace with the two eigenfunctions interchanged; running both
/// orderings realizes the extra branches obtained by permutation.
pub fn square_pair_swapped(n: usize) -> Result<DoubleEigenpair> {
    square_pair_impl(n, true)
}

fn square_pair_impl(n: usize, swapped: bool) -> Result<DoubleEigenpair> {
    let grid = Grid::rectangle(-1.0, 1.0, -1.0, 1.0, n, n)?;
    let basis = eigenbasis(grid, BoundaryCondition::Dirichlet, 3)?;
    let (m1, m2) = (&basis.modes[1], &basis.modes[2]);
    debug_assert_eq!(m1.index, (1, 2));
    debug_assert_eq!(m2.index, (2, 1));
    debug_assert!((m1.eigenvalue - m2.eigenvalue).abs() < 1e-12);
    let (i1, i2) = if swapped { (2, 1) } else { (1, 2) };
    DoubleEigenpair::new(m1.eigenvalue, basis.mode_field(i1), basis.mode_field(i2))
}

/// Trigonometric-form coefficients of the operators in the stationary
/// equation `lambda u - L u + M u = 0`, `L = -e^{i theta} Lap`,
/// `M u = e^{i gamma1}|u|^{sigma1} u + chi e^{i gamma2}|u|^{sigma2} u`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrigCoeffs {
    pub theta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub chi: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl TrigCoeffs {
    /// The Lipschitz estimates behind the solver require
    /// `2 <= sigma1 + 1 <= sigma2` (no upper constraint in dimension 2);
    /// `allow_low_sigma` overrides the lower bound for exploratory runs.
    pub fn validate(&self, allow_low_sigma: bool) -> Result<()> {
        if !(self.sigma1 > 0.0 && self.sigma2 > 0.0) {
            return Err(Error::InvalidParams("sigma1, sigma2 must be > 0".into()));
        }
        if self.chi * self.chi != 1.0 {
            return Err(Error::InvalidParams("chi must be +1 or -1".into()));
        }
        if !allow_low_sigma && !(self.sigma1 >= 1.0 && self.sigma1 + 1.0 <= self.sigma2) {
            return Err(Error::Hypothesis(format!(
                "solver convergence requires 2 <= sigma1 + 1 <= sigma2 (got sigma1 = {}, sigma2 = {})",
                self.sigma1, self.sigma2
            )));
        }
        Ok(())
    }

    fn apply_m(&self, u: &Field) -> Field {
        let e1 = C64::from_polar(1.0, self.gamma1);
        let e2 = C64::from_polar(self.chi, self.gamma2);
        u.map(|z| {
            let r = z.norm();
            (e1 * pow_abs(r, self.sigma1) + e2 * pow_abs(r, self.sigma2)) * z
        })
    }
}

/// `P(alpha) = int |u1 + alpha u2|^{sigma1} (u1 + alpha u2)(alpha u1 - u2)`.
/// The second factor carries alpha, not its conjugate, matching the
/// branching equation after the conjugation of the inner product.
pub fn eval_p(pair: &DoubleEigenpair, alpha: C64, sigma1: f64) -> C64 {
    let grid = pair.u1.grid();
    let (v1, v2) = (pair.u1.values(), pair.u2.values());
    let mut s = C64::new(0.0, 0.0);
    for idx in 0..v1.len() {
        let w = v1[idx] + alpha * v2[idx];
        let factor = alpha * v1[idx] - v2[idx];
        s += grid.quad_weight(idx) * pow_abs(w.norm(), sigma1) * w * factor;
    }
    s
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PRoot {
    pub alpha0: C64,
    /// Central-difference complex derivative along the real direction.
    pub p_prime: C64,
    /// Nondegeneracy of the real 2x2 Jacobian (min singular value > 1e-6).
    /// P is not holomorphic for non-integer sigma1, so simplicity is judged
    /// on the real Jacobian rather than a complex derivative.
    pub simple: bool,
}

const P_FD_STEP: f64 = 1e-6;
const P_ROOT_TOL: f64 = 1e-10;
const P_SIMPLE_TOL: f64 = 1e-6;

fn p_jacobian(pair: &DoubleEigenpair, alpha: C64, sigma1: f64) -> [[f64; 2]; 2] {
    let h = P_FD_STEP;
    let dre = (eval_p(pair, alpha + C64::new(h, 0.0), sigma1)
        - eval_p(pair, alpha - C64::new(h, 0.0), sigma1))
        / (2.0 * h);
    let dim = (eval_p(pair, alpha + C64::new(0.0, h), sigma1)
        - eval_p(pair, alpha - C64::new(0.0, h), sigma1))
        / (2.0 * h);
    [[dre.re, dim.re], [dre.im, dim.im]]
}

fn min_singular_value(j: &[[f64; 2]; 2]) -> f64 {
    // singular values of a real 2x2 from the eigenvalues of J^T J
    let p = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    let q = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    let r = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    let mid = 0.5 * (p + q);
    let rad = (0.25 * (p - q) * (p - q) + r * r).sqrt();
    (mid - rad).max(0.0).sqrt()
}

/// Newton searches from a 9x9 grid of complex starts in [-2,2]^2,
/// deduplicated; roots are accepted when |P| < 1e-10.
pub fn find_roots_p(pair: &DoubleEigenpair, sigma1: f64) -> Vec<PRoot> {
    let mut roots: Vec<PRoot> = Vec::new();
    for i in 0..9 {
        for j in 0..9 {
            let mut alpha = C64::new(-2.0 + i as f64 * 0.5, -2.0 + j as f64 * 0.5);
            let mut ok = false;
            for _ in 0..60 {
                let f = eval_p(pair, alpha, sigma1);
                if f.norm() < 1e-12 {
                    ok = true;
                    break;
                }
                let jac = p_jacobian(pair, alpha, sigma1);
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                if det.abs() < 1e-14 {
                    break;
                }
                let dx = (jac[1][1] * f.re - jac[0][1] * f.im) / det;
                let dy = (-jac[1][0] * f.re + jac[0][0] * f.im) / det;
                alpha -= C64::new(dx, dy);
                if !alpha.re.is_finite() || !alpha.im.is_finite() || alpha.norm() > 50.0 {
                    break;
                }
            }
            if !(ok || eval_p(pair, alpha, sigma1).norm() < P_ROOT_TOL) {
                continue;
            }
            if roots.iter().any(|r| (r.alpha0 - alpha).norm() < 1e-6) {
                continue;
            }
            let h = P_FD_STEP;
            let p_prime = (eval_p(pair, alpha + C64::new(h, 0.0), sigma1)
                - eval_p(pair, alpha - C64::new(h, 0.0), sigma1))
                / (2.0 * h);
            let simple = min_singular_value(&p_jacobian(pair, alpha, sigma1)) > P_SIMPLE_TOL;
            roots.push(PRoot {
                alpha0: alpha,
                p_prime,
                simple,
            });
        }
    }
    roots.sort_by(|a, b| {
        (a.alpha0.re, a.alpha0.im)
            .partial_cmp(&(b.alpha0.re, b.alpha0.im))
            .unwrap()
    });
    roots
}

/// Galerkin discretization: the leading Dirichlet modes, split into the
/// bifurcating pair and its orthogonal complement.
pub struct GalerkinSpace {
    pub pair: DoubleEigenpair,
    pub basis: EigenBasis,
    /// Indices of the pair's modes within the basis.
    pub pair_idx: (usize, usize),
    complement: Vec<usize>,
    /// Half the spectral gap from e^{i theta} lambda0 to the nearest
    /// distinct Galerkin eigenvalue: the resolvent-disk radius.
    pub resolvent_radius: f64,
}

impl GalerkinSpace {
    pub fn new(pair: DoubleEigenpair, mode_count: usize) -> Result<Self> {
        let basis = eigenbasis(pair.u1.grid(), pair.u1.bc(), mode_count)?;
        let locate = |u: &Field| -> Result<usize> {
            let coeffs = basis.project(u)?;
            let (idx, best) = coeffs
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| a.norm().partial_cmp(&b.norm()).unwrap())
                .unwrap();
            if (best.norm() - 1.0).abs() > 1e-8 {
                return Err(Error::ShapeMismatch(
                    "eigenpair member is not a Galerkin basis mode".into(),
                ));
            }
            Ok(idx)
        };
        let i1 = locate(&pair.u1)?;
        let i2 = locate(&pair.u2)?;
        let complement: Vec<usize> =
            (0..basis.modes.len()).filter(|&i| i != i1 && i != i2).collect();
        let gap = complement
            .iter()
            .map(|&i| (basis.modes[i].eigenvalue - pair.lambda0).abs())
            .fold(f64::INFINITY, f64::min);
        Ok(GalerkinSpace {
            pair,
            basis,
            pair_idx: (i1, i2),
            complement,
            resolvent_radius: 0.5 * gap,
        })
    }

    pub fn complement_len(&self) -> usize {
        self.complement.len()
    }

    /// Field represented by complement coefficients (zero on the pair).
    pub fn synthesize_complement(&self, y: &[C64]) -> Result<Field> {
        let mut full = vec![C64::new(0.0, 0.0); self.basis.modes.len()];
        for (&i, &c) in self.complement.iter().zip(y) {
            full[i] = c;
        }
        self.basis.synthesize(&full)
    }
}

const PICARD_TOL: f64 = 1e-12;
const PICARD_MAX: usize = 200;
const CONTRACTION_LIMIT: f64 = 0.9;

/// Picard iteration for `y = (lambda - PL)^{-1}[-P M(y + eps u1 + eps alpha u2)]`
/// in the Galerkin complement, where the resolvent is diagonal with entries
/// `1/(lambda - e^{i theta} mu_i)`. Certifies contraction empirically.
pub fn solve_y_fixed_point(
    space: &GalerkinSpace,
    trig: &TrigCoeffs,
    eps: f64,
    alpha: C64,
    lambda: C64,
) -> Result<Vec<C64>> {
    trig.validate(true)?;
    if eps < 0.0 {
        return Err(Error::InvalidParams("eps must be >= 0".into()));
    }
    let e_theta = C64::from_polar(1.0, trig.theta);
    let distance = (lambda - e_theta * space.pair.lambda0).norm();
    if distance > space.resolvent_radius {
        return Err(Error::ResolventDistance {
            distance,
            radius: space.resolvent_radius,
        });
    }
    let linear = space
        .pair
        .u1
        .scale(C64::new(eps, 0.0))
        .add(&space.pair.u2.scale(eps * alpha))?;
    let mut y = vec![C64::new(0.0, 0.0); space.complement.len()];
    if eps == 0.0 {
        return Ok(y);
    }
    let mut prev_diff = f64::INFINITY;
    for iter in 0..PICARD_MAX {
        let y_field = space.synthesize_complement(&y)?;
        let m = trig.apply_m(&y_field.add(&linear)?);
        let m_coeffs = space.basis.project(&m)?;
        let mut next = vec![C64::new(0.0, 0.0); y.len()];
        let mut diff_sq = 0.0;
        for (slot, &i) in space.complement.iter().enumerate() {
            let mu = space.basis.modes[i].eigenvalue;
            let val = -m_coeffs[i] / (lambda - e_theta * mu);
            diff_sq += (val - y[slot]).norm_sqr();
            next[slot] = val;
        }
        let diff = diff_sq.sqrt();
        y = next;
        if diff < PICARD_TOL {
            return Ok(y);
        }
        if iter > 0 && prev_diff > 0.0 {
            let ratio = diff / prev_diff;
            if ratio >= CONTRACTION_LIMIT && iter > 2 {
                return Err(Error::NoContraction { ratio });
            }
        }
        prev_diff = diff;
    }
    Err(Error::NonConvergence {
        iterations: PICARD_MAX,
        residual: prev_diff,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    pub eps: f64,
    pub alpha: C64,
    pub lambda: C64,
    #[serde(skip)]
    pub y_coeffs: Vec<C64>,
    pub y_h1: f64,
    pub residual: f64,
}

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX: usize = 50;

struct OuterSystem<'a> {
    space: &'a GalerkinSpace,
    trig: &'a TrigCoeffs,
    eps: f64,
}

impl OuterSystem<'_> {
    /// Residuals of the reduced system: branching equation for lambda and
    /// the alpha equation, both divided by their natural eps powers.
    fn residual(&self, lambda: C64, alpha: C64) -> Result<([f64; 4], Vec<C64>)> {
        let space = self.space;
        let trig = self.trig;
        let y = solve_y_fixed_point(space, trig, self.eps, alpha, lambda)?;
        let y_field = space.synthesize_complement(&y)?;
        let linear = space
            .pair
            .u1
            .scale(C64::new(self.eps, 0.0))
            .add(&space.pair.u2.scale(self.eps * alpha))?;
        let m = trig.apply_m(&y_field.add(&linear)?);
        let m1 = m.inner(&space.pair.u1)?;
        let m2 = m.inner(&space.pair.u2)?;
        let e_theta = C64::from_polar(1.0, trig.theta);
        let r1 = lambda - e_theta * space.pair.lambda0 + m1 / self.eps;
        let r2 = (alpha * m1 - m2) / pow_abs(self.eps, trig.sigma1 + 1.0);
        Ok(([r1.re, r1.im, r2.re, r2.im], y))
    }
}

fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

fn solve4(a: &[[f64; 4]; 4], b: &[f64; 4]) -> Option<[f64; 4]> {
    // Gaussian elimination with partial pivoting
    let mut m = *a;
    let mut rhs = *b;
    for col in 0..4 {
        let (piv, _) = (col..4)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..4 {
            let f = m[r][col] / m[col][col];
            for c in col..4 {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut s = rhs[row];
        for c in row + 1..4 {
            s -= m[row][c] * x[c];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

/// Damped Newton on the four real unknowns (Re lambda, Im lambda,
/// Re alpha, Im alpha), with y re-solved at every residual evaluation.
pub fn solve_branch_point(
    space: &GalerkinSpace,
    trig: &TrigCoeffs,
    eps: f64,
    alpha_init: C64,
    lambda_init: C64,
) -> Result<BranchPoint> {
    trig.validate(false)?;
    if eps < 0.0 {
        return Err(Error::InvalidParams("eps must be >= 0".into()));
    }
    let e_theta = C64::from_polar(1.0, trig.theta);
    if eps == 0.0 {
        // the reduction point of the finite-dimensional system
        return Ok(BranchPoint {
            eps,
            alpha: alpha_init,
            lambda: e_theta * space.pair.lambda0,
            y_coeffs: vec![C64::new(0.0, 0.0); space.complement_len()],
            y_h1: 0.0,
            residual: 0.0,
        });
    }
    let sys = OuterSystem { space, trig, eps };
    let mut x = [lambda_init.re, lambda_init.im, alpha_init.re, alpha_init.im];
    let (mut f, mut y) = sys.residual(C64::new(x[0], x[1]), C64::new(x[2], x[3]))?;
    for _ in 0..NEWTON_MAX {
        if norm4(&f) < NEWTON_TOL {
            let y_field = space.synthesize_complement(&y)?;
            return Ok(BranchPoint {
                eps,
                alpha: C64::new(x[2], x[3]),
                lambda: C64::new(x[0], x[1]),
                y_coeffs: y,
                y_h1: y_field.norm_h1_sq().sqrt(),
                residual: norm4(&f),
            });
        }
        // forward-difference Jacobian
        let mut jac = [[0.0; 4]; 4];
        let h = 1e-7;
        for col in 0..4 {
            let mut xp = x;
            xp[col] += h;
            let (fp, _) = sys.residual(C64::new(xp[0], xp[1]), C64::new(xp[2], xp[3]))?;
            for row in 0..4 {
                jac[row][col] = (fp[row] - f[row]) / h;
            }
        }
        let delta = solve4(&jac, &f).ok_or_else(|| {
            Error::Numerical("singular Jacobian in the outer Newton solve".into())
        })?;
        let mut damping = 1.0;
        let mut advanced = false;
        for _ in 0..10 {
            let xn = [
                x[0] - damping * delta[0],
                x[1] - damping * delta[1],
                x[2] - damping * delta[2],
                x[3] - damping * delta[3],
            ];
            match sys.residual(C64::new(xn[0], xn[1]), C64::new(xn[2], xn[3])) {
                Ok((fn_, yn)) if norm4(&fn_) < norm4(&f) => {
                    x = xn;
                    f = fn_;
                    y = yn;
                    advanced = true;
                    break;
                }
                _ => damping *= 0.5,
            }
        }
        if !advanced {
            return Err(Error::NonConvergence {
                iterations: NEWTON_MAX,
                residual: norm4(&f),
            });
        }
    }
    if norm4(&f) < NEWTON_TOL {
        let y_field = space.synthesize_complement(&y)?;
        return Ok(BranchPoint {
            eps,
            alpha: C64::new(x[2], x[3]),
            lambda: C64::new(x[0], x[1]),
            y_coeffs: y,
            y_h1: y_field.norm_h1_sq().sqrt(),
            residual: norm4(&f),
        });
    }
    Err(Error::NonConvergence {
        iterations: NEWTON_MAX,
        residual: norm4(&f),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub alpha0: C64,
    pub points: Vec<BranchPoint>,
    /// max |d lambda| / d eps between consecutive points.
    pub lipschitz_lambda: f64,
    /// max |d alpha| / d eps between consecutive points.
    pub lipschitz_alpha: f64,
    /// Failure description when continuation stopped early.
    pub truncated: Option<String>,
}

/// Sequential continuation in eps, warm-starting each solve from the
/// previous point. A failed solve truncates the branch with a report
/// instead of erroring.
pub fn continue_branch(
    space: &GalerkinSpace,
    trig: &TrigCoeffs,
    alpha0: C64,
    eps_grid: &[f64],
) -> Result<Branch> {
    if eps_grid.is_empty() || eps_grid[0] != 0.0 {
        return Err(Error::InvalidParams("eps grid must start at 0".into()));
    }
    if eps_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("eps grid must be increasing".into()));
    }
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut truncated = None;
    let e_theta = C64::from_polar(1.0, trig.theta);
    for &eps in eps_grid {
        let (ai, li) = match points.last() {
            Some(p) => (p.alpha, p.lambda),
            None => (alpha0, e_theta * space.pair.lambda0),
        };
        match solve_branch_point(space, trig, eps, ai, li) {
            Ok(p) => points.push(p),
            Err(e) => {
                truncated = Some(format!("stopped at eps = {eps}: {e}"));
                break;
            }
        }
    }
    let mut lipschitz_lambda = 0.0f64;
    let mut lipschitz_alpha = 0.0f64;
    for w in points.windows(2) {
        let de = w[1].eps - w[0].eps;
        lipschitz_lambda = lipschitz_lambda.max((w[1].lambda - w[0].lambda).norm() / de);
        lipschitz_alpha = lipschitz_alpha.max((w[1].alpha - w[0].alpha).norm() / de);
    }
    Ok(Branch {
        alpha0,
        points,
        lipschitz_lambda,
        lipschitz_alpha,
        truncated,
    })
}

/// Assembled solution `u = y + eps u1 + eps alpha u2` of a branch point.
pub fn assemble_solution(space: &GalerkinSpace, bp: &BranchPoint) -> Result<Field> {
    let y_field = space.synthesize_complement(&bp.y_coeffs)?;
    y_field.add(
        &space
            .pair
            .u1
            .scale(C64::new(bp.eps, 0.0))
            .add(&space.pair.u2.scale(bp.eps * bp.alpha))?,
    )
}

/// Galerkin-norm residual of `lambda u - L u + M u` for an arbitrary field;
/// used for the substitution check and the gauge-invariance property.
pub fn full_residual(
    space: &GalerkinSpace,
    trig: &TrigCoeffs,
    lambda: C64,
    u: &Field,
) -> Result<f64> {
    let e_theta = C64::from_polar(1.0, trig.theta);
    let c = space.basis.project(u)?;
    let m = space.basis.project(&trig.apply_m(u))?;
    let mut s = 0.0;
    for i in 0..space.basis.modes.len() {
        let mu = space.basis.modes[i].eigenvalue;
        s += (lambda * c[i] - e_theta * mu * c[i] + m[i]).norm_sqr();
    }
    Ok(s.sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    /// `e^{i gamma1} int |u1 + alpha0 u2|^{sigma1}(u1 + alpha0 u2) u1` by
    /// quadrature: the leading coefficient of
    /// `lambda(eps) = e^{i theta} lambda0 - coefficient eps^{sigma1} + o`.
    pub coefficient: C64,
    /// `-(lambda(eps) - e^{i theta} lambda0)/eps^{sigma1}` at the smallest
    /// positive eps of the branch.
    pub fitted: C64,
    pub relative_deviation: f64,
}

/// Compares the branch's lambda(eps) against the leading-order formula.
pub fn asymptotic_check(
    branch: &Branch,
    space: &GalerkinSpace,
    trig: &TrigCoeffs,
) -> Result<AsymptoticReport> {
    let positive: Vec<&BranchPoint> =
        branch.points.iter().filter(|p| p.eps > 0.0).collect();
    if branch.points.len() < 3 || positive.is_empty() {
        return Err(Error::MissingInput(
            "asymptotic check needs a branch with at least 3 points".into(),
        ));
    }
    let alpha0 = branch.alpha0;
    let w = space.pair.u1.add(&space.pair.u2.scale(alpha0))?;
    let grid = w.grid();
    let mut integral = C64::new(0.0, 0.0);
    for (idx, (&z, &v1)) in w.values().iter().zip(space.pair.u1.values()).enumerate() {
        integral += grid.quad_weight(idx) * pow_abs(z.norm(), trig.sigma1) * z * v1.re;
    }
    let coefficient = C64::from_polar(1.0, trig.gamma1) * integral;
    let e_theta = C64::from_polar(1.0, trig.theta);
    let first = positive
        .iter()
        .min_by(|a, b| a.eps.partial_cmp(&b.eps).unwrap())
        .unwrap();
    let fitted = -(first.lambda - e_theta * space.pair.lambda0) / pow_abs(first.eps, trig.sigma1);
    let relative_deviation = (fitted - coefficient).norm() / coefficient.norm().max(1e-300);
    Ok(AsymptoticReport {
        coefficient,
        fitted,
        relative_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn pair64() -> DoubleEigenpair {
        square_pair(65).unwrap()
    }

    fn trig_example() -> TrigCoeffs {
        TrigCoeffs {
            theta: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            chi: -1.0,
            sigma1: 2.0,
            sigma2: 4.0,
        }
    }

    #[test]
    fn pair_invariants() {
        let pair = pair64();
        assert_relative_eq!(pair.lambda0, 5.0 * PI * PI / 4.0, max_relative = 1e-12);
        assert_relative_eq!(pair.u1.norm_l2_sq(), 1.0, epsilon = 1e-10);
        assert!(pair.u1.inner(&pair.u2).unwrap().norm() < 1e-10);
    }

    #[test]
    fn p_polynomial_on_square() {
        let pair = pair64();
        assert!(eval_p(&pair, C64::new(0.0, 0.0), 2.0).norm() < 1e-10);
        for alpha in [-1.5, -0.4, 0.7, 2.0] {
            let p = eval_p(&pair, C64::new(alpha, 0.0), 2.0);
            let expected = 3.0 / 16.0 * (alpha * alpha * alpha - alpha);
            assert_relative_eq!(p.re, expected, epsilon = 1e-6);
            assert!(p.im.abs() < 1e-10);
        }
        assert_relative_eq!(
            eval_p(&pair, C64::new(2.0, 0.0), 2.0).re,
            9.0 / 8.0,
            max_relative = 1e-5
        );
    }

    #[test]
    fn p_roots_and_symmetry() {
        let pair = pair64();
        let roots = find_roots_p(&pair, 2.0);
        // the real roots are {-1, 0, 1}; the non-holomorphic extension also
        // vanishes at +-i by parity, so those appear as additional roots
        let real_roots: Vec<&PRoot> =
            roots.iter().filter(|r| r.alpha0.im.abs() < 1e-8).collect();
        let expected = [-1.0, 0.0, 1.0];
        assert_eq!(real_roots.len(), 3, "roots: {roots:?}");
        for (r, &e) in real_roots.iter().zip(&expected) {
            assert!((r.alpha0 - C64::new(e, 0.0)).norm() < 1e-8);
            assert!(r.simple);
        }
        // P'(0) = -3/16
        assert_relative_eq!(real_roots[1].p_prime.re, -3.0 / 16.0, max_relative = 1e-4);
        // alpha -> -alpha symmetry of the root set
        for r in &roots {
            assert!(roots.iter().any(|s| (s.alpha0 + r.alpha0).norm() < 1e-7));
        }
        // swapped ordering produces the same root set
        let swapped = find_roots_p(&square_pair_swapped(65).unwrap(), 2.0);
        assert_eq!(swapped.len(), roots.len());
        for (r, s) in roots.iter().zip(&swapped) {
            assert!((r.alpha0 - s.alpha0).norm() < 1e-7);
        }
    }

    #[test]
    fn y_solver_eps0_and_scaling() {
        let pair = pair64();
        let trig = trig_example();
        let space = GalerkinSpace::new(pair, 60).unwrap();
        let lambda = C64::new(space.pair.lambda0, 0.0);
        let y0 = solve_y_fixed_point(&space, &trig, 0.0, C64::new(0.0, 0.0), lambda).unwrap();
        assert!(y0.iter().all(|c| c.norm() == 0.0));

        // ||y||_{H1} = O(eps^{sigma1 + 1}): log-log slope >= sigma1 + 0.9
        let mut norms = Vec::new();
        for eps in [1e-3, 2e-3, 4e-3] {
            let y = solve_y_fixed_point(&space, &trig, eps, C64::new(0.0, 0.0), lambda).unwrap();
            let yf = space.synthesize_complement(&y).unwrap();
            norms.push(yf.norm_h1_sq().sqrt());
        }
        let slope1 = (norms[1] / norms[0]).ln() / 2.0f64.ln();
        let slope2 = (norms[2] / norms[1]).ln() / 2.0f64.ln();
        assert!(slope1 >= 2.9 && slope2 >= 2.9, "slopes {slope1} {slope2}");

        // Lipschitz in lambda with constant O(eps^{sigma1 + 1})
        let eps = 2e-3;
        let l2 = lambda + C64::new(1e-3, 1e-3);
        let ya = solve_y_fixed_point(&space, &trig, eps, C64::new(0.0, 0.0), lambda).unwrap();
        let yb = solve_y_fixed_point(&space, &trig, eps, C64::new(0.0, 0.0), l2).unwrap();
        let d: f64 = ya
            .iter()
            .zip(&yb)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(d <= 1.0 * eps.powi(3) * (l2 - lambda).norm(), "d = {d}");

        // lambda outside the resolvent disk is rejected
        let far = C64::new(space.pair.lambda0 + 10.0, 0.0);
        assert!(matches!(
            solve_y_fixed_point(&space, &trig, eps, C64::new(0.0, 0.0), far),
            Err(Error::ResolventDistance { .. })
        ));
    }

    #[test]
    fn branch_point_reduction_and_slope() {
        let trig = trig_example();
        let space = GalerkinSpace::new(pair64(), 60).unwrap();
        let p0 = solve_branch_point(
            &space,
            &trig,
            0.0,
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        )
        .unwrap();
        assert_relative_eq!(p0.lambda.re, space.pair.lambda0, max_relative = 1e-14);
        assert_eq!(p0.y_h1, 0.0);

        let eps = 1e-2;
        let bp = solve_branch_point(
            &space,
            &trig,
            eps,
            C64::new(0.0, 0.0),
            C64::new(space.pair.lambda0, 0.0),
        )
        .unwrap();
        // lambda = lambda0 - (9/16) eps^2 + higher order
        let shift = (bp.lambda.re - space.pair.lambda0) / (eps * eps);
        assert_relative_eq!(shift, -9.0 / 16.0, max_relative = 2e-2);
        assert!(bp.alpha.norm() < 1e-6);

        // full-equation residual of the assembled solution
        let u = assemble_solution(&space, &bp).unwrap();
        let res = full_residual(&space, &trig, bp.lambda, &u).unwrap();
        assert!(res < 1e-8, "residual {res}");

        // gauge invariance: a rotated solution has the same residual
        let rotated = u.scale(C64::from_polar(1.0, 0.83));
        let res_rot = full_residual(&space, &trig, bp.lambda, &rotated).unwrap();
        assert_relative_eq!(res, res_rot, epsilon = 1e-12);

        // y stays orthogonal to the pair
        let yf = space.synthesize_complement(&bp.y_coeffs).unwrap();
        assert!(yf.inner(&space.pair.u1).unwrap().norm() < 1e-10);
        assert!(yf.inner(&space.pair.u2).unwrap().norm() < 1e-10);
    }

    #[test]
    fn branch_continuation_and_asymptotics() {
        let trig = trig_example();
        let space = GalerkinSpace::new(pair64(), 60).unwrap();
        let eps_grid = [0.0, 2.5e-3, 5e-3, 7.5e-3, 1e-2];
        let branch = continue_branch(&space, &trig, C64::new(0.0, 0.0), &eps_grid).unwrap();
        assert_eq!(branch.points.len(), eps_grid.len());
        assert!(branch.truncated.is_none());

        // quadratic leading behavior of lambda(eps) for sigma1 = 2
        let p1 = &branch.points[1];
        let p4 = &branch.points[4];
        let fit = ((p4.lambda.re - space.pair.lambda0) / (p1.lambda.re - space.pair.lambda0))
            .ln()
            / (p4.eps / p1.eps).ln();
        assert!((fit - 2.0).abs() < 0.1, "fit exponent {fit}");

        let rep = asymptotic_check(&branch, &space, &trig).unwrap();
        assert_relative_eq!(rep.coefficient.re, 9.0 / 16.0, max_relative = 1e-4);
        assert!(rep.relative_deviation < 0.05, "{}", rep.relative_deviation);
    }

    #[test]
    fn sigma_constraint_enforced() {
        let mut trig = trig_example();
        trig.sigma1 = 0.5;
        assert!(matches!(trig.validate(false), Err(Error::Hypothesis(_))));
        assert!(trig.validate(true).is_ok());
    }
}
