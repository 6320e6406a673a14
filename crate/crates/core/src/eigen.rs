//! Analytic eigenbases of the negative Laplacian on intervals and rectangles,
//! orthogonal projection / synthesis, and a separable spectral transform used
//! by the exponential time integrator.
//!
//! Eigenfunctions are analytic formulas sampled on nodes (not diagonalized
//! stencils); the eigen-residual against the discrete Laplacian is O(h^2).

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Field, Grid};
use crate::C64;

/// One sampled eigenfunction of `-Lap` with its eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct Mode {
    /// 1D: `(m, 0)`; 2D: `(mx, my)`. Dirichlet indices start at 1,
    /// Neumann at 0.
    pub index: (usize, usize),
    pub eigenvalue: f64,
    /// Node samples, normalized to unit discrete L2 norm.
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Normalization constant that was applied to the raw samples.
    pub norm_const: f64,
}

#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub grid: Grid,
    pub bc: BoundaryCondition,
    pub modes: Vec<Mode>,
}

fn mode_1d(x0: f64, len: f64, n: usize, bc: BoundaryCondition, m: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let x = x0 + len * i as f64 / (n - 1) as f64;
            let arg = m as f64 * PI * (x - x0) / len;
            match bc {
                BoundaryCondition::Dirichlet => arg.sin(),
                BoundaryCondition::Neumann => arg.cos(),
            }
        })
        .collect();
    if bc == BoundaryCondition::Dirichlet {
        // sin(m pi) evaluates to ~1e-16, not 0; boundary samples are exact zeros
        v[0] = 0.0;
        v[n - 1] = 0.0;
    }
    v
}

fn capacity_1d(n: usize, bc: BoundaryCondition) -> usize {
    match bc {
        // sine mode n-1 samples to zero; highest resolvable index is n-2
        BoundaryCondition::Dirichlet => n - 2,
        // cosine modes 0..=n-1 are exactly n independent samples
        BoundaryCondition::Neumann => n - 1,
    }
}

fn index_range(bc: BoundaryCondition, n: usize) -> std::ops::RangeInclusive<usize> {
    match bc {
        BoundaryCondition::Dirichlet => 1..=capacity_1d(n, bc),
        BoundaryCondition::Neumann => 0..=capacity_1d(n, bc),
    }
}

/// First `count` eigenpairs of `-Lap` on `grid` with boundary condition `bc`,
/// sorted by nondecreasing eigenvalue (ties broken by index).
pub fn eigenbasis(grid: Grid, bc: BoundaryCondition, count: usize) -> Result<EigenBasis> {
    if count < 1 {
        return Err(Error::InvalidParams("eigenbasis count must be >= 1".into()));
    }
    grid.validate()?;
    let mut raw: Vec<((usize, usize), f64)> = Vec::new();
    match grid {
        Grid::Interval { x0: _, x1: _, n } => {
            let len = grid.hx() * (n - 1) as f64;
            for m in index_range(bc, n) {
                let mu = (m as f64 * PI / len).powi(2);
                raw.push(((m, 0), mu));
            }
        }
        Grid::Rectangle { nx, ny, .. } => {
            let lx = grid.hx() * (nx - 1) as f64;
            let ly = grid.hy() * (ny - 1) as f64;
            for mx in index_range(bc, nx) {
                for my in index_range(bc, ny) {
                    let mu = (mx as f64 * PI / lx).powi(2) + (my as f64 * PI / ly).powi(2);
                    raw.push(((mx, my), mu));
                }
            }
        }
    }
    if count > raw.len() {
        return Err(Error::Aliasing {
            requested: count,
            capacity: raw.len(),
        });
    }
    raw.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    raw.truncate(count);

    let modes = raw
        .into_iter()
        .map(|(index, eigenvalue)| {
            let values = sample_mode(grid, bc, index);
            let (values, norm_const) = normalize(grid, values);
            Mode {
                index,
                eigenvalue,
                values,
                norm_const,
            }
        })
        .collect();
    Ok(EigenBasis { grid, bc, modes })
}

fn sample_mode(grid: Grid, bc: BoundaryCondition, index: (usize, usize)) -> Vec<f64> {
    match grid {
        Grid::Interval { x0, n, .. } => {
            let len = grid.hx() * (n - 1) as f64;
            mode_1d(x0, len, n, bc, index.0)
        }
        Grid::Rectangle { x0, y0, nx, ny, .. } => {
            let lx = grid.hx() * (nx - 1) as f64;
            let ly = grid.hy() * (ny - 1) as f64;
            let mx = mode_1d(x0, lx, nx, bc, index.0);
            let my = mode_1d(y0, ly, ny, bc, index.1);
            let mut out = Vec::with_capacity(nx * ny);
            for j in 0..ny {
                for i in 0..nx {
                    out.push(mx[i] * my[j]);
                }
            }
            out
        }
    }
}

fn normalize(grid: Grid, mut values: Vec<f64>) -> (Vec<f64>, f64) {
    let mut norm_sq = 0.0;
    for (idx, v) in values.iter().enumerate() {
        norm_sq += grid.quad_weight(idx) * v * v;
    }
    let c = 1.0 / norm_sq.sqrt();
    for v in &mut values {
        *v *= c;
    }
    (values, c)
}

impl EigenBasis {
    pub fn mode_field(&self, i: usize) -> Field {
        let values = self.modes[i]
            .values
            .iter()
            .map(|&v| C64::new(v, 0.0))
            .collect();
        Field::new(self.grid, self.bc, values).expect("mode respects boundary condition")
    }

    /// Coefficients `c_i = <f, e_i>` under the module's quadrature.
    pub fn project(&self, f: &Field) -> Result<Vec<C64>> {
        if f.grid() != self.grid || f.bc() != self.bc {
            return Err(Error::ShapeMismatch(
                "field and eigenbasis live on different grids".into(),
            ));
        }
        let vals = f.values();
        Ok(self
            .modes
            .iter()
            .map(|m| {
                let mut c = C64::new(0.0, 0.0);
                for (idx, &e) in m.values.iter().enumerate() {
                    c += self.grid.quad_weight(idx) * vals[idx] * e;
                }
                c
            })
            .collect())
    }

    pub fn synthesize(&self, coeffs: &[C64]) -> Result<Field> {
        if coeffs.len() > self.modes.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a basis of {} modes",
                coeffs.len(),
                self.modes.len()
            )));
        }
        let mut values = vec![C64::new(0.0, 0.0); self.grid.num_nodes()];
        for (c, m) in coeffs.iter().zip(&self.modes) {
            for (idx, &e) in m.values.iter().enumerate() {
                values[idx] += c * e;
            }
        }
        Field::new(self.grid, self.bc, values)
    }
}

/// Complete separable transform between node values and eigenmode
/// coefficients; the linear propagator is diagonal in this representation.
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    grid: Grid,
    bc: BoundaryCondition,
    bx: Basis1d,
    by: Option<Basis1d>,
}

#[derive(Debug, Clone)]
struct Basis1d {
    n: usize,
    /// row-major (mode, node), discrete-orthonormal samples
    s: Vec<f64>,
    mu: Vec<f64>,
    w: Vec<f64>,
}

impl Basis1d {
    fn new(x0: f64, len: f64, n: usize, h: f64, bc: BoundaryCondition) -> Self {
        let idx: Vec<usize> = index_range(bc, n).collect();
        let mut s = Vec::with_capacity(idx.len() * n);
        let mut mu = Vec::with_capacity(idx.len());
        let w: Vec<f64> = (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
            .collect();
        for &m in &idx {
            let raw = mode_1d(x0, len, n, bc, m);
            let norm_sq: f64 = raw.iter().zip(&w).map(|(v, wi)| v * v * wi).sum();
            let c = 1.0 / norm_sq.sqrt();
            s.extend(raw.iter().map(|v| v * c));
            mu.push((m as f64 * PI / len).powi(2));
        }
        Basis1d {
            n,
            s,
            mu,
            w,
        }
    }

    fn n_modes(&self) -> usize {
        self.mu.len()
    }
}

impl SpectralTransform {
    pub fn new(grid: Grid, bc: BoundaryCondition) -> Result<Self> {
        grid.validate()?;
        match grid {
            Grid::Interval { x0, n, .. } => {
                let len = grid.hx() * (n - 1) as f64;
                Ok(SpectralTransform {
                    grid,
                    bc,
                    bx: Basis1d::new(x0, len, n, grid.hx(), bc),
                    by: None,
                })
            }
            Grid::Rectangle { x0, y0, nx, ny, .. } => {
                let lx = grid.hx() * (nx - 1) as f64;
                let ly = grid.hy() * (ny - 1) as f64;
                Ok(SpectralTransform {
                    grid,
                    bc,
                    bx: Basis1d::new(x0, lx, nx, grid.hx(), bc),
                    by: Some(Basis1d::new(y0, ly, ny, grid.hy(), bc)),
                })
            }
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn n_modes(&self) -> usize {
        self.bx.n_modes() * self.by.as_ref().map_or(1, |b| b.n_modes())
    }

    /// Eigenvalue of `-Lap` for flat coefficient index `c` (row-major over
    /// `(mx, my)` in 2D).
    pub fn eigenvalue(&self, c: usize) -> f64 {
        match &self.by {
            None => self.bx.mu[c],
            Some(by) => {
                let mx = c / by.n_modes();
                let my = c % by.n_modes();
                self.bx.mu[mx] + by.mu[my]
            }
        }
    }

    pub fn forward(&self, f: &Field) -> Result<Vec<C64>> {
        if f.grid() != self.grid || f.bc() != self.bc {
            return Err(Error::ShapeMismatch("field does not match transform".into()));
        }
        let v = f.values();
        match &self.by {
            None => {
                let bx = &self.bx;
                let mut out = vec![C64::new(0.0, 0.0); bx.n_modes()];
                for (m, o) in out.iter_mut().enumerate() {
                    let row = &bx.s[m * bx.n..(m + 1) * bx.n];
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..bx.n {
                        acc += row[i] * bx.w[i] * v[i];
                    }
                    *o = acc;
                }
                Ok(out)
            }
            Some(by) => {
                let bx = &self.bx;
                let (nx, ny) = (bx.n, by.n);
                // pass 1: transform along x, weighted
                let mut a = vec![C64::new(0.0, 0.0); bx.n_modes() * ny];
                for j in 0..ny {
                    let row_in = &v[j * nx..(j + 1) * nx];
                    for mx in 0..bx.n_modes() {
                        let srow = &bx.s[mx * nx..(mx + 1) * nx];
                        let mut acc = C64::new(0.0, 0.0);
                        for i in 0..nx {
                            acc += srow[i] * bx.w[i] * row_in[i];
                        }
                        a[mx * ny + j] = acc;
                    }
                }
                // pass 2: transform along y
                let mut out = vec![C64::new(0.0, 0.0); bx.n_modes() * by.n_modes()];
                for mx in 0..bx.n_modes() {
                    let arow = &a[mx * ny..(mx + 1) * ny];
                    for my in 0..by.n_modes() {
                        let srow = &by.s[my * ny..(my + 1) * ny];
                        let mut acc = C64::new(0.0, 0.0);
                        for j in 0..ny {
                            acc += srow[j] * by.w[j] * arow[j];
                        }
                        out[mx * by.n_modes() + my] = acc;
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn inverse(&self, coeffs: &[C64]) -> Result<Field> {
        if coeffs.len() != self.n_modes() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients, transform has {} modes",
                coeffs.len(),
                self.n_modes()
            )));
        }
        match &self.by {
            None => {
                let bx = &self.bx;
                let mut v = vec![C64::new(0.0, 0.0); bx.n];
                for (m, c) in coeffs.iter().enumerate() {
                    let row = &bx.s[m * bx.n..(m + 1) * bx.n];
                    for i in 0..bx.n {
                        v[i] += c * row[i];
                    }
                }
                Field::new(self.grid, self.bc, v)
            }
            Some(by) => {
                let bx = &self.bx;
                let (nx, ny) = (bx.n, by.n);
                // pass 1: expand along y
                let mut a = vec![C64::new(0.0, 0.0); bx.n_modes() * ny];
                for mx in 0..bx.n_modes() {
                    for my in 0..by.n_modes() {
                        let c = coeffs[mx * by.n_modes() + my];
                        let srow = &by.s[my * ny..(my + 1) * ny];
                        for j in 0..ny {
                            a[mx * ny + j] += c * srow[j];
                        }
                    }
                }
                // pass 2: expand along x
                let mut v = vec![C64::new(0.0, 0.0); nx * ny];
                for mx in 0..bx.n_modes() {
                    let srow = &bx.s[mx * nx..(mx + 1) * nx];
                    for j in 0..ny {
                        let c = a[mx * ny + j];
                        let row_out = &mut v[j * nx..(j + 1) * nx];
                        for i in 0..nx {
                            row_out[i] += c * srow[i];
                        }
                    }
                }
                Field::new(self.grid, self.bc, v)
            }
        }
    }

    /// Apply `exp(tau * (kappa * Lap + k))` exactly in the eigenbasis.
    pub fn apply_linear_exp(&self, f: &Field, kappa: Complex64, k: f64, tau: f64) -> Result<Field> {
        let mut coeffs = self.forward(f)?;
        for (c, coef) in coeffs.iter_mut().enumerate() {
            let mu = self.eigenvalue(c);
            *coef *= (tau * (-kappa * mu + k)).exp();
        }
        self.inverse(&coeffs)
    }
}
