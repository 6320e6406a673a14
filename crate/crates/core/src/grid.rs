//! Uniform grids, complex fields and the finite-difference / quadrature
//! substrate used by every other module.
//!
//! Grids are uniform by construction; integration is composite trapezoidal
//! so that discrete integration by parts pairs cleanly with the centered
//! Laplacian stencil.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

/// Uniform grid on an interval or an axis-aligned rectangle.
///
/// `n` counts nodes including both endpoints, so the spacing is
/// `(x1 - x0) / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Grid {
    Interval {
        x0: f64,
        x1: f64,
        n: usize,
    },
    Rectangle {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        nx: usize,
        ny: usize,
    },
}

impl Grid {
    pub fn interval(x0: f64, x1: f64, n: usize) -> Result<Self> {
        let g = Grid::Interval { x0, x1, n };
        g.validate()?;
        Ok(g)
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = Grid::Rectangle { x0, x1, y0, y1, nx, ny };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Grid::Interval { x0, x1, n } => {
                if n < 3 {
                    return Err(Error::InvalidGrid(format!("need n >= 3, got {n}")));
                }
                if !(x1 > x0) {
                    return Err(Error::InvalidGrid(format!("need x1 > x0, got [{x0}, {x1}]")));
                }
            }
            Grid::Rectangle { x0, x1, y0, y1, nx, ny } => {
                if nx < 3 || ny < 3 {
                    return Err(Error::InvalidGrid(format!("need nx, ny >= 3, got {nx}x{ny}")));
                }
                if !(x1 > x0) || !(y1 > y0) {
                    return Err(Error::InvalidGrid(format!(
                        "degenerate rectangle [{x0},{x1}]x[{y0},{y1}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::Interval { .. } => 1,
            Grid::Rectangle { .. } => 2,
        }
    }

    pub fn num_nodes(&self) -> usize {
        match *self {
            Grid::Interval { n, .. } => n,
            Grid::Rectangle { nx, ny, .. } => nx * ny,
        }
    }

    pub fn hx(&self) -> f64 {
        match *self {
            Grid::Interval { x0, x1, n } => (x1 - x0) / (n - 1) as f64,
            Grid::Rectangle { x0, x1, nx, .. } => (x1 - x0) / (nx - 1) as f64,
        }
    }

    pub fn hy(&self) -> f64 {
        match *self {
            Grid::Interval { .. } => 0.0,
            Grid::Rectangle { y0, y1, ny, .. } => (y1 - y0) / (ny - 1) as f64,
        }
    }

    /// Coordinates of the `idx`-th node. 2D nodes are stored row-major:
    /// `idx = j * nx + i` with `i` running along x.
    pub fn coords(&self, idx: usize) -> (f64, f64) {
        match *self {
            Grid::Interval { x0, .. } => (x0 + self.hx() * idx as f64, 0.0),
            Grid::Rectangle { x0, y0, nx, .. } => {
                let i = idx % nx;
                let j = idx / nx;
                (x0 + self.hx() * i as f64, y0 + self.hy() * j as f64)
            }
        }
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        match *self {
            Grid::Interval { n, .. } => idx == 0 || idx == n - 1,
            Grid::Rectangle { nx, ny, .. } => {
                let i = idx % nx;
                let j = idx / nx;
                i == 0 || i == nx - 1 || j == 0 || j == ny - 1
            }
        }
    }

    /// Trapezoidal quadrature weight of the `idx`-th node.
    pub fn quad_weight(&self, idx: usize) -> f64 {
        match *self {
            Grid::Interval { n, .. } => {
                let w = if idx == 0 || idx == n - 1 { 0.5 } else { 1.0 };
                w * self.hx()
            }
            Grid::Rectangle { nx, ny, .. } => {
                let i = idx % nx;
                let j = idx / nx;
                let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
                wx * wy * self.hx() * self.hy()
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Grid::Interval { x0, x1, .. } => x1 - x0,
            Grid::Rectangle { x0, x1, y0, y1, .. } => (x1 - x0) * (y1 - y0),
        }
    }
}

/// Complex-valued grid function with a boundary-condition tag.
///
/// Dirichlet fields vanish identically on boundary nodes; constructors
/// enforce this.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    bc: BoundaryCondition,
    values: Vec<C64>,
}

impl Field {
    pub fn new(grid: Grid, bc: BoundaryCondition, values: Vec<C64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.num_nodes() {
            return Err(Error::ShapeMismatch(format!(
                "value array length {} does not match grid ({} nodes)",
                values.len(),
                grid.num_nodes()
            )));
        }
        if bc == BoundaryCondition::Dirichlet {
            for (idx, v) in values.iter().enumerate() {
                if grid.is_boundary(idx) && v.norm() != 0.0 {
                    return Err(Error::InvalidGrid(format!(
                        "Dirichlet field has nonzero boundary value {v} at node {idx}"
                    )));
                }
            }
        }
        Ok(Field { grid, bc, values })
    }

    pub fn zeros(grid: Grid, bc: BoundaryCondition) -> Self {
        Field {
            grid,
            bc,
            values: vec![C64::new(0.0, 0.0); grid.num_nodes()],
        }
    }

    /// Sample `f(x, y)` at the nodes. For Dirichlet fields the boundary
    /// nodes are zeroed so that sampling e.g. `sin(pi x)` with a rounding
    /// remainder at the endpoints still yields a valid field.
    pub fn from_fn(grid: Grid, bc: BoundaryCondition, f: impl Fn(f64, f64) -> C64) -> Self {
        let mut values: Vec<C64> = (0..grid.num_nodes())
            .map(|idx| {
                let (x, y) = grid.coords(idx);
                f(x, y)
            })
            .collect();
        if bc == BoundaryCondition::Dirichlet {
            for (idx, v) in values.iter_mut().enumerate() {
                if grid.is_boundary(idx) {
                    *v = C64::new(0.0, 0.0);
                }
            }
        }
        Field { grid, bc, values }
    }

    pub fn from_real_fn(grid: Grid, bc: BoundaryCondition, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, bc, |x, y| C64::new(f(x, y), 0.0))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid || self.bc != other.bc {
            return Err(Error::ShapeMismatch(
                "fields live on different grids or boundary conditions".into(),
            ));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Field {
        Field {
            grid: self.grid,
            bc: self.bc,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Field {
        self.map(|v| s * v)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.check_compatible(other)?;
        Ok(Field {
            grid: self.grid,
            bc: self.bc,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_compatible(other)?;
        Ok(Field {
            grid: self.grid,
            bc: self.bc,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    pub fn has_nan(&self) -> bool {
        self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
    }

    /// Second-order centered finite-difference Laplacian.
    ///
    /// Dirichlet: boundary rows forced to 0. Neumann: ghost-node reflection,
    /// i.e. at a boundary node the missing neighbor equals the interior one.
    pub fn laplacian(&self) -> Field {
        let mut out = Field::zeros(self.grid, self.bc);
        match self.grid {
            Grid::Interval { n, .. } => {
                let h2 = self.grid.hx() * self.grid.hx();
                let v = &self.values;
                for i in 1..n - 1 {
                    out.values[i] = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / h2;
                }
                match self.bc {
                    BoundaryCondition::Dirichlet => {}
                    BoundaryCondition::Neumann => {
                        out.values[0] = 2.0 * (v[1] - v[0]) / h2;
                        out.values[n - 1] = 2.0 * (v[n - 2] - v[n - 1]) / h2;
                    }
                }
            }
            Grid::Rectangle { nx, ny, .. } => {
                let hx2 = self.grid.hx() * self.grid.hx();
                let hy2 = self.grid.hy() * self.grid.hy();
                let v = &self.values;
                let at = |i: usize, j: usize| v[j * nx + i];
                for j in 0..ny {
                    for i in 0..nx {
                        let idx = j * nx + i;
                        if self.grid.is_boundary(idx) && self.bc == BoundaryCondition::Dirichlet {
                            continue;
                        }
                        let xm = if i == 0 { at(1, j) } else { at(i - 1, j) };
                        let xp = if i == nx - 1 { at(nx - 2, j) } else { at(i + 1, j) };
                        let ym = if j == 0 { at(i, 1) } else { at(i, j - 1) };
                        let yp = if j == ny - 1 { at(i, ny - 2) } else { at(i, j + 1) };
                        let c = at(i, j);
                        out.values[idx] = (xm - 2.0 * c + xp) / hx2 + (ym - 2.0 * c + yp) / hy2;
                    }
                }
            }
        }
        out
    }

    /// Nodal gradient by centered differences, one-sided second-order at the
    /// boundary. Returns one component per spatial dimension.
    pub fn gradient(&self) -> Vec<Vec<C64>> {
        match self.grid {
            Grid::Interval { n, .. } => {
                let h = self.grid.hx();
                let v = &self.values;
                let mut g = vec![C64::new(0.0, 0.0); n];
                for i in 1..n - 1 {
                    g[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
                }
                g[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
                g[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
                vec![g]
            }
            Grid::Rectangle { nx, ny, .. } => {
                let hx = self.grid.hx();
                let hy = self.grid.hy();
                let v = &self.values;
                let at = |i: usize, j: usize| v[j * nx + i];
                let mut gx = vec![C64::new(0.0, 0.0); nx * ny];
                let mut gy = vec![C64::new(0.0, 0.0); nx * ny];
                for j in 0..ny {
                    for i in 0..nx {
                        let idx = j * nx + i;
                        gx[idx] = if i == 0 {
                            (-3.0 * at(0, j) + 4.0 * at(1, j) - at(2, j)) / (2.0 * hx)
                        } else if i == nx - 1 {
                            (3.0 * at(nx - 1, j) - 4.0 * at(nx - 2, j) + at(nx - 3, j)) / (2.0 * hx)
                        } else {
                            (at(i + 1, j) - at(i - 1, j)) / (2.0 * hx)
                        };
                        gy[idx] = if j == 0 {
                            (-3.0 * at(i, 0) + 4.0 * at(i, 1) - at(i, 2)) / (2.0 * hy)
                        } else if j == ny - 1 {
                            (3.0 * at(i, ny - 1) - 4.0 * at(i, ny - 2) + at(i, ny - 3)) / (2.0 * hy)
                        } else {
                            (at(i, j + 1) - at(i, j - 1)) / (2.0 * hy)
                        };
                    }
                }
                vec![gx, gy]
            }
        }
    }

    pub fn integrate(&self) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (idx, &v) in self.values.iter().enumerate() {
            s += self.grid.quad_weight(idx) * v;
        }
        s
    }

    /// `int |u|^p dx` by trapezoidal quadrature.
    pub fn norm_lp_pow(&self, p: f64) -> f64 {
        let mut s = 0.0;
        for (idx, &v) in self.values.iter().enumerate() {
            s += self.grid.quad_weight(idx) * pow_abs(v.norm(), p);
        }
        s
    }

    pub fn norm_lp(&self, p: f64) -> f64 {
        self.norm_lp_pow(p).powf(1.0 / p)
    }

    pub fn norm_l2_sq(&self) -> f64 {
        self.norm_lp_pow(2.0)
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_sq().sqrt()
    }

    /// `int |grad u|^2 dx` with the centered-difference gradient.
    pub fn grad_sq(&self) -> f64 {
        let comps = self.gradient();
        let mut s = 0.0;
        for idx in 0..self.values.len() {
            let w = self.grid.quad_weight(idx);
            for comp in &comps {
                s += w * comp[idx].norm_sqr();
            }
        }
        s
    }

    pub fn norm_h1_sq(&self) -> f64 {
        self.norm_l2_sq() + self.grad_sq()
    }

    pub fn norm_h1(&self) -> f64 {
        self.norm_h1_sq().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `int f conj(g) dx`.
    pub fn inner(&self, other: &Field) -> Result<C64> {
        self.check_compatible(other)?;
        let mut s = C64::new(0.0, 0.0);
        for idx in 0..self.values.len() {
            s += self.grid.quad_weight(idx) * self.values[idx] * other.values[idx].conj();
        }
        Ok(s)
    }

    /// CSV rows `x[,y],re,im`, plus a small JSON header describing grid/bc.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        if self.grid.dim() == 1 {
            writeln!(w, "x,re,im")?;
            for (idx, v) in self.values.iter().enumerate() {
                let (x, _) = self.grid.coords(idx);
                writeln!(w, "{x:.17e},{:.17e},{:.17e}", v.re, v.im)?;
            }
        } else {
            writeln!(w, "x,y,re,im")?;
            for (idx, v) in self.values.iter().enumerate() {
                let (x, y) = self.grid.coords(idx);
                writeln!(w, "{x:.17e},{y:.17e},{:.17e},{:.17e}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    pub fn header_json(&self) -> serde_json::Value {
        serde_json::json!({
            "spec_version": 1,
            "grid": self.grid,
            "bc": self.bc,
        })
    }
}

/// `|x|^p` with integer fast paths for the common even exponents.
pub fn pow_abs(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.0 {
        x
    } else if p == 3.0 {
        x * x * x
    } else if p == 4.0 {
        let x2 = x * x;
        x2 * x2
    } else if p == 5.0 {
        let x2 = x * x;
        x2 * x2 * x
    } else if p == 6.0 {
        let x2 = x * x;
        x2 * x2 * x2
    } else {
        x.powf(p)
    }
}
