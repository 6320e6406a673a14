//! Numerical laboratory for the generalized complex Ginzburg-Landau equation
//! with two power nonlinearities,
//!
//! ```text
//! u_t = (a + i alpha) Lap u + (b + i beta)|u|^s1 u - (c + i gamma)|u|^s2 u + k u
//! ```
//!
//! on intervals and rectangles with Dirichlet or Neumann boundaries.
//!
//! The crate provides:
//! - parameter bookkeeping, trigonometric normal form and regime
//!   classification ([`params`]),
//! - grids, complex fields, Laplacians, analytic eigenbases and quadrature
//!   ([`grid`], [`eigen`]),
//! - explicit 1D bound-states `phi = psi exp(i d ln psi)` ([`boundstate`]),
//! - Strang-split time integration with diagnostics and blow-up detection
//!   ([`evolution`]),
//! - Lyapunov functionals for the trivial equilibrium ([`stability`]),
//! - Floquet multipliers of spatially homogeneous periodic orbits
//!   ([`floquet`]),
//! - Lyapunov-Schmidt bifurcation branches from double Dirichlet eigenvalues
//!   ([`bifurcation`]).

pub mod bifurcation;
pub mod boundstate;
pub mod eigen;
pub mod error;
pub mod evolution;
pub mod floquet;
pub mod grid;
pub mod ode;
pub mod params;
pub mod stability;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
