//! Pseudo-spectral simulation of the modified dissipative quasi-geostrophic
//! equation on the periodic square `[0, 2π)²`,
//!
//! ```text
//! θ_t + u·∇θ + ν|D|^α θ = 0,     u = |D|^{α-1} R^⊥ θ,
//! ```
//!
//! together with the numerical machinery used to check its analytic theory:
//! moduli of continuity and the negativity certificate `Ω ω' + Υ < 0`,
//! Littlewood-Paley blocks and commutators, and real-space kernel oracles.
//!
//! Module map:
//!
//! - [`spectral`]: grids, transforms, Fourier multipliers, projections.
//! - [`solver`]: time integration, diagnostics and run-level checks.
//! - [`moc`]: moduli of continuity, the Ω/Υ functionals and certification.
//! - [`lp`]: dyadic partition, Besov/Sobolev norms, Bernstein, commutators.
//! - [`kernel`]: real-space modified Riesz and semigroup kernels.
//! - [`io`]: snapshot format, diagnostics CSV, plain-text run configuration.
//! - [`quadrature`]: adaptive Gauss-Kronrod integration.

pub mod error;
pub mod init;
pub mod io;
pub mod kernel;
pub mod lp;
pub mod moc;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Grid, PhysicalField, SpectralField};
