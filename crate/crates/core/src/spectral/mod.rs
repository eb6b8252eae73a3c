//! Periodic grids, the discrete Fourier transform and spectral operators.
//!
//! Transform convention: `f(x) = Σ_k f̂_k e^{ik·x}`, the forward transform
//! carries the `1/n²` factor. With it, Parseval reads
//! `Δx² Σ_x |f(x)|² = (2π)² Σ_k |f̂_k|²`.

mod field;
mod grid;
mod ops;

pub use field::{PhysicalField, SpectralField, HERMITIAN_TOL};
pub use grid::Grid;
pub use ops::{
    dealias, divergence, fractional_derivative, galerkin_project, gradient,
    modified_riesz_velocity, pointwise_product,
};
pub(crate) use ops::{fractional_power, riesz_velocity_unchecked};
