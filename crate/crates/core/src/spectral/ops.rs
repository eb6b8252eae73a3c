//! Fourier multipliers and projections.
//!
//! Every symbol that is singular or undefined at `k = 0` (`|k|^β`,
//! `|k|^{α-2}`) is taken to be `0` there.

use num_complex::Complex64;

use super::{PhysicalField, SpectralField};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `|D|^β`, multiplier `|k|^β`, for `β ∈ (0, 2]`.
pub fn fractional_derivative(f: &SpectralField, beta: f64) -> Result<SpectralField> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::out_of_range("beta", beta, "0 < β ≤ 2"));
    }
    Ok(fractional_power(f, beta))
}

/// `|D|^s` for any real `s`, zero on the mean mode. Used internally where the
/// exponent may be negative or exceed 2.
pub(crate) fn fractional_power(f: &SpectralField, s: f64) -> SpectralField {
    f.map_radial(|k| if k == 0.0 { 0.0 } else { k.powf(s) })
}

/// Velocity `u = |D|^{α-1} R^⊥ θ`:
/// `û₁ = i k₂ |k|^{α-2} θ̂`, `û₂ = -i k₁ |k|^{α-2} θ̂`.
///
/// Modes on a Nyquist line (`k₁` or `k₂` equal to `-n/2`) are dropped so that
/// `k·û = 0` holds exactly and the output stays Hermitian.
pub fn modified_riesz_velocity(
    f: &SpectralField,
    alpha: f64,
) -> Result<(SpectralField, SpectralField)> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::out_of_range("alpha", alpha, "0 < α < 2"));
    }
    Ok(riesz_velocity_unchecked(f, alpha))
}

pub(crate) fn riesz_velocity_unchecked(
    f: &SpectralField,
    alpha: f64,
) -> (SpectralField, SpectralField) {
    let nyq = f.grid().nyquist();
    let factor = |k1: i64, k2: i64| -> f64 {
        if (k1 == 0 && k2 == 0) || k1 == nyq || k2 == nyq {
            0.0
        } else {
            ((k1 * k1 + k2 * k2) as f64).powf(0.5 * (alpha - 2.0))
        }
    };
    let u1 = f.map_symbol(|k1, k2| I * (k2 as f64 * factor(k1, k2)));
    let u2 = f.map_symbol(|k1, k2| -I * (k1 as f64 * factor(k1, k2)));
    (u1, u2)
}

/// Spectral gradient `(i k₁ f̂, i k₂ f̂)`; the odd symbol is zeroed on the
/// Nyquist line of its own axis.
pub fn gradient(f: &SpectralField) -> (SpectralField, SpectralField) {
    let nyq = f.grid().nyquist();
    let d = |k: i64| if k == nyq { 0.0 } else { k as f64 };
    let g1 = f.map_symbol(|k1, _| I * d(k1));
    let g2 = f.map_symbol(|_, k2| I * d(k2));
    (g1, g2)
}

/// Spectral divergence `i k₁ v̂₁ + i k₂ v̂₂` with the same Nyquist rule as
/// [`gradient`].
pub fn divergence(v1: &SpectralField, v2: &SpectralField) -> Result<SpectralField> {
    let (d1, _) = gradient(v1);
    let (_, d2) = gradient(v2);
    d1.add_scaled(1.0, &d2)
}

/// Two-thirds rule: zero every mode with `max(|k₁|, |k₂|) > n/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let cutoff = f.grid().n() as f64 / 3.0;
    f.map_symbol(|k1, k2| {
        let m = k1.abs().max(k2.abs()) as f64;
        if m > cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Friedrichs projection `J_ε`: keep modes with `|k| ≤ 1/ε`.
pub fn galerkin_project(f: &SpectralField, eps: f64) -> Result<SpectralField> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::out_of_range("eps", eps, "ε > 0"));
    }
    let radius = 1.0 / eps;
    Ok(f.map_radial(|k| if k <= radius { 1.0 } else { 0.0 }))
}

/// Pointwise product of two physical fields on the same grid.
pub fn pointwise_product(a: &PhysicalField, b: &PhysicalField) -> Result<PhysicalField> {
    super::field::check_same_grid(a.grid(), b.grid())?;
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x * y)
        .collect();
    PhysicalField::new(a.grid().clone(), values)
}
