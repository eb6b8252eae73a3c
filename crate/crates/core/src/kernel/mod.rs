//! Real-space oracles: the modified Riesz kernel `c_α y_j/|y|^{2+α}` and the
//! candidate closed-form kernel of `e^{-h|D|^α}`.
//!
//! Whole-plane Fourier convention `f̂(ζ) = ∫ f(y) e^{-iy·ζ} dy`, under which
//! `R_{α,j}` has multiplier `-iζ_j|ζ|^{α-2}`. The velocity of the solver is
//! `u = (-R_{α,2}θ, R_{α,1}θ)`.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_log, Tolerance};
use crate::spectral::{modified_riesz_velocity, Grid, PhysicalField, SpectralField};

/// Relative size of `f` on the truncation circle above which the support is
/// reported as violated.
const SUPPORT_TOL: f64 = 1e-12;

/// `c_{α,n} = Γ((n+α)/2) / (2^{1-α} π^{n/2} Γ((2-α)/2))`.
pub fn riesz_constant(alpha: f64, n_dim: u32) -> Result<f64> {
    check_alpha(alpha)?;
    if n_dim == 0 {
        return Err(Error::out_of_range("n_dim", 0.0, "n ≥ 1"));
    }
    let n = n_dim as f64;
    Ok(gamma(0.5 * (n + alpha)) / (2f64.powf(1.0 - alpha) * PI.powf(0.5 * n) * gamma(0.5 * (2.0 - alpha))))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::out_of_range("alpha", alpha, "0 < α < 2"))
    }
}

/// Quadrature setup for [`convolution_riesz`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub alpha: f64,
    /// Component, 1 or 2.
    pub j: usize,
    /// Outer radius `R`; `f(x - y)` must vanish for `|y| ≥ R`.
    pub truncation_radius: f64,
    /// Inner radius `r₀`: the disc `|y| < r₀` is left out (principal value).
    pub inner_cutoff: f64,
    /// Relative tolerance of the radial quadrature.
    pub rel_tol: f64,
}

impl KernelSpec {
    pub fn new(alpha: f64, j: usize, truncation_radius: f64, inner_cutoff: f64) -> Result<Self> {
        let spec = KernelSpec {
            alpha,
            j,
            truncation_radius,
            inner_cutoff,
            rel_tol: 1e-10,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.j != 1 && self.j != 2 {
            return Err(Error::out_of_range("j", self.j as f64, "j ∈ {1, 2}"));
        }
        if !(self.inner_cutoff > 0.0 && self.inner_cutoff < self.truncation_radius) || !self.truncation_radius.is_finite() {
            return Err(Error::out_of_range("inner_cutoff", self.inner_cutoff, "0 < r₀ < R < ∞"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::out_of_range("rel_tol", self.rel_tol, "tol > 0"));
        }
        Ok(())
    }
}

/// `R_{α,j}f(x)` with its error indicators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    /// Radial quadrature error estimate.
    pub quad_error: f64,
    /// Size of the omitted disc `|y| < r₀`, `c π |∂_j f(x)| r₀^{2-α}/(2-α)`
    /// (leading Taylor term, gradient by central difference).
    pub pv_error: f64,
}

/// `c_α ∫_{r₀<|y|<R} y_j/|y|^{2+α} f(x - y) dy` at each point, by polar
/// quadrature with antipodal nodes paired: the angular integrand is
/// `e_j(φ)[f(x - rω) - f(x + rω)]` on `[0, π]`, so the odd kernel cancels
/// exactly at the quadrature level.
pub fn convolution_riesz(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    points: &[(f64, f64)],
    spec: &KernelSpec,
) -> Result<Vec<KernelValue>> {
    spec.validate()?;
    let c = riesz_constant(spec.alpha, 2)?;
    points
        .par_iter()
        .map(|&x| riesz_at(f, x, spec, c))
        .collect()
}

fn riesz_at(f: &(dyn Fn(f64, f64) -> f64 + Sync), x: (f64, f64), spec: &KernelSpec, c: f64) -> Result<KernelValue> {
    let big_r = spec.truncation_radius;
    let at = |r: f64, phi: f64| f(x.0 - r * phi.cos(), x.1 - r * phi.sin());

    // scale of f seen from x, and its size on the truncation circle
    let mut scale = f(x.0, x.1).abs();
    let mut boundary = 0.0f64;
    for i in 0..256 {
        let phi = 2.0 * PI * i as f64 / 256.0;
        boundary = boundary.max(at(big_r, phi).abs());
        for k in 1..64 {
            scale = scale.max(at(big_r * k as f64 / 64.0, phi).abs());
        }
    }
    if boundary > SUPPORT_TOL * scale {
        return Err(Error::SupportViolation);
    }
    if scale == 0.0 {
        return Ok(KernelValue { value: 0.0, quad_error: 0.0, pv_error: 0.0 });
    }

    let alpha = spec.alpha;
    let comp = |phi: f64| if spec.j == 1 { phi.cos() } else { phi.sin() };
    let inner_tol = Tolerance {
        abs: 1e-15 * scale,
        rel: 1e-12,
        max_intervals: 2000,
    };
    let failure: Cell<Option<Error>> = Cell::new(None);
    let radial = |r: f64| -> f64 {
        let ang = integrate(|phi| comp(phi) * (at(r, phi) - at(r, phi + PI)), 0.0, PI, &[0.5 * PI], inner_tol);
        match ang {
            Ok(q) => q.value * r.powf(-alpha),
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let outer_tol = Tolerance {
        abs: 1e-14 * scale * big_r.powf(2.0 - alpha).max(1.0),
        rel: spec.rel_tol,
        max_intervals: 2000,
    };
    let q = integrate_log(radial, spec.inner_cutoff, big_r, &[], outer_tol);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let q = q?;

    let h = 1e-5 * spec.inner_cutoff.max(1e-3);
    let grad = if spec.j == 1 {
        (f(x.0 + h, x.1) - f(x.0 - h, x.1)) / (2.0 * h)
    } else {
        (f(x.0, x.1 + h) - f(x.0, x.1 - h)) / (2.0 * h)
    };
    let pv_error = c * PI * grad.abs() * spec.inner_cutoff.powf(2.0 - alpha) / (2.0 - alpha);
    Ok(KernelValue {
        value: c * q.value,
        quad_error: c * q.error,
        pv_error,
    })
}

/// Spectral `R_{α,j}` on the torus: multiplier `-ik_j|k|^{α-2}`, zero on the
/// mean and on Nyquist lines. `R_{α,1}θ = u₂` and `R_{α,2}θ = -u₁`.
pub fn spectral_riesz(f: &SpectralField, alpha: f64, j: usize) -> Result<SpectralField> {
    let (u1, u2) = modified_riesz_velocity(f, alpha)?;
    match j {
        1 => Ok(u2),
        2 => Ok(u1.scaled(-1.0)),
        _ => Err(Error::out_of_range("j", j as f64, "j ∈ {1, 2}")),
    }
}

/// `∫₀^∞ t (1+t²)^{-(2+α)/2} dt` by quadrature (equals `1/α`).
fn radial_mass(alpha: f64) -> Result<f64> {
    let g = |t: f64| t * (1.0 + t * t).powf(-0.5 * (2.0 + alpha));
    let tol = Tolerance::relative(1e-13);
    let head = integrate(g, 0.0, 1.0, &[], tol)?;
    let horizon = 1e12f64;
    let body = integrate_log(g, 1.0, horizon, &[10.0, 100.0], tol)?;
    // beyond H the integrand is t^{-1-α}(1 + O(t^{-2}))
    let tail = horizon.powf(-alpha) / alpha;
    Ok(head.value + body.value + tail)
}

/// Normalization `c'` making `c' h (|x|² + α²h^{2/α})^{-(2+α)/2}` a unit-mass
/// kernel, computed by radial quadrature. Independent of `h`.
pub fn semigroup_normalization(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    // ∫P = c' h 2π a^{-α} I with a^α = α^α h
    let a_alpha = alpha.powf(alpha);
    Ok(a_alpha / (2.0 * PI * radial_mass(alpha)?))
}

/// Candidate kernel `P^α_h(x) = c' h / (|x|² + α²h^{2/α})^{(2+α)/2}`.
pub fn semigroup_kernel_eval(x: (f64, f64), h: f64, alpha: f64) -> Result<f64> {
    let c = semigroup_normalization(alpha)?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::out_of_range("h", h, "h > 0"));
    }
    Ok(kernel_value(c, x.0 * x.0 + x.1 * x.1, h, alpha))
}

fn kernel_value(c: f64, r2: f64, h: f64, alpha: f64) -> f64 {
    c * h * (r2 + alpha * alpha * h.powf(2.0 / alpha)).powf(-0.5 * (2.0 + alpha))
}

/// Torus kernel of `e^{-h|D|^α}`: `Σ_k e^{-h|k|^α} e^{ik·x} / (2π)²`.
pub fn torus_semigroup_kernel(grid: &Grid, h: f64, alpha: f64) -> Result<PhysicalField> {
    let mut hat = SpectralField::zeros(grid.clone());
    let norm = 1.0 / (4.0 * PI * PI);
    for (idx, c) in hat.coeffs_mut().iter_mut().enumerate() {
        *c = Complex64::new(norm * (-h * grid.kmag_at(idx).powf(alpha)).exp(), 0.0);
    }
    hat.to_physical()
}

/// Images summed in each direction by [`periodized_semigroup_kernel`].
const IMAGES: i64 = 20;

/// `Σ_m P^α_h(x + 2πm)` on the grid: images with `|m|∞ ≤ 20` summed
/// directly, the rest replaced by the far-field integral
/// `c' h ∫_{outside} |y|^{-2-α} dy / (2π)²`.
pub fn periodized_semigroup_kernel(grid: &Grid, h: f64, alpha: f64) -> Result<PhysicalField> {
    let c = semigroup_normalization(alpha)?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::out_of_range("h", h, "h > 0"));
    }
    let n = grid.n();
    let two_pi = 2.0 * PI;
    // outside the square [-L, L]², L = (2M+1)π:
    // ∫|y|^{-2-α} = (8 L^{-α}/α) ∫₀^{π/4} cos^α φ dφ
    let half = (2 * IMAGES + 1) as f64 * PI;
    let wedge = integrate(|phi: f64| phi.cos().powf(alpha), 0.0, 0.25 * PI, &[], Tolerance::relative(1e-13))?.value;
    let far = c * h * 8.0 * half.powf(-alpha) / alpha * wedge / (two_pi * two_pi);
    let values = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            // centred coordinates so the image square is symmetric about x
            let centre = |a: usize| {
                let x = grid.coord(a);
                if x >= PI { x - two_pi } else { x }
            };
            let (x1, x2) = (centre(idx / n), centre(idx % n));
            let mut s = 0.0;
            for m1 in -IMAGES..=IMAGES {
                let y1 = x1 + two_pi * m1 as f64;
                for m2 in -IMAGES..=IMAGES {
                    let y2 = x2 + two_pi * m2 as f64;
                    s += kernel_value(c, y1 * y1 + y2 * y2, h, alpha);
                }
            }
            s + far
        })
        .collect();
    PhysicalField::new(grid.clone(), values)
}

/// `max_x |Σ_m P^α_h(x + 2πm) - K_h(x)|` over the grid, `K_h` the exact torus
/// kernel, together with `max |K_h|` for scale.
pub fn semigroup_compare(h: f64, alpha: f64, grid: &Grid) -> Result<(f64, f64)> {
    let exact = torus_semigroup_kernel(grid, h, alpha)?;
    let closed = periodized_semigroup_kernel(grid, h, alpha)?;
    let dev = exact
        .values()
        .iter()
        .zip(closed.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok((dev, exact.max_abs()))
}

/// Mean-zero radial bump `(1 - r²/2s²) e^{-r²/2s²}` centred at `c`, i.e.
/// `-(s²/2) Δ e^{-r²/2s²}`.
pub fn mexican_hat(center: (f64, f64), s: f64) -> impl Fn(f64, f64) -> f64 + Sync {
    move |x1, x2| {
        let r2 = ((x1 - center.0).powi(2) + (x2 - center.1).powi(2)) / (2.0 * s * s);
        (1.0 - r2) * (-r2).exp()
    }
}
