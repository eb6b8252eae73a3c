//! The Ω and Υ functionals of a concave modulus.
//!
//! ```text
//! Ω(ξ)/A  = ∫₀^ξ ω(η) η^{-α} dη + ξ ∫_ξ^∞ ω(η) η^{-1-α} dη
//! Υ(ξ)/νB = ∫₀^{ξ/2} [ω(ξ+2η) + ω(ξ-2η) - 2ω(ξ)] η^{-1-α} dη
//!         + ∫_{ξ/2}^∞ [ω(2η+ξ) - ω(2η-ξ) - 2ω(ξ)] η^{-1-α} dη
//! ```
//!
//! Both are integrated in `ln η` with the kinks of `ω` as breakpoints, up to a
//! horizon `H`; the parts beyond `H` and below the smallest resolved `η` are
//! closed analytically. Reported errors are estimates, not rigorous bounds.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_log, QuadResult, Tolerance};

use super::ConcaveModulus;

/// Relative accuracy the functionals aim for unless told otherwise.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Relative size, against the natural scale of the integral, below which
/// rounding noise is accepted as converged.
const NOISE_FLOOR: f64 = 1e-14;

/// A value with an estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    fn from_quad(q: QuadResult) -> Self {
        Estimate {
            value: q.value,
            error: q.error,
        }
    }

    fn add(self, other: Estimate) -> Self {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
        }
    }

    fn scale(self, c: f64) -> Self {
        Estimate {
            value: c * self.value,
            error: c.abs() * self.error,
        }
    }
}

fn horizon(xi: f64) -> f64 {
    (xi * 30f64.exp()).max(40f64.exp())
}

fn check_xi(xi: f64) -> Result<()> {
    if xi > 0.0 && xi.is_finite() {
        Ok(())
    } else {
        Err(Error::out_of_range("xi", xi, "0 < ξ < ∞"))
    }
}

fn tolerance(rel: f64, scale: f64) -> Tolerance {
    Tolerance {
        abs: (NOISE_FLOOR * scale).max(1e-300),
        rel,
        max_intervals: 4000,
    }
}

/// `Ω(ξ) = A(∫₀^ξ ω η^{-α} + ξ∫_ξ^∞ ω η^{-1-α})`.
pub fn omega_functional<M: ConcaveModulus + ?Sized>(omega: &M, xi: f64, a: f64) -> Result<Estimate> {
    omega_functional_tol(omega, xi, a, DEFAULT_REL_TOL)
}

pub fn omega_functional_tol<M: ConcaveModulus + ?Sized>(
    omega: &M,
    xi: f64,
    a: f64,
    rel: f64,
) -> Result<Estimate> {
    check_xi(xi)?;
    let alpha = omega.alpha();
    let kinks = omega.kinks();
    let first_kink = kinks.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = tolerance(rel, omega.value(xi) * xi.powf(1.0 - alpha));

    let b = xi.min(first_kink);
    let mut head = Estimate {
        value: omega.head_moment(b),
        error: 0.0,
    };
    if xi > b {
        let q = integrate_log(|eta| omega.value(eta) * eta.powf(-alpha), b, xi, &kinks, tol)?;
        head = head.add(Estimate::from_quad(q));
    }

    let h = horizon(xi);
    let body = integrate_log(|eta| omega.value(eta) * eta.powf(-1.0 - alpha), xi, h, &kinks, tol)?;
    let (tail, tail_err) = omega
        .tail_moment(h)
        .ok_or_else(|| Error::QuadratureFailure(format!("∫ω(η)η^(-1-α) diverges for α = {alpha}")))?;
    let far = Estimate::from_quad(body).add(Estimate {
        value: tail,
        error: tail_err,
    });
    Ok(head.add(far.scale(xi)).scale(a))
}

/// `Υ(ξ)`, including the factor `νB`.
pub fn upsilon_functional<M: ConcaveModulus + ?Sized>(omega: &M, xi: f64, nu: f64, b: f64) -> Result<Estimate> {
    upsilon_functional_tol(omega, xi, nu, b, DEFAULT_REL_TOL)
}

pub fn upsilon_functional_tol<M: ConcaveModulus + ?Sized>(
    omega: &M,
    xi: f64,
    nu: f64,
    b: f64,
    rel: f64,
) -> Result<Estimate> {
    check_xi(xi)?;
    let alpha = omega.alpha();
    let kinks = omega.kinks();
    let w = omega.value(xi);
    let tol = tolerance(rel, w * xi.powf(-alpha));

    let Some(near) = near_part(omega, xi, &kinks, tol)? else {
        return Ok(Estimate {
            value: f64::NEG_INFINITY,
            error: 0.0,
        });
    };

    // ∫_{ξ/2}^H, breaking where 2η ± ξ crosses a kink
    let mut breaks = Vec::new();
    for &k in &kinks {
        breaks.push(0.5 * (xi + k));
        breaks.push(0.5 * (k - xi));
    }
    let h = horizon(xi);
    let body = integrate_log(
        |eta| (omega.symmetric_increment(2.0 * eta, xi.min(2.0 * eta)) - 2.0 * w) * eta.powf(-1.0 - alpha),
        0.5 * xi,
        h,
        &breaks,
        tol,
    )?;
    // beyond H: -2ω(ξ)H^{-α}/α, plus ∫ [ω(2η+ξ) - ω(2η-ξ)] η^{-1-α}, which
    // lies between 0 and about 2ξω'(2H)H^{-α}/α
    let hpow = h.powf(-alpha) / alpha;
    let inc = 2.0 * xi * omega.slope(2.0 * h) * hpow;
    let far = Estimate {
        value: -2.0 * w * hpow + inc,
        error: inc,
    };

    Ok(near.add(Estimate::from_quad(body)).add(far).scale(nu * b))
}

/// `∫₀^{ξ/2} [ω(ξ+2η) + ω(ξ-2η) - 2ω(ξ)] η^{-1-α} dη`; `None` when it
/// diverges (ξ on a kink with α ≥ 1).
fn near_part<M: ConcaveModulus + ?Sized>(
    omega: &M,
    xi: f64,
    kinks: &[f64],
    tol: Tolerance,
) -> Result<Option<Estimate>> {
    let alpha = omega.alpha();
    let on_kink = kinks.contains(&xi);
    if on_kink && alpha >= 1.0 {
        return Ok(None);
    }
    // below eta_lo the second difference is ω''(ξ)(2η)² to relative
    // accuracy (η/d)², d the distance to the nearest kink
    let mut eta_lo = 1e-6 * xi;
    for &k in kinks {
        let d = (xi - k).abs();
        if d > 0.0 {
            eta_lo = eta_lo.min(0.5e-6 * d);
        }
    }
    if on_kink {
        eta_lo = 1e-30 * xi;
    }
    let mut breaks = vec![0.125 * xi];
    for &k in kinks {
        breaks.push(0.5 * (k - xi));
        breaks.push(0.5 * (xi - k));
    }
    let f = |eta: f64| omega.second_difference(xi, (2.0 * eta).min(xi)) * eta.powf(-1.0 - alpha);
    let body = integrate_log(f, eta_lo, 0.5 * xi, &breaks, tol)?;
    let edge = f(eta_lo) * eta_lo;
    let below = if on_kink {
        // second difference is linear in η here
        let v = edge / (1.0 - alpha);
        Estimate { value: v, error: v.abs() }
    } else {
        let v = edge / (2.0 - alpha);
        Estimate {
            value: v,
            error: 1e-6 * v.abs(),
        }
    };
    Ok(Some(Estimate::from_quad(body).add(below)))
}
