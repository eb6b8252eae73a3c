use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::functionals::{omega_functional, upsilon_functional};
use super::{ConcaveModulus, MocKind, ModulusOfContinuity};

/// The constants `A` (Ω bound), `B` (Υ bound) and the viscosity `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseConstants {
    pub a: f64,
    pub b: f64,
    pub nu: f64,
}

impl CaseConstants {
    pub fn new(a: f64, b: f64, nu: f64) -> Result<Self> {
        for (name, v) in [("A", a), ("B", b), ("nu", nu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::out_of_range(name, v, "must be positive"));
            }
        }
        Ok(CaseConstants { a, b, nu })
    }
}

impl Default for CaseConstants {
    fn default() -> Self {
        CaseConstants {
            a: 1.0,
            b: 1.0,
            nu: 1.0,
        }
    }
}

/// One closed-form condition of the small-ξ / large-ξ arguments, as
/// `lhs < rhs` (or `≤`, see `strict`).
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
}

impl Hypothesis {
    fn lt(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Hypothesis {
            name,
            lhs,
            rhs,
            strict: true,
        }
    }

    fn le(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Hypothesis {
            name,
            lhs,
            rhs,
            strict: false,
        }
    }

    pub fn holds(&self) -> bool {
        if self.strict {
            self.lhs < self.rhs
        } else {
            self.lhs <= self.rhs
        }
    }
}

/// Coefficient `κ` in `∫₀^{ξ/2} ω''(ξ)(2η)² η^{-1-α} dη = -κ ξ^{1-α+s}` for
/// `ω = ξ - ξ^{1+s}`.
fn taylor_coefficient(alpha: f64, s: f64) -> f64 {
    s * (1.0 + s) * 2f64.powf(alpha) / (2.0 - alpha)
}

/// The closed-form conditions under which `Ωω' + Υ < 0` holds for every
/// `ξ ≤ δ` (first group) and every `ξ ≥ δ` (second group).
pub fn case_hypotheses(omega: &ModulusOfContinuity, c: &CaseConstants) -> Vec<Hypothesis> {
    let (al, d, g) = (omega.alpha(), omega.delta(), omega.gamma());
    let (a, nb) = (c.a, c.nu * c.b);
    let wd = omega.eval(d);
    let left = 1.0 - (1.0 + s_of(omega)) * d.powf(s_of(omega));
    match omega.kind() {
        MocKind::Moc1 => {
            let right = g / (2.0 * (d + d.powf(al)));
            vec![
                // positive part ≤ 2Aξ/(α(1-α)), negative part ≤ -κνBξ^{1-α/2}
                Hypothesis::lt(
                    "small-xi dominance",
                    2.0 * a / (al * (1.0 - al)),
                    taylor_coefficient(al, 0.5 * al) * nb * d.powf(-0.5 * al),
                ),
                Hypothesis::lt("gamma below alpha^2 delta", g, al * al * d),
                Hypothesis::lt("delta below (1-alpha/2)^(2/alpha)", d, (1.0 - 0.5 * al).powf(2.0 / al)),
                Hypothesis::le("tail of omega", g / (2.0 * al), wd),
                Hypothesis::le("doubling", 0.5 * LN_2 * g, 0.5 * wd),
                Hypothesis::lt(
                    "large-xi dominance",
                    a * g / (al * (1.0 - al)),
                    nb * 2f64.powf(al) / (2.0 * al),
                ),
                Hypothesis::le("concavity at delta", right, left),
                Hypothesis::le("monotone left branch", 0.0, left),
            ]
        }
        MocKind::Moc2 => {
            let r = s_of(omega);
            let right = g / (4.0 * (d + d.powf(al)));
            vec![
                // positive part ≤ 2Aξ^{2-α}/((α-1)(2-α)), negative part
                // ≤ -r/(2(2-α)) νBξ^{1-α+r}, weaker than the exact Taylor term
                Hypothesis::lt(
                    "small-xi dominance",
                    2.0 * a / ((al - 1.0) * (2.0 - al)),
                    r / (2.0 * (2.0 - al)) * nb * d.powf(r - 1.0),
                ),
                Hypothesis::le(
                    "tail of omega",
                    d.powf(1.0 - al) / al + g / (4.0 * al * al * d.powf(al)),
                    2.0 * d.powf(1.0 - al),
                ),
                Hypothesis::lt("gamma below delta", g, d),
                Hypothesis::le("doubling", LN_2 * g / 4.0, 0.5 * wd),
                Hypothesis::le("tail beyond delta", g / (4.0 * al * al), (2.0 - 1.0 / al) * wd),
                Hypothesis::lt(
                    "large-xi dominance",
                    a * g / (2.0 * d.powf(al - 1.0) * (al - 1.0) * (2.0 - al)),
                    nb * 2f64.powf(al) / (2.0 * al),
                ),
                Hypothesis::le("concavity at delta", right, left),
            ]
        }
    }
}

fn s_of(omega: &ModulusOfContinuity) -> f64 {
    omega.r().unwrap_or(0.5 * omega.alpha())
}

/// Largest `δ` on a halving search, and `γ` at half its ceiling, such that
/// every closed-form condition holds with a safety factor of 1/2.
///
/// `α < 1` selects MOC1 and `α ∈ (1, 2)` MOC2.
pub fn admissible_params(alpha: f64, c: &CaseConstants) -> Result<(f64, f64)> {
    let kind = kind_for(alpha)?;
    let (a, nb) = (c.a, c.nu * c.b);
    let (mut delta, delta_ok): (f64, Box<dyn Fn(f64) -> bool>) = match kind {
        MocKind::Moc1 => {
            let k = taylor_coefficient(alpha, 0.5 * alpha);
            let bound = 0.5 * k * alpha * (1.0 - alpha) * nb / (2.0 * a);
            (
                0.5 * (1.0 - 0.5 * alpha).powf(2.0 / alpha),
                Box::new(move |d: f64| d.powf(0.5 * alpha) <= bound),
            )
        }
        MocKind::Moc2 => {
            let bound = 0.5 * nb * LN_2 * (alpha - 1.0) / (8.0 * a);
            (0.125, Box::new(move |d: f64| d * (1.0 / d).ln() <= bound))
        }
    };
    let gamma_for = |d: f64| -> f64 {
        0.5 * match kind {
            MocKind::Moc1 => (alpha * alpha * d).min(nb * (1.0 - alpha) * 2f64.powf(alpha) / (2.0 * a)),
            MocKind::Moc2 => d.min(
                2f64.powf(alpha) * (alpha - 1.0) * (2.0 - alpha) * nb * d.powf(alpha - 1.0) / (alpha * a),
            ),
        }
    };
    while delta > f64::MIN_POSITIVE {
        if delta_ok(delta) {
            let gamma = gamma_for(delta);
            let omega = ModulusOfContinuity::new(kind, alpha, delta, gamma)?;
            if case_hypotheses(&omega, c).iter().all(Hypothesis::holds) {
                return Ok((delta, gamma));
            }
        }
        delta *= 0.5;
    }
    Err(Error::out_of_range("alpha", alpha, "no admissible δ above the smallest double"))
}

pub(crate) fn kind_for(alpha: f64) -> Result<MocKind> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(MocKind::Moc1)
    } else if alpha > 1.0 && alpha < 2.0 {
        Ok(MocKind::Moc2)
    } else {
        Err(Error::out_of_range("alpha", alpha, "0 < α < 1 or 1 < α < 2"))
    }
}

impl ModulusOfContinuity {
    /// The modulus built from [`admissible_params`].
    pub fn admissible(alpha: f64, c: &CaseConstants) -> Result<Self> {
        let (delta, gamma) = admissible_params(alpha, c)?;
        ModulusOfContinuity::new(kind_for(alpha)?, alpha, delta, gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// Sampling of `ξ` for [`certify_negativity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiRange {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl Default for XiRange {
    fn default() -> Self {
        XiRange {
            min: 1e-6,
            max: 1e6,
            samples: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub kind: MocKind,
    pub alpha: f64,
    pub delta: f64,
    pub gamma: f64,
    pub constants: CaseConstants,
    pub xi_samples: Vec<f64>,
    /// `Ω(ξ)ω'(ξ) + Υ(ξ)` per sample.
    pub margins: Vec<f64>,
    pub error_bounds: Vec<f64>,
    pub hypotheses: Vec<Hypothesis>,
}

impl CertificationReport {
    /// Index of the sample with the largest `margin + error`.
    pub fn worst_index(&self) -> usize {
        (0..self.margins.len())
            .max_by(|&i, &j| {
                let a = self.margins[i] + self.error_bounds[i];
                let b = self.margins[j] + self.error_bounds[j];
                a.total_cmp(&b)
            })
            .unwrap_or(0)
    }

    pub fn worst_margin(&self) -> f64 {
        self.margins.get(self.worst_index()).copied().unwrap_or(f64::NAN)
    }

    pub fn worst_xi(&self) -> f64 {
        self.xi_samples.get(self.worst_index()).copied().unwrap_or(f64::NAN)
    }

    /// First sample whose margin plus error bound is not negative.
    pub fn first_failure(&self) -> Option<(f64, f64)> {
        (0..self.margins.len())
            .find(|&i| !(self.margins[i] + self.error_bounds[i] < 0.0))
            .map(|i| (self.xi_samples[i], self.margins[i]))
    }

    pub fn failed_hypotheses(&self) -> Vec<&Hypothesis> {
        self.hypotheses.iter().filter(|h| !h.holds()).collect()
    }

    pub fn verdict(&self) -> Verdict {
        if !self.margins.is_empty() && self.first_failure().is_none() && self.failed_hypotheses().is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Log-spaced samples over the range, with eight times the density on
/// `[δ/√10, δ√10]` where `ω''` jumps.
pub fn certification_grid(range: &XiRange, delta: f64) -> Result<Vec<f64>> {
    if !(range.min > 0.0 && range.max > range.min && range.max.is_finite()) {
        return Err(Error::out_of_range("xi_min", range.min, "0 < ξ_min < ξ_max < ∞"));
    }
    if range.samples < 2 {
        return Err(Error::out_of_range("samples", range.samples as f64, "at least 2"));
    }
    let log_span = (range.max / range.min).ln();
    let mut xs = log_spaced(range.min, range.max, range.samples);
    let lo = (delta / 10f64.sqrt()).max(range.min);
    let hi = (delta * 10f64.sqrt()).min(range.max);
    if lo < hi {
        let share = (hi / lo).ln() / log_span;
        let extra = ((share * range.samples as f64).ceil() as usize * 8).max(16);
        xs.extend(log_spaced(lo, hi, extra));
        xs.sort_by(f64::total_cmp);
        xs.dedup();
    }
    // the margin is -∞ on the kink itself; sample either side of it
    for x in xs.iter_mut() {
        if *x == delta {
            *x = delta * (1.0 + 4.0 * f64::EPSILON);
        }
    }
    Ok(xs)
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Samples `Ω(ξ)ω'(ξ) + Υ(ξ)` over the range and checks the closed-form
/// conditions covering `ξ` outside it.
pub fn certify_negativity(
    omega: &ModulusOfContinuity,
    constants: &CaseConstants,
    range: &XiRange,
) -> Result<CertificationReport> {
    let xi_samples = certification_grid(range, omega.delta())?;
    let rows: Vec<(f64, f64)> = xi_samples
        .par_iter()
        .map(|&xi| -> Result<(f64, f64)> {
            let om = omega_functional(omega, xi, constants.a)?;
            let up = upsilon_functional(omega, xi, constants.nu, constants.b)?;
            let slope = omega.slope(xi);
            Ok((om.value * slope + up.value, om.error * slope + up.error))
        })
        .collect::<Result<_>>()?;
    let (margins, error_bounds) = rows.into_iter().unzip();
    Ok(CertificationReport {
        kind: omega.kind(),
        alpha: omega.alpha(),
        delta: omega.delta(),
        gamma: omega.gamma(),
        constants: *constants,
        xi_samples,
        margins,
        error_bounds,
        hypotheses: case_hypotheses(omega, constants),
    })
}
