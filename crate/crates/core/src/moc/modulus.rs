use crate::error::{Error, Result};
use crate::quadrature::fixed_gl10;

/// Which of the two piecewise families a modulus belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MocKind {
    /// `α ∈ (0,1)`: `ξ - ξ^{1+α/2}` near zero, `ω' = γ/(2(ξ+ξ^α))` beyond `δ`.
    Moc1,
    /// `α ∈ (1,2)`: `ξ - ξ^{1+r}` near zero, `ω' = γ/(4(ξ+ξ^α))` beyond `δ`.
    Moc2,
}

use MocKind as Kind;

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Moc1 => "MOC1",
            Kind::Moc2 => "MOC2",
        })
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MOC1" => Ok(Kind::Moc1),
            "MOC2" => Ok(Kind::Moc2),
            other => Err(Error::Config(format!("unknown modulus kind '{other}'"))),
        }
    }
}

/// An increasing concave function on `[0, ∞)` with `ω(0) = 0`, as seen by the
/// Ω/Υ functionals.
///
/// The defaults are the obvious ones; implementors override
/// [`increment`](Self::increment) and
/// [`second_difference`](Self::second_difference) when they can avoid the
/// cancellation in `ω(b) - ω(a)`.
pub trait ConcaveModulus: Sync {
    /// Dissipation exponent the functionals are taken with.
    fn alpha(&self) -> f64;

    fn value(&self, xi: f64) -> f64;

    /// `ω'(ξ)`; at a kink the left derivative (the larger one).
    fn slope(&self, xi: f64) -> f64;

    /// Points where `ω'` jumps.
    fn kinks(&self) -> Vec<f64>;

    /// `ω(b) - ω(a)` for `0 ≤ a ≤ b`.
    fn increment(&self, a: f64, b: f64) -> f64 {
        self.value(b) - self.value(a)
    }

    /// `ω(m+h) - ω(m-h)` for `0 ≤ h ≤ m`. Overriding this matters when
    /// `m ≫ h`, where `m ± h` have already lost the digits of `h`.
    fn symmetric_increment(&self, m: f64, h: f64) -> f64 {
        self.increment((m - h).max(0.0), m + h)
    }

    /// `ω(ξ+h) + ω(ξ-h) - 2ω(ξ)` for `0 < h ≤ ξ`.
    fn second_difference(&self, xi: f64, h: f64) -> f64 {
        self.increment(xi, xi + h) - self.increment(xi - h, xi)
    }

    /// `∫₀^b ω(η) η^{-α} dη` in closed form, for `b` up to the first kink.
    fn head_moment(&self, b: f64) -> f64;

    /// `∫_H^∞ ω(η) η^{-1-α} dη` with an error estimate, or `None` when it
    /// diverges.
    fn tail_moment(&self, h: f64) -> Option<(f64, f64)>;
}

/// The linear modulus `ω(ξ) = cξ`, mostly useful as a test input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModulus {
    pub slope: f64,
    pub alpha: f64,
}

impl ConcaveModulus for LinearModulus {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn value(&self, xi: f64) -> f64 {
        self.slope * xi
    }

    fn slope(&self, _xi: f64) -> f64 {
        self.slope
    }

    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }

    fn increment(&self, a: f64, b: f64) -> f64 {
        self.slope * (b - a)
    }

    fn symmetric_increment(&self, _m: f64, h: f64) -> f64 {
        2.0 * self.slope * h
    }

    fn second_difference(&self, _xi: f64, _h: f64) -> f64 {
        0.0
    }

    fn head_moment(&self, b: f64) -> f64 {
        self.slope * b.powf(2.0 - self.alpha) / (2.0 - self.alpha)
    }

    fn tail_moment(&self, h: f64) -> Option<(f64, f64)> {
        (self.alpha > 1.0).then(|| (self.slope * h.powf(1.0 - self.alpha) / (self.alpha - 1.0), 0.0))
    }
}

/// `ω′` at a point: a single value, or both one-sided values at the kink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivative {
    Value(f64),
    OneSided { left: f64, right: f64 },
}

/// One of the two piecewise moduli.
///
/// Near zero `ω(ξ) = ξ - ξ^{1+s}` with `s = α/2` (MOC1) or
/// `s = r = ln 2 / ln(1/δ)` (MOC2, so that `δ^r = 1/2`); beyond `δ`,
/// `ω'(ξ) = γ/(c(ξ + ξ^α))` with `c = 2` or `4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusOfContinuity {
    kind: Kind,
    alpha: f64,
    delta: f64,
    gamma: f64,
    s: f64,
    c: f64,
    omega_delta: f64,
}

impl ModulusOfContinuity {
    pub fn new(kind: Kind, alpha: f64, delta: f64, gamma: f64) -> Result<Self> {
        match kind {
            Kind::Moc1 if !(alpha > 0.0 && alpha < 1.0) => {
                return Err(Error::out_of_range("alpha", alpha, "MOC1 needs 0 < α < 1"))
            }
            Kind::Moc2 if !(alpha > 1.0 && alpha < 2.0) => {
                return Err(Error::out_of_range("alpha", alpha, "MOC2 needs 1 < α < 2"))
            }
            _ => {}
        }
        let delta_max = if kind == Kind::Moc1 { 1.0 } else { 0.25 };
        if !(delta > 0.0 && delta < delta_max) {
            return Err(Error::out_of_range(
                "delta",
                delta,
                if kind == Kind::Moc1 { "0 < δ < 1" } else { "0 < δ < 1/4" },
            ));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::out_of_range("gamma", gamma, "γ > 0"));
        }
        let (s, c) = match kind {
            Kind::Moc1 => (0.5 * alpha, 2.0),
            Kind::Moc2 => (std::f64::consts::LN_2 / (1.0 / delta).ln(), 4.0),
        };
        let mut m = ModulusOfContinuity {
            kind,
            alpha,
            delta,
            gamma,
            s,
            c,
            omega_delta: 0.0,
        };
        m.omega_delta = match kind {
            Kind::Moc1 => m.left_value(delta),
            // δ^r = 1/2 by construction of r
            Kind::Moc2 => 0.5 * delta,
        };
        Ok(m)
    }

    pub fn moc1(alpha: f64, delta: f64, gamma: f64) -> Result<Self> {
        Self::new(Kind::Moc1, alpha, delta, gamma)
    }

    pub fn moc2(alpha: f64, delta: f64, gamma: f64) -> Result<Self> {
        Self::new(Kind::Moc2, alpha, delta, gamma)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The MOC2 exponent `r`; `None` for MOC1.
    pub fn r(&self) -> Option<f64> {
        (self.kind == Kind::Moc2).then_some(self.s)
    }

    /// `ω(ξ)` for `ξ ≥ 0`; NaN for negative or NaN input.
    pub fn eval(&self, xi: f64) -> f64 {
        if !(xi >= 0.0) {
            return f64::NAN;
        }
        if xi <= self.delta {
            self.left_value(xi)
        } else {
            self.omega_delta + self.right_increment(self.delta, xi)
        }
    }

    pub fn derivative(&self, xi: f64) -> Derivative {
        if xi == self.delta {
            Derivative::OneSided {
                left: self.left_slope(xi),
                right: self.right_slope(xi),
            }
        } else if xi < self.delta {
            Derivative::Value(self.left_slope(xi))
        } else {
            Derivative::Value(self.right_slope(xi))
        }
    }

    /// `sup ω`: `+∞` for MOC1, and for MOC2
    /// `ω(δ) + γ/(4(α-1))·ln(1 + δ^{1-α})`.
    pub fn supremum(&self) -> f64 {
        match self.kind {
            Kind::Moc1 => f64::INFINITY,
            Kind::Moc2 => {
                self.omega_delta
                    + self.gamma / (self.c * (self.alpha - 1.0)) * self.delta.powf(1.0 - self.alpha).ln_1p()
            }
        }
    }

    /// `ω⁻¹(y)` by bisection in `ln ξ`.
    ///
    /// Returns `+∞` when `ω` stays below `y` on all finite doubles, which
    /// happens for MOC1 with a small `γ` since it only grows logarithmically.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::out_of_range("y", y, "y ≥ 0"));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let sup = self.supremum();
        if y >= sup {
            return Err(Error::ValueExceedsSupremum { value: y, supremum: sup });
        }
        if y == self.omega_delta {
            return Ok(self.delta);
        }
        // ω(ξ) ≤ ξ, so ξ = y is a lower bracket
        let mut lo = y;
        let mut hi = if y < self.omega_delta { self.delta } else { 2.0 * y.max(self.delta) };
        while self.eval(hi) < y {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Ok(f64::INFINITY);
            }
        }
        let tol = 1e-12 * y.max(1.0);
        for _ in 0..400 {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.eval(mid);
            if v < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if (v - y).abs() <= tol && hi / lo - 1.0 < 1e-15 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn left_value(&self, xi: f64) -> f64 {
        if xi == 0.0 {
            return 0.0;
        }
        // ξ(1 - ξ^s) without cancelling when ξ^s is close to 1
        -xi * (self.s * xi.ln()).exp_m1()
    }

    fn left_slope(&self, xi: f64) -> f64 {
        1.0 - (1.0 + self.s) * xi.powf(self.s)
    }

    fn right_slope(&self, xi: f64) -> f64 {
        self.gamma / (self.c * (xi + xi.powf(self.alpha)))
    }

    /// `b^p - a^p` for `0 < a ≤ b`, accurate when `b ≈ a`.
    fn pow_gap(a: f64, b: f64, p: f64) -> f64 {
        if b > 2.0 * a {
            // no cancellation here, and (b - a)/a may overflow
            return b.powf(p) - a.powf(p);
        }
        a.powf(p) * (p * ((b - a) / a).ln_1p()).exp_m1()
    }

    fn left_increment(&self, a: f64, b: f64) -> f64 {
        let p = 1.0 + self.s;
        let gap = if a == 0.0 { b.powf(p) } else { Self::pow_gap(a, b, p) };
        (b - a) - gap
    }

    /// The antiderivative of `1/(x + x^α)` is `ln(1 + x^{1-α})/(1-α)` for
    /// either sign of `1-α`.
    fn right_increment(&self, a: f64, b: f64) -> f64 {
        let q = 1.0 - self.alpha;
        let gap = Self::pow_gap(a, b, q);
        self.gamma / (self.c * q) * (gap / (1.0 + a.powf(q))).ln_1p()
    }

    /// `ω'(ξ+s) - ω'(ξ-s)` on one branch, written without cancellation.
    fn slope_gap(&self, xi: f64, s: f64) -> f64 {
        let t = s / xi;
        let sym = |p: f64| (p * t.ln_1p()).exp_m1() - (p * (-t).ln_1p()).exp_m1();
        if xi + s <= self.delta {
            -(1.0 + self.s) * xi.powf(self.s) * sym(self.s)
        } else {
            let plus = (xi + s) + (xi + s).powf(self.alpha);
            let minus = (xi - s) + (xi - s).powf(self.alpha);
            let num = -2.0 * s - xi.powf(self.alpha) * sym(self.alpha);
            self.gamma / self.c * num / (plus * minus)
        }
    }

    fn tail_series(&self, h: f64) -> (f64, f64) {
        // ∫_H^∞ η^{-α}/(η + η^α) dη expanded in the small ratio H^{-|1-α|}
        let a = self.alpha;
        let (lead, step, d0, dstep) = if a < 1.0 {
            (h.powf(-a), h.powf(a - 1.0), a, 1.0 - a)
        } else {
            (h.powf(1.0 - 2.0 * a), h.powf(1.0 - a), 2.0 * a - 1.0, a - 1.0)
        };
        let mut sum = 0.0;
        let mut pw = lead;
        let mut sign = 1.0;
        for m in 0..100_000 {
            let term = sign * pw / (d0 + m as f64 * dstep);
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                return (sum, term.abs());
            }
            pw *= step;
            sign = -sign;
        }
        (sum, pw / d0)
    }
}

impl ConcaveModulus for ModulusOfContinuity {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn value(&self, xi: f64) -> f64 {
        self.eval(xi)
    }

    fn slope(&self, xi: f64) -> f64 {
        if xi <= self.delta {
            self.left_slope(xi)
        } else {
            self.right_slope(xi)
        }
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.delta]
    }

    fn increment(&self, a: f64, b: f64) -> f64 {
        debug_assert!(a <= b);
        let d = self.delta;
        if b <= d {
            self.left_increment(a, b)
        } else if a >= d {
            self.right_increment(a, b)
        } else {
            self.left_increment(a, d) + self.right_increment(d, b)
        }
    }

    fn symmetric_increment(&self, m: f64, h: f64) -> f64 {
        let d = self.delta;
        if h == 0.0 {
            return 0.0;
        }
        let t = h / m;
        let sym = |p: f64| (p * t.ln_1p()).exp_m1() - (p * (-t).ln_1p()).exp_m1();
        if m - h >= d {
            let q = 1.0 - self.alpha;
            let gap = m.powf(q) * sym(q);
            let base = 1.0 + (m - h).powf(q);
            self.gamma / (self.c * q) * (gap / base).ln_1p()
        } else if m + h <= d && m > h {
            2.0 * h - m.powf(1.0 + self.s) * sym(1.0 + self.s)
        } else {
            self.increment((m - h).max(0.0), m + h)
        }
    }

    fn second_difference(&self, xi: f64, h: f64) -> f64 {
        let one_branch = xi + h <= self.delta || xi - h >= self.delta;
        if one_branch && h <= 0.25 * xi {
            fixed_gl10(|s| self.slope_gap(xi, s), 0.0, h)
        } else {
            self.increment(xi, xi + h) - self.increment(xi - h, xi)
        }
    }

    fn head_moment(&self, b: f64) -> f64 {
        let a = self.alpha;
        let s = self.s;
        b.powf(2.0 - a) / (2.0 - a) - b.powf(2.0 + s - a) / (2.0 + s - a)
    }

    fn tail_moment(&self, h: f64) -> Option<(f64, f64)> {
        // integrate by parts: ω(H)H^{-α}/α + (1/α)∫_H^∞ ω'(η) η^{-α} dη
        let a = self.alpha;
        let (series, err) = self.tail_series(h);
        let k = self.gamma / (self.c * a);
        Some((self.eval(h) * h.powf(-a) / a + k * series, k * err))
    }
}

/// `3c₀ = δ/2 + (γ/8)ln(1/δ) + γ/(8(α-1))`, the data size below which the
/// bounded modulus MOC2 can still be inverted at `3‖θ₀‖∞`.
pub fn smallness_c0(omega: &ModulusOfContinuity) -> Result<f64> {
    if omega.kind != Kind::Moc2 {
        return Err(Error::KindMismatch { expected: "MOC2" });
    }
    let (d, g, a) = (omega.delta, omega.gamma, omega.alpha);
    Ok((0.5 * d + g / 8.0 * (1.0 / d).ln() + g / (8.0 * (a - 1.0))) / 3.0)
}

/// `λ = ω⁻¹(3‖θ₀‖∞)/(2‖θ₀‖∞) · ‖∇θ₀‖∞`.
pub fn lambda_value(omega: &ModulusOfContinuity, theta0_linf: f64, theta0_grad_linf: f64) -> Result<f64> {
    if !(theta0_linf > 0.0 && theta0_linf.is_finite()) {
        return Err(Error::out_of_range("theta0_linf", theta0_linf, "‖θ₀‖∞ > 0"));
    }
    if !(theta0_grad_linf >= 0.0) {
        return Err(Error::out_of_range("theta0_grad_linf", theta0_grad_linf, "‖∇θ₀‖∞ ≥ 0"));
    }
    let y = 3.0 * theta0_linf;
    let inv = match omega.inverse(y) {
        Err(Error::ValueExceedsSupremum { value, supremum }) => {
            return Err(Error::SmallnessViolated {
                three_linf: value,
                supremum,
            })
        }
        other => other?,
    };
    Ok(inv / (2.0 * theta0_linf) * theta0_grad_linf)
}
