//! Adaptive Gauss-Kronrod (7-15) quadrature with global error control.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol·|I|)`. The per-interval error
//! estimate is `|K15 - G7|`, which is conservative for smooth integrands.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Kronrod abscissae on `[0, 1]` (symmetric about 0), largest first.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd-indexed Kronrod nodes (`XGK[1]`, `XGK[3]`, …).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl QuadResult {
    pub const ZERO: QuadResult = QuadResult {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };

    pub fn plus(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    pub fn scaled(self, c: f64) -> QuadResult {
        QuadResult {
            value: self.value * c,
            error: self.error * c.abs(),
            evaluations: self.evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-300,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance {
            rel,
            ..Default::default()
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrates `f` over `[a, b]` (`a < b`, both finite), with the interval
/// initially split at the interior `breaks`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::QuadratureFailure(format!(
            "non-finite interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult::ZERO);
    }
    if a > b {
        return integrate(f, b, a, breaks, tol).map(|r| r.scaled(-1.0));
    }
    let mut points = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    points.extend(inner);
    points.push(b);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evals = 0usize;
    for w in points.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evals += 15;
        total += v;
        total_err += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureFailure(format!(
                "{} intervals on [{a:e}, {b:e}]: value {total:e}, error {total_err:e}, target {target:e}",
                heap.len()
            )));
        }
        let seg = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval cannot be split further; accept its estimate
            return Err(Error::QuadratureFailure(format!(
                "interval [{:e}, {:e}] exhausted floating-point resolution",
                seg.a, seg.b
            )));
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        evals += 30;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to drop the drift of the incremental updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(QuadResult {
        value,
        error,
        evaluations: evals,
    })
}

/// Integrates `f(η)` over `[a, b] ⊂ (0, ∞)` in the variable `u = ln η`,
/// suited to integrands spanning many decades.
pub fn integrate_log(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::QuadratureFailure(format!(
            "log-variable integral needs a positive interval, got [{a}, {b}]"
        )));
    }
    let lb: Vec<f64> = breaks.iter().filter(|&&x| x > 0.0).map(|x| x.ln()).collect();
    integrate(
        |u| {
            let eta = u.exp();
            f(eta) * eta
        },
        a.ln(),
        b.ln(),
        &lb,
        tol,
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = order as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached 10-point Gauss-Legendre rule.
pub(crate) fn gl10() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(10))
}

/// Fixed 10-point Gauss-Legendre on `[a, b]`.
pub(crate) fn fixed_gl10(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl10();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}
