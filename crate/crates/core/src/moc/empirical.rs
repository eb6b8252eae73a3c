use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::PhysicalField;

/// `ξ ↦ max |f(x) - f(y)|` over grid pairs at periodic distance `ξ`, stored at
/// the exact offset lengths that occur on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMoc {
    /// Distinct periodic offset lengths, increasing.
    pub distances: Vec<f64>,
    /// Largest oscillation at exactly that distance.
    pub oscillation: Vec<f64>,
    /// Running maximum of `oscillation`: the smallest nondecreasing step
    /// function above it.
    pub envelope: Vec<f64>,
}

impl EmpiricalMoc {
    /// Envelope value at separation `xi`, i.e. at the largest tabulated
    /// distance not exceeding it.
    pub fn at(&self, xi: f64) -> f64 {
        match self.distances.partition_point(|&d| d <= xi) {
            0 => 0.0,
            i => self.envelope[i - 1],
        }
    }
}

/// `M(s) = max_x |f(x+s) - f(x)|` for every lattice offset `s`, row-major
/// over `s = (s₁, s₂)` with components in `0..n`, with the flat index of the
/// first maximizing `x`.
fn offset_maxima(f: &PhysicalField) -> Vec<(f64, usize)> {
    let n = f.grid().n();
    let v = f.values();
    (0..n * n)
        .into_par_iter()
        .map(|s| {
            let (s1, s2) = (s / n, s % n);
            let mut best = (0.0f64, 0usize);
            for i in 0..n {
                let row = &v[i * n..(i + 1) * n];
                let shifted = &v[((i + s1) % n) * n..((i + s1) % n + 1) * n];
                for j in 0..n {
                    let d = (shifted[(j + s2) % n] - row[j]).abs();
                    if d > best.0 {
                        best = (d, i * n + j);
                    }
                }
            }
            best
        })
        .collect()
}

/// Flat index of `x + s` for flat indices `x` and `s`.
fn shift(x: usize, s: usize, n: usize) -> usize {
    ((x / n + s / n) % n) * n + (x % n + s % n) % n
}

/// Grid pair maximizing `|f(x) - f(y)| / ω(λ|x - y|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct WorstPair {
    pub ratio: f64,
    /// Flat indices, `f(x) ≥ f(y)`.
    pub x: usize,
    pub y: usize,
    /// Periodic distance `|x - y|`.
    pub distance: f64,
}

/// `None` when `f` is constant.
pub(crate) fn worst_pair(f: &PhysicalField, omega: impl Fn(f64) -> f64, lambda: f64) -> Option<WorstPair> {
    let n = f.grid().n();
    let dx = f.grid().dx();
    let mut best: Option<WorstPair> = None;
    for (s, &(m, x)) in offset_maxima(f).iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let (a, b) = (wrap(s / n, n), wrap(s % n, n));
        let distance = ((a * a + b * b) as f64).sqrt() * dx;
        let ratio = m / omega(lambda * distance);
        if best.is_none_or(|w| ratio > w.ratio) {
            let y = shift(x, s, n);
            let (x, y) = if f.values()[x] >= f.values()[y] { (x, y) } else { (y, x) };
            best = Some(WorstPair { ratio, x, y, distance });
        }
    }
    best
}

/// Periodic offset `m ∈ 0..n` as a signed lattice step in `-n/2..=n/2`.
fn wrap(m: usize, n: usize) -> i64 {
    let m = m as i64;
    let n = n as i64;
    if m > n / 2 {
        m - n
    } else {
        m
    }
}

/// Scans every lattice offset; `O(n⁴)`.
pub fn empirical_moc(f: &PhysicalField) -> EmpiricalMoc {
    let n = f.grid().n();
    let dx = f.grid().dx();
    let maxima = offset_maxima(f);
    // bin on the exact integer m₁² + m₂², so equal lengths share a bin
    let mut bins: BTreeMap<i64, f64> = BTreeMap::new();
    for (s, &(m, _)) in maxima.iter().enumerate() {
        let (a, b) = (wrap(s / n, n), wrap(s % n, n));
        let key = a * a + b * b;
        if key == 0 {
            continue;
        }
        let e = bins.entry(key).or_insert(0.0);
        *e = e.max(m);
    }
    let distances: Vec<f64> = bins.keys().map(|&k| (k as f64).sqrt() * dx).collect();
    let oscillation: Vec<f64> = bins.values().copied().collect();
    let mut run = 0.0f64;
    let envelope = oscillation
        .iter()
        .map(|&m| {
            run = run.max(m);
            run
        })
        .collect();
    EmpiricalMoc {
        distances,
        oscillation,
        envelope,
    }
}

/// Whether `|f(x) - f(y)| < ω(λ|x - y|)` on all grid pairs, with the worst
/// ratio `max_s M(s)/ω(λ|s|)`.
pub fn check_obeys(f: &PhysicalField, omega: impl Fn(f64) -> f64, lambda: f64) -> Result<(bool, f64)> {
    if !(lambda > 0.0) {
        return Err(Error::out_of_range("lambda", lambda, "λ > 0"));
    }
    let worst = worst_pair(f, omega, lambda).map_or(0.0, |w| w.ratio);
    Ok((worst < 1.0, worst))
}
