use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform `n × n` grid on the torus `[0, 2π)²`.
///
/// Flat index `a * n + b` addresses the point `(2πa/n, 2πb/n)` in physical
/// space and the wavenumber `(k(a), k(b))` in spectral space, where `k(a)` is
/// `a` for `a < n/2` and `a - n` otherwise.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for Grid {}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(n));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid { n, fwd, inv })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Grid spacing `2π/n`.
    #[inline]
    pub fn dx(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Physical coordinate of index `a` along one axis.
    #[inline]
    pub fn coord(&self, a: usize) -> f64 {
        2.0 * PI * a as f64 / self.n as f64
    }

    /// Integer wavenumber for FFT index `a`, in `{-n/2, …, n/2-1}`.
    #[inline]
    pub fn wavenumber(&self, a: usize) -> i64 {
        let n = self.n as i64;
        let a = a as i64;
        if a < n / 2 {
            a
        } else {
            a - n
        }
    }

    /// FFT index of integer wavenumber `k` (taken modulo `n`).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Wavenumber pair at flat index.
    #[inline]
    pub fn k_at(&self, idx: usize) -> (i64, i64) {
        (self.wavenumber(idx / self.n), self.wavenumber(idx % self.n))
    }

    /// `|k|` at flat index.
    #[inline]
    pub fn kmag_at(&self, idx: usize) -> f64 {
        let (k1, k2) = self.k_at(idx);
        ((k1 * k1 + k2 * k2) as f64).sqrt()
    }

    /// Flat index of wavenumber pair.
    #[inline]
    pub fn flat_of(&self, k1: i64, k2: i64) -> usize {
        self.index_of(k1) * self.n + self.index_of(k2)
    }

    /// Nyquist wavenumber `-n/2`.
    #[inline]
    pub fn nyquist(&self) -> i64 {
        -(self.n as i64) / 2
    }

    /// Largest `|k|` present on the grid, `n/√2`.
    pub fn max_kmag(&self) -> f64 {
        self.n as f64 / 2.0 * std::f64::consts::SQRT_2
    }

    /// Unnormalized forward 2D DFT in place (`Σ f e^{-ik·x}`).
    pub(crate) fn fft2_forward(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.fwd);
    }

    /// Unnormalized inverse 2D DFT in place (`Σ f̂ e^{ik·x}`).
    pub(crate) fn fft2_inverse(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.inv);
    }

    fn fft2(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len());
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, self.n);
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, self.n);
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for a in 0..n {
        for b in (a + 1)..n {
            data.swap(a * n + b, b * n + a);
        }
    }
}
