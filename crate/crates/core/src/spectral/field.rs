use std::f64::consts::PI;

use num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};

/// Imaginary residue (relative to the output scale) that `to_physical`
/// silently discards.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Real samples `f(2πa/n, 2πb/n)` stored row-major at `a * n + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Vec<f64>,
}

/// Fourier coefficients in the convention `f(x) = Σ_k f̂_k e^{ik·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl PhysicalField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("physical field"));
        }
        Ok(PhysicalField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        PhysicalField { grid, values }
    }

    /// Samples `f(x₁, x₂)` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for a in 0..n {
            let x1 = grid.coord(a);
            for b in 0..n {
                values.push(f(x1, grid.coord(b)));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.grid.n() + b]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    /// Forward transform, including the `1/n²` normalization.
    pub fn to_spectral(&self) -> Result<SpectralField> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("physical field"));
        }
        let mut coeffs: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.fft2_forward(&mut coeffs);
        let norm = 1.0 / self.grid.len() as f64;
        coeffs.iter_mut().for_each(|c| *c *= norm);
        symmetrize(&mut coeffs, self.grid.n());
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs,
        })
    }

    /// Discrete `L^p` norm `(Δx² Σ|f|^p)^{1/p}`; `p = ∞` gives `max|f|`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::out_of_range("p", p, "p ≥ 1 or p = ∞"));
        }
        if p.is_infinite() {
            return Ok(self.max_abs());
        }
        let dx2 = self.grid.dx() * self.grid.dx();
        let sum: f64 = if p == 1.0 {
            self.values.iter().map(|v| v.abs()).sum()
        } else if p == 2.0 {
            self.values.iter().map(|v| v * v).sum()
        } else {
            self.values.iter().map(|v| v.abs().powf(p)).sum()
        };
        Ok((dx2 * sum).powf(1.0 / p))
    }
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("spectral field"));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        let coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        SpectralField { grid, coeffs }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at wavenumber `(k1, k2)` (indices taken modulo `n`).
    pub fn get(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.grid.flat_of(k1, k2)]
    }

    pub fn set(&mut self, k1: i64, k2: i64, value: Complex64) {
        let idx = self.grid.flat_of(k1, k2);
        self.coeffs[idx] = value;
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Inverse transform. Imaginary residue up to [`HERMITIAN_TOL`] relative to
    /// the largest output magnitude is discarded; anything larger is rejected.
    pub fn to_physical(&self) -> Result<PhysicalField> {
        let mut data = self.coeffs.clone();
        self.grid.fft2_inverse(&mut data);
        let scale = data.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let residue = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        if residue > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonHermitianInput {
                residue: residue / scale,
            });
        }
        let values = data.into_iter().map(|c| c.re).collect();
        PhysicalField::new(self.grid.clone(), values)
    }

    /// `(2π)² Σ_k |f̂_k|²`, the squared `L²` norm by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        4.0 * PI * PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `(2π)² Σ_k w(|k|) |f̂_k|²`.
    pub fn weighted_norm_sq(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| weight(self.grid.kmag_at(idx)) * c.norm_sqr())
            .sum();
        4.0 * PI * PI * sum
    }

    /// Largest violation of `f̂_{-k} = conj(f̂_k)` (including a real mean).
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for a in 0..n {
            let ma = (n - a) % n;
            for b in 0..n {
                let mb = (n - b) % n;
                let d = self.coeffs[a * n + b] - self.coeffs[ma * n + mb].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn scale(&mut self, c: f64) {
        self.coeffs.iter_mut().for_each(|v| *v *= c);
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: f64, other: &SpectralField) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b * c)
            .collect();
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Multiplies every coefficient by `symbol(k1, k2)`.
    pub fn map_symbol(&self, symbol: impl Fn(i64, i64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let (k1, k2) = self.grid.k_at(idx);
                c * symbol(k1, k2)
            })
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Multiplies every coefficient by a real radial multiplier `m(|k|)`.
    pub fn map_radial(&self, m: impl Fn(f64) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * m(self.grid.kmag_at(idx)))
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }
}

/// Replaces `c_k` by `(c_k + conj c_{-k})/2`, removing the round-off
/// asymmetry of the real-input transform. Downstream real multipliers and odd
/// symbols then keep the spectrum exactly Hermitian, so tiny filtered blocks
/// invert without a spurious imaginary residue.
fn symmetrize(coeffs: &mut [Complex64], n: usize) {
    for a in 0..n {
        let ma = (n - a) % n;
        for b in 0..n {
            let mb = (n - b) % n;
            let (i, j) = (a * n + b, ma * n + mb);
            if i > j {
                continue;
            }
            let avg = 0.5 * (coeffs[i] + coeffs[j].conj());
            coeffs[i] = avg;
            coeffs[j] = avg.conj();
        }
    }
}

pub(crate) fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(())
}
