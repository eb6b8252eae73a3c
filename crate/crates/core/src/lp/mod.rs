//! Littlewood-Paley analysis on the discrete torus.
//!
//! `χ` is 1 on `|ζ| ≤ 1` and 0 on `|ζ| ≥ 4/3`, joined by the smooth step
//! built from `e^{-1/t}`. With `φ(ζ) = χ(ζ/2) - χ(ζ)`, supported in
//! `1 ≤ |ζ| ≤ 8/3`, the blocks are `Δ_{-1} = χ(D)` and `Δ_j = φ(2^{-j}D)`, and
//! `χ + Σ_{j=0}^{J} φ(2^{-j}·) = χ(2^{-J-1}·)` telescopes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{dealias, fractional_power, gradient, riesz_velocity_unchecked, Grid};
use crate::spectral::{PhysicalField, SpectralField};

/// Relative spectral divergence accepted as zero.
const DIVERGENCE_TOL: f64 = 1e-10;

fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// `C^∞` step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = psi(t);
        a / (a + psi(1.0 - t))
    }
}

/// Low-frequency cutoff `χ(r)`, `r = |ζ|`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step(3.0 * (r - 1.0))
}

/// Shell bump `φ(r) = χ(r/2) - χ(r)`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Dyadic blocks `-1..=j_max` resolved on a given grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicPartition {
    j_max: i32,
}

/// Partition for an `n × n` grid, `j_max = ⌊log₂(3n/16)⌋`: the highest shell
/// that stays clear of aliasing.
pub fn build_partition(grid: &Grid) -> DyadicPartition {
    let j = (3.0 * grid.n() as f64 / 16.0).log2().floor() as i32;
    DyadicPartition { j_max: j.max(-1) }
}

impl DyadicPartition {
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// `|k|` up to which `Σ_{j ≤ j_max} Δ_j` is the identity.
    pub fn resolved_radius(&self) -> f64 {
        2f64.powi(self.j_max + 1)
    }

    fn check_block(&self, j: i32) -> Result<()> {
        if j < -1 || j > self.j_max {
            return Err(Error::out_of_range("j", j as f64, "-1 ≤ j ≤ j_max"));
        }
        Ok(())
    }

    /// Multiplier of `Δ_j` at `|ζ| = r`.
    pub fn block_multiplier(&self, j: i32, r: f64) -> f64 {
        if j == -1 {
            chi(r)
        } else {
            phi(r * 2f64.powi(-j))
        }
    }
}

pub fn dyadic_block(f: &SpectralField, part: &DyadicPartition, j: i32) -> Result<SpectralField> {
    part.check_block(j)?;
    Ok(f.map_radial(|r| part.block_multiplier(j, r)))
}

/// `S_q = Σ_{j ≤ q-1} Δ_j = χ(2^{-q}D)`, for `q ≥ 0`.
pub fn low_pass(f: &SpectralField, q: i32) -> Result<SpectralField> {
    if q < 0 {
        return Err(Error::out_of_range("q", q as f64, "q ≥ 0"));
    }
    let scale = 2f64.powi(-q);
    Ok(f.map_radial(|r| chi(r * scale)))
}

/// Indices `s`, `p`, `r` of `B^s_{p,r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::out_of_range("s", s, "finite"));
        }
        if !(p >= 1.0) {
            return Err(Error::out_of_range("p", p, "1 ≤ p ≤ ∞"));
        }
        if !(r >= 1.0) {
            return Err(Error::out_of_range("r", r, "1 ≤ r ≤ ∞"));
        }
        Ok(BesovSpec { s, p, r })
    }
}

/// `‖(2^{js}‖Δ_j f‖_p)_j‖_{ℓ^r}` over `-1 ≤ j ≤ j_max`.
pub fn besov_norm(f: &PhysicalField, spec: BesovSpec, part: &DyadicPartition) -> Result<f64> {
    let spec = BesovSpec::new(spec.s, spec.p, spec.r)?;
    let hat = f.to_spectral()?;
    let terms = (-1..=part.j_max())
        .map(|j| {
            let block = dyadic_block(&hat, part, j)?.to_physical()?;
            Ok(2f64.powf(j as f64 * spec.s) * block.lp_norm(spec.p)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(sequence_norm(&terms, spec.r))
}

fn sequence_norm(terms: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        terms.iter().copied().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `((2π)² Σ_k (1 + |k|²)^s |f̂_k|²)^{1/2}`.
pub fn sobolev_norm(f: &PhysicalField, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::out_of_range("s", s, "finite"));
    }
    let hat = f.to_spectral()?;
    Ok(hat.weighted_norm_sq(|k| (1.0 + k * k).powf(s)).sqrt())
}

/// Blocks below this fraction of `‖f‖₂` are round-off and count as zero.
const ZERO_BLOCK: f64 = 1e-13;

/// Bernstein ratios for `Δ_q f` in `L²`:
/// `lower = max_{|a|=k} ‖∂^a Δ_q f‖₂ / (2^{qk}‖Δ_q f‖₂)` and
/// `upper = ‖|D|^k Δ_q f‖₂ / (2^{qk}‖Δ_q f‖₂)`.
pub fn bernstein_check(f: &PhysicalField, part: &DyadicPartition, q: i32, k: u32) -> Result<(f64, f64)> {
    let hat = f.to_spectral()?;
    let block = dyadic_block(&hat, part, q)?;
    let base = block.l2_norm_sq();
    if base <= (ZERO_BLOCK * hat.l2_norm()).powi(2) {
        return Err(Error::ZeroBlock(q));
    }
    if k == 0 {
        return Ok((1.0, 1.0));
    }
    let scale = 2f64.powi(q * k as i32) * base.sqrt();
    let lower = (0..=k)
        .map(|a1| {
            let a2 = k - a1;
            block.weighted_monomial_norm_sq(a1, a2).sqrt()
        })
        .fold(0.0, f64::max);
    let upper = fractional_power(&block, k as f64).l2_norm();
    Ok((lower / scale, upper / scale))
}

trait MonomialNorm {
    fn weighted_monomial_norm_sq(&self, a1: u32, a2: u32) -> f64;
}

impl MonomialNorm for SpectralField {
    /// `‖∂₁^{a₁}∂₂^{a₂} f‖₂²` by Parseval.
    fn weighted_monomial_norm_sq(&self, a1: u32, a2: u32) -> f64 {
        let g = self.grid();
        let sum: f64 = self
            .coeffs()
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let (k1, k2) = g.k_at(idx);
                (k1 as f64).powi(2 * a1 as i32) * (k2 as f64).powi(2 * a2 as i32) * c.norm_sqr()
            })
            .sum();
        4.0 * PI * PI * sum
    }
}

fn check_divergence_free(v1: &SpectralField, v2: &SpectralField) -> Result<()> {
    let g = v1.grid();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for idx in 0..g.len() {
        let (k1, k2) = g.k_at(idx);
        let (a, b) = (v1.coeffs()[idx], v2.coeffs()[idx]);
        worst = worst.max((a * k1 as f64 + b * k2 as f64).norm());
        scale = scale.max(g.kmag_at(idx) * a.norm().hypot(b.norm()));
    }
    if worst > DIVERGENCE_TOL * scale {
        return Err(Error::NotDivergenceFree(worst / scale));
    }
    Ok(())
}

/// `v·∇g` with the product dealiased, in spectral form.
fn advect(v1: &PhysicalField, v2: &PhysicalField, g: &SpectralField) -> Result<SpectralField> {
    let (g1, g2) = gradient(g);
    let (g1, g2) = (g1.to_physical()?, g2.to_physical()?);
    let values = (0..v1.values().len())
        .map(|i| v1.values()[i] * g1.values()[i] + v2.values()[i] * g2.values()[i])
        .collect();
    Ok(dealias(&PhysicalField::new(v1.grid().clone(), values)?.to_spectral()?))
}

/// `F_q(v, f) = S_{q+1}v·∇Δ_q f - Δ_q(v·∇f)`.
pub fn commutator_fq(
    v: (&PhysicalField, &PhysicalField),
    f: &PhysicalField,
    part: &DyadicPartition,
    q: i32,
) -> Result<PhysicalField> {
    let (v1, v2) = (v.0.to_spectral()?, v.1.to_spectral()?);
    check_divergence_free(&v1, &v2)?;
    commutator_hat(&v1, &v2, &f.to_spectral()?, part, q)?.to_physical()
}

fn commutator_hat(
    v1: &SpectralField,
    v2: &SpectralField,
    f: &SpectralField,
    part: &DyadicPartition,
    q: i32,
) -> Result<SpectralField> {
    part.check_block(q)?;
    let low1 = low_pass(v1, q + 1)?.to_physical()?;
    let low2 = low_pass(v2, q + 1)?.to_physical()?;
    let first = advect(&low1, &low2, &dyadic_block(f, part, q)?)?;
    let full = advect(&v1.to_physical()?, &v2.to_physical()?, f)?;
    first.sub(&dyadic_block(&full, part, q)?)
}

/// `‖(|D|^s v₁, |D|^s v₂)‖∞`.
fn fractional_vector_linf(v1: &SpectralField, v2: &SpectralField, s: f64) -> Result<f64> {
    let a = fractional_power(v1, s).to_physical()?;
    let b = fractional_power(v2, s).to_physical()?;
    Ok(a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max(x.hypot(*y))))
}

fn block_l2_norms(f: &SpectralField, part: &DyadicPartition) -> Result<Vec<f64>> {
    (-1..=part.j_max())
        .map(|j| Ok(dyadic_block(f, part, j)?.l2_norm()))
        .collect()
}

fn check_beta(beta: f64, lo: f64) -> Result<()> {
    if !(beta > lo && beta < 1.0) {
        return Err(Error::out_of_range("beta", beta, "β in the open range of the estimate"));
    }
    Ok(())
}

/// `2^{-qβ}‖F_q‖₂` divided by
/// `‖|D|^{1-β}v‖∞ (Σ_{q' ≤ q+4} 2^{q'-q}‖Δ_{q'}f‖₂ + Σ_{q' ≥ q-4} 2^{(q-q')(1-β)}‖Δ_{q'}f‖₂)`,
/// for `β ∈ (0, 1)`.
pub fn commutator_bound_check(
    v: (&PhysicalField, &PhysicalField),
    f: &PhysicalField,
    part: &DyadicPartition,
    q: i32,
    beta: f64,
) -> Result<f64> {
    check_beta(beta, 0.0)?;
    let (v1, v2) = (v.0.to_spectral()?, v.1.to_spectral()?);
    check_divergence_free(&v1, &v2)?;
    let fh = f.to_spectral()?;
    let lhs = commutator_hat(&v1, &v2, &fh, part, q)?.l2_norm() * 2f64.powf(-q as f64 * beta);
    let blocks = block_l2_norms(&fh, part)?;
    let mut sum = 0.0;
    for (i, b) in blocks.iter().enumerate() {
        let qp = i as i32 - 1;
        if qp <= q + 4 {
            sum += 2f64.powi(qp - q) * b;
        }
        if qp >= q - 4 {
            sum += 2f64.powf((q - qp) as f64 * (1.0 - beta)) * b;
        }
    }
    let rhs = fractional_vector_linf(&v1, &v2, 1.0 - beta)? * sum;
    ratio(lhs, rhs)
}

/// The same ratio for `v = |D|^{α-1}R^⊥f` against
/// `‖|D|^{1-β}v‖∞ Σ_{q' ≥ q-4} 2^{(q-q')(1-β)}‖Δ_{q'}f‖₂ + ‖|D|^{α-β}f‖∞ Σ_{|q'-q| ≤ 4}‖Δ_{q'}f‖₂`,
/// for `β ∈ (max(0, α-1), 1)`.
pub fn commutator_bound_check_sqg(
    f: &PhysicalField,
    alpha: f64,
    part: &DyadicPartition,
    q: i32,
    beta: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::out_of_range("alpha", alpha, "0 < α < 2"));
    }
    check_beta(beta, (alpha - 1.0).max(0.0))?;
    let fh = f.to_spectral()?;
    let (v1, v2) = riesz_velocity_unchecked(&fh, alpha);
    let lhs = commutator_hat(&v1, &v2, &fh, part, q)?.l2_norm() * 2f64.powf(-q as f64 * beta);
    let blocks = block_l2_norms(&fh, part)?;
    let (mut high, mut near) = (0.0, 0.0);
    for (i, b) in blocks.iter().enumerate() {
        let qp = i as i32 - 1;
        if qp >= q - 4 {
            high += 2f64.powf((q - qp) as f64 * (1.0 - beta)) * b;
        }
        if (qp - q).abs() <= 4 {
            near += b;
        }
    }
    let dv = fractional_vector_linf(&v1, &v2, 1.0 - beta)?;
    let df = fractional_power(&fh, alpha - beta).to_physical()?.max_abs();
    ratio(lhs, dv * high + df * near)
}

fn ratio(lhs: f64, rhs: f64) -> Result<f64> {
    if rhs == 0.0 {
        return Err(Error::DegenerateRhs);
    }
    Ok(lhs / rhs)
}
