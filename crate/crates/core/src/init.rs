//! Named initial-data presets.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{Grid, PhysicalField, SpectralField};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `θ ≡ 0`.
    Zero,
    /// `cos(x₁) + sin(x₂)`.
    TwoMode,
    /// Random mean-zero data supported on `0 < |k| ≤ kmax`, scaled so that
    /// `‖θ‖∞ = amplitude`.
    RandomBandlimited {
        seed: u64,
        kmax: f64,
        amplitude: f64,
    },
    /// Smooth periodic bump `exp(cos(x₁-π) + cos(x₂-π) - 2)`, mean removed.
    Bump,
}

impl InitialData {
    /// Parses `zero`, `two_mode`, `bump` or
    /// `random_bandlimited(seed, kmax, amplitude)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let s = spec.trim();
        match s {
            "zero" => return Ok(InitialData::Zero),
            "two_mode" => return Ok(InitialData::TwoMode),
            "bump" => return Ok(InitialData::Bump),
            _ => {}
        }
        let args = s
            .strip_prefix("random_bandlimited")
            .map(str::trim_start)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Config(format!("unknown initial data preset `{s}`")))?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Config(
                "random_bandlimited takes (seed, kmax, amplitude)".into(),
            ));
        }
        let seed = parts[0]
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("bad seed `{}`", parts[0])))?;
        let kmax = parse_f64(parts[1], "kmax")?;
        let amplitude = parse_f64(parts[2], "amplitude")?;
        if !(kmax >= 1.0) || !kmax.is_finite() {
            return Err(Error::Config(format!("kmax must be ≥ 1, got {kmax}")));
        }
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::Config(format!(
                "amplitude must be finite and ≥ 0, got {amplitude}"
            )));
        }
        Ok(InitialData::RandomBandlimited {
            seed,
            kmax,
            amplitude,
        })
    }

    pub fn sample(&self, grid: &Grid) -> Result<PhysicalField> {
        match *self {
            InitialData::Zero => Ok(PhysicalField::zeros(grid.clone())),
            InitialData::TwoMode => {
                PhysicalField::from_fn(grid.clone(), |x1, x2| x1.cos() + x2.sin())
            }
            InitialData::Bump => {
                let pi = std::f64::consts::PI;
                let raw = PhysicalField::from_fn(grid.clone(), |x1, x2| {
                    ((x1 - pi).cos() + (x2 - pi).cos() - 2.0).exp()
                })?;
                let mut hat = raw.to_spectral()?;
                hat.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
                hat.to_physical()
            }
            InitialData::RandomBandlimited {
                seed,
                kmax,
                amplitude,
            } => random_bandlimited(grid, seed, kmax, amplitude),
        }
    }
}

fn parse_f64(s: &str, name: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Config(format!("bad {name} `{s}`")))
}

/// Random Hermitian spectrum on `0 < |k| ≤ kmax` with `‖θ‖∞ = amplitude`.
pub fn random_bandlimited(
    grid: &Grid,
    seed: u64,
    kmax: f64,
    amplitude: f64,
) -> Result<PhysicalField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hat = SpectralField::zeros(grid.clone());
    let n = grid.n() as i64;
    let kint = (kmax.floor() as i64).min(n / 2 - 1);
    for k1 in -kint..=kint {
        for k2 in -kint..=kint {
            // one representative per conjugate pair
            if k1 < 0 || (k1 == 0 && k2 <= 0) {
                continue;
            }
            if ((k1 * k1 + k2 * k2) as f64).sqrt() > kmax {
                continue;
            }
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            hat.set(k1, k2, c);
            hat.set(-k1, -k2, c.conj());
        }
    }
    let mut f = hat.to_physical()?;
    let m = f.max_abs();
    if m > 0.0 {
        f.scale(amplitude / m);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_presets() {
        assert_eq!(InitialData::parse("zero").unwrap(), InitialData::Zero);
        assert_eq!(InitialData::parse(" two_mode ").unwrap(), InitialData::TwoMode);
        assert_eq!(
            InitialData::parse("random_bandlimited(7, 4, 0.5)").unwrap(),
            InitialData::RandomBandlimited {
                seed: 7,
                kmax: 4.0,
                amplitude: 0.5
            }
        );
        assert!(InitialData::parse("random_bandlimited(7, 4)").is_err());
        assert!(InitialData::parse("random_bandlimited(x, 4, 1)").is_err());
        assert!(InitialData::parse("gaussian").is_err());
    }

    #[test]
    fn random_data_is_bandlimited_and_scaled() {
        let g = Grid::new(32).unwrap();
        let f = random_bandlimited(&g, 3, 4.0, 0.25).unwrap();
        assert!((f.max_abs() - 0.25).abs() < 1e-15);
        let hat = f.to_spectral().unwrap();
        for (idx, c) in hat.coeffs().iter().enumerate() {
            if g.kmag_at(idx) > 4.0 || idx == 0 {
                assert!(c.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn same_seed_same_data() {
        let g = Grid::new(16).unwrap();
        let a = random_bandlimited(&g, 11, 3.0, 1.0).unwrap();
        let b = random_bandlimited(&g, 11, 3.0, 1.0).unwrap();
        assert_eq!(a, b);
    }
}
