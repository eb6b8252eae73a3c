//! The kernel and Littlewood-Paley check suites behind `kernel-check` and
//! `lp-check`.

use std::f64::consts::PI;

use anyhow::Result;

use mqg_core::init::random_bandlimited;
use mqg_core::io::{fmt_f64, RunConfig};
use mqg_core::kernel::{convolution_riesz, mexican_hat, riesz_constant, semigroup_compare, spectral_riesz, KernelSpec};
use mqg_core::lp::{
    bernstein_check, build_partition, commutator_bound_check, commutator_bound_check_sqg, commutator_fq,
    dyadic_block,
};
use mqg_core::spectral::modified_riesz_velocity;
use mqg_core::{Grid, PhysicalField, SpectralField};

use crate::emit::{csv, Emitter};

/// One line of a suite table. `threshold` is `None` for report-only rows.
pub struct Row {
    pub check: &'static str,
    pub param: String,
    pub value: f64,
    pub threshold: Option<f64>,
    pub status: &'static str,
}

impl Row {
    /// Passes when `value ≤ threshold`.
    fn at_most(check: &'static str, param: String, value: f64, threshold: f64) -> Self {
        Row {
            check,
            param,
            value,
            threshold: Some(threshold),
            status: if value <= threshold { "PASS" } else { "FAIL" },
        }
    }

    fn report(check: &'static str, param: String, value: f64) -> Self {
        Row {
            check,
            param,
            value,
            threshold: None,
            status: "REPORT",
        }
    }

    pub fn label(&self) -> String {
        if self.param.is_empty() {
            self.check.to_owned()
        } else {
            format!("{}[{}]", self.check, self.param)
        }
    }

    pub fn cells(&self) -> Vec<String> {
        vec![
            self.check.to_owned(),
            self.param.clone(),
            fmt_f64(self.value),
            self.threshold.map(fmt_f64).unwrap_or_default(),
            self.status.to_owned(),
        ]
    }
}

const CROSSVAL_ALPHAS: [f64; 3] = [0.3, 0.5, 0.8];
const CROSSVAL_TOL: f64 = 1e-3;
const SEMIGROUP_TOL: f64 = 1e-6;

/// Riesz constant, odd-kernel symmetry, real-space vs spectral modified Riesz
/// transform, and the semigroup kernel comparison. Also writes
/// `riesz_crossval.csv` and `semigroup.csv`.
pub fn kernel_suite(em: &mut Emitter) -> Result<Vec<Row>> {
    let mut rows = vec![Row::at_most(
        "riesz_constant",
        "alpha=1 n=2".into(),
        (riesz_constant(1.0, 2)? - 1.0 / (2.0 * PI)).abs(),
        1e-14,
    )];

    // mean-zero bump well inside the torus, probes near its centre
    let n = 128;
    let grid = Grid::new(n)?;
    let f = mexican_hat((PI, PI), 0.3);
    let theta = PhysicalField::from_fn(grid.clone(), &f)?.to_spectral()?;
    let probes_idx = [(68usize, 64usize), (64, 67), (69, 58), (62, 71), (65, 65)];
    let probes: Vec<(f64, f64)> = probes_idx.iter().map(|&(a, b)| (grid.coord(a), grid.coord(b))).collect();

    let centre = KernelSpec::new(0.5, 1, 2.9, 1e-8)?;
    let odd = convolution_riesz(&f, &[(PI, PI)], &centre)?[0];
    rows.push(Row::at_most("odd_kernel_centre", "alpha=0.5".into(), odd.value.abs(), 1e-12));

    let mut table = Vec::new();
    for alpha in CROSSVAL_ALPHAS {
        let spectral = spectral_riesz(&theta, alpha, 1)?.to_physical()?;
        let scale = spectral.max_abs();
        let real = convolution_riesz(&f, &probes, &KernelSpec::new(alpha, 1, 2.9, 1e-8)?)?;
        let mut worst = 0.0f64;
        for ((&(a, b), &x), v) in probes_idx.iter().zip(&probes).zip(&real) {
            let s = spectral.at(a, b);
            let rel = (v.value - s).abs() / scale;
            worst = worst.max(rel);
            table.push(vec![
                fmt_f64(alpha),
                fmt_f64(x.0),
                fmt_f64(x.1),
                fmt_f64(v.value),
                fmt_f64(s),
                fmt_f64(rel),
                fmt_f64(v.quad_error),
                fmt_f64(v.pv_error),
            ]);
        }
        rows.push(Row::at_most("riesz_crossval", format!("alpha={alpha}"), worst, CROSSVAL_TOL));
    }
    em.write(
        "riesz_crossval.csv",
        &csv("alpha,x1,x2,real_space,spectral,rel_dev,quad_error,pv_error", table),
    )?;

    let grid = Grid::new(64)?;
    let mut table = Vec::new();
    for alpha in [0.5, 1.0, 1.5] {
        for h in [0.5, 1.0, 2.0] {
            let (dev, scale) = semigroup_compare(h, alpha, &grid)?;
            table.push(vec![fmt_f64(alpha), fmt_f64(h), fmt_f64(dev), fmt_f64(scale)]);
            let param = format!("alpha={alpha} h={h}");
            rows.push(if alpha == 1.0 {
                Row::at_most("semigroup_kernel", param, dev, SEMIGROUP_TOL)
            } else {
                Row::report("semigroup_kernel", param, dev)
            });
        }
    }
    em.write("semigroup.csv", &csv("alpha,h,max_abs_deviation,kernel_max", table))?;
    Ok(rows)
}

const LP_N: usize = 256;
const LP_SAMPLES: u64 = 10;

/// Partition reconstruction, Bernstein windows, commutator with constant
/// velocity, and commutator-bound ratios across shells. Uses `alpha` from the
/// configuration for the quasi-geostrophic velocity (0.5 when absent).
pub fn lp_suite(cfg: &RunConfig) -> Result<Vec<Row>> {
    let grid = Grid::new(LP_N)?;
    let part = build_partition(&grid);
    let alpha = cfg.alpha.unwrap_or(0.5);
    let samples: Vec<PhysicalField> = (0..LP_SAMPLES)
        .map(|s| random_bandlimited(&grid, s, part.resolved_radius(), 1.0))
        .collect::<mqg_core::Result<_>>()?;
    let mut rows = Vec::new();

    let mut recon = 0.0f64;
    for f in &samples {
        let hat = f.to_spectral()?;
        let mut sum = SpectralField::zeros(grid.clone());
        for j in -1..=part.j_max() {
            sum = sum.add_scaled(1.0, &dyadic_block(&hat, &part, j)?)?;
        }
        let back = sum.to_physical()?;
        let err = back.values().iter().zip(f.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        recon = recon.max(err / f.max_abs());
    }
    rows.push(Row::at_most("reconstruction", String::new(), recon, 1e-12));

    // every mode up to the Nyquist disc, so every shell is populated
    let noise = random_bandlimited(&grid, 100, LP_N as f64, 1.0)?;
    for k in 1..=2u32 {
        let ratios = (0..=part.j_max())
            .map(|q| bernstein_check(&noise, &part, q, k).map(|r| r.1))
            .collect::<mqg_core::Result<Vec<_>>>()?;
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        // |k| on the support of Δ_q lies in [3/4, 8/3]·2^q
        let k = k as i32;
        rows.push(Row::at_most("bernstein_upper", format!("k={k}"), hi, (8.0f64 / 3.0).powi(k)));
        rows.push(Row::at_most("bernstein_lower", format!("k={k}"), 0.75f64.powi(k) / lo, 1.0));
    }

    let v1 = PhysicalField::from_fn(grid.clone(), |_, _| 0.7)?;
    let v2 = PhysicalField::from_fn(grid.clone(), |_, _| -1.3)?;
    let mut constant = 0.0f64;
    for q in 0..=part.j_max() {
        constant = constant.max(commutator_fq((&v1, &v2), &samples[0], &part, q)?.max_abs());
    }
    rows.push(Row::at_most("commutator_constant_v", String::new(), constant, 1e-12));

    let beta_sqg = 0.5 * ((alpha - 1.0).max(0.0) + 1.0);
    for q in 2..=5 {
        let (mut general, mut sqg) = (0.0f64, 0.0f64);
        for f in &samples {
            let (u1, u2) = modified_riesz_velocity(&f.to_spectral()?, alpha)?;
            let (u1, u2) = (u1.to_physical()?, u2.to_physical()?);
            general = general.max(commutator_bound_check((&u1, &u2), f, &part, q, 0.25)?);
            sqg = sqg.max(commutator_bound_check_sqg(f, alpha, &part, q, beta_sqg)?);
        }
        rows.push(Row::at_most("commutator_bound", format!("q={q} beta=0.25"), general, 1.0));
        rows.push(Row::at_most("commutator_bound_qg", format!("q={q} alpha={alpha} beta={beta_sqg}"), sqg, 1.0));
    }
    Ok(rows)
}
