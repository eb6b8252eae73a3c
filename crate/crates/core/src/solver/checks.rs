//! Run-level checks: scaling invariance, Friedrichs convergence and the
//! dissipation bound at a saturating pair.

use rayon::prelude::*;

use super::{run, Driver, DtPolicy, Outcome, SolverConfig, SolverState};
use crate::error::{Error, Result};
use crate::moc::{upsilon_functional, worst_pair, ModulusOfContinuity};
use crate::spectral::{fractional_power, PhysicalField};

fn fixed_dt(cfg: &SolverConfig, what: &str) -> Result<f64> {
    match cfg.dt_policy {
        DtPolicy::Fixed(dt) => Ok(dt),
        DtPolicy::Cfl { .. } => Err(Error::Config(format!("{what} needs a fixed time step"))),
    }
}

/// Relative max-norm discrepancy between `θ_b(T, x)` and `θ_a(λ^α T, λx)`,
/// where `a` runs `θ₀` on the `n` grid and `b` runs `θ₀(λ·)` on the `λn`
/// grid with step `dt/λ^α`.
pub fn scaling_invariance_check(cfg: &SolverConfig, theta0: &PhysicalField, lambda: u32) -> Result<f64> {
    scaling_discrepancy(cfg, theta0, lambda, None)
}

/// [`scaling_invariance_check`] with an optional viscosity override for run
/// `b`, which breaks the invariance on purpose.
pub fn scaling_discrepancy(
    cfg: &SolverConfig,
    theta0: &PhysicalField,
    lambda: u32,
    nu_b: Option<f64>,
) -> Result<f64> {
    cfg.validate()?;
    if lambda == 0 {
        return Err(Error::out_of_range("lambda", 0.0, "integer λ ≥ 1"));
    }
    let dt = fixed_dt(cfg, "the scaling check")?;
    let n = cfg.n;
    if theta0.grid().n() != n {
        return Err(Error::GridMismatch {
            left: n,
            right: theta0.grid().n(),
        });
    }
    let lam = lambda as f64;
    let time_factor = lam.powf(cfg.alpha);

    let mut cfg_a = cfg.clone();
    cfg_a.t_end = time_factor * cfg.t_end;
    cfg_a.snapshot_every = None;

    let nb = n * lambda as usize;
    let mut cfg_b = cfg.clone();
    cfg_b.n = nb;
    cfg_b.dt_policy = DtPolicy::Fixed(dt / time_factor);
    cfg_b.friedrichs_eps = cfg.friedrichs_eps.map(|e| e / lam);
    cfg_b.grad_cap = cfg.grad_cap * lam;
    cfg_b.snapshot_every = None;
    if let Some(nu) = nu_b {
        cfg_b.nu = nu;
    }
    cfg_b.validate()?;

    // θ₀(λx_j) with x_j = 2πj/(λn) sits on coarse index j mod n
    let v = theta0.values();
    let fine: Vec<f64> = (0..nb * nb)
        .map(|idx| v[((idx / nb) % n) * n + (idx % nb) % n])
        .collect();
    let theta0_b = PhysicalField::new(crate::Grid::new(nb)?, fine)?;

    let (a, b) = rayon::join(|| run(&cfg_a, theta0), || run(&cfg_b, &theta0_b));
    let a = a?.into_result()?.state.theta_hat.to_physical()?;
    let b = b?.into_result()?.state.theta_hat.to_physical()?;

    let va = a.values();
    let diff = b
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &x)| (x - va[((idx / nb) % n) * n + (idx % nb) % n]).abs())
        .fold(0.0f64, f64::max);
    let scale = a.max_abs();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// `sup_t ‖θ^ε(t) - θ(t)‖₂` for each `ε`, against the unregularized run on
/// the same time grid.
pub fn friedrichs_convergence_check(
    cfg: &SolverConfig,
    theta0: &PhysicalField,
    eps_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    fixed_dt(cfg, "the Friedrichs check")?;
    let mut base = cfg.clone();
    base.friedrichs_eps = None;
    base.snapshot_every = None;
    let mut cfgs = vec![base.clone()];
    for &eps in eps_list {
        let mut c = base.clone();
        c.friedrichs_eps = Some(eps);
        c.validate()?;
        cfgs.push(c);
    }
    let mut drivers = cfgs
        .iter()
        .map(|c| Driver::new(c, theta0))
        .collect::<Result<Vec<_>>>()?;

    let mut gaps = vec![0.0f64; eps_list.len()];
    let update = |drivers: &[Driver], gaps: &mut [f64]| -> Result<()> {
        let reference = &drivers[0].state.theta_hat;
        for (g, d) in gaps.iter_mut().zip(&drivers[1..]) {
            *g = g.max(d.state.theta_hat.sub(reference)?.l2_norm());
        }
        Ok(())
    };
    update(&drivers, &mut gaps)?;
    while !drivers[0].done() {
        let outcomes = drivers
            .par_iter_mut()
            .map(|d| d.step())
            .collect::<Result<Vec<_>>>()?;
        if let Some(Outcome::BlowupSuspected { t, reason }) = outcomes.into_iter().flatten().next() {
            return Err(Error::BlowupSuspected { t, reason });
        }
        update(&drivers, &mut gaps)?;
    }
    Ok(eps_list.iter().copied().zip(gaps).collect())
}

/// Outcome of [`saturation_pair_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationPair {
    /// `max |θ(x) - θ(y)| / ω(λ|x - y|)` over grid pairs.
    pub margin: f64,
    /// Flat grid indices of the maximizing pair, `θ(x) ≥ θ(y)`.
    pub x: usize,
    pub y: usize,
    /// `|x - y|`.
    pub xi: f64,
    /// `[(-|D|^α θ)(x) - (-|D|^α θ)(y)] - λ^α Υ(λξ)/ν` at the pair, `Υ`
    /// taken with the given `B`; nonpositive when the dissipation bound holds.
    /// `None` when `θ` is constant.
    pub dissipation_gap: Option<f64>,
}

/// Finds the pair that comes closest to breaking `|θ(x) - θ(y)| < ω(λξ)` and
/// evaluates the dissipation bound there.
pub fn saturation_pair_check(
    state: &SolverState,
    omega: &ModulusOfContinuity,
    lambda: f64,
    b: f64,
) -> Result<SaturationPair> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::out_of_range("lambda", lambda, "0 < λ < ∞"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::out_of_range("B", b, "B > 0"));
    }
    let theta = state.theta_hat.to_physical()?;
    let Some(w) = worst_pair(&theta, |xi| omega.eval(xi), lambda) else {
        return Ok(SaturationPair {
            margin: 0.0,
            x: 0,
            y: 0,
            xi: 0.0,
            dissipation_gap: None,
        });
    };
    let alpha = omega.alpha();
    let diss = fractional_power(&state.theta_hat, alpha).to_physical()?;
    let lhs = diss.values()[w.y] - diss.values()[w.x];
    let upsilon = upsilon_functional(omega, lambda * w.distance, 1.0, b)?.value;
    Ok(SaturationPair {
        margin: w.ratio,
        x: w.x,
        y: w.y,
        xi: w.distance,
        dissipation_gap: Some(lhs - lambda.powf(alpha) * upsilon),
    })
}
