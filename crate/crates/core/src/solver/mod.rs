//! Time integration of `θ_t + u·∇θ + ν|D|^α θ = 0` with diagnostics.
//!
//! The stepper is second order and treats the dissipation exactly through the
//! mode-wise integrating factor `E(h) = exp(-ν|k|^α h)`:
//!
//! ```text
//! θ* = E(θ + h N(θ))
//! θ⁺ = Eθ + h/2 (E N(θ) + N(θ*))
//! ```
//!
//! with `N(θ) = -u·∇θ`. With the advection switched off this reproduces
//! `E θ` to round-off for any `h`.

mod checks;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{dealias, galerkin_project, gradient, riesz_velocity_unchecked, Grid};
use crate::spectral::{PhysicalField, SpectralField};

pub use checks::{
    friedrichs_convergence_check, saturation_pair_check, scaling_discrepancy,
    scaling_invariance_check, SaturationPair,
};

/// Velocity floor in the CFL formula.
const TINY_SPEED: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    Fixed(f64),
    /// `dt = c·Δx / ‖u‖∞`, capped at `dt_max`.
    Cfl { c: f64, dt_max: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub nu: f64,
    pub n: usize,
    pub dt_policy: DtPolicy,
    pub t_end: f64,
    pub dealias: bool,
    /// Run the regularized system: `N` and `θ₀` are passed through `J_ε`.
    pub friedrichs_eps: Option<f64>,
    /// Switches the nonlinear term off; the run is then the linear semigroup.
    pub advection: bool,
    /// Snapshot cadence in steps; `None` disables snapshots.
    pub snapshot_every: Option<usize>,
    pub diagnostics_every: usize,
    /// Extra `L^p` norms recorded with each diagnostics row.
    pub lp_norms: Vec<f64>,
    /// `‖∇θ‖∞` above this is reported as suspected blow-up.
    pub grad_cap: f64,
}

impl SolverConfig {
    pub fn new(alpha: f64, nu: f64, n: usize) -> Self {
        SolverConfig {
            alpha,
            nu,
            n,
            dt_policy: DtPolicy::Fixed(1e-3),
            t_end: 1.0,
            dealias: true,
            friedrichs_eps: None,
            advection: true,
            snapshot_every: None,
            diagnostics_every: 1,
            lp_norms: Vec::new(),
            grad_cap: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::out_of_range("alpha", self.alpha, "0 < α < 2"));
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::out_of_range("nu", self.nu, "ν > 0"));
        }
        if self.n == 0 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(self.n));
        }
        match self.dt_policy {
            DtPolicy::Fixed(dt) => {
                if !(dt > 0.0) || !dt.is_finite() {
                    return Err(Error::out_of_range("dt", dt, "dt > 0"));
                }
            }
            DtPolicy::Cfl { c, dt_max } => {
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::out_of_range("cfl", c, "c > 0"));
                }
                if !(dt_max > 0.0) || !dt_max.is_finite() {
                    return Err(Error::out_of_range("dt_max", dt_max, "dt_max > 0"));
                }
            }
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::out_of_range("t_end", self.t_end, "t_end > 0"));
        }
        if let Some(eps) = self.friedrichs_eps {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Error::out_of_range("friedrichs_eps", eps, "ε > 0"));
            }
        }
        if self.diagnostics_every == 0 {
            return Err(Error::Config("diagnostics_every must be ≥ 1".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::Config("snapshot_every must be ≥ 1".into()));
        }
        for &p in &self.lp_norms {
            if !(p >= 1.0) {
                return Err(Error::out_of_range("p", p, "1 ≤ p ≤ ∞"));
            }
        }
        if !(self.grad_cap > 0.0) {
            return Err(Error::out_of_range("grad_cap", self.grad_cap, "cap > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub theta_hat: SpectralField,
    pub step_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
    pub grad_linf: f64,
    /// `∫₀ᵗ ‖|D|^{α/2}θ‖₂² dτ`.
    pub diss_int: f64,
    /// `∫₀ᵗ ‖∇θ‖∞^α dτ`.
    pub grad_alpha_int: f64,
    /// `(p, ‖θ‖_p)` for each configured `p`.
    pub lp: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed,
    BlowupSuspected { t: f64, reason: String },
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SolverState,
    pub records: Vec<DiagnosticsRecord>,
    pub outcome: Outcome,
    pub nu: f64,
}

impl RunOutput {
    /// `|‖θ(T)‖₂² + 2ν∫‖|D|^{α/2}θ‖₂² - ‖θ₀‖₂²|` at the last record.
    pub fn energy_residual(&self) -> f64 {
        let (first, last) = (&self.records[0], self.records.last().unwrap());
        (last.l2 * last.l2 + 2.0 * self.nu * last.diss_int - first.l2 * first.l2).abs()
    }

    /// `max_t ‖θ(t)‖∞ - ‖θ₀‖∞` over the records.
    pub fn max_principle_margin(&self) -> f64 {
        let l0 = self.records[0].linf;
        self.records.iter().map(|r| r.linf - l0).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same as [`max_principle_margin`](Self::max_principle_margin) for the
    /// recorded `L^p` norm with exponent `p`, if it was recorded.
    pub fn lp_margin(&self, p: f64) -> Option<f64> {
        let pick = |r: &DiagnosticsRecord| r.lp.iter().find(|(q, _)| *q == p).map(|(_, v)| *v);
        let l0 = pick(&self.records[0])?;
        self.records
            .iter()
            .map(|r| pick(r).map(|v| v - l0))
            .try_fold(f64::NEG_INFINITY, |m, v| v.map(|v| m.max(v)))
    }

    pub fn sup_grad_linf(&self) -> f64 {
        self.records.iter().map(|r| r.grad_linf).fold(0.0, f64::max)
    }

    /// Turns a suspected blow-up into an error.
    pub fn into_result(self) -> Result<Self> {
        match &self.outcome {
            Outcome::Completed => Ok(self),
            Outcome::BlowupSuspected { t, reason } => Err(Error::BlowupSuspected {
                t: *t,
                reason: reason.clone(),
            }),
        }
    }
}

/// Receives diagnostics rows and snapshots as a run produces them.
pub trait RunObserver {
    fn on_record(&mut self, _record: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }

    fn on_snapshot(&mut self, _state: &SolverState) -> Result<()> {
        Ok(())
    }
}

impl RunObserver for () {}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::out_of_range("alpha", alpha, "0 < α < 2"))
    }
}

/// Spectral coefficients of `-u·∇θ`, mean mode set to exactly zero.
pub fn nonlinear_term(theta_hat: &SpectralField, alpha: f64, dealias_output: bool) -> Result<SpectralField> {
    check_alpha(alpha)?;
    let (u1, u2) = riesz_velocity_unchecked(theta_hat, alpha);
    let (g1, g2) = gradient(theta_hat);
    let fields: Vec<PhysicalField> = [&u1, &u2, &g1, &g2]
        .par_iter()
        .map(|f| f.to_physical())
        .collect::<Result<_>>()?;
    let (u1, u2, g1, g2) = (fields[0].values(), fields[1].values(), fields[2].values(), fields[3].values());
    let adv: Vec<f64> = (0..u1.len()).map(|i| -(u1[i] * g1[i] + u2[i] * g2[i])).collect();
    let mut hat = PhysicalField::new(theta_hat.grid().clone(), adv)?.to_spectral()?;
    hat.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    Ok(if dealias_output { dealias(&hat) } else { hat })
}

fn velocity_linf(theta_hat: &SpectralField, alpha: f64) -> Result<f64> {
    let (u1, u2) = riesz_velocity_unchecked(theta_hat, alpha);
    Ok(euclidean_max(&u1.to_physical()?, &u2.to_physical()?))
}

fn euclidean_max(a: &PhysicalField, b: &PhysicalField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0f64, |m, (x, y)| m.max(x.hypot(*y)))
}

/// `max_x |∇θ(x)|` over the grid.
pub fn grad_linf(theta_hat: &SpectralField) -> Result<f64> {
    let (g1, g2) = gradient(theta_hat);
    Ok(euclidean_max(&g1.to_physical()?, &g2.to_physical()?))
}

/// CFL step `c·Δx / max(‖u‖∞, tiny)` capped at `dt_max`; the fixed step for a
/// fixed policy.
pub fn cfl_dt(state: &SolverState, cfg: &SolverConfig) -> Result<f64> {
    match cfg.dt_policy {
        DtPolicy::Fixed(dt) => Ok(dt),
        DtPolicy::Cfl { c, dt_max } => {
            check_alpha(cfg.alpha)?;
            let speed = velocity_linf(&state.theta_hat, cfg.alpha)?;
            let dx = state.theta_hat.grid().dx();
            Ok((c * dx / speed.max(TINY_SPEED)).min(dt_max))
        }
    }
}

/// Per-grid stepping context: dissipation rates and the factors for the
/// current step length.
struct Stepper {
    alpha: f64,
    nu: f64,
    dealias: bool,
    eps: Option<f64>,
    advection: bool,
    /// `ν|k|^α` per mode.
    rate: Vec<f64>,
    h: f64,
    decay: Vec<f64>,
    /// `tanh(ν|k|^α h)` per mode, for the dissipation integral.
    diss_weight: Vec<f64>,
}

impl Stepper {
    fn new(cfg: &SolverConfig, grid: &Grid) -> Self {
        let rate = (0..grid.len())
            .map(|idx| cfg.nu * grid.kmag_at(idx).powf(cfg.alpha))
            .collect();
        Stepper {
            alpha: cfg.alpha,
            nu: cfg.nu,
            dealias: cfg.dealias,
            eps: cfg.friedrichs_eps,
            advection: cfg.advection,
            rate,
            h: f64::NAN,
            decay: Vec::new(),
            diss_weight: Vec::new(),
        }
    }

    fn set_step(&mut self, h: f64) {
        if h == self.h {
            return;
        }
        self.h = h;
        self.decay = self.rate.iter().map(|r| (-r * h).exp()).collect();
        self.diss_weight = self.rate.iter().map(|r| (r * h).tanh()).collect();
    }

    fn nonlinear(&self, theta: &SpectralField) -> Result<SpectralField> {
        let n = nonlinear_term(theta, self.alpha, self.dealias)?;
        match self.eps {
            Some(eps) => galerkin_project(&n, eps),
            None => Ok(n),
        }
    }

    fn apply_decay(&self, f: &mut SpectralField) {
        f.coeffs_mut()
            .iter_mut()
            .zip(&self.decay)
            .for_each(|(c, e)| *c *= e);
    }

    fn advance(&mut self, theta: &SpectralField, h: f64) -> Result<SpectralField> {
        self.set_step(h);
        let mut lin = theta.clone();
        self.apply_decay(&mut lin);
        if !self.advection {
            return Ok(lin);
        }
        let n0 = self.nonlinear(theta)?;
        let mut pred = theta.add_scaled(h, &n0)?;
        self.apply_decay(&mut pred);
        let n1 = self.nonlinear(&pred)?;
        let mut en0 = n0;
        self.apply_decay(&mut en0);
        let forcing = en0.add_scaled(1.0, &n1)?;
        lin.add_scaled(0.5 * h, &forcing)
    }

    /// Increment of `∫‖|D|^{α/2}θ‖₂²` over the last step: per mode
    /// `|k|^α ∫ e(τ) dτ` with the exponentially fitted trapezoid
    /// `h·(e₀ + e₁)·tanh(x/2)/x`, `x = 2ν|k|^α h`, exact for pure decay.
    fn dissipation_increment(&self, before: &SpectralField, after: &SpectralField) -> f64 {
        let sum: f64 = before
            .coeffs()
            .iter()
            .zip(after.coeffs())
            .zip(&self.diss_weight)
            .map(|((a, b), w)| w * (a.norm_sqr() + b.norm_sqr()))
            .sum();
        4.0 * PI * PI * sum / (2.0 * self.nu)
    }
}

/// One step of length `dt` from `state`.
pub fn step(state: &SolverState, cfg: &SolverConfig, dt: f64) -> Result<SolverState> {
    cfg.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::out_of_range("dt", dt, "dt > 0"));
    }
    let mut stepper = Stepper::new(cfg, state.theta_hat.grid());
    let theta_hat = stepper.advance(&state.theta_hat, dt)?;
    if !theta_hat.is_finite() {
        return Err(Error::BlowupSuspected {
            t: state.t + dt,
            reason: "non-finite coefficients".into(),
        });
    }
    Ok(SolverState {
        t: state.t + dt,
        theta_hat,
        step_count: state.step_count + 1,
    })
}

/// Initial state for `cfg`: the transform of `θ₀`, projected by `J_ε` in
/// Friedrichs mode.
pub fn initial_state(cfg: &SolverConfig, theta0: &PhysicalField) -> Result<SolverState> {
    if theta0.grid().n() != cfg.n {
        return Err(Error::GridMismatch {
            left: cfg.n,
            right: theta0.grid().n(),
        });
    }
    let mut theta_hat = theta0.to_spectral()?;
    if let Some(eps) = cfg.friedrichs_eps {
        theta_hat = galerkin_project(&theta_hat, eps)?;
    }
    Ok(SolverState {
        t: 0.0,
        theta_hat,
        step_count: 0,
    })
}

pub fn run(cfg: &SolverConfig, theta0: &PhysicalField) -> Result<RunOutput> {
    run_observed(cfg, theta0, &mut ())
}

/// Integrates to `t_end`. A suspected blow-up ends the run early with
/// [`Outcome::BlowupSuspected`]; the records up to that point are kept.
///
/// Blow-up is checked on NaN every step, and on `‖θ‖∞ > 10‖θ₀‖∞` and the
/// gradient cap at diagnostics rows.
pub fn run_observed(cfg: &SolverConfig, theta0: &PhysicalField, observer: &mut dyn RunObserver) -> Result<RunOutput> {
    cfg.validate()?;
    let mut driver = Driver::new(cfg, theta0)?;
    let first = driver.records[0].clone();
    observer.on_record(&first)?;
    if cfg.snapshot_every.is_some() {
        observer.on_snapshot(&driver.state)?;
    }
    let initial = driver.size_check(&first);
    let outcome = loop {
        if let Some(b) = initial {
            break b;
        }
        if driver.done() {
            break Outcome::Completed;
        }
        if let Some(blowup) = driver.step()? {
            if let Some(r) = driver.flush() {
                observer.on_record(&r)?;
            }
            break blowup;
        }
        let k = driver.state.step_count;
        let last = driver.done();
        if k % cfg.diagnostics_every == 0 || last {
            let (record, blowup) = driver.record()?;
            observer.on_record(&record)?;
            if let Some(b) = blowup {
                break b;
            }
        }
        if let Some(every) = cfg.snapshot_every {
            if k % every == 0 || last {
                observer.on_snapshot(&driver.state)?;
            }
        }
    };
    Ok(RunOutput {
        state: driver.state,
        records: driver.records,
        outcome,
        nu: cfg.nu,
    })
}

/// Run loop state shared by [`run_observed`] and the lock-step checks.
pub(crate) struct Driver<'a> {
    cfg: &'a SolverConfig,
    stepper: Stepper,
    pub(crate) state: SolverState,
    pub(crate) records: Vec<DiagnosticsRecord>,
    linf0: f64,
    diss_int: f64,
    /// `(t, ‖∇θ‖∞^α)` at the last row, for the trapezoid.
    last_grad: (f64, f64),
    grad_alpha_int: f64,
    last_recorded_step: usize,
}

impl<'a> Driver<'a> {
    pub(crate) fn new(cfg: &'a SolverConfig, theta0: &PhysicalField) -> Result<Self> {
        let state = initial_state(cfg, theta0)?;
        let stepper = Stepper::new(cfg, state.theta_hat.grid());
        let mut d = Driver {
            cfg,
            stepper,
            state,
            records: Vec::new(),
            linf0: 0.0,
            diss_int: 0.0,
            last_grad: (0.0, 0.0),
            grad_alpha_int: 0.0,
            last_recorded_step: 0,
        };
        let first = d.diagnostics()?;
        d.linf0 = first.linf;
        d.last_grad = (0.0, first.grad_linf.powf(cfg.alpha));
        d.records.push(first);
        Ok(d)
    }

    pub(crate) fn done(&self) -> bool {
        self.state.t >= self.cfg.t_end
    }

    fn next_time(&self) -> Result<f64> {
        let t_end = self.cfg.t_end;
        let t = match self.cfg.dt_policy {
            // multiples of dt, so runs with equal dt share their time grid
            DtPolicy::Fixed(dt) => ((self.state.step_count + 1) as f64 * dt).min(t_end),
            DtPolicy::Cfl { .. } => self.state.t + cfl_dt(&self.state, self.cfg)?,
        };
        // avoid a sliver step at the end
        Ok(if t_end - t <= 1e-9 * (t_end - self.state.t) { t_end } else { t.min(t_end) })
    }

    /// Advances one step; `Some(outcome)` on a non-finite state.
    pub(crate) fn step(&mut self) -> Result<Option<Outcome>> {
        let t_next = self.next_time()?;
        let h = t_next - self.state.t;
        let next = match self.stepper.advance(&self.state.theta_hat, h) {
            Ok(v) if v.is_finite() => v,
            Ok(_) | Err(Error::NonFinite(_)) | Err(Error::NonHermitianInput { .. }) => {
                return Ok(Some(Outcome::BlowupSuspected {
                    t: t_next,
                    reason: "non-finite values in the state".into(),
                }))
            }
            Err(e) => return Err(e),
        };
        self.diss_int += self.stepper.dissipation_increment(&self.state.theta_hat, &next);
        self.state = SolverState {
            t: t_next,
            theta_hat: next,
            step_count: self.state.step_count + 1,
        };
        Ok(None)
    }

    fn diagnostics(&self) -> Result<DiagnosticsRecord> {
        let theta = self.state.theta_hat.to_physical()?;
        let grad = grad_linf(&self.state.theta_hat)?;
        let lp = self
            .cfg
            .lp_norms
            .iter()
            .map(|&p| theta.lp_norm(p).map(|v| (p, v)))
            .collect::<Result<_>>()?;
        Ok(DiagnosticsRecord {
            t: self.state.t,
            l2: self.state.theta_hat.l2_norm(),
            linf: theta.max_abs(),
            grad_linf: grad,
            diss_int: self.diss_int,
            grad_alpha_int: self.grad_alpha_int,
            lp,
        })
    }

    /// Appends a diagnostics row; returns it with a blow-up outcome if one of
    /// the size criteria fires.
    pub(crate) fn record(&mut self) -> Result<(DiagnosticsRecord, Option<Outcome>)> {
        let mut r = self.diagnostics()?;
        let g = r.grad_linf.powf(self.cfg.alpha);
        self.grad_alpha_int += 0.5 * (r.t - self.last_grad.0) * (g + self.last_grad.1);
        self.last_grad = (r.t, g);
        r.grad_alpha_int = self.grad_alpha_int;
        self.last_recorded_step = self.state.step_count;
        self.records.push(r.clone());
        let blowup = self.size_check(&r);
        Ok((r, blowup))
    }

    fn size_check(&self, r: &DiagnosticsRecord) -> Option<Outcome> {
        if self.linf0 > 0.0 && r.linf > 10.0 * self.linf0 {
            Some(format!("‖θ‖∞ = {} exceeds 10·‖θ₀‖∞", r.linf))
        } else if r.grad_linf > self.cfg.grad_cap {
            Some(format!("‖∇θ‖∞ = {} exceeds the cap {}", r.grad_linf, self.cfg.grad_cap))
        } else {
            None
        }
        .map(|reason| Outcome::BlowupSuspected { t: r.t, reason })
    }

    /// Last finite state not yet recorded, recorded now.
    fn flush(&mut self) -> Option<DiagnosticsRecord> {
        if self.last_recorded_step == self.state.step_count {
            return None;
        }
        self.record().ok().map(|(r, _)| r)
    }
}

#[cfg(test)]
mod tests;
