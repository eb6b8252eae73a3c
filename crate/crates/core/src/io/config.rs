//! Plain-text `key = value` run configuration.
//!
//! One pair per line; `#` starts a comment; blank lines are ignored. Unknown
//! and repeated keys are errors.

use std::collections::HashSet;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::init::InitialData;
use crate::moc::{kind_for, CaseConstants, MocKind, ModulusOfContinuity, XiRange};
use crate::solver::{DtPolicy, SolverConfig};

/// Keys of the modulus section; any one of them makes [`RunConfig::moc`]
/// present.
const MOC_KEYS: [&str; 8] = ["kind", "delta", "gamma", "A", "B", "xi_min", "xi_max", "samples"];

/// Modulus settings. `delta` and `gamma` default to the admissible pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MocConfig {
    pub kind: Option<MocKind>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub xi: XiRange,
}

impl Default for MocConfig {
    fn default() -> Self {
        MocConfig {
            kind: None,
            delta: None,
            gamma: None,
            a: 1.0,
            b: 1.0,
            xi: XiRange::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Required by every command that runs the solver or builds a modulus.
    pub alpha: Option<f64>,
    pub nu: f64,
    pub n: usize,
    pub t_end: f64,
    pub dt: Option<f64>,
    pub cfl: Option<f64>,
    pub dt_max: f64,
    pub dealias: bool,
    pub friedrichs_eps: Option<f64>,
    pub init: InitialData,
    pub moc: Option<MocConfig>,
    pub out_dir: Option<PathBuf>,
    pub snapshot_every: Option<usize>,
    pub diagnostics_every: usize,
    pub lp_norms: Vec<f64>,
    pub grad_cap: f64,
    /// Integer `λ` of the scaling check.
    pub scaling_lambda: u32,
    /// `ε` values of the Friedrichs check.
    pub eps_list: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: None,
            nu: 1.0,
            n: 64,
            t_end: 1.0,
            dt: None,
            cfl: None,
            dt_max: 1e-2,
            dealias: true,
            friedrichs_eps: None,
            init: InitialData::Zero,
            moc: None,
            out_dir: None,
            snapshot_every: None,
            diagnostics_every: 1,
            lp_norms: Vec::new(),
            grad_cap: f64::INFINITY,
            scaling_lambda: 2,
            eps_list: vec![0.25, 0.125, 0.0625],
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| cfg_err(format!("{key}: `{v}` is not a number")))?;
    if x.is_nan() {
        return Err(cfg_err(format!("{key}: NaN")));
    }
    Ok(x)
}

fn positive(key: &str, v: &str) -> Result<f64> {
    let x = num(key, v)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(cfg_err(format!("{key} must be positive and finite, got {v}")));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| cfg_err(format!("{key}: `{v}` is not a non-negative integer")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| num(key, x.trim())).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        let mut moc = MocConfig::default();
        let mut has_moc = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, v) = (key.trim(), value.trim());
            if !seen.insert(key.to_owned()) {
                return Err(cfg_err(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            if MOC_KEYS.contains(&key) {
                has_moc = true;
            }
            match key {
                "alpha" => cfg.alpha = Some(num(key, v)?),
                "nu" => cfg.nu = num(key, v)?,
                "n" => cfg.n = count(key, v)?,
                "t_end" => cfg.t_end = num(key, v)?,
                "dt" => cfg.dt = Some(num(key, v)?),
                "cfl" => cfg.cfl = Some(num(key, v)?),
                "dt_max" => cfg.dt_max = num(key, v)?,
                "dealias" => {
                    cfg.dealias = v.parse().map_err(|_| cfg_err(format!("dealias: `{v}` is not true/false")))?
                }
                "friedrichs_eps" => cfg.friedrichs_eps = Some(num(key, v)?),
                "init" => cfg.init = InitialData::parse(v)?,
                "out_dir" => {
                    if v.is_empty() {
                        return Err(cfg_err("out_dir is empty"));
                    }
                    cfg.out_dir = Some(PathBuf::from(v))
                }
                "snapshot_every" => cfg.snapshot_every = Some(count(key, v)?),
                "diagnostics_every" => cfg.diagnostics_every = count(key, v)?,
                "lp_norms" => cfg.lp_norms = list(key, v)?,
                "grad_cap" => cfg.grad_cap = num(key, v)?,
                "scaling_lambda" => {
                    cfg.scaling_lambda = v
                        .parse()
                        .ok()
                        .filter(|&l| (1..=16).contains(&l))
                        .ok_or_else(|| cfg_err(format!("scaling_lambda must be an integer in 1..=16, got `{v}`")))?
                }
                "eps_list" => cfg.eps_list = list(key, v)?,
                "kind" => moc.kind = Some(v.parse()?),
                "delta" => moc.delta = Some(positive(key, v)?),
                "gamma" => moc.gamma = Some(positive(key, v)?),
                "A" => moc.a = positive(key, v)?,
                "B" => moc.b = positive(key, v)?,
                "xi_min" => moc.xi.min = positive(key, v)?,
                "xi_max" => moc.xi.max = positive(key, v)?,
                "samples" => moc.xi.samples = count(key, v)?,
                _ => return Err(cfg_err(format!("line {}: unknown key `{key}`", lineno + 1))),
            }
        }
        if has_moc {
            cfg.moc = Some(moc);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that do not need `alpha`, plus the full solver and
    /// modulus checks when it is present.
    pub fn validate(&self) -> Result<()> {
        if self.dt.is_some() && self.cfl.is_some() {
            return Err(cfg_err("dt and cfl are mutually exclusive"));
        }
        for &eps in &self.eps_list {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(cfg_err(format!("eps_list entries must be positive, got {eps}")));
            }
        }
        if let Some(m) = &self.moc {
            if !(m.xi.min < m.xi.max) {
                return Err(cfg_err("xi_min must be below xi_max"));
            }
            if m.xi.samples < 2 {
                return Err(cfg_err("samples must be at least 2"));
            }
        }
        if self.n > 4096 {
            return Err(cfg_err(format!("n = {} is above the supported 4096", self.n)));
        }
        if let Some(alpha) = self.alpha {
            self.solver_config_for(alpha).validate()?;
            if self.moc.is_some() {
                self.modulus()?;
            }
        } else if self.moc.is_some() {
            return Err(cfg_err("modulus keys need alpha"));
        }
        Ok(())
    }

    fn solver_config_for(&self, alpha: f64) -> SolverConfig {
        let mut sc = SolverConfig::new(alpha, self.nu, self.n);
        sc.dt_policy = match (self.dt, self.cfl) {
            (_, Some(c)) => DtPolicy::Cfl { c, dt_max: self.dt_max },
            (Some(dt), None) => DtPolicy::Fixed(dt),
            (None, None) => DtPolicy::Fixed(1e-3),
        };
        sc.t_end = self.t_end;
        sc.dealias = self.dealias;
        sc.friedrichs_eps = self.friedrichs_eps;
        sc.snapshot_every = self.snapshot_every;
        sc.diagnostics_every = self.diagnostics_every;
        sc.lp_norms = self.lp_norms.clone();
        sc.grad_cap = self.grad_cap;
        sc
    }

    pub fn require_alpha(&self) -> Result<f64> {
        self.alpha.ok_or_else(|| cfg_err("missing key `alpha`"))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let sc = self.solver_config_for(self.require_alpha()?);
        sc.validate()?;
        Ok(sc)
    }

    pub fn case_constants(&self) -> Result<CaseConstants> {
        let m = self.moc.clone().unwrap_or_default();
        CaseConstants::new(m.a, m.b, self.nu)
    }

    /// The configured modulus, or `None` without modulus keys.
    pub fn modulus(&self) -> Result<Option<ModulusOfContinuity>> {
        let Some(m) = &self.moc else {
            return Ok(None);
        };
        self.build_modulus(m).map(Some)
    }

    /// The configured modulus, falling back to the admissible one.
    pub fn modulus_or_admissible(&self) -> Result<ModulusOfContinuity> {
        self.build_modulus(&self.moc.clone().unwrap_or_default())
    }

    fn build_modulus(&self, m: &MocConfig) -> Result<ModulusOfContinuity> {
        let alpha = self.require_alpha()?;
        let kind = kind_for(alpha)?;
        if let Some(k) = m.kind {
            if k != kind {
                return Err(cfg_err(format!("kind {k} does not cover alpha = {alpha}")));
            }
        }
        let c = self.case_constants()?;
        let (delta, gamma) = match (m.delta, m.gamma) {
            (Some(d), Some(g)) => (d, g),
            (d, g) => {
                let (da, ga) = crate::moc::admissible_params(alpha, &c)?;
                (d.unwrap_or(da), g.unwrap_or(ga))
            }
        };
        ModulusOfContinuity::new(kind, alpha, delta, gamma)
    }

    /// Output directory; a command-line override wins over the file.
    pub fn out_dir(&self, over: Option<PathBuf>) -> Result<PathBuf> {
        over.or_else(|| self.out_dir.clone())
            .ok_or_else(|| cfg_err("missing key `out_dir` (or --out)"))
    }
}
