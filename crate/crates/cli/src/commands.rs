use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Value};

use mqg_core::io::{self, fmt_f64, RunConfig};
use mqg_core::moc::{certify_negativity, lambda_value, Verdict};
use mqg_core::solver::{
    friedrichs_convergence_check, run_observed, scaling_discrepancy, Outcome, RunObserver, SolverState,
};
use mqg_core::{Grid, PhysicalField};

use crate::emit::{csv, num, Emitter};
use crate::suites::{kernel_suite, lp_suite, Row};
use crate::{Command, Status};

/// Largest scaling discrepancy accepted, and smallest one expected from the
/// mismatched-viscosity control run.
const SCALING_TOL: f64 = 1e-4;
const SCALING_CONTROL: f64 = 1e-2;

pub fn dispatch(cmd: Command, config: Option<PathBuf>, out: Option<PathBuf>, threads: Option<usize>) -> Result<Status> {
    if let Some(k) = threads {
        if k == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    let path = config.context("--config is required")?;
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = RunConfig::parse(&text).with_context(|| format!("in {}", path.display()))?;
    let dir = cfg.out_dir(out)?;

    let mut em = Emitter::new(dir)?;
    let (body, status) = match cmd {
        Command::Simulate => simulate(&cfg, &mut em)?,
        Command::CertifyMoc => certify_moc(&cfg, &mut em)?,
        Command::KernelCheck => suite("kernel-check", "kernel_checks.csv", kernel_suite(&mut em)?, &mut em)?,
        Command::LpCheck => suite("lp-check", "lp_checks.csv", lp_suite(&cfg)?, &mut em)?,
        Command::ScalingCheck => scaling_check(&cfg, &mut em)?,
        Command::FriedrichsCheck => friedrichs_check(&cfg, &mut em)?,
    };
    em.finish(&body)?;
    Ok(status)
}

fn initial_data(cfg: &RunConfig) -> Result<PhysicalField> {
    let n = cfg.solver_config()?.n;
    Ok(cfg.init.sample(&Grid::new(n)?)?)
}

fn verdict(pass: bool) -> (&'static str, Status) {
    if pass {
        ("PASS", Status::Pass)
    } else {
        ("FAIL", Status::Fail)
    }
}

#[derive(Default)]
struct Snapshots(Vec<(String, Vec<u8>)>);

impl RunObserver for Snapshots {
    fn on_snapshot(&mut self, state: &SolverState) -> mqg_core::Result<()> {
        let mut buf = Vec::new();
        io::write_physical_snapshot(&mut buf, &state.theta_hat.to_physical()?, state.t)?;
        self.0.push((format!("snapshot_{:06}.mqg", state.step_count), buf));
        Ok(())
    }
}

fn simulate(cfg: &RunConfig, em: &mut Emitter) -> Result<(Value, Status)> {
    let sc = cfg.solver_config()?;
    let omega = cfg.modulus()?;
    let theta0 = initial_data(cfg)?;
    let mut snaps = Snapshots::default();
    let out = run_observed(&sc, &theta0, &mut snaps)?;

    let mut diag = Vec::new();
    io::write_diagnostics(&mut diag, &sc.lp_norms, &out.records)?;
    em.write("diagnostics.csv", &diag)?;
    for (name, bytes) in &snaps.0 {
        em.write(name, bytes)?;
    }
    let mut last = Vec::new();
    io::write_physical_snapshot(&mut last, &out.state.theta_hat.to_physical()?, out.state.t)?;
    em.write("final.mqg", &last)?;

    let (first, fin) = (&out.records[0], out.records.last().expect("initial record"));
    let mut body = json!({
        "command": "simulate",
        "steps": out.state.step_count,
        "t_final": out.state.t,
        "l2_final": fin.l2,
        "linf_final": fin.linf,
        "grad_linf_final": fin.grad_linf,
        "max_principle_margin": out.max_principle_margin(),
        "energy_residual": out.energy_residual(),
        "sup_grad_linf": out.sup_grad_linf(),
    });
    let obj = body.as_object_mut().expect("object");
    let margins: Map<String, Value> = sc
        .lp_norms
        .iter()
        .map(|&p| (format!("lp_{p}"), json!(out.lp_margin(p))))
        .collect();
    obj.insert("lp_margins".into(), Value::Object(margins));
    if let Some(omega) = omega {
        obj.insert("modulus".into(), json!({"kind": omega.kind().to_string(), "delta": omega.delta(), "gamma": omega.gamma()}));
        match lambda_value(&omega, first.linf, first.grad_linf) {
            Ok(lambda) => {
                obj.insert("lambda".into(), num(lambda));
                obj.insert("grad_below_lambda".into(), json!(out.sup_grad_linf() < lambda));
            }
            Err(e) => {
                obj.insert("lambda".into(), Value::Null);
                obj.insert("lambda_error".into(), json!(e.to_string()));
            }
        }
    }
    let status = match &out.outcome {
        Outcome::Completed => {
            obj.insert("status".into(), json!("completed"));
            Status::Pass
        }
        Outcome::BlowupSuspected { t, reason } => {
            obj.insert("status".into(), json!("blowup_suspected"));
            obj.insert("blowup".into(), json!({"t": t, "reason": reason}));
            Status::Blowup
        }
    };
    Ok((body, status))
}

fn certify_moc(cfg: &RunConfig, em: &mut Emitter) -> Result<(Value, Status)> {
    let omega = cfg.modulus_or_admissible()?;
    let c = cfg.case_constants()?;
    let range = cfg.moc.as_ref().map(|m| m.xi).unwrap_or_default();
    let report = certify_negativity(&omega, &c, &range)?;
    let mut buf = Vec::new();
    io::write_certification(&mut buf, &report)?;
    em.write("certification.csv", &buf)?;

    let worst = report.worst_index();
    let (word, status) = verdict(report.verdict() == Verdict::Pass);
    let body = json!({
        "command": "certify-moc",
        "params": {
            "kind": report.kind.to_string(),
            "alpha": report.alpha,
            "delta": report.delta,
            "gamma": report.gamma,
            "A": c.a,
            "B": c.b,
            "nu": c.nu,
            "xi_min": range.min,
            "xi_max": range.max,
            "samples": report.xi_samples.len(),
        },
        "worst_margin": num(report.worst_margin()),
        "worst_xi": report.worst_xi(),
        "worst_error_bound": report.error_bounds.get(worst),
        "first_failure": report.first_failure().map(|(xi, m)| json!({"xi": xi, "margin": num(m)})),
        "failed_hypotheses": report.failed_hypotheses().iter().map(|h| h.name).collect::<Vec<_>>(),
        "verdict": word,
    });
    Ok((body, status))
}

fn suite(command: &str, file: &str, rows: Vec<Row>, em: &mut Emitter) -> Result<(Value, Status)> {
    em.write(
        file,
        &csv("check,param,value,threshold,status", rows.iter().map(Row::cells)),
    )?;
    let failed: Vec<String> = rows.iter().filter(|r| r.status == "FAIL").map(Row::label).collect();
    let (word, status) = verdict(failed.is_empty());
    let checks: Map<String, Value> = rows.iter().map(|r| (r.label(), json!(r.status))).collect();
    Ok((
        json!({"command": command, "checks": checks, "failed": failed, "verdict": word}),
        status,
    ))
}

fn scaling_check(cfg: &RunConfig, em: &mut Emitter) -> Result<(Value, Status)> {
    let sc = cfg.solver_config()?;
    let theta0 = initial_data(cfg)?;
    let lambda = cfg.scaling_lambda;
    let nu_b = 2.0 * sc.nu;
    let (same, control) = rayon::join(
        || scaling_discrepancy(&sc, &theta0, lambda, None),
        || scaling_discrepancy(&sc, &theta0, lambda, Some(nu_b)),
    );
    let (same, control) = (same?, control?);
    let pass_same = same <= SCALING_TOL;
    let pass_control = control > SCALING_CONTROL;
    em.write(
        "scaling.csv",
        &csv(
            "lambda,nu_b,discrepancy,threshold,status",
            [
                vec![lambda.to_string(), fmt_f64(sc.nu), fmt_f64(same), format!("<={SCALING_TOL:e}"), verdict(pass_same).0.into()],
                vec![lambda.to_string(), fmt_f64(nu_b), fmt_f64(control), format!(">{SCALING_CONTROL:e}"), verdict(pass_control).0.into()],
            ],
        ),
    )?;
    let (word, status) = verdict(pass_same && pass_control);
    Ok((
        json!({
            "command": "scaling-check",
            "lambda": lambda,
            "discrepancy": same,
            "control_nu_b": nu_b,
            "control_discrepancy": control,
            "verdict": word,
        }),
        status,
    ))
}

fn friedrichs_check(cfg: &RunConfig, em: &mut Emitter) -> Result<(Value, Status)> {
    let sc = cfg.solver_config()?;
    let theta0 = initial_data(cfg)?;
    if cfg.eps_list.is_empty() {
        bail!("eps_list is empty");
    }
    let mut gaps = friedrichs_convergence_check(&sc, &theta0, &cfg.eps_list)?;
    gaps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let kmax = Grid::new(sc.n)?.max_kmag();
    let monotone = gaps.windows(2).all(|w| w[1].1 <= w[0].1);
    // no mode is cut once 1/ε is beyond every |k| on the grid
    let exact = gaps.iter().filter(|(e, _)| 1.0 / e > kmax).all(|&(_, g)| g == 0.0);
    em.write(
        "friedrichs.csv",
        &csv(
            "eps,gap,cuts_no_mode",
            gaps.iter().map(|&(e, g)| vec![fmt_f64(e), fmt_f64(g), (1.0 / e > kmax).to_string()]),
        ),
    )?;
    let (word, status) = verdict(monotone && exact);
    Ok((
        json!({
            "command": "friedrichs-check",
            "gaps": gaps.iter().map(|&(e, g)| json!({"eps": e, "gap": g})).collect::<Vec<_>>(),
            "monotone": monotone,
            "zero_when_uncut": exact,
            "verdict": word,
        }),
        status,
    ))
}
