use std::f64::consts::PI;

use num_complex::Complex64;

use super::*;
use crate::init::random_bandlimited;
use crate::moc::{check_obeys, ModulusOfContinuity};

fn grid(n: usize) -> Grid {
    Grid::new(n).unwrap()
}

fn field(n: usize, f: impl Fn(f64, f64) -> f64) -> PhysicalField {
    PhysicalField::from_fn(grid(n), f).unwrap()
}

fn max_diff(a: &PhysicalField, b: &PhysicalField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn cfg(alpha: f64, n: usize, dt: f64, t_end: f64) -> SolverConfig {
    let mut c = SolverConfig::new(alpha, 1.0, n);
    c.dt_policy = DtPolicy::Fixed(dt);
    c.t_end = t_end;
    c
}

#[test]
fn nonlinear_term_vanishes_on_constants_and_single_modes() {
    let c = field(16, |_, _| 2.0).to_spectral().unwrap();
    assert_eq!(nonlinear_term(&c, 0.5, true).unwrap().max_abs_coeff(), 0.0);
    let s = field(16, |x1, _| x1.sin()).to_spectral().unwrap();
    for alpha in [0.5, 1.0, 1.5] {
        assert!(nonlinear_term(&s, alpha, true).unwrap().max_abs_coeff() < 1e-15);
    }
}

#[test]
fn nonlinear_term_matches_hand_computation() {
    // θ = cos x₁ + cos 2x₂: u = (-2^{α-1} sin 2x₂, sin x₁)·(-1)… computed
    // directly: û = i(k₂, -k₁)|k|^{α-2}θ̂ gives u₁ = -2^{α-1} sin 2x₂,
    // u₂ = sin x₁, and -u·∇θ = -(u₁(-sin x₁) + u₂(-2 sin 2x₂))
    let alpha = 1.3;
    let n = 32;
    let theta = field(n, |x1, x2| x1.cos() + (2.0 * x2).cos());
    let got = nonlinear_term(&theta.to_spectral().unwrap(), alpha, true)
        .unwrap()
        .to_physical()
        .unwrap();
    let c = 2f64.powf(alpha - 1.0);
    let want = field(n, |x1, x2| {
        let u1 = -c * (2.0 * x2).sin();
        let u2 = x1.sin();
        u1 * x1.sin() + u2 * 2.0 * (2.0 * x2).sin()
    });
    assert!(max_diff(&got, &want) < 1e-13);
}

#[test]
fn advection_is_skew_on_resolved_data() {
    // band limit 8 keeps θ·(u·∇θ) below the grid's aliasing limit, so the grid
    // sum is the exact integral, which vanishes since div u = 0
    let g = grid(32);
    for seed in 0..4 {
        let theta = random_bandlimited(&g, seed, 8.0, 1.0).unwrap();
        for alpha in [0.4, 1.0, 1.6] {
            let n = nonlinear_term(&theta.to_spectral().unwrap(), alpha, false)
                .unwrap()
                .to_physical()
                .unwrap();
            let dx = g.dx();
            let s: f64 = theta.values().iter().zip(n.values()).map(|(a, b)| a * b).sum::<f64>() * dx * dx;
            assert!(s.abs() < 1e-10, "seed {seed} α {alpha}: {s}");
        }
    }
}

#[test]
fn nonlinear_term_has_zero_mean_and_is_hermitian() {
    let g = grid(32);
    let theta = random_bandlimited(&g, 3, 12.0, 1.0).unwrap().to_spectral().unwrap();
    let n = nonlinear_term(&theta, 0.7, true).unwrap();
    assert_eq!(n.mean(), Complex64::new(0.0, 0.0));
    assert!(n.hermitian_defect() < 1e-15);
}

#[test]
fn linear_run_is_exact() {
    for alpha in [0.5, 1.5] {
        let mut c = cfg(alpha, 16, 0.37, 1.0);
        c.advection = false;
        let theta0 = field(16, |x1, x2| x1.cos() + 0.5 * (2.0 * x1 + x2).sin());
        let out = run(&c, &theta0).unwrap();
        assert_eq!(out.state.t, 1.0);
        let decay5 = (-(5f64).powf(alpha / 2.0)).exp();
        let want = field(16, |x1, x2| (-1f64).exp() * x1.cos() + 0.5 * decay5 * (2.0 * x1 + x2).sin());
        assert!(max_diff(&out.state.theta_hat.to_physical().unwrap(), &want) < 1e-13);
    }
}

#[test]
fn linear_step_independent_of_dt() {
    let mut c = cfg(1.5, 16, 0.01, 0.5);
    c.advection = false;
    let theta0 = random_bandlimited(&grid(16), 1, 6.0, 1.0).unwrap();
    let fine = run(&c, &theta0).unwrap().state.theta_hat;
    c.dt_policy = DtPolicy::Fixed(0.5);
    let coarse = run(&c, &theta0).unwrap().state.theta_hat;
    let d = fine.sub(&coarse).unwrap().max_abs_coeff();
    assert!(d < 1e-14, "{d}");
}

#[test]
fn zero_data_stays_zero() {
    let c = cfg(0.7, 16, 0.05, 1.0);
    let out = run(&c, &PhysicalField::zeros(grid(16))).unwrap();
    assert_eq!(out.outcome, Outcome::Completed);
    assert_eq!(out.state.theta_hat.max_abs_coeff(), 0.0);
    for r in &out.records {
        assert_eq!((r.l2, r.linf, r.grad_linf, r.diss_int, r.grad_alpha_int), (0.0, 0.0, 0.0, 0.0, 0.0));
    }
}

#[test]
fn two_mode_run_respects_max_principle_and_energy_balance() {
    let mut c = cfg(0.5, 32, 1e-2, 1.0);
    c.lp_norms = vec![2.0, 4.0];
    let theta0 = field(32, |x1, x2| x1.cos() + x2.sin());
    let out = run(&c, &theta0).unwrap();
    assert_eq!(out.records.len(), 101);
    for w in out.records.windows(2) {
        assert!(w[1].linf <= w[0].linf * (1.0 + 1e-6));
    }
    let e0 = out.records[0].l2.powi(2);
    assert!(out.energy_residual() <= 1e-6 * e0);
    assert!(out.max_principle_margin() <= 0.0);
    assert!(out.lp_margin(4.0).unwrap() <= 1e-12);
    assert!(out.lp_margin(3.0).is_none());
}

#[test]
fn energy_balance_with_nonlinear_exchange() {
    for alpha in [0.5, 1.5] {
        let c = cfg(alpha, 64, 2e-3, 0.5);
        let theta0 = random_bandlimited(&grid(64), 7, 5.0, 0.5).unwrap();
        let out = run(&c, &theta0).unwrap();
        let e0 = out.records[0].l2.powi(2);
        assert!(out.energy_residual() <= 1e-6 * e0, "α {alpha}: {}", out.energy_residual() / e0);
    }
}

#[test]
fn dissipation_integral_on_one_mode() {
    // θ = cos x₁ decays as e^{-t}; ‖|D|^{α/2}θ‖² = 2π² e^{-2t}
    let mut c = cfg(1.2, 16, 0.1, 1.0);
    c.advection = false;
    let out = run(&c, &field(16, |x1, _| x1.cos())).unwrap();
    let want = 2.0 * PI * PI * (1.0 - (-2f64).exp()) / 2.0;
    let got = out.records.last().unwrap().diss_int;
    assert!((got - want).abs() < 1e-13 * want);
}

#[test]
fn grad_alpha_integral_is_trapezoid_of_records() {
    let mut c = cfg(0.8, 16, 0.1, 1.0);
    c.advection = false;
    c.diagnostics_every = 2;
    let out = run(&c, &field(16, |x1, _| x1.sin())).unwrap();
    let mut acc = 0.0;
    for w in out.records.windows(2) {
        acc += 0.5 * (w[1].t - w[0].t) * (w[0].grad_linf.powf(0.8) + w[1].grad_linf.powf(0.8));
        assert!((w[1].grad_alpha_int - acc).abs() < 1e-15);
    }
    assert_eq!(out.records.len(), 6);
}

#[test]
fn mean_is_conserved_exactly() {
    let c = cfg(1.1, 32, 5e-3, 0.2);
    let theta0 = field(32, |x1, x2| 0.3 + 0.2 * (x1 + 2.0 * x2).cos() + 0.1 * (3.0 * x2).sin());
    let s0 = initial_state(&c, &theta0).unwrap();
    let out = run(&c, &theta0).unwrap();
    assert_eq!(out.state.theta_hat.mean(), s0.theta_hat.mean());
}

#[test]
fn second_order_in_time() {
    let n = 32;
    let theta0 = random_bandlimited(&grid(n), 11, 4.0, 1.0).unwrap();
    let solve = |dt: f64| run(&cfg(1.4, n, dt, 0.5), &theta0).unwrap().state.theta_hat;
    let (a, b, c) = (solve(0.02), solve(0.01), solve(0.005));
    let e1 = a.sub(&b).unwrap().l2_norm();
    let e2 = b.sub(&c).unwrap().l2_norm();
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn state_stays_hermitian() {
    let theta0 = random_bandlimited(&grid(32), 2, 8.0, 1.0).unwrap();
    let out = run(&cfg(0.6, 32, 1e-2, 0.5), &theta0).unwrap();
    assert!(out.state.theta_hat.hermitian_defect() < 1e-15);
}

#[test]
fn cfl_examples() {
    let mut c = SolverConfig::new(1.0, 1.0, 64);
    c.dt_policy = DtPolicy::Cfl { c: 0.5, dt_max: 1.0 };
    let zero = initial_state(&c, &PhysicalField::zeros(grid(64))).unwrap();
    assert_eq!(cfl_dt(&zero, &c).unwrap(), 1.0);
    // α = 1: θ = sin x₁ gives u = (0, -cos x₁), ‖u‖∞ = 1
    let s = initial_state(&c, &field(64, |x1, _| x1.sin())).unwrap();
    let dt = cfl_dt(&s, &c).unwrap();
    assert!((dt - 0.5 * 2.0 * PI / 64.0).abs() < 1e-15);
    let mut c2 = c.clone();
    c2.n = 128;
    let s2 = initial_state(&c2, &field(128, |x1, _| x1.sin())).unwrap();
    assert!((cfl_dt(&s2, &c2).unwrap() - 0.5 * dt).abs() < 1e-15);
}

#[test]
fn cfl_run_lands_on_t_end() {
    let mut c = cfg(1.5, 32, 1.0, 0.3);
    c.dt_policy = DtPolicy::Cfl { c: 0.4, dt_max: 0.01 };
    let out = run(&c, &random_bandlimited(&grid(32), 4, 5.0, 1.0).unwrap()).unwrap();
    assert_eq!(out.state.t, 0.3);
    assert_eq!(out.records.last().unwrap().t, 0.3);
}

#[test]
fn config_validation() {
    let ok = SolverConfig::new(1.0, 1.0, 16);
    assert!(ok.validate().is_ok());
    for bad in [
        SolverConfig { alpha: 2.0, ..ok.clone() },
        SolverConfig { alpha: 0.0, ..ok.clone() },
        SolverConfig { nu: 0.0, ..ok.clone() },
        SolverConfig { n: 15, ..ok.clone() },
        SolverConfig { t_end: -1.0, ..ok.clone() },
        SolverConfig { dt_policy: DtPolicy::Fixed(0.0), ..ok.clone() },
        SolverConfig { friedrichs_eps: Some(0.0), ..ok.clone() },
        SolverConfig { diagnostics_every: 0, ..ok.clone() },
        SolverConfig { lp_norms: vec![0.5], ..ok.clone() },
    ] {
        assert!(bad.validate().is_err(), "{bad:?}");
    }
    assert!(run(&ok, &PhysicalField::zeros(grid(8))).is_err());
}

#[test]
fn gradient_cap_reports_blowup() {
    let mut c = cfg(1.0, 16, 0.01, 0.1);
    c.grad_cap = 0.5;
    let out = run(&c, &field(16, |x1, _| x1.sin())).unwrap();
    assert!(matches!(out.outcome, Outcome::BlowupSuspected { .. }));
    assert_eq!(out.records.len(), 1);
    assert!(matches!(out.into_result(), Err(Error::BlowupSuspected { .. })));
}

#[test]
fn observer_sees_rows_and_snapshots() {
    struct Count(usize, usize);
    impl RunObserver for Count {
        fn on_record(&mut self, _: &DiagnosticsRecord) -> Result<()> {
            self.0 += 1;
            Ok(())
        }
        fn on_snapshot(&mut self, _: &SolverState) -> Result<()> {
            self.1 += 1;
            Ok(())
        }
    }
    let mut c = cfg(0.5, 16, 0.1, 1.0);
    c.diagnostics_every = 3;
    c.snapshot_every = Some(4);
    let mut obs = Count(0, 0);
    let out = run_observed(&c, &field(16, |x1, _| x1.cos()), &mut obs).unwrap();
    // rows at steps 0,3,6,9,10; snapshots at 0,4,8,10
    assert_eq!((obs.0, obs.1), (5, 4));
    assert_eq!(out.records.len(), 5);
}

#[test]
fn single_step_matches_run() {
    let c = cfg(0.9, 16, 0.05, 0.05);
    let theta0 = random_bandlimited(&grid(16), 9, 4.0, 1.0).unwrap();
    let s = step(&initial_state(&c, &theta0).unwrap(), &c, 0.05).unwrap();
    let r = run(&c, &theta0).unwrap().state;
    assert_eq!(s.theta_hat, r.theta_hat);
    assert_eq!(s.step_count, 1);
}

#[test]
fn scaling_identity_examples() {
    let n = 32;
    let theta0 = random_bandlimited(&grid(n), 5, 5.0, 0.5).unwrap();
    let c = cfg(1.5, n, 1e-2, 0.2);
    assert_eq!(scaling_invariance_check(&c, &theta0, 1).unwrap(), 0.0);
    let d = scaling_invariance_check(&c, &theta0, 2).unwrap();
    assert!(d <= 1e-5, "{d}");
    let bad = scaling_discrepancy(&c, &theta0, 2, Some(2.0)).unwrap();
    assert!(bad > 1e-2, "{bad}");
    assert!(scaling_invariance_check(&c, &theta0, 0).is_err());
}

#[test]
fn friedrichs_examples() {
    let n = 32;
    let theta0 = random_bandlimited(&grid(n), 6, 2.0, 1.0).unwrap();
    let c = cfg(1.2, n, 1e-2, 0.3);
    // 1/ε ≥ n/√2 keeps every grid mode
    let tiny = 1.0 / (n as f64);
    let gaps = friedrichs_convergence_check(&c, &theta0, &[0.25, 0.125, 0.0625, tiny]).unwrap();
    assert_eq!(gaps[3], (tiny, 0.0));
    assert!(gaps[0].1 > gaps[1].1 && gaps[1].1 > gaps[2].1 && gaps[2].1 > 0.0, "{gaps:?}");

    // band limit 2 lies inside |k| ≤ 4: the initial gap is zero
    let mut short = c.clone();
    short.t_end = 1e-2;
    let s0 = initial_state(&SolverConfig { friedrichs_eps: Some(0.25), ..c.clone() }, &theta0).unwrap();
    let moved = s0.theta_hat.sub(&theta0.to_spectral().unwrap()).unwrap().max_abs_coeff();
    assert!(moved < 1e-16, "{moved}");
    assert!(friedrichs_convergence_check(&short, &theta0, &[0.25]).unwrap()[0].1 > 0.0);

    let mut cflc = c.clone();
    cflc.dt_policy = DtPolicy::Cfl { c: 0.5, dt_max: 0.1 };
    assert!(friedrichs_convergence_check(&cflc, &theta0, &[0.25]).is_err());
}

/// Exhaustive pair scan, independent of the offset tables.
fn brute_margin(f: &PhysicalField, omega: impl Fn(f64) -> f64, lambda: f64) -> f64 {
    let n = f.grid().n();
    let dx = f.grid().dx();
    let v = f.values();
    let mut best = 0.0f64;
    for p in 0..n * n {
        for q in 0..n * n {
            let d = v[p] - v[q];
            if d == 0.0 {
                continue;
            }
            let per = |a: usize, b: usize| {
                let m = (a as i64 - b as i64).rem_euclid(n as i64);
                m.min(n as i64 - m) as f64
            };
            let (a, b) = (per(p / n, q / n), per(p % n, q % n));
            let dist = (a * a + b * b).sqrt() * dx;
            best = best.max(d.abs() / omega(lambda * dist));
        }
    }
    best
}

#[test]
fn saturation_pair_margin_matches_brute_force() {
    let w = ModulusOfContinuity::admissible(1.5, &Default::default()).unwrap();
    let n = 16;
    let theta0 = random_bandlimited(&grid(n), 8, 3.0, 1e-3).unwrap();
    let state = initial_state(&cfg(1.5, n, 0.1, 1.0), &theta0).unwrap();
    for lambda in [1.0, 40.0, 1e4] {
        let got = saturation_pair_check(&state, &w, lambda, 1.0).unwrap();
        let phys = state.theta_hat.to_physical().unwrap();
        let brute = brute_margin(&phys, |x| w.eval(x), lambda);
        assert_eq!(got.margin, brute);
        let (ok, worst) = check_obeys(&phys, |x| w.eval(x), lambda).unwrap();
        assert_eq!(worst, brute);
        assert_eq!(ok, brute < 1.0);
        assert!(phys.values()[got.x] >= phys.values()[got.y]);
        assert!(got.dissipation_gap.is_some());
    }
}

#[test]
fn saturation_pair_on_zero_and_small_data() {
    let w = ModulusOfContinuity::admissible(0.5, &Default::default()).unwrap();
    let c = cfg(0.5, 16, 0.1, 1.0);
    let zero = initial_state(&c, &PhysicalField::zeros(grid(16))).unwrap();
    let r = saturation_pair_check(&zero, &w, 1.0, 1.0).unwrap();
    assert_eq!((r.margin, r.dissipation_gap), (0.0, None));

    // ‖∇θ‖∞ = 1e-9 < λω'(0) = 1 bounds short distances, and 2‖θ‖∞ stays
    // below ω(δ) ≈ δ = 7.5e-8 for the long ones
    let small = initial_state(&c, &field(16, |x1, x2| 1e-9 * (x1 + x2).sin() / 2f64.sqrt())).unwrap();
    let r = saturation_pair_check(&small, &w, 1.0, 1.0).unwrap();
    assert!(r.margin < 1.0, "{}", r.margin);
    assert!(saturation_pair_check(&small, &w, 0.0, 1.0).is_err());
}
