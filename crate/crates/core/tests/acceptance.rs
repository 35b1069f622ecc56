//! Acceptance suite: every criterion pinned at its stated tolerance, one
//! pass line per criterion.
//!
//! Run with `cargo test -p rpe-core --test acceptance -- --nocapture` to see
//! the per-criterion lines.

use rpe_core::integrate::{
    energy_audit, integrate_reduced, integrate_rpe, IntegratorConfig, ReducedMode, TerminalEvent,
};
use rpe_core::lie::{
    solve_symmetries, symmetry_condition_strata, verify_symmetry, Ansatz, ForcingMode,
};
use rpe_core::model::{PressureForcing, RpeParams, State};
use rpe_core::painleve::{
    dominant_balance, p1_terms, to_power_terms, A0Roots, BalanceOptions, Verdict,
};
use rpe_core::rational::{rat, rat_int, Rat};
use rpe_core::solutions::{
    collapse_time, invariant_case_1_2, invariant_case_2, invariant_case_3, rdot_squared_inviscid,
    verify_closed_form,
};
use rpe_core::symbolic::{self, diff, eval, EvalContext, Expr, Var};

fn constant_rpe(re_inv: f64, we: f64, th: f64, p_n: f64, k: Rat) -> RpeParams {
    RpeParams::new(re_inv, we, th, p_n, k, PressureForcing::Constant { p0: 1.0 }).unwrap()
}

fn power_law_rpe(re_inv: f64, we: f64, th: f64, p_n: f64, k: Rat, e: Rat) -> RpeParams {
    RpeParams::new(
        re_inv,
        we,
        th,
        p_n,
        k,
        PressureForcing::PowerLaw {
            c: 1.0,
            a: 1.0,
            b: 1.0,
            e,
        },
    )
    .unwrap()
}

#[test]
fn criterion_01_painleve_failure_of_the_rpe() {
    let p = constant_rpe(1.0, 1.0, 1.0, 1.0, rat_int(1));
    let report = dominant_balance(&to_power_terms(&p).unwrap(), &BalanceOptions::default())
        .expect("balance analysis");

    let admissible = report.admissible_candidates();
    assert_eq!(admissible.len(), 1, "dominant balance must be unique");
    let c = admissible[0];
    assert_eq!(c.alpha, rat(-2, 5), "leading exponent must be -2/5 exactly");
    assert_eq!(
        c.dominant_set,
        vec![0, 1],
        "dominant set must be the acceleration and inertia terms"
    );
    assert_eq!(c.a0_roots, A0Roots::Free);
    let reference = ((Expr::int(5) * Expr::param("a") + Expr::int(2))
        * Expr::param("a0")
        * Expr::param("a"))
    .normalize();
    let lambda = symbolic::proportionality(&c.a0_equation, &reference)
        .expect("a0 equation proportional to (5a+2)*a0*a");
    assert!(!lambda.eq(&rat_int(0)));
    assert!(matches!(report.verdict, Verdict::Fail { .. }));
    println!(
        "criterion 1: PASS — unique balance {{Rddot, 3Rdot^2/2R}}, alpha = -2/5, \
         a0 equation proportional to (5a+2)*a0*a (factor {}), verdict FAIL",
        rpe_core::rational::render_rat(&lambda)
    );
}

#[test]
fn criterion_02_p1_sanity_pass() {
    let report =
        dominant_balance(&p1_terms(), &BalanceOptions::default()).expect("balance analysis");
    assert_eq!(report.verdict, Verdict::Pass);
    let c = report
        .candidates
        .iter()
        .find(|c| c.alpha == rat_int(2))
        .expect("alpha = 2 candidate");
    assert_eq!(c.dominant_set, vec![0, 1]);
    match &c.a0_roots {
        A0Roots::Roots(r) => {
            assert_eq!(r.len(), 1);
            assert_eq!(r[0], 1.0, "a0 must be exactly 1");
        }
        other => panic!("expected a concrete a0 root, got {other:?}"),
    }
    println!("criterion 2: PASS — P1 gives alpha = 2, a0 = 1, verdict PASS");
}

#[test]
fn criterion_03_determining_equation_structure() {
    // Rdot^3 coefficient of the symmetry condition with ansatz-symbolic xi:
    // a nonzero rational multiple of 2 xi_RR R - 3 xi_R, as an Expr identity
    let ansatz = Ansatz::new(2).unwrap();
    let strata = symmetry_condition_strata(&rat_int(1), &ansatz).unwrap();
    let xi = ansatz.xi();
    let xi_r = diff(&xi, Var::R);
    let xi_rr = diff(&xi_r, Var::R);
    let reference =
        (Expr::int(2) * xi_rr * Expr::r() - Expr::int(3) * xi_r).normalize();
    // clear the single R denominator, then demand exact proportionality
    let cleared = (strata[3].clone() * Expr::int(2) * Expr::r()).normalize();
    let lambda = symbolic::proportionality(&cleared, &reference)
        .expect("Rdot^3 stratum proportional to 2 xi_RR R - 3 xi_R");
    println!(
        "criterion 3: PASS — Rdot^3 coefficient = ({}) * (2 xi_RR R - 3 xi_R) / (2R)",
        rpe_core::rational::render_rat(&lambda)
    );
}

#[test]
fn criterion_04_symmetry_basis_reproduction() {
    let deg1 = Ansatz::new(1).unwrap();
    let check = |label: &str, p: &RpeParams, want: &[(&str, &str)]| {
        let basis = solve_symmetries(p, &deg1, ForcingMode::Substituted).unwrap();
        assert_eq!(
            basis.len(),
            want.len(),
            "{label}: null-space dimension mismatch"
        );
        for (vf, (xi, eta)) in basis.iter().zip(want.iter()) {
            assert!(
                vf.xi.equivalent(&symbolic::parse(xi).unwrap()),
                "{label}: xi = {} expected {xi}",
                vf.xi
            );
            assert!(
                vf.eta.equivalent(&symbolic::parse(eta).unwrap()),
                "{label}: eta = {} expected {eta}",
                vf.eta
            );
            let worst = verify_symmetry(p, vf, 200).unwrap();
            assert!(worst < 1e-9, "{label}: residual {worst} at 200 samples");
        }
    };

    // Case 1: constant forcing, generic positive coefficients
    check(
        "case 1",
        &constant_rpe(0.5, 3.0, 5.0, 7.0, rat_int(1)),
        &[("1", "0")],
    );
    // Case 1.2: k = 1 projective family
    check(
        "case 1.2",
        &power_law_rpe(0.0, 0.0, 2.0, 3.0, rat_int(1), rat(-6, 5)),
        &[("t+1", "2/5*R")],
    );
    // Case 2: k = 2/3, viscosity retained
    check(
        "case 2",
        &power_law_rpe(0.5, 0.0, 2.0, 3.0, rat(2, 3), rat_int(-1)),
        &[("t+1", "1/2*R")],
    );
    // Case 3 at the scan-selected exponent -2/3
    let case3 = power_law_rpe(0.0, 3.0, 2.0, 7.0, rat(1, 3), rat(-2, 3));
    check("case 3", &case3, &[("t+1", "2/3*R")]);
    // the scan itself: the only exponent on the grid with a symmetry is -2/3
    let mut hits = vec![];
    for num in -9..=-1i64 {
        let e = rat(num, 3);
        let p = power_law_rpe(0.0, 3.0, 2.0, 7.0, rat(1, 3), e.clone());
        if !solve_symmetries(&p, &deg1, ForcingMode::Substituted)
            .unwrap()
            .is_empty()
        {
            hits.push(e);
        }
    }
    assert_eq!(hits, vec![rat(-2, 3)]);
    // generic full-coefficient case: empty even at degree 2
    let generic = power_law_rpe(0.5, 3.0, 2.0, 7.0, rat(7, 5), rat_int(-1));
    let basis = solve_symmetries(&generic, &Ansatz::new(2).unwrap(), ForcingMode::Substituted)
        .unwrap();
    assert!(basis.is_empty(), "generic case must have a trivial algebra");

    println!(
        "criterion 4: PASS — bases {{(1,0)}}, {{(t+1, 2R/5)}}, {{(t+1, R/2)}}, \
         {{(t+1, 2R/3)}} at e = -2/3, and the empty generic algebra; \
         all residuals < 1e-9 at 200 seeded samples"
    );
}

#[test]
fn criterion_05_closed_form_residuals() {
    let times: Vec<f64> = (0..20).map(|i| 10.0 * i as f64 / 19.0).collect();

    let cf12 = invariant_case_1_2(&power_law_rpe(0.0, 0.0, 2.0, 3.0, rat_int(1), rat(-6, 5)))
        .unwrap();
    let worst12 = verify_closed_form(&cf12, &times).unwrap();
    assert!(worst12 < 1e-12, "case 1.2 residual {worst12}");

    let cf2 = invariant_case_2(&power_law_rpe(0.5, 0.0, 2.0, 3.0, rat(2, 3), rat_int(-1)))
        .unwrap();
    let worst2 = verify_closed_form(&cf2, &times).unwrap();
    assert!(worst2 < 1e-12, "case 2 residual {worst2}");

    // 27-point (We, p_n, Th) grid at the vanishing exponent -2/3
    let mut worst3: f64 = 0.0;
    for we in [0.5, 1.0, 2.0] {
        for pn in [3.0, 5.0, 8.0] {
            for th in [0.5, 1.0, 2.0] {
                let p = power_law_rpe(0.0, we, th, pn, rat(1, 3), rat(-2, 3));
                let sol = invariant_case_3(&p, &rat(-2, 3)).unwrap();
                worst3 = worst3.max(verify_closed_form(&sol.closed_form, &times).unwrap());
            }
        }
    }
    assert!(worst3 < 1e-12, "case 3 grid residual {worst3}");

    // the exponent -3 does not balance the scaling weights and must
    // visibly fail on the same grid
    let p = power_law_rpe(0.0, 1.0, 1.0, 5.0, rat(1, 3), rat_int(-3));
    let sol = invariant_case_3(&p, &rat_int(-3)).unwrap();
    let off_exponent = verify_closed_form(&sol.closed_form, &times).unwrap();
    assert!(off_exponent >= 0.01, "e = -3 residual only {off_exponent}");

    println!(
        "criterion 5: PASS — residuals: case 1.2 {worst12:.2e}, case 2 {worst2:.2e}, \
         case 3 grid {worst3:.2e} at e = -2/3; e = -3 residual {off_exponent:.2e} >= 0.01"
    );
}

#[test]
fn criterion_06_first_integral_vs_reduction() {
    // u reaches magnitudes near 1e3 at k = 2, so the 1e-8 absolute bar needs
    // tolerances beyond the defaults
    let cfg = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    for k in [rat(4, 3), rat_int(2)] {
        for pn in [0.0, 1.0] {
            let p = constant_rpe(0.0, 0.0, 1.0, pn, k.clone());
            let tr = integrate_reduced(&p, 1.0, (1.0, 0.3), 0.0, ReducedMode::VelocitySquared, &cfg)
                .unwrap();
            for i in 0..=70 {
                let x = 1.0 - 0.01 * i as f64;
                let u_ode = tr.value_at(x).unwrap();
                let u_formula = rdot_squared_inviscid(&p, 1.0, x).unwrap();
                worst = worst.max((u_ode - u_formula).abs());
            }
        }
    }
    assert!(worst < 1e-8, "worst absolute deviation {worst}");
    println!(
        "criterion 6: PASS — first integral matches the integrated reduction to {worst:.2e} \
         on R in [0.3, 1] for k in {{4/3, 2}}, p_n in {{0, 1}}"
    );
}

#[test]
fn criterion_07_rayleigh_collapse_factor() {
    use statrs::function::beta::beta;
    // independent oracle: sqrt(3/2) * (1/3) * B(5/6, 1/2)
    let oracle = (1.5f64).sqrt() / 3.0 * beta(5.0 / 6.0, 0.5);

    let p = constant_rpe(0.0, 0.0, 1.0, 0.0, rat_int(1));
    let ct = collapse_time(&p, 1.0, 1e-9).unwrap();
    assert!(
        (ct.t - oracle).abs() < 1e-6,
        "quadrature {} vs oracle {oracle}",
        ct.t
    );

    let s0 = State::new(0.0, 1.0, 0.0).unwrap();
    let tr = integrate_rpe(&p, &s0, 2.0, &IntegratorConfig::default()).unwrap();
    let t_ode = match tr.terminal_event {
        TerminalEvent::Collapse { t } => t,
        other => panic!("expected a collapse event, got {other:?}"),
    };
    assert!(
        (t_ode - oracle).abs() < 1e-5,
        "integration {t_ode} vs oracle {oracle}"
    );
    println!(
        "criterion 7: PASS — collapse factor: quadrature {:.9}, integration {:.9}, \
         beta-function oracle {:.9}",
        ct.t, t_ode, oracle
    );
}

#[test]
fn criterion_08_trajectory_tracks_closed_forms() {
    let cfg = IntegratorConfig::default();
    let mut worst: f64 = 0.0;

    let p12 = power_law_rpe(0.0, 0.0, 2.0, 3.0, rat_int(1), rat(-6, 5));
    let cf12 = invariant_case_1_2(&p12).unwrap();
    let (r0, v0, _) = cf12.eval(0.0);
    let tr = integrate_rpe(&p12, &State::new(0.0, r0, v0).unwrap(), 10.0, &cfg).unwrap();
    assert_eq!(tr.terminal_event, TerminalEvent::ReachedTEnd);
    for i in 1..=100 {
        let t = 0.1 * i as f64;
        let (r, _) = tr.interpolate(t).unwrap();
        let (r_exact, _, _) = cf12.eval(t);
        worst = worst.max(((r - r_exact) / r_exact).abs());
    }

    let p2 = power_law_rpe(0.5, 0.0, 2.0, 3.0, rat(2, 3), rat_int(-1));
    let cf2 = invariant_case_2(&p2).unwrap();
    let (r0, v0, _) = cf2.eval(0.0);
    let tr = integrate_rpe(&p2, &State::new(0.0, r0, v0).unwrap(), 10.0, &cfg).unwrap();
    assert_eq!(tr.terminal_event, TerminalEvent::ReachedTEnd);
    for i in 1..=100 {
        let t = 0.1 * i as f64;
        let (r, _) = tr.interpolate(t).unwrap();
        let (r_exact, _, _) = cf2.eval(t);
        worst = worst.max(((r - r_exact) / r_exact).abs());
    }

    assert!(worst < 1e-6, "worst relative tracking error {worst}");
    println!(
        "criterion 8: PASS — full integration tracks the case 1.2 and case 2 curves \
         to {worst:.2e} relative over t in [0, 10]"
    );
}

#[test]
fn criterion_09_energy_closure() {
    // full-coefficient audit
    let p = constant_rpe(0.1, 0.5, 1.0, 1.0, rat_int(1));
    let s0 = State::new(0.0, 1.0, 0.0).unwrap();
    let tr = integrate_rpe(&p, &s0, 3.0, &IntegratorConfig::default()).unwrap();
    let audit = energy_audit(&tr, &p).unwrap();
    let max_channel = [
        audit.kinetic,
        audit.viscous,
        audit.surface_tension,
        audit.forcing,
        audit.gas,
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(
        audit.closure_defect.abs() < 1e-8 * max_channel,
        "defect {} vs max channel {max_channel}",
        audit.closure_defect
    );

    // two-channel Rayleigh identity: kinetic = Th p0 (1 - R^3)/3 exactly
    let p = constant_rpe(0.0, 0.0, 1.0, 0.0, rat_int(1));
    let tr = integrate_rpe(&p, &s0, 0.8, &IntegratorConfig::default()).unwrap();
    let audit2 = energy_audit(&tr, &p).unwrap();
    let r_end = tr.samples.last().unwrap().r;
    let analytic = (1.0 - r_end.powi(3)) / 3.0;
    assert!(
        (audit2.kinetic - analytic).abs() < 1e-8,
        "kinetic {} vs analytic {analytic}",
        audit2.kinetic
    );
    assert!(
        (audit2.kinetic + audit2.forcing).abs() < 1e-8,
        "kinetic + forcing = {}",
        audit2.kinetic + audit2.forcing
    );

    println!(
        "criterion 9: PASS — five-channel defect {:.2e} (max channel {:.2e}); \
         Rayleigh kinetic channel matches Th p0 (1 - R^3)/3 to {:.2e}",
        audit.closure_defect,
        max_channel,
        (audit2.kinetic - analytic).abs()
    );
}

/// Deterministic random-expression corpus over (t, R, Rdot) with positive
/// evaluation points.
fn random_corpus(n: usize, seed: u64) -> Vec<Expr> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![];
    while out.len() < n {
        let e = random_expr(&mut rng, 0);
        if !e.is_zero_expr() {
            out.push(e);
        }
    }
    out
}

fn random_expr(rng: &mut impl rand::Rng, depth: u32) -> Expr {
    let leaf = |rng: &mut dyn FnMut() -> u32| -> Expr {
        match rng() % 5 {
            0 => Expr::t(),
            1 => Expr::r(),
            2 => Expr::rdot(),
            3 => Expr::int((rng() % 5) as i64 + 1),
            _ => Expr::rat((rng() % 7) as i64 + 1, (rng() % 3) as i64 + 2),
        }
    };
    if depth >= 3 {
        return leaf(&mut || rng.gen());
    }
    match rng.gen_range(0..6) {
        0 | 1 => random_expr(rng, depth + 1) + random_expr(rng, depth + 1),
        2 | 3 => random_expr(rng, depth + 1) * random_expr(rng, depth + 1),
        4 => {
            // fractional power on R keeps the domain positive
            let exps = [-5, -3, -1, 1, 2, 3, 5];
            let num = exps[rng.gen_range(0..exps.len())];
            let den = [1u32, 2, 5][rng.gen_range(0..3)] as i64;
            Expr::r().pow(rat(num, den))
        }
        _ => {
            let inner = random_expr(rng, depth + 1);
            inner.powi(rng.gen_range(1..=2))
        }
    }
}

#[test]
fn criterion_10_symbolic_kernel_properties() {
    let corpus = random_corpus(100, 0x5EED_CAFE);
    let h = 1e-6;
    let mut checked = 0usize;
    for (i, e) in corpus.iter().enumerate() {
        // normalization idempotence, structurally
        let n1 = e.normalize();
        let n2 = n1.normalize();
        assert_eq!(n1, n2, "normalization not idempotent on corpus[{i}] = {e}");

        // eval of diff vs central differences in each variable
        let base = [1.3, 0.9, 0.7]; // t, R, Rdot
        for (vi, v) in [Var::T, Var::R, Var::Rdot].into_iter().enumerate() {
            let d = diff(e, v);
            let at = |shift: f64| -> f64 {
                let mut vals = base;
                vals[vi] += shift;
                let ctx = EvalContext::new()
                    .var(Var::T, vals[0])
                    .var(Var::R, vals[1])
                    .var(Var::Rdot, vals[2]);
                eval(e, &ctx).unwrap()
            };
            let ctx = EvalContext::new()
                .var(Var::T, base[0])
                .var(Var::R, base[1])
                .var(Var::Rdot, base[2]);
            let analytic = eval(&d, &ctx).unwrap();
            let fd = (at(h) - at(-h)) / (2.0 * h);
            let scale = analytic.abs().max(1.0);
            assert!(
                (analytic - fd).abs() / scale < 1e-6,
                "corpus[{i}] d/d{:?}: analytic {analytic} vs fd {fd} on {e}",
                v
            );
            checked += 1;
        }
    }
    println!(
        "criterion 10: PASS — 100 random expressions: idempotent normalization and \
         {checked} derivative/finite-difference agreements at 1e-6 relative"
    );
}
