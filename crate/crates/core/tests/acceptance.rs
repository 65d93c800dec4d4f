//! End-to-end acceptance checks, one per shipped guarantee. Each test prints
//! a single pass/fail line with the measured number next to its tolerance.

use cubint::family::{
    asymptotic_coeffs, consistency_check, solve_g, solve_x, Tau, S_MIN_DEFAULT,
};
use cubint::ivp::IntegratorConfig;
use cubint::portrait::{equilibria, orbit_from_x, p_at_q, ClassifierSettings, EquilibriumKind};
use cubint::sphere::{
    bracket_pieces, gaussian_curvature, hamiltonian_flow, identity_residual, pole_report,
    poisson_bracket_fh, random_states, theta_jet, PhaseState,
};
use cubint::threshold::{find_threshold, ThresholdConfig};
use std::time::Instant;

fn cfg() -> IntegratorConfig<f64> {
    IntegratorConfig::default()
}

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n} [{name}]: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} [{name}] failed: {detail}");
}

#[test]
fn criterion_1_threshold_location_and_runtime() {
    let clock = Instant::now();
    let result = find_threshold(&ThresholdConfig::<f64>::default()).unwrap();
    let elapsed = clock.elapsed().as_secs_f64();
    let err = (result.t_estimate - 0.57735).abs();
    verdict(
        1,
        "threshold",
        err < 5e-4 && elapsed < 60.0,
        &format!(
            "T = {:.6}, |T - 0.57735| = {err:.2e} (tol 5e-4), {elapsed:.1} s of 60 s, \
             {} evaluations",
            result.t_estimate, result.evaluations
        ),
    );
}

#[test]
fn criterion_2_round_member_matches_closed_forms() {
    // the profile vanishes at t = 0, so the absolute floor seeds an error the
    // flow amplifies by e^5; 1e-12 keeps the seed below the relative control
    let tight = IntegratorConfig {
        abs_tol: 1e-12,
        ..cfg()
    };
    let sol = solve_x(Tau::new(0.0).unwrap(), 5.0, &tight).unwrap();
    let mut max_x = 0f64;
    for i in 0..=500 {
        let t = 5.0 * i as f64 / 500.0;
        let [x, _, _] = sol.eval(t).unwrap();
        max_x = max_x.max((x - t.sinh()).abs());
    }
    let mut max_u = 0f64;
    let radial = sol.radial();
    for i in 0..=100 {
        let r = (-5.0 + 10.0 * i as f64 / 100.0).exp();
        let u = radial.jet(r).unwrap().u;
        max_u = max_u.max((u - 0.5 * (r - 1.0 / r)).abs());
    }
    verdict(
        2,
        "exact solution anchor",
        max_x <= 1e-8 && max_u <= 1e-8,
        &format!("max |x - sinh t| = {max_x:.2e} on [0,5], max radial mismatch = {max_u:.2e} (tol 1e-8)"),
    );
}

#[test]
fn criterion_3_equilibria_and_planar_orbit() {
    let eq = equilibria::<f64>();
    let positions_ok = (eq[0].point.q, eq[0].point.p) == (0.0, 1.0)
        && (eq[1].point.q, eq[1].point.p) == (0.0, -0.5)
        && (eq[2].point.q, eq[2].point.p) == (1.0, 0.0)
        && (eq[3].point.q, eq[3].point.p) == (-1.0, 0.0);
    let (l1, l2) = eq[2].eigenvalues;
    let eig_err = (l1 + 4.0).abs().max((l2 + 2.0).abs());
    let kinds_ok =
        eq[1].kind == EquilibriumKind::Saddle && eq[2].kind == EquilibriumKind::StableNode;

    let sol = solve_x(Tau::new(0.0).unwrap(), 5.0, &cfg()).unwrap();
    let grid: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
    let pts = orbit_from_x(&sol, &grid).unwrap();
    let mut max_parabola = 0f64;
    for pt in &pts {
        max_parabola = max_parabola.max((pt.p - (1.0 - pt.q * pt.q)).abs());
    }
    verdict(
        3,
        "equilibrium anchor",
        positions_ok && kinds_ok && eig_err < 1e-12 && max_parabola < 1e-9,
        &format!(
            "four rest points exact: {positions_ok}, node spectrum error = {eig_err:.2e} \
             (tol 1e-12), max |p - (1 - q^2)| = {max_parabola:.2e} (tol 1e-9)"
        ),
    );
}

#[test]
fn criterion_4_bracket_suite() {
    let states = random_states::<f64>(20, 128);
    let mut max_bracket = 0f64;
    let mut max_piece = 0f64;
    let mut max_closure = 0f64;
    for tau in [0.1, 0.3, 0.5] {
        let sol = solve_x(Tau::new(tau).unwrap(), 2.0, &cfg()).unwrap();
        for state in &states {
            let (b, scale) = poisson_bracket_fh(state, &sol).unwrap();
            let (p1, p2) = bracket_pieces(state, &sol).unwrap();
            max_bracket = max_bracket.max(b.abs() / scale);
            max_piece = max_piece.max(p1.abs() / scale).max(p2.abs() / scale);
            let jet = theta_jet(&sol, state.y).unwrap();
            max_closure = max_closure.max(identity_residual(&jet).abs() / jet.magnitude_scale());
        }
    }
    verdict(
        4,
        "bracket suite",
        max_bracket <= 1e-9 && max_piece <= 1e-9 && max_closure <= 1e-9,
        &format!(
            "384 states x 3 members: max |{{F,H}}| = {max_bracket:.2e}, max single piece = \
             {max_piece:.2e}, max profile closure residual = {max_closure:.2e} (all relative, tol 1e-9)"
        ),
    );
}

#[test]
fn criterion_5_conservation_over_long_flow() {
    let mut max_h = 0f64;
    let mut max_f = 0f64;
    for tau in [0.0, 0.3, 0.5] {
        let report = hamiltonian_flow(
            Tau::new(tau).unwrap(),
            PhaseState::new(0.7, 0.3, 0.2, -0.5),
            100.0,
            201,
            &cfg(),
        )
        .unwrap();
        max_h = max_h.max(report.max_drift_h);
        max_f = max_f.max(report.max_drift_f);
    }
    verdict(
        5,
        "conservation",
        max_h <= 1e-6 && max_f <= 1e-6,
        &format!(
            "t in [0,100], three members: max relative drift H = {max_h:.2e}, F = {max_f:.2e} \
             (tol 1e-6)"
        ),
    );
}

#[test]
fn criterion_6_curvature_anchor() {
    let round = solve_x(Tau::new(0.0).unwrap(), 5.0, &cfg()).unwrap();
    let mut max_dev = 0f64;
    for i in 0..=48 {
        let r = 10f64.powf(-2.0 + 4.0 * i as f64 / 48.0);
        max_dev = max_dev.max((gaussian_curvature(&round, r).unwrap() - 1.0).abs());
    }

    let bent = solve_x(Tau::new(0.3).unwrap(), 3.0, &cfg()).unwrap();
    let k_half = gaussian_curvature(&bent, 0.5).unwrap();
    let k_two = gaussian_curvature(&bent, 2.0).unwrap();
    let spread = (k_half - k_two).abs();
    // second route: K = -(1/(2 lam)) (L'' + L'/r), L = log lam, lam = 1/(r^4 u'^2)
    let mut max_fd = 0f64;
    for r in [0.5f64, 2.0] {
        let lam_log = |rr: f64| {
            let j = bent.radial().jet(rr).unwrap();
            -(rr.powi(4) * j.du * j.du).ln()
        };
        let h = r * 1e-4;
        let l1 = (lam_log(r + h) - lam_log(r - h)) / (2.0 * h);
        let l2 = (lam_log(r + h) - 2.0 * lam_log(r) + lam_log(r - h)) / (h * h);
        let j = bent.radial().jet(r).unwrap();
        let lam = 1.0 / (r.powi(4) * j.du * j.du);
        let k_fd = -(l2 + l1 / r) / (2.0 * lam);
        max_fd = max_fd.max((gaussian_curvature(&bent, r).unwrap() - k_fd).abs());
    }
    verdict(
        6,
        "curvature anchor",
        max_dev <= 1e-6 && spread >= 1e-3 && max_fd <= 1e-5,
        &format!(
            "flat member: max |K - 1| = {max_dev:.2e} on [1e-2,1e2] (tol 1e-6); bent member: \
             |K(0.5) - K(2)| = {spread:.3} (>= 1e-3), difference-quotient cross-check = \
             {max_fd:.2e} (tol 1e-5)"
        ),
    );
}

#[test]
fn criterion_7_formulation_equivalence() {
    let times: Vec<f64> = (0..=12).map(|i| 0.25 * i as f64).collect();
    let mut max_first = 0f64;
    let mut max_second = 0f64;
    for tau in [0.1, 0.3, 0.5, -0.1, -0.3, -0.5] {
        let tau = Tau::new(tau).unwrap();
        let x = solve_x(tau, 3.0, &cfg()).unwrap();
        let g = solve_g(tau, S_MIN_DEFAULT, &cfg()).unwrap();
        let report = consistency_check(&x, &g, &times).unwrap();
        max_first = max_first.max(report.max_residual_first);
        max_second = max_second.max(report.max_residual_second);
    }

    let mut max_radial = 0f64;
    for tau in [0.1, 0.3, 0.5, -0.1, -0.3, -0.5] {
        let sol = solve_x(Tau::new(tau).unwrap(), 2.0, &cfg()).unwrap();
        let radial = sol.radial();
        for i in 0..=40 {
            let r = (-1.8 + 3.6 * i as f64 / 40.0).exp();
            let (residual, scale) = radial.jet(r).unwrap().equation_residual();
            max_radial = max_radial.max(residual.abs() / scale);
        }
    }
    verdict(
        7,
        "formulation equivalence",
        max_first <= 1e-8 && max_second <= 1e-8 && max_radial <= 1e-7,
        &format!(
            "six members: derivative identities max residuals {max_first:.2e} / {max_second:.2e} \
             (tol 1e-8), radial equation max relative residual {max_radial:.2e} (tol 1e-7)"
        ),
    );
}

#[test]
fn criterion_8_pole_regularity() {
    let loose = IntegratorConfig {
        rel_tol: 1e-8,
        abs_tol: 1e-8,
        ..cfg()
    };
    let mut min_coeff = f64::INFINITY;
    let mut max_cross = 0f64;
    let mut ratios_ok = true;
    for tau in [0.1, 0.3, 0.5] {
        let tau = Tau::new(tau).unwrap();
        let report = pole_report(tau, &cfg()).unwrap();
        min_coeff = min_coeff
            .min(report.zeta0.value.abs())
            .min(report.xi0.value.abs());

        let other = asymptotic_coeffs(tau, S_MIN_DEFAULT, &loose).unwrap();
        max_cross = max_cross
            .max((report.zeta0.value - other.zeta0().value).abs())
            .max((report.xi0.value - other.xi0().value).abs());

        for ratio in report
            .far_decay_ratios
            .iter()
            .chain(&report.near_decay_ratios)
        {
            // one decade of r per decade of potential
            ratios_ok &= (0.05..0.2).contains(ratio);
        }
    }
    verdict(
        8,
        "pole regularity",
        min_coeff > 1e-2 && max_cross <= 1e-6 && ratios_ok,
        &format!(
            "smallest pole coefficient magnitude = {min_coeff:.3} (nonzero), tolerance \
             cross-agreement = {max_cross:.2e} (tol 1e-6), decade decay ratios in band: {ratios_ok}"
        ),
    );
}

#[test]
fn criterion_9_monotonicity_in_tau() {
    let taus = [0.5, 0.3, 0.1, -0.1, -0.3, -0.5];
    let targets = [2.0, 3.0, 5.0];
    let settings = ClassifierSettings::default();
    let curves: Vec<Vec<f64>> = taus
        .iter()
        .map(|&tau| p_at_q(tau, &targets, &cfg(), &settings).unwrap())
        .collect();
    let mut ordered = true;
    let mut min_gap = f64::INFINITY;
    for pair in curves.windows(2) {
        for k in 0..targets.len() {
            let gap = pair[0][k] - pair[1][k];
            ordered &= gap > 0.0;
            min_gap = min_gap.min(gap);
        }
    }
    verdict(
        9,
        "monotonicity",
        ordered,
        &format!(
            "p(q) strictly increasing in the parameter at q = 2, 3, 5 across six members; \
             smallest gap = {min_gap:.2e}"
        ),
    );
}
