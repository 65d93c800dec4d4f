//! The verification suite: each check reduces one numerical identity to a
//! worst-case residual compared against a fixed tolerance.

use serde::Serialize;

use cubint::family::{asymptotic_coeffs, consistency_check, solve_g, solve_x, Tau, S_MIN_DEFAULT};
use cubint::ivp::IntegratorConfig;
use cubint::sphere::{
    bracket_pieces, cubic_partials, gaussian_curvature, hamiltonian_flow, hamiltonian_partials,
    identity_residual, pole_report, poisson_bracket, random_states, theta_jet, PhaseState,
};

use crate::{solver, Failure};

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub check: &'static str,
    pub n_samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn row(check: &'static str, n_samples: usize, max_residual: f64, tolerance: f64) -> CheckRow {
    CheckRow {
        check,
        n_samples,
        max_residual,
        tolerance,
        pass: max_residual.is_finite() && max_residual <= tolerance,
    }
}

/// Poisson bracket of the cubic function with the Hamiltonian over seeded
/// random states, its two cancellation pieces, and the profile closure
/// identity. `corrupt_jet` breaks the sampled jets on purpose so the failure
/// path of the suite stays exercised.
pub fn bracket(
    tau: Tau<f64>,
    samples: usize,
    seed: u64,
    corrupt_jet: bool,
    config: &IntegratorConfig<f64>,
) -> Result<Vec<CheckRow>, Failure> {
    let sol = solve_x(tau, 2.0, config).map_err(solver)?;
    let states = random_states::<f64>(seed, samples);
    let mut max_bracket = 0f64;
    let mut max_piece = 0f64;
    let mut max_closure = 0f64;
    for state in &states {
        let mut jet = theta_jet(&sol, state.y).map_err(solver)?;
        if corrupt_jet {
            jet.d2 += 0.1;
        }
        let (b, scale) = poisson_bracket(
            &cubic_partials(state, &jet),
            &hamiltonian_partials(state, &jet),
        );
        max_bracket = max_bracket.max(b.abs() / scale);
        max_closure = max_closure.max(identity_residual(&jet).abs() / jet.magnitude_scale());
        let (p1, p2) = bracket_pieces(state, &sol).map_err(solver)?;
        max_piece = max_piece.max(p1.abs() / scale).max(p2.abs() / scale);
    }
    Ok(vec![
        row("poisson_bracket", samples, max_bracket, 1e-9),
        row("bracket_pieces", samples, max_piece, 1e-9),
        row("profile_closure", samples, max_closure, 1e-9),
    ])
}

/// Relative drift of the two conserved quantities along one long flow.
pub fn conservation(
    tau: Tau<f64>,
    config: &IntegratorConfig<f64>,
) -> Result<Vec<CheckRow>, Failure> {
    let n = 201;
    let report = hamiltonian_flow(tau, PhaseState::new(0.7, 0.3, 0.2, -0.5), 100.0, n, config)
        .map_err(solver)?;
    Ok(vec![
        row("energy_drift", n, report.max_drift_h, 1e-6),
        row("integral_drift", n, report.max_drift_f, 1e-6),
    ])
}

/// Gaussian curvature: the closed-form route against a difference-quotient
/// route, the pinned equator value, and constancy for the round member.
pub fn curvature(tau: Tau<f64>, config: &IntegratorConfig<f64>) -> Result<Vec<CheckRow>, Failure> {
    let round = tau.value() == 0.0;
    let span = if round { 5.0 } else { 3.0 };
    let sol = solve_x(tau, span, config).map_err(solver)?;
    let mut rows = Vec::new();

    if round {
        let mut max_dev = 0f64;
        for i in 0..=48 {
            let r = 10f64.powf(-2.0 + 4.0 * i as f64 / 48.0);
            let k = gaussian_curvature(&sol, r).map_err(solver)?;
            max_dev = max_dev.max((k - 1.0).abs());
        }
        rows.push(row("unit_curvature", 49, max_dev, 1e-6));
    }

    // second route: K = -(1/(2 lam)) (L'' + L'/r), L = log lam, lam = 1/(r^4 u'^2)
    let radial = sol.radial();
    let mut max_fd = 0f64;
    for r in [0.5f64, 2.0] {
        let lam_log = |rr: f64| -> Result<f64, Failure> {
            let j = radial.jet(rr).map_err(solver)?;
            Ok(-(rr.powi(4) * j.du * j.du).ln())
        };
        let h = r * 1e-4;
        let l1 = (lam_log(r + h)? - lam_log(r - h)?) / (2.0 * h);
        let l2 = (lam_log(r + h)? - 2.0 * lam_log(r)? + lam_log(r - h)?) / (h * h);
        let j = radial.jet(r).map_err(solver)?;
        let lam = 1.0 / (r.powi(4) * j.du * j.du);
        let k_fd = -(l2 + l1 / r) / (2.0 * lam);
        let k = gaussian_curvature(&sol, r).map_err(solver)?;
        max_fd = max_fd.max((k - k_fd).abs());
    }
    rows.push(row("curvature_two_route", 2, max_fd, 1e-5));

    let k_equator = gaussian_curvature(&sol, 1.0).map_err(solver)?;
    let anchor = 1.0 - 3.0 * tau.value() * tau.value();
    rows.push(row("equator_curvature", 1, (k_equator - anchor).abs(), 1e-12));
    Ok(rows)
}

/// The two derivative identities tying the log-radius form to the pole form,
/// and the radial equation residual.
pub fn consistency(
    tau: Tau<f64>,
    config: &IntegratorConfig<f64>,
) -> Result<Vec<CheckRow>, Failure> {
    let x = solve_x(tau, 3.0, config).map_err(solver)?;
    let g = solve_g(tau, S_MIN_DEFAULT, config).map_err(solver)?;
    let times: Vec<f64> = (0..=12).map(|i| 0.25 * i as f64).collect();
    let report = consistency_check(&x, &g, &times).map_err(solver)?;

    let radial = x.radial();
    let mut max_radial = 0f64;
    let n_radial = 41;
    for i in 0..n_radial {
        let r = (-1.8 + 3.6 * i as f64 / (n_radial - 1) as f64).exp();
        let (residual, scale) = radial.jet(r).map_err(solver)?.equation_residual();
        max_radial = max_radial.max(residual.abs() / scale);
    }
    Ok(vec![
        row(
            "first_derivative_identity",
            times.len(),
            report.max_residual_first,
            1e-8,
        ),
        row(
            "second_derivative_identity",
            times.len(),
            report.max_residual_second,
            1e-8,
        ),
        row("radial_equation", n_radial, max_radial, 1e-7),
    ])
}

/// Pole regularity: extrapolated limits stable across solver tolerances and
/// resolved away from zero, potential falling one decade per decade of `r`.
pub fn poles(tau: Tau<f64>, config: &IntegratorConfig<f64>) -> Result<Vec<CheckRow>, Failure> {
    let report = pole_report(tau, config).map_err(solver)?;
    let loose = IntegratorConfig {
        rel_tol: 1e-8,
        abs_tol: 1e-8,
        ..*config
    };
    let other = asymptotic_coeffs(tau, S_MIN_DEFAULT, &loose).map_err(solver)?;
    let cross = (report.zeta0.value - other.zeta0().value)
        .abs()
        .max((report.xi0.value - other.xi0().value).abs());
    let resolved = (report.zeta0.error_estimate / report.zeta0.value.abs())
        .max(report.xi0.error_estimate / report.xi0.value.abs());

    let mut rows = vec![
        row("pole_limit_agreement", 2, cross, 1e-6),
        row("pole_limit_resolved", 2, resolved, 1e-4),
    ];

    let max_v = report
        .far_potential
        .iter()
        .chain(&report.near_potential)
        .fold(0f64, |acc, (_, v)| acc.max(v.abs()));
    if max_v < 1e-8 {
        // round member: the potential vanishes identically
        rows.push(row("potential_degenerate", 6, max_v, 1e-8));
    } else {
        let max_off = report
            .far_decay_ratios
            .iter()
            .chain(&report.near_decay_ratios)
            .fold(0f64, |acc, ratio| acc.max((ratio - 0.1).abs()));
        rows.push(row("potential_decay", 4, max_off, 0.1));

        let coeffs = asymptotic_coeffs(tau, S_MIN_DEFAULT, config).map_err(solver)?;
        let nu = coeffs.nu(1e-6).map_err(solver)?;
        let (r_far, v_far) = *report.far_potential.last().unwrap();
        rows.push(row(
            "far_potential_bound",
            1,
            v_far.abs() / (2.0 * nu.abs() / r_far),
            1.0,
        ));
    }
    Ok(rows)
}
