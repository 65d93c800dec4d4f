use super::*;
use crate::family::{asymptotic_coeffs, solve_x, FamilyError, Tau, S_MIN_DEFAULT};
use crate::ivp::IntegratorConfig;

fn cfg() -> IntegratorConfig<f64> {
    IntegratorConfig::default()
}

fn member(tau: f64, t_max: f64) -> crate::family::XSolution<f64> {
    solve_x(Tau::new(tau).unwrap(), t_max, &cfg()).unwrap()
}

// independently computed reference values, tau = 0.3
const JET_TAU_03_AT_03: [f64; 4] = [
    0.31713505119749674,
    1.1263529363629627,
    0.5435908706038529,
    0.844011851554225,
];
const K_TAU_03_AT_HALF: f64 = 1.2059320228413966;
const K_TAU_03_AT_2: f64 = 0.79968915692705;
const H_AT_REFERENCE_STATE: f64 = 0.1481770048285291;
const F_AT_REFERENCE_STATE: f64 = 0.6249798426245889;
const V_TAU_03_AT_1000: f64 = -0.0006222138623744409;
// zeta/xi limits, shared with the pole-form tests
const ZETA0_TAU_03: f64 = 0.565243451155745;
const XI0_TAU_03: f64 = 0.4071814005563276;

fn reference_state() -> PhaseState<f64> {
    PhaseState::new(0.7, 0.3, 0.2, -0.5)
}

#[test]
fn profile_jets_match_closed_forms() {
    let sol = member(0.0, 2.0);
    let j = theta_jet(&sol, 0.0).unwrap();
    assert_eq!([j.theta, j.d1, j.d2, j.d3], [0.0, 1.0, 0.0, 1.0]);

    let j = theta_jet(&sol, 1.0).unwrap();
    assert!((j.theta - 1f64.sinh()).abs() < 1e-9);
    assert!((j.d1 - 1f64.cosh()).abs() < 1e-9);
    assert!((j.d2 - 1f64.sinh()).abs() < 1e-9);
    assert!((j.d3 - 1f64.cosh()).abs() < 1e-9);

    let sol = member(0.3, 2.0);
    let j = theta_jet(&sol, 0.0).unwrap();
    assert_eq!([j.theta, j.d1, j.d2], [0.0, 1.0, 0.3]);
    assert!((j.d3 - 0.82).abs() < 1e-15);

    let j = theta_jet(&sol, 0.3).unwrap();
    for (got, want) in [j.theta, j.d1, j.d2, j.d3].iter().zip(JET_TAU_03_AT_03) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn jet_requires_covered_span() {
    let sol = member(0.3, 2.0);
    assert!(theta_jet(&sol, 5.0).is_err());
    assert!(theta_jet(&sol, -5.0).is_err());
    assert!(theta_jet(&sol, -1.9).is_ok());
}

#[test]
fn closure_residual_vanishes_on_members_and_flags_corruption() {
    for tau in [0.1, 0.3, 0.5] {
        let sol = member(tau, 2.5);
        let mut y = -2.0;
        while y <= 2.0 {
            let jet = theta_jet(&sol, y).unwrap();
            let rel = identity_residual(&jet).abs() / jet.magnitude_scale();
            assert!(rel < 1e-9, "tau={tau} y={y} rel={rel}");
            y += 0.25;
        }
    }

    // exact algebraic cancellation on the closed-form jet
    let (s, c) = (1f64.sinh(), 1f64.cosh());
    let sinh_jet = ThetaJet {
        theta: s,
        d1: c,
        d2: s,
        d3: c,
    };
    assert_eq!(identity_residual(&sinh_jet), 0.0);

    // the residual is a usable corruption detector
    let mut bad = sinh_jet;
    bad.d2 += 0.1;
    assert!(identity_residual(&bad).abs() > 1e-3);
}

#[test]
fn bracket_vanishes_across_members_and_states() {
    for tau in [0.1, 0.3, 0.5] {
        let sol = member(tau, 2.0);
        for state in random_states::<f64>(11, 334) {
            let (bracket, scale) = poisson_bracket_fh(&state, &sol).unwrap();
            assert!(
                bracket.abs() / scale < 1e-9,
                "tau={tau} state={state:?} rel={}",
                bracket.abs() / scale
            );

            let (cancelling, residual) = bracket_pieces(&state, &sol).unwrap();
            assert!(cancelling.abs() / scale < 1e-12, "tau={tau} {cancelling}");
            assert!(residual.abs() / scale < 1e-9, "tau={tau} {residual}");
            // the pieces are the bracket, up to antisymmetry
            assert!((cancelling + residual + bracket).abs() / scale < 1e-12);

            // bracket of a function with itself cancels termwise
            let jet = theta_jet(&sol, state.y).unwrap();
            let h = hamiltonian_partials(&state, &jet);
            assert_eq!(poisson_bracket(&h, &h).0, 0.0);
        }
    }
}

#[test]
fn bracket_matches_finite_differences() {
    let sol = member(0.5, 2.0);
    let h_of = |s: &PhaseState<f64>| {
        let jet = theta_jet(&sol, s.y).unwrap();
        hamiltonian(s, &jet).total
    };
    let f_of = |s: &PhaseState<f64>| {
        let jet = theta_jet(&sol, s.y).unwrap();
        cubic_integral(s, &jet)
    };
    let fd_partials = |f: &dyn Fn(&PhaseState<f64>) -> f64, s: &PhaseState<f64>| {
        let h = 1e-5;
        let diff = |plus: PhaseState<f64>, minus: PhaseState<f64>| (f(&plus) - f(&minus)) / (2.0 * h);
        Partials {
            d_phi: diff(
                PhaseState { phi: s.phi + h, ..*s },
                PhaseState { phi: s.phi - h, ..*s },
            ),
            d_y: diff(PhaseState { y: s.y + h, ..*s }, PhaseState { y: s.y - h, ..*s }),
            d_p_phi: diff(
                PhaseState { p_phi: s.p_phi + h, ..*s },
                PhaseState { p_phi: s.p_phi - h, ..*s },
            ),
            d_p_y: diff(
                PhaseState { p_y: s.p_y + h, ..*s },
                PhaseState { p_y: s.p_y - h, ..*s },
            ),
        }
    };

    for state in random_states::<f64>(7, 100) {
        let analytic = poisson_bracket_fh(&state, &sol).unwrap().0;
        let fd = poisson_bracket(&fd_partials(&f_of, &state), &fd_partials(&h_of, &state)).0;
        assert!(
            (analytic - fd).abs() < 1e-6,
            "state={state:?} analytic={analytic} fd={fd}"
        );
    }
}

#[test]
fn cubic_integral_double_entry() {
    let sol = member(0.3, 2.0);
    for state in random_states::<f64>(3, 100) {
        let jet = theta_jet(&sol, state.y).unwrap();
        let f = cubic_integral(&state, &jet);
        // same formula, independently grouped
        let again = state.p_phi.powi(3) + 1.5 * jet.theta * state.phi.cos() * state.p_phi
            - 1.5 * jet.d1 * state.phi.sin() * state.p_y;
        let scale = 1.0f64.max(f.abs());
        assert!((f - again).abs() / scale < 1e-12);
    }
}

#[test]
fn energy_examples() {
    // the round member has no potential at all
    let sol = member(0.0, 2.0);
    for state in random_states::<f64>(5, 20) {
        let jet = theta_jet(&sol, state.y).unwrap();
        let e = hamiltonian(&state, &jet);
        assert!(e.potential.abs() < 1e-8);
        assert!(e.kinetic >= 0.0);
        assert_eq!(e.total, e.kinetic + e.potential);
    }
    let jet = theta_jet(&sol, 0.0).unwrap();
    let e = hamiltonian(&PhaseState::new(0.4, 0.0, 1.0, 0.0), &jet);
    assert!((e.total - 1.0).abs() < 1e-14);

    let sol = member(0.3, 2.0);
    let jet = theta_jet(&sol, 0.0).unwrap();
    let e = hamiltonian(&PhaseState::new(0.0, 0.0, 0.0, 0.0), &jet);
    assert_eq!(e.kinetic, 0.0);
    assert!((e.potential + 0.3).abs() < 1e-15);

    let jet = theta_jet(&sol, 0.3).unwrap();
    let e = hamiltonian(&reference_state(), &jet);
    assert!((e.total - H_AT_REFERENCE_STATE).abs() < 1e-9);
}

#[test]
fn cubic_integral_examples() {
    let sol = member(0.0, 2.0);
    let jet = theta_jet(&sol, 0.7).unwrap();
    assert_eq!(
        cubic_integral(&PhaseState::new(1.2, 0.7, 0.0, 0.0), &jet),
        0.0
    );

    let jet = theta_jet(&sol, 0.0).unwrap();
    let f = cubic_integral(
        &PhaseState::new(std::f64::consts::FRAC_PI_2, 0.0, 1.0, 2.0),
        &jet,
    );
    assert!((f + 2.0).abs() < 1e-15);

    let sol = member(0.3, 2.0);
    let jet = theta_jet(&sol, 0.3).unwrap();
    let f = cubic_integral(&reference_state(), &jet);
    assert!((f - F_AT_REFERENCE_STATE).abs() < 1e-9);
}

#[test]
fn round_member_cubic_reduces_to_closed_form() {
    let sol = member(0.0, 2.0);
    for state in random_states::<f64>(9, 50) {
        let jet = theta_jet(&sol, state.y).unwrap();
        let f = cubic_integral(&state, &jet);
        let closed = state.p_phi.powi(3)
            + 1.5
                * (state.y.sinh() * state.phi.cos() * state.p_phi
                    - state.y.cosh() * state.phi.sin() * state.p_y);
        assert!((f - closed).abs() < 1e-9, "state={state:?}");
    }
}

#[test]
fn flow_conserves_both_invariants() {
    let report = hamiltonian_flow(
        Tau::new(0.3).unwrap(),
        reference_state(),
        100.0,
        201,
        &cfg(),
    )
    .unwrap();
    assert_eq!(report.tau, 0.3);
    assert_eq!(report.samples.len(), 201);
    assert_eq!(report.samples[0].t, 0.0);
    assert_eq!(report.samples[200].t, 100.0);
    assert!((report.samples[0].h - H_AT_REFERENCE_STATE).abs() < 1e-9);
    assert!((report.samples[0].f - F_AT_REFERENCE_STATE).abs() < 1e-9);
    // 100x the integrator tolerance
    assert!(report.max_drift_h < 1e-8, "H drift {}", report.max_drift_h);
    assert!(report.max_drift_f < 1e-8, "F drift {}", report.max_drift_f);
}

#[test]
fn flow_of_round_member_follows_the_equator() {
    let report = hamiltonian_flow(
        Tau::new(0.0).unwrap(),
        PhaseState::new(0.0, 0.0, 1.0, 0.0),
        50.0,
        101,
        &cfg(),
    )
    .unwrap();
    assert!(report.max_drift_h < 1e-8);
    for s in &report.samples {
        assert!(s.state.y.abs() < 1e-6);
        assert!((s.state.p_phi - 1.0).abs() < 1e-6);
    }
}

#[test]
fn flow_without_momenta_stays_put() {
    let initial = PhaseState::new(0.5, 0.3, 0.0, 0.0);
    let report =
        hamiltonian_flow(Tau::new(0.0).unwrap(), initial, 50.0, 11, &cfg()).unwrap();
    let last = report.samples.last().unwrap().state;
    assert!((last.phi - initial.phi).abs() < 1e-8);
    assert!((last.y - initial.y).abs() < 1e-8);
    assert!(last.p_phi.abs() < 1e-8);
    assert!(last.p_y.abs() < 1e-8);
}

#[test]
fn flow_through_the_pole_exhausts_the_chart() {
    // a meridian orbit reaches the far pole in finite time; the chart
    // coordinate y diverges there, so the profile extension must give up
    let err = hamiltonian_flow(
        Tau::new(0.0).unwrap(),
        PhaseState::new(0.0, 0.0, 0.0, 1.0),
        2.0,
        11,
        &cfg(),
    )
    .unwrap_err();
    match err {
        SphereError::DomainExceeded { y } => assert!(y > 10.0, "gave up at y={y}"),
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn flow_rejects_bad_arguments() {
    let tau = Tau::new(0.3).unwrap();
    let state = reference_state();
    let bad = |r: Result<ConservationReport<f64>, SphereError<f64>>| {
        matches!(r, Err(SphereError::Family(FamilyError::OutOfDomain { .. })))
    };
    assert!(bad(hamiltonian_flow(tau, state, 0.0, 11, &cfg())));
    assert!(bad(hamiltonian_flow(tau, state, -3.0, 11, &cfg())));
    assert!(bad(hamiltonian_flow(tau, state, f64::NAN, 11, &cfg())));
    assert!(bad(hamiltonian_flow(tau, state, 10.0, 1, &cfg())));
    let nan_state = PhaseState::new(f64::NAN, 0.0, 0.0, 0.0);
    assert!(bad(hamiltonian_flow(tau, nan_state, 10.0, 11, &cfg())));
}

#[test]
fn curvature_matches_independent_laplacian_route() {
    let sol = member(0.3, 3.0);
    let k_half = gaussian_curvature(&sol, 0.5).unwrap();
    let k_two = gaussian_curvature(&sol, 2.0).unwrap();
    assert!((k_half - K_TAU_03_AT_HALF).abs() < 2e-9);
    assert!((k_two - K_TAU_03_AT_2).abs() < 2e-9);
    // the member's surface is genuinely inhomogeneous
    assert!((k_half - k_two).abs() > 1e-3);

    // second route: K = -(1/(2 lam)) (L'' + L'/r) with L = log lam,
    // lam = 1/(r^4 u'^2), derivatives by central differences
    for r in [0.5f64, 2.0] {
        let lam_log = |rr: f64| {
            let j = sol.radial().jet(rr).unwrap();
            -(rr.powi(4) * j.du * j.du).ln()
        };
        let h = r * 1e-4;
        let l1 = (lam_log(r + h) - lam_log(r - h)) / (2.0 * h);
        let l2 = (lam_log(r + h) - 2.0 * lam_log(r) + lam_log(r - h)) / (h * h);
        let j = sol.radial().jet(r).unwrap();
        let lam = 1.0 / (r.powi(4) * j.du * j.du);
        let k_fd = -(l2 + l1 / r) / (2.0 * lam);
        let k = gaussian_curvature(&sol, r).unwrap();
        assert!((k - k_fd).abs() < 1e-5, "r={r} analytic={k} fd={k_fd}");
    }

    // equator value is pinned by the initial data
    let k_one = gaussian_curvature(&sol, 1.0).unwrap();
    assert!((k_one - (1.0 - 3.0 * 0.09)).abs() < 1e-13);
}

#[test]
fn round_member_has_unit_curvature() {
    let sol = member(0.0, 5.0);
    for i in 0..=24 {
        let r = 10f64.powf(-2.0 + 4.0 * i as f64 / 24.0);
        let k = gaussian_curvature(&sol, r).unwrap();
        assert!((k - 1.0).abs() < 1e-6, "r={r} K={k}");
    }
    assert!(gaussian_curvature(&sol, 0.0).is_err());
    assert!(gaussian_curvature(&sol, -1.0).is_err());
}

#[test]
fn polar_energy_round_trips_with_log_chart() {
    let sol = member(0.3, 2.0);
    for r in [0.7, 1.0, 1.3, 2.5] {
        let (phi, p_r, p_phi) = (0.9, 0.4, -0.6);
        let polar = polar_energy(r, phi, p_r, p_phi, &sol).unwrap();
        let state = PhaseState::new(phi, r.ln(), p_phi, r * p_r);
        let jet = theta_jet(&sol, state.y).unwrap();
        let log_chart = hamiltonian(&state, &jet);
        assert!((polar.kinetic - log_chart.kinetic).abs() < 1e-10, "r={r}");
        assert!((polar.potential - log_chart.potential).abs() < 1e-10, "r={r}");
        assert!((polar.total - log_chart.total).abs() < 1e-10, "r={r}");
    }
    assert!(polar_energy(-1.0, 0.0, 0.0, 0.0, &sol).is_err());
}

#[test]
fn pole_report_certifies_regularity() {
    let report = pole_report(Tau::new(0.3).unwrap(), &cfg()).unwrap();
    assert!((report.zeta0.value - ZETA0_TAU_03).abs() < 2e-9);
    assert!((report.xi0.value - XI0_TAU_03).abs() < 2e-9);
    assert!(report.zeta0.error_estimate < 1e-6);
    assert!(report.xi0.error_estimate < 1e-6);

    // potential falls off one decade per decade of r on both sides
    assert_eq!(report.far_decay_ratios.len(), 2);
    assert_eq!(report.near_decay_ratios.len(), 2);
    for ratio in report
        .far_decay_ratios
        .iter()
        .chain(&report.near_decay_ratios)
    {
        assert!((0.05..0.2).contains(ratio), "decay ratio {ratio}");
    }
    // V(1000) is a ~2e-9 cancellation residual scaled by ~3e5, so the solver
    // tolerance cannot reach it; 5e-7 is what survives the amplification
    let (r_far, v_far) = *report.far_potential.last().unwrap();
    assert_eq!(r_far, 1000.0);
    assert!((v_far - V_TAU_03_AT_1000).abs() < 5e-7);

    assert!(report.curvature_bounded);
    assert_eq!(report.curvature.len(), 25);
    assert!(report.max_abs_curvature < 10.0);
}

#[test]
fn potential_tail_matches_pole_coefficient() {
    // W(log r) = nu(1/r^2)/r ties the flow potential to the pole sweep
    let tau = Tau::new(0.3).unwrap();
    let report = pole_report(tau, &cfg()).unwrap();
    let coeffs = asymptotic_coeffs(tau, S_MIN_DEFAULT, &cfg()).unwrap();
    let nu = coeffs.nu(1e-6).unwrap();
    // the left side loses ~5 digits to cancellation before the identity applies
    let (r, v) = *report.far_potential.last().unwrap();
    assert!((v.abs() - nu.abs() / r).abs() / (nu.abs() / r) < 1e-3);
    assert!(v.abs() <= 2.0 * nu.abs() / r);
}

#[test]
fn pole_report_of_round_member_degenerates_cleanly() {
    let report = pole_report(Tau::new(0.0).unwrap(), &cfg()).unwrap();
    assert!((report.zeta0.value - 0.5).abs() < 1e-9);
    assert!((report.xi0.value - 0.5).abs() < 1e-9);
    for (_, v) in report.far_potential.iter().chain(&report.near_potential) {
        assert!(v.abs() < 1e-8);
    }
    assert!(report.curvature_bounded);
    for (r, k) in &report.curvature {
        assert!((k - 1.0).abs() < 1e-6, "r={r} K={k}");
    }
}

#[test]
fn random_states_are_deterministic() {
    let a = random_states::<f64>(42, 64);
    let b = random_states::<f64>(42, 64);
    assert_eq!(a, b);
    let c = random_states::<f64>(43, 64);
    assert_ne!(a, c);
    for s in &a {
        assert!((0.0..std::f64::consts::TAU).contains(&s.phi));
        assert!((-1.0..=1.0).contains(&s.y));
        assert!((-1.0..=1.0).contains(&s.p_phi));
        assert!((-1.0..=1.0).contains(&s.p_y));
    }
}
