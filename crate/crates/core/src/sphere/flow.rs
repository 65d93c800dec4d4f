//! Hamiltonian flow of the sphere system with conservation monitoring.

use serde::Serialize;

use super::{
    cubic_integral, hamiltonian, hamiltonian_partials, theta_jet, PhaseState, SphereError,
    ThetaJet,
};
use crate::family::{solve_x, FamilyError, Tau};
use crate::ivp::{integrate, Direction, Event, IntegratorConfig, Termination};
use crate::real::Real;

/// Profile span solved before the flow starts.
const PROFILE_SPAN_MIN: f64 = 6.0;
/// Hard cap on the profile span when the flow keeps drifting outward.
const PROFILE_SPAN_CAP: f64 = 18.0;
/// The flow is restarted on a longer profile this far before the span edge.
const PROFILE_EDGE_MARGIN: f64 = 1.0;

/// Conserved quantities evaluated at one flow time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowSample<T> {
    pub t: T,
    pub state: PhaseState<T>,
    pub h: T,
    pub f: T,
}

/// Flow trajectory summary: uniformly spaced samples of both invariants and
/// their worst relative drift from the initial values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationReport<T> {
    pub tau: T,
    pub samples: Vec<FlowSample<T>>,
    pub max_drift_h: T,
    pub max_drift_f: T,
}

fn hamilton_rhs<T: Real>(state: &[T], jet: &ThetaJet<T>, ds: &mut [T]) {
    let s = PhaseState::new(state[0], state[1], state[2], state[3]);
    let h = hamiltonian_partials(&s, jet);
    ds[0] = h.d_p_phi;
    ds[1] = h.d_p_y;
    ds[2] = -h.d_phi;
    ds[3] = -h.d_y;
}

/// Integrates Hamilton's equations from `initial` over `[0, t_end]` and
/// samples `H` and `F` at `n_samples` uniformly spaced times.
///
/// The member profile is solved on demand: whenever the trajectory drifts
/// close to the edge of the covered `y` range the profile span is extended
/// and the flow restarted, up to a fixed cap (unbounded drift in `y` means
/// the motion escapes along the cylinder and is reported as
/// [`SphereError::DomainExceeded`]).
pub fn hamiltonian_flow<T: Real>(
    tau: Tau<T>,
    initial: PhaseState<T>,
    t_end: T,
    n_samples: usize,
    config: &IntegratorConfig<T>,
) -> Result<ConservationReport<T>, SphereError<T>> {
    if !(t_end > T::zero()) || !t_end.is_finite() {
        return Err(FamilyError::OutOfDomain {
            value: t_end,
            what: "flow horizon must be finite and positive",
        }
        .into());
    }
    let finite = [initial.phi, initial.y, initial.p_phi, initial.p_y];
    if finite.iter().any(|v| !v.is_finite()) {
        return Err(FamilyError::OutOfDomain {
            value: initial.y,
            what: "initial state must be finite",
        }
        .into());
    }
    if n_samples < 2 {
        return Err(FamilyError::OutOfDomain {
            value: T::lit(n_samples as f64),
            what: "need at least two samples",
        }
        .into());
    }

    let cap = T::lit(PROFILE_SPAN_CAP);
    let mut span = T::lit(PROFILE_SPAN_MIN).max(initial.y.abs() + T::two());
    let y0 = [initial.phi, initial.y, initial.p_phi, initial.p_y];

    loop {
        let sol = solve_x(tau, span, config)?;
        let edge = span - T::lit(PROFILE_EDGE_MARGIN);
        let guard = Event::new(Direction::Falling, move |_t, s: &[T]| edge - s[1].abs());
        let rhs = |_t: T, s: &[T], ds: &mut [T]| match sol.eval_with_third(s[1]) {
            Ok([theta, d1, d2, d3]) => {
                let jet = ThetaJet { theta, d1, d2, d3 };
                hamilton_rhs(s, &jet, ds);
            }
            Err(_) => ds.fill(T::nan()),
        };
        let traj = integrate(rhs, (T::zero(), t_end), &y0, config, &[guard])
            .map_err(FamilyError::from)?;

        match traj.termination {
            Termination::ReachedEnd => {
                let jet0 = theta_jet(&sol, initial.y)?;
                let e0 = hamiltonian(&initial, &jet0);
                let f0 = cubic_integral(&initial, &jet0);
                let scale_h = (e0.kinetic.abs() + e0.potential.abs()).max(T::lit(1e-12));
                let scale_f = (initial.p_phi.abs().powi(3)
                    + super::linear_part(&initial, &jet0).abs())
                .max(T::lit(1e-12));

                let mut samples = Vec::with_capacity(n_samples);
                let mut max_drift_h = T::zero();
                let mut max_drift_f = T::zero();
                for i in 0..n_samples {
                    let t = t_end * T::lit(i as f64) / T::lit((n_samples - 1) as f64);
                    let s = traj.eval(t).map_err(FamilyError::from)?;
                    let state = PhaseState::new(s[0], s[1], s[2], s[3]);
                    let jet = theta_jet(&sol, state.y)?;
                    let h = hamiltonian(&state, &jet).total;
                    let f = cubic_integral(&state, &jet);
                    max_drift_h = max_drift_h.max((h - e0.total).abs() / scale_h);
                    max_drift_f = max_drift_f.max((f - f0).abs() / scale_f);
                    samples.push(FlowSample { t, state, h, f });
                }
                return Ok(ConservationReport {
                    tau: tau.value(),
                    samples,
                    max_drift_h,
                    max_drift_f,
                });
            }
            Termination::EventFired { .. } => {
                let last = traj.final_state();
                if span >= cap {
                    return Err(SphereError::DomainExceeded { y: last[1] });
                }
                span = (span * T::lit(1.5)).min(cap);
            }
            Termination::BlowUp { t } => return Err(FamilyError::BlowUp { t }.into()),
            Termination::StepLimitReached { t } => {
                return Err(FamilyError::StepLimitReached { t }.into())
            }
        }
    }
}
