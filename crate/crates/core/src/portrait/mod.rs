//! Phase-plane reduction of the family and orbit-fate classification.
//!
//! Dividing the profile equation by `x` collapses it to a planar system in
//! `q = x'/x` and `p = q'`. A further time reparametrization (scaling the
//! field by `q`) gives the polynomial system integrated here:
//!
//! ```text
//! q' = q p
//! p' = 1 + 2 q^2 - 3 q^4 + p - 7 q^2 p - 2 p^2
//! ```
//!
//! It has four equilibria: saddles at `(0, 1)` and `(0, -1/2)` and stable
//! nodes at `(+-1, 0)`. Every family member enters the half-plane `q > 0`
//! from `q = +infinity` (the profile starts at a simple zero) and either
//! converges to the node `(1, 0)` or dives below the saddle `(0, -1/2)` and
//! escapes. Which of the two happens is exactly the existence question for
//! the member, and [`classify_orbit`] decides it in finite time with a pair
//! of events; the threshold finder bisects on that verdict.


use crate::family::{rhs_x, FamilyError, XSolution};
use crate::ivp::{self, Direction, Event, IntegratorConfig, IvpError, Termination};
use crate::real::Real;
use serde::Serialize;

/// Earliest profile time used to enter the plane (`q ~ 1/t` blows up at 0).
pub const T_MIN: f64 = 1e-3;
/// Reparametrized-time budget for one classification attempt.
pub const T_BUDGET: f64 = 200.0;
/// Trap-ball radius around the node `(1, 0)`.
pub const DELTA_TRAP: f64 = 0.05;
/// Escape requires `q` below this...
pub const Q_ESCAPE: f64 = 0.05;
/// ...together with `p` below this (safely under the saddle level `-1/2`).
pub const P_SEP_MARGIN: f64 = -0.55;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PortraitError<T: Real> {
    #[error("grid time {t} is not usable: {why}")]
    BadGrid { t: T, why: &'static str },
    #[error("orbit never reached q = {q} within the time budget")]
    TargetNotReached { q: T },
    #[error(transparent)]
    Family(#[from] FamilyError<T>),
}

/// Point of the reduced plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhasePoint<T> {
    pub q: T,
    pub p: T,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(q: T, p: T) -> Self {
        Self { q, p }
    }
}

/// Velocity field of the reparametrized planar system.
pub fn rhs_sms<T: Real>(pt: PhasePoint<T>) -> [T; 2] {
    let (q, p) = (pt.q, pt.p);
    let q2 = q * q;
    [
        q * p,
        T::one() + T::two() * q2 - T::lit(3.0) * q2 * q2 + p
            - T::lit(7.0) * q2 * p
            - T::two() * p * p,
    ]
}

/// Jacobian of [`rhs_sms`].
pub fn jacobian_sms<T: Real>(pt: PhasePoint<T>) -> [[T; 2]; 2] {
    let (q, p) = (pt.q, pt.p);
    let q2 = q * q;
    [
        [p, q],
        [
            T::lit(4.0) * q - T::lit(12.0) * q2 * q - T::lit(14.0) * q * p,
            T::one() - T::lit(7.0) * q2 - T::lit(4.0) * p,
        ],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EquilibriumKind {
    Saddle,
    StableNode,
    UnstableNode,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Equilibrium<T> {
    pub point: PhasePoint<T>,
    pub jacobian: [[T; 2]; 2],
    /// Real eigenvalue pair, smaller first.
    pub eigenvalues: (T, T),
    pub kind: EquilibriumKind,
}

/// The four rest points of the planar field, with their linearizations.
pub fn equilibria<T: Real>() -> [Equilibrium<T>; 4] {
    let at = |q: f64, p: f64| {
        let point = PhasePoint::new(T::lit(q), T::lit(p));
        let j = jacobian_sms(point);
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        // all four linearizations have real spectra
        let disc = (tr * tr - T::lit(4.0) * det).sqrt();
        let l1 = (tr - disc) * T::half();
        let l2 = (tr + disc) * T::half();
        let kind = if det < T::zero() {
            EquilibriumKind::Saddle
        } else if tr < T::zero() {
            EquilibriumKind::StableNode
        } else {
            EquilibriumKind::UnstableNode
        };
        Equilibrium {
            point,
            jacobian: j,
            eigenvalues: (l1, l2),
            kind,
        }
    };
    [at(0.0, 1.0), at(0.0, -0.5), at(1.0, 0.0), at(-1.0, 0.0)]
}

/// Projects a solved member onto the plane at the given positive times.
pub fn orbit_from_x<T: Real>(
    sol: &XSolution<T>,
    t_grid: &[T],
) -> Result<Vec<PhasePoint<T>>, PortraitError<T>> {
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > T::zero()) {
            return Err(PortraitError::BadGrid {
                t,
                why: "the projection q = x'/x is singular at the profile zero t = 0",
            });
        }
        let [x, x1, x2] = sol.eval(t)?;
        let q = x1 / x;
        let p = x2 / x - q * q;
        if !q.is_finite() || !p.is_finite() {
            return Err(PortraitError::BadGrid {
                t,
                why: "projection overflowed",
            });
        }
        out.push(PhasePoint::new(q, p));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ConvergesToNode,
    EscapesToSaddleSide,
    Undetermined,
}

/// What ended a classification run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Trigger {
    /// Entered the attraction ball around the node.
    TrapBall,
    /// Passed below the saddle with `q` already small.
    EscapeMargin,
    /// Time budget ran out with the orbit still undecided.
    BudgetExhausted,
    /// The planar state left every bounded region (escape route only).
    FieldBlowUp,
    /// The integrator itself gave up; nothing was learned.
    SolverBreakdown,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Diagnostic<T> {
    pub final_point: PhasePoint<T>,
    pub time_used: T,
    pub trigger: Trigger,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrbitClassification<T> {
    pub verdict: Verdict,
    pub diagnostic: Diagnostic<T>,
}

/// Decision knobs for [`classify_orbit_with`]; the threshold search retries
/// Undetermined cases with a larger budget and a smaller trap ball.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClassifierSettings<T> {
    pub t_min: T,
    pub t_budget: T,
    pub delta_trap: T,
    pub q_escape: T,
    pub p_sep_margin: T,
}

impl<T: Real> Default for ClassifierSettings<T> {
    fn default() -> Self {
        Self {
            t_min: T::lit(T_MIN),
            t_budget: T::lit(T_BUDGET),
            delta_trap: T::lit(DELTA_TRAP),
            q_escape: T::lit(Q_ESCAPE),
            p_sep_margin: T::lit(P_SEP_MARGIN),
        }
    }
}

/// Plane entry state of the member `tau`: the profile is solved on
/// `[0, t_min]` and projected at the endpoint.
fn entry_point<T: Real>(
    tau: T,
    t_min: T,
    config: &IntegratorConfig<T>,
) -> Option<PhasePoint<T>> {
    let rhs = |_t: T, y: &[T], dy: &mut [T]| match rhs_x([y[0], y[1], y[2]]) {
        Ok(d) => dy.copy_from_slice(&d),
        Err(_) => dy.fill(T::nan()),
    };
    let sol = ivp::integrate(rhs, (T::zero(), t_min), &[T::zero(), T::one(), tau], config, &[])
        .ok()?;
    if sol.termination != Termination::ReachedEnd {
        return None;
    }
    let y = sol.final_state();
    let q = y[1] / y[0];
    let p = y[2] / y[0] - q * q;
    (q.is_finite() && p.is_finite()).then_some(PhasePoint::new(q, p))
}

/// Classifies the fate of the member `tau` with the default settings.
pub fn classify_orbit<T: Real>(tau: T, config: &IntegratorConfig<T>) -> OrbitClassification<T> {
    classify_orbit_with(tau, config, &ClassifierSettings::default())
}

/// Classification with explicit decision knobs. Accepts any real `tau`;
/// Undetermined is an answer, never an error.
pub fn classify_orbit_with<T: Real>(
    tau: T,
    config: &IntegratorConfig<T>,
    settings: &ClassifierSettings<T>,
) -> OrbitClassification<T> {
    let nothing_learned = |point: PhasePoint<T>, time: T| OrbitClassification {
        verdict: Verdict::Undetermined,
        diagnostic: Diagnostic {
            final_point: point,
            time_used: time,
            trigger: Trigger::SolverBreakdown,
        },
    };

    let Some(start) = entry_point(tau, settings.t_min, config) else {
        return nothing_learned(PhasePoint::new(T::nan(), T::nan()), T::zero());
    };

    let delta2 = settings.delta_trap * settings.delta_trap;
    let trap = Event::new(Direction::Rising, move |_t: T, y: &[T]| {
        let dq = y[0] - T::one();
        delta2 - (dq * dq + y[1] * y[1])
    });
    let q_escape = settings.q_escape;
    let p_margin = settings.p_sep_margin;
    let escape = Event::new(Direction::Falling, move |_t: T, y: &[T]| {
        (y[0] - q_escape).max(y[1] - p_margin)
    });

    let rhs = |_t: T, y: &[T], dy: &mut [T]| {
        let d = rhs_sms(PhasePoint::new(y[0], y[1]));
        dy.copy_from_slice(&d);
    };
    let run = ivp::integrate(
        rhs,
        (T::zero(), settings.t_budget),
        &[start.q, start.p],
        config,
        &[trap, escape],
    );

    let sol = match run {
        Ok(sol) => sol,
        Err(IvpError::NonFiniteRhs { t }) | Err(IvpError::StepUnderflow { t }) => {
            return nothing_learned(start, t)
        }
        Err(_) => return nothing_learned(start, T::zero()),
    };

    let yf = sol.final_state();
    let final_point = PhasePoint::new(yf[0], yf[1]);
    let (verdict, trigger, time_used) = match sol.termination {
        Termination::EventFired { index: 0, t } => (Verdict::ConvergesToNode, Trigger::TrapBall, t),
        Termination::EventFired { t, .. } => {
            (Verdict::EscapesToSaddleSide, Trigger::EscapeMargin, t)
        }
        Termination::ReachedEnd => (
            Verdict::Undetermined,
            Trigger::BudgetExhausted,
            settings.t_budget,
        ),
        // bounded orbits cannot trip the norm guard; only the dive past the
        // saddle runs off to infinity
        Termination::BlowUp { t } => (Verdict::EscapesToSaddleSide, Trigger::FieldBlowUp, t),
        Termination::StepLimitReached { t } => (Verdict::Undetermined, Trigger::BudgetExhausted, t),
    };
    OrbitClassification {
        verdict,
        diagnostic: Diagnostic {
            final_point,
            time_used,
            trigger,
        },
    }
}

/// Samples `p` on the member's orbit at prescribed `q` values by riding the
/// descending branch (`q` falls monotonically from the entry value toward 1).
///
/// Targets must lie strictly between 1 and the entry value of `q`
/// (about `1 / t_min`).
pub fn p_at_q<T: Real>(
    tau: T,
    q_targets: &[T],
    config: &IntegratorConfig<T>,
    settings: &ClassifierSettings<T>,
) -> Result<Vec<T>, PortraitError<T>> {
    let Some(start) = entry_point(tau, settings.t_min, config) else {
        return Err(PortraitError::BadGrid {
            t: settings.t_min,
            why: "profile solve failed before plane entry",
        });
    };
    let mut out = Vec::with_capacity(q_targets.len());
    for &q_target in q_targets {
        if !(q_target < start.q) || !q_target.is_finite() {
            return Err(PortraitError::TargetNotReached { q: q_target });
        }
        let cross = Event::new(Direction::Falling, move |_t: T, y: &[T]| y[0] - q_target);
        let rhs = |_t: T, y: &[T], dy: &mut [T]| {
            let d = rhs_sms(PhasePoint::new(y[0], y[1]));
            dy.copy_from_slice(&d);
        };
        let sol = ivp::integrate(
            rhs,
            (T::zero(), settings.t_budget),
            &[start.q, start.p],
            config,
            &[cross],
        )
        .map_err(|e| PortraitError::Family(FamilyError::Engine(e)))?;
        match sol.termination {
            Termination::EventFired { .. } => out.push(sol.final_state()[1]),
            _ => return Err(PortraitError::TargetNotReached { q: q_target }),
        }
    }
    Ok(out)
}
