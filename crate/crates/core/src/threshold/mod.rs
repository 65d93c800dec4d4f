//! Bisection search for the critical parameter.
//!
//! Family members exist for `tau` in a symmetric open window around zero and
//! die beyond it; the planar classifier turns each `tau` into a binary
//! verdict, so the window edge is found by bisecting on the verdict. The
//! search runs on the negative side (where the forward sweep is the one that
//! dies) and reports the edge magnitude; the positive edge follows from the
//! family's odd symmetry.
//!
//! Near the boundary the orbit lingers close to the separatrix and a fixed
//! time budget stops being enough. An Undetermined verdict is therefore
//! retried with the budget doubled up to three times, then once more with a
//! tighter trap ball; whatever is still Undetermined after that is counted,
//! reported, and conservatively bracketed on the escape side.


use crate::ivp::IntegratorConfig;
use crate::portrait::{classify_orbit_with, ClassifierSettings, OrbitClassification, Verdict};
use crate::real::Real;
use serde::Serialize;

/// Default bracket-width target.
pub const TOL_DEFAULT: f64 = 1e-4;
/// Default starting bracket.
pub const BRACKET_DEFAULT: (f64, f64) = (-1.0, 0.0);
/// Budget doublings tried on an Undetermined verdict.
pub const MAX_BUDGET_DOUBLINGS: u32 = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThresholdError<T: Real> {
    #[error("bracket ({low}, {high}) is unusable: {reason}")]
    BadBracket {
        low: T,
        high: T,
        reason: &'static str,
    },
    #[error("too many Undetermined classifications ({count}); raise the budget or loosen tol")]
    BudgetExhausted { count: u32 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdConfig<T> {
    /// Stop once the bracket is this narrow.
    pub tol: T,
    /// `(tau_low, tau_high)`, escaping at the low end, converging at the high
    /// end, with `tau_low < tau_high <= 0`.
    pub bracket: (T, T),
    pub integrator: IntegratorConfig<T>,
    pub classifier: ClassifierSettings<T>,
    /// Hard cap on classifications that stay Undetermined after all retries.
    pub max_undetermined: u32,
}

impl<T: Real> Default for ThresholdConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(TOL_DEFAULT),
            bracket: (T::lit(BRACKET_DEFAULT.0), T::lit(BRACKET_DEFAULT.1)),
            integrator: IntegratorConfig::default(),
            classifier: ClassifierSettings::default(),
            max_undetermined: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThresholdResult<T> {
    /// Estimated window edge (positive by convention).
    pub t_estimate: T,
    /// Final bracket on the negative axis.
    pub bracket: (T, T),
    /// Total classifier invocations, retries included.
    pub evaluations: u32,
    /// Classifications that stayed Undetermined after every retry.
    pub undetermined_count: u32,
}

/// One fully retried classification.
struct Resolved<T> {
    outcome: OrbitClassification<T>,
    /// True when even the last retry stayed Undetermined.
    gave_up: bool,
}

fn resolve<T: Real>(tau: T, cfg: &ThresholdConfig<T>, evaluations: &mut u32) -> Resolved<T> {
    let mut settings = cfg.classifier;
    let mut outcome = classify_orbit_with(tau, &cfg.integrator, &settings);
    *evaluations += 1;
    for round in 0..=MAX_BUDGET_DOUBLINGS {
        if outcome.verdict != Verdict::Undetermined {
            return Resolved {
                outcome,
                gave_up: false,
            };
        }
        if round < MAX_BUDGET_DOUBLINGS {
            settings.t_budget = settings.t_budget * T::two();
        } else {
            // last resort: a tighter trap ball against grazing ambiguity
            settings.delta_trap = settings.delta_trap * T::half();
        }
        outcome = classify_orbit_with(tau, &cfg.integrator, &settings);
        *evaluations += 1;
    }
    Resolved {
        outcome,
        gave_up: outcome.verdict == Verdict::Undetermined,
    }
}

/// Locates the window edge by bisection and returns it with its bracket and
/// the work done.
pub fn find_threshold<T: Real>(
    cfg: &ThresholdConfig<T>,
) -> Result<ThresholdResult<T>, ThresholdError<T>> {
    let (mut low, mut high) = cfg.bracket;
    if !(low < high) || !(high <= T::zero()) || !low.is_finite() {
        return Err(ThresholdError::BadBracket {
            low,
            high,
            reason: "need tau_low < tau_high <= 0",
        });
    }
    if !(cfg.tol > T::zero()) {
        return Err(ThresholdError::BadBracket {
            low,
            high,
            reason: "tol must be positive",
        });
    }

    let mut evaluations = 0;
    let mut undetermined_count = 0;
    let track = |r: &Resolved<T>, undetermined_count: &mut u32| {
        if r.gave_up {
            *undetermined_count += 1;
        }
        *undetermined_count <= cfg.max_undetermined
    };

    // verdicts at the ends; Undetermined leftovers side with escape
    let side = |r: &Resolved<T>| match r.outcome.verdict {
        Verdict::ConvergesToNode => Verdict::ConvergesToNode,
        _ => Verdict::EscapesToSaddleSide,
    };

    let at_low = resolve(low, cfg, &mut evaluations);
    if !track(&at_low, &mut undetermined_count) {
        return Err(ThresholdError::BudgetExhausted {
            count: undetermined_count,
        });
    }
    let at_high = resolve(high, cfg, &mut evaluations);
    if !track(&at_high, &mut undetermined_count) {
        return Err(ThresholdError::BudgetExhausted {
            count: undetermined_count,
        });
    }
    if side(&at_low) != Verdict::EscapesToSaddleSide || side(&at_high) != Verdict::ConvergesToNode {
        return Err(ThresholdError::BadBracket {
            low,
            high,
            reason: "endpoints must classify as escape (low) and converge (high)",
        });
    }

    while high - low > cfg.tol {
        let mid = (low + high) * T::half();
        if mid <= low || mid >= high {
            // bracket narrower than the float grid
            break;
        }
        let at_mid = resolve(mid, cfg, &mut evaluations);
        if !track(&at_mid, &mut undetermined_count) {
            return Err(ThresholdError::BudgetExhausted {
                count: undetermined_count,
            });
        }
        match side(&at_mid) {
            Verdict::ConvergesToNode => high = mid,
            _ => low = mid,
        }
    }

    Ok(ThresholdResult {
        t_estimate: -(low + high) * T::half(),
        bracket: (low, high),
        evaluations,
        undetermined_count,
    })
}
