//! Adaptive initial-value-problem engine.
//!
//! An explicit embedded Runge–Kutta 5(4) pair drives every trajectory in this
//! crate. Accepted steps keep a quartic continuous extension, so solutions
//! come back as [`DenseSolution`] objects that can be evaluated (and
//! differentiated) anywhere inside the covered span. Event guards are watched
//! across each accepted step and localized by bisection on the continuous
//! extension.
//!
//! ```
//! use cubint::ivp::{integrate, IntegratorConfig};
//!
//! let cfg = IntegratorConfig::<f64>::default();
//! let sol = integrate(|_t, y, dy| dy[0] = y[0], (0.0, 1.0), &[1.0], &cfg, &[]).unwrap();
//! let y1 = sol.eval(1.0).unwrap()[0];
//! assert!((y1 - 1.0f64.exp()).abs() < 1e-9);
//! ```

mod dopri5;
mod solution;

pub use solution::{DenseSolution, Termination};

use crate::real::Real;

/// Which way a guard must cross zero to fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Rising,
    Falling,
    Any,
}

/// Scalar guard watched during integration. The event fires at the first time
/// the guard value crosses zero in the watched direction; integration stops
/// there. A guard that starts at zero must leave zero before it can fire.
pub struct Event<T> {
    pub guard: Box<dyn Fn(T, &[T]) -> T + Send + Sync>,
    pub direction: Direction,
}

impl<T> Event<T> {
    pub fn new(
        direction: Direction,
        guard: impl Fn(T, &[T]) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            guard: Box::new(guard),
            direction,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Upper bound on the step magnitude; may be infinite.
    pub max_step: T,
    /// Cap on attempted steps per `integrate` call.
    pub max_steps: usize,
    /// Sup-norm threshold treated as numerical blow-up.
    pub blow_up_norm: T,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-10),
            max_step: T::infinity(),
            max_steps: 10_000_000,
            blow_up_norm: T::lit(1e8),
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_tols(rel_tol: T, abs_tol: T) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), IvpError<T>> {
        let pos = |v: T| v > T::zero() && !v.is_nan();
        if !pos(self.rel_tol) || !self.rel_tol.is_finite() {
            return Err(IvpError::InvalidConfig {
                reason: "rel_tol must be finite and strictly positive".into(),
            });
        }
        if !pos(self.abs_tol) || !self.abs_tol.is_finite() {
            return Err(IvpError::InvalidConfig {
                reason: "abs_tol must be finite and strictly positive".into(),
            });
        }
        if !pos(self.max_step) {
            return Err(IvpError::InvalidConfig {
                reason: "max_step must be strictly positive".into(),
            });
        }
        if self.max_steps == 0 {
            return Err(IvpError::InvalidConfig {
                reason: "max_steps must be nonzero".into(),
            });
        }
        if !pos(self.blow_up_norm) {
            return Err(IvpError::InvalidConfig {
                reason: "blow_up_norm must be strictly positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IvpError<T: Real> {
    /// The right-hand side produced NaN/∞ and shrinking the step did not help;
    /// the trajectory is entering a region where the equation is singular.
    #[error("right-hand side returned a non-finite value near t = {t}")]
    NonFiniteRhs { t: T },
    #[error("step size underflowed near t = {t}")]
    StepUnderflow { t: T },
    #[error("integration span [{t0}, {t1}] is empty or not finite")]
    BadSpan { t0: T, t1: T },
    #[error("initial state is empty or contains a non-finite component")]
    NonFiniteInitial,
    #[error("invalid integrator configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("evaluation time {t} lies outside the solved span [{lo}, {hi}]")]
    OutOfDomain { t: T, lo: T, hi: T },
}

/// Integrates `dy/dt = rhs(t, y)` from `t_span.0` to `t_span.1` (either
/// direction). Stops early on the first fired event, on blow-up, or on the
/// step budget; the returned solution's `termination` records which.
pub fn integrate<T, F>(
    rhs: F,
    t_span: (T, T),
    y0: &[T],
    config: &IntegratorConfig<T>,
    events: &[Event<T>],
) -> Result<DenseSolution<T>, IvpError<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
{
    dopri5::run(rhs, t_span, y0, config, events)
}
