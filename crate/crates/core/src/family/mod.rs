//! The one-parameter family of profile functions.
//!
//! A family member is the solution `x(t)` of the third-order autonomous
//! problem
//!
//! ```text
//! x' x''' = x x'' - 2 x''^2 + x'^2 + x^2,   x(0) = 0, x'(0) = 1, x''(0) = tau
//! ```
//!
//! on the log-radius axis `t = log r`. Two changes of variables give the other
//! two views of the same member: the radial profile `u(r) = x(log r)`
//! (see [`UView`]) and the pole-regularized profile `g(s)` on `s = r^{-2}`
//! (see [`solve_g`]), which stays smooth where `r` runs off to infinity.
//!
//! Members exist for `|tau|` below a critical threshold (about `0.57735`,
//! reproduced numerically by [`crate::threshold::find_threshold`]). The
//! [`Tau`] newtype enforces a safety margin under that threshold; escape
//! hatches exist for probing the boundary.
//!
//! Negative times are evaluated through the family's odd symmetry
//! `x_tau(t) = -x_{-tau}(-t)`, so every [`XSolution`] carries the solved
//! companion member `-tau` alongside.

mod asym;
mod gform;

pub use asym::{
    asymptotic_coeffs, consistency_check, AsymptoticCoeffs, ConsistencyReport, ConsistencySample,
};
pub use gform::{solve_g, Extrapolated, GSolution, ZeroLimits, S_MIN_DEFAULT};

use crate::ivp::{self, DenseSolution, IntegratorConfig, IvpError, Termination};
use crate::real::Real;

/// `x'` magnitudes below this are treated as the derivative singularity of
/// the autonomous equation (the equation divides by `x'`).
pub const DERIVATIVE_FLOOR: f64 = 1e-14;

/// Default stored estimate of the critical parameter.
pub const THRESHOLD_ESTIMATE: f64 = 0.57735;

/// Default safety margin kept between accepted `tau` values and the stored
/// threshold estimate.
pub const WINDOW_MARGIN: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FamilyError<T: Real> {
    #[error("tau = {value} lies outside the existence window |tau| < {limit}")]
    TauOutsideWindow { value: T, limit: T },
    #[error("profile derivative vanished near t = {t}; the member ceases to exist there")]
    DerivativeSingular { t: T },
    #[error("pole-form denominator g - 2 s g' vanished near s = {s}")]
    DenominatorVanished { s: T },
    #[error("profile blew up at t = {t} before the requested span was covered")]
    BlowUp { t: T },
    #[error("integrator step budget exhausted at t = {t}")]
    StepLimitReached { t: T },
    #[error("argument {value} is outside the solved or admissible domain: {what}")]
    OutOfDomain { value: T, what: &'static str },
    #[error(transparent)]
    Engine(#[from] IvpError<T>),
}

/// Acceptance window for the family parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauWindow<T> {
    /// Best known value of the critical parameter.
    pub threshold: T,
    /// Safety margin subtracted from the threshold.
    pub margin: T,
}

impl<T: Real> Default for TauWindow<T> {
    fn default() -> Self {
        Self {
            threshold: T::lit(THRESHOLD_ESTIMATE),
            margin: T::lit(WINDOW_MARGIN),
        }
    }
}

impl<T: Real> TauWindow<T> {
    /// Window refreshed from a newly computed threshold estimate.
    pub fn from_threshold(threshold: T) -> Self {
        Self {
            threshold,
            ..Self::default()
        }
    }

    pub fn limit(&self) -> T {
        self.threshold - self.margin
    }

    pub fn admits(&self, value: T) -> bool {
        value.is_finite() && value.abs() < self.limit()
    }
}

/// Validated family parameter.
///
/// Construction enforces the existence window; [`Tau::trusted`] bypasses the
/// check for deliberate boundary probes (the solvers then report how the
/// member dies instead).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Tau<T>(T);

impl<T: Real> Tau<T> {
    pub fn new(value: T) -> Result<Self, FamilyError<T>> {
        Self::in_window(value, &TauWindow::default())
    }

    pub fn in_window(value: T, window: &TauWindow<T>) -> Result<Self, FamilyError<T>> {
        if window.admits(value) {
            Ok(Self(value))
        } else {
            Err(FamilyError::TauOutsideWindow {
                value,
                limit: window.limit(),
            })
        }
    }

    /// Wraps a value without any window check.
    pub fn trusted(value: T) -> Self {
        Self(value)
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn negated(self) -> Self {
        Self(-self.0)
    }
}

impl<T: Real> core::fmt::Display for Tau<T> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Right-hand side of the autonomous problem as a first-order system over
/// `(x, x', x'')`.
pub fn rhs_x<T: Real>(state: [T; 3]) -> Result<[T; 3], FamilyError<T>> {
    let [x, x1, x2] = state;
    if x1.abs() < T::lit(DERIVATIVE_FLOOR) {
        return Err(FamilyError::DerivativeSingular { t: T::nan() });
    }
    let x3 = (x * x2 - T::two() * x2 * x2 + x1 * x1 + x * x) / x1;
    Ok([x1, x2, x3])
}

/// Solved family member on the symmetric span `[-t_max, t_max]`.
///
/// Stores the forward trajectory of `tau` and of the companion `-tau`;
/// negative times evaluate through the odd symmetry.
#[derive(Clone, Debug)]
pub struct XSolution<T> {
    tau: T,
    t_max: T,
    forward: DenseSolution<T>,
    companion: DenseSolution<T>,
}

fn integrate_profile<T: Real>(
    tau: T,
    t_max: T,
    config: &IntegratorConfig<T>,
) -> Result<DenseSolution<T>, FamilyError<T>> {
    let rhs = |_t: T, y: &[T], dy: &mut [T]| {
        match rhs_x([y[0], y[1], y[2]]) {
            Ok(d) => dy.copy_from_slice(&d),
            Err(_) => dy.fill(T::nan()),
        }
    };
    let sol = ivp::integrate(rhs, (T::zero(), t_max), &[T::zero(), T::one(), tau], config, &[])
        .map_err(|e| match e {
            // the only non-finite source in this right-hand side is x' -> 0
            IvpError::NonFiniteRhs { t } | IvpError::StepUnderflow { t } => {
                FamilyError::DerivativeSingular { t }
            }
            other => FamilyError::Engine(other),
        })?;
    match sol.termination {
        Termination::ReachedEnd => Ok(sol),
        Termination::BlowUp { t } => Err(FamilyError::BlowUp { t }),
        Termination::StepLimitReached { t } => Err(FamilyError::StepLimitReached { t }),
        Termination::EventFired { .. } => unreachable!("no events registered"),
    }
}

/// Solves the autonomous problem for `tau` (and its companion) out to `t_max`.
pub fn solve_x<T: Real>(
    tau: Tau<T>,
    t_max: T,
    config: &IntegratorConfig<T>,
) -> Result<XSolution<T>, FamilyError<T>> {
    if !(t_max > T::zero()) || !t_max.is_finite() {
        return Err(FamilyError::OutOfDomain {
            value: t_max,
            what: "t_max must be finite and positive",
        });
    }
    let forward = integrate_profile(tau.value(), t_max, config)?;
    let companion = integrate_profile(-tau.value(), t_max, config)?;
    Ok(XSolution {
        tau: tau.value(),
        t_max,
        forward,
        companion,
    })
}

impl<T: Real> XSolution<T> {
    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn t_max(&self) -> T {
        self.t_max
    }

    /// `(x, x', x'')` at any `t` in `[-t_max, t_max]`.
    pub fn eval(&self, t: T) -> Result<[T; 3], FamilyError<T>> {
        if t >= T::zero() {
            let y = self.forward.eval(t)?;
            Ok([y[0], y[1], y[2]])
        } else {
            // odd symmetry: x_tau(t) = -x_{-tau}(-t)
            let y = self.companion.eval(-t)?;
            Ok([-y[0], y[1], -y[2]])
        }
    }

    /// `(x, x', x'', x''')` with the third derivative reconstructed from the
    /// equation itself.
    pub fn eval_with_third(&self, t: T) -> Result<[T; 4], FamilyError<T>> {
        let [x, x1, x2] = self.eval(t)?;
        let [_, _, x3] = rhs_x([x, x1, x2]).map_err(|_| FamilyError::DerivativeSingular { t })?;
        Ok([x, x1, x2, x3])
    }

    /// Radial view `u(r) = x(log r)` of the same member.
    pub fn radial(&self) -> UView<'_, T> {
        UView { x: self }
    }

    /// Underlying trajectories, mostly of interest to diagnostics.
    pub fn dense_forward(&self) -> &DenseSolution<T> {
        &self.forward
    }

    pub fn dense_companion(&self) -> &DenseSolution<T> {
        &self.companion
    }
}

/// Four-jet of the radial profile at one radius.
#[derive(Clone, Copy, Debug)]
pub struct UJet<T> {
    pub r: T,
    pub u: T,
    pub du: T,
    pub d2u: T,
    pub d3u: T,
}

impl<T: Real> UJet<T> {
    /// Residual of the radial equation at this jet, together with the local
    /// magnitude scale the residual should be compared against.
    pub fn equation_residual(&self) -> (T, T) {
        let (r, u, u1, u2, u3) = (self.r, self.u, self.du, self.d2u, self.d3u);
        let r2 = r * r;
        let r3 = r2 * r;
        let r4 = r2 * r2;
        let terms = [
            u3 * u1 * r4,
            T::lit(7.0) * u2 * u1 * r3,
            T::two() * u2 * u2 * r4,
            -(u2 * u * r2),
            T::two() * u1 * u1 * r2,
            -(u1 * u * r),
            -(u * u),
        ];
        let mut res = T::zero();
        let mut scale = T::zero();
        for t in terms {
            res = res + t;
            scale = scale + t.abs();
        }
        (res, scale.max(T::one()))
    }
}

/// Radial-coordinate view of a solved member.
#[derive(Clone, Copy, Debug)]
pub struct UView<'a, T> {
    x: &'a XSolution<T>,
}

impl<T: Real> UView<'_, T> {
    /// Full four-jet of `u` at radius `r` (valid for
    /// `log r` within the solved span).
    pub fn jet(&self, r: T) -> Result<UJet<T>, FamilyError<T>> {
        if !(r > T::zero()) {
            return Err(FamilyError::OutOfDomain {
                value: r,
                what: "radius must be positive",
            });
        }
        let t = r.ln();
        let [x, x1, x2, x3] = self.x.eval_with_third(t)?;
        let r2 = r * r;
        let r3 = r2 * r;
        Ok(UJet {
            r,
            u: x,
            du: x1 / r,
            d2u: (x2 - x1) / r2,
            d3u: (x3 - T::lit(3.0) * x2 + T::two() * x1) / r3,
        })
    }
}
