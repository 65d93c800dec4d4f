//! Cross-checks between the log-radius and pole-regularized views, and the
//! coefficient functions that govern the profile near the two poles.
//!
//! With `s = e^{-2t}` the two views of one member are tied together by
//!
//! ```text
//! x'(t)        = e^t  (g(s) - 2 s g'(s))
//! x''(t) - x(t) = 4 e^{-3t} g''(s)
//! ```
//!
//! [`consistency_check`] measures both identities on a caller-supplied time
//! grid; anything above round-off there means the two solvers disagree about
//! the member.
//!
//! The coefficient functions come in mirror pairs: `zeta`/`nu` describe the
//! far pole of the member itself, `xi`/`mu` describe it for the mirrored
//! member (parameter `-tau`), which by the odd symmetry is what the original
//! member looks like from the opposite pole.

use super::gform::{solve_g, Extrapolated, GSolution};
use super::{FamilyError, Tau, XSolution};
use crate::ivp::IntegratorConfig;
use crate::real::Real;

/// One grid point of the cross-formulation comparison.
#[derive(Clone, Copy, Debug)]
pub struct ConsistencySample<T> {
    pub t: T,
    /// Relative mismatch in the first-derivative identity.
    pub residual_first: T,
    /// Relative mismatch in the second-derivative identity.
    pub residual_second: T,
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport<T> {
    pub samples: Vec<ConsistencySample<T>>,
    pub max_residual_first: T,
    pub max_residual_second: T,
}

/// Compares a log-radius solution against a pole-form solution of the same
/// member on the given positive times.
///
/// Each time must satisfy `e^{-2t} >= s_min` of the pole-form sweep so both
/// solutions cover it.
pub fn consistency_check<T: Real>(
    x: &XSolution<T>,
    g: &GSolution<T>,
    times: &[T],
) -> Result<ConsistencyReport<T>, FamilyError<T>> {
    if x.tau() != g.tau() {
        return Err(FamilyError::OutOfDomain {
            value: g.tau(),
            what: "the two solutions describe different members",
        });
    }
    let mut samples = Vec::with_capacity(times.len());
    let mut max_first = T::zero();
    let mut max_second = T::zero();
    for &t in times {
        if !(t >= T::zero()) {
            return Err(FamilyError::OutOfDomain {
                value: t,
                what: "comparison times must be nonnegative",
            });
        }
        let s = (-T::two() * t).exp();
        let [xv, x1, x2] = x.eval(t)?;
        let [gv, g1, g2] = g.eval(s)?;
        let scale = T::one().max(xv.abs()).max(x1.abs()).max(x2.abs());
        let first = (x1 - t.exp() * (gv - T::two() * s * g1)).abs() / scale;
        let second = (x2 - xv - T::lit(4.0) * (-T::lit(3.0) * t).exp() * g2).abs() / scale;
        max_first = max_first.max(first);
        max_second = max_second.max(second);
        samples.push(ConsistencySample {
            t,
            residual_first: first,
            residual_second: second,
        });
    }
    Ok(ConsistencyReport {
        samples,
        max_residual_first: max_first,
        max_residual_second: max_second,
    })
}

/// Pole-expansion coefficient functions of one member, backed by pole-form
/// sweeps for the member and its mirror.
#[derive(Clone, Debug)]
pub struct AsymptoticCoeffs<T> {
    plus: GSolution<T>,
    minus: GSolution<T>,
}

/// Solves the pole form for `tau` and `-tau` and packages the coefficient
/// functions.
pub fn asymptotic_coeffs<T: Real>(
    tau: Tau<T>,
    s_min: T,
    config: &IntegratorConfig<T>,
) -> Result<AsymptoticCoeffs<T>, FamilyError<T>> {
    Ok(AsymptoticCoeffs {
        plus: solve_g(tau, s_min, config)?,
        minus: solve_g(tau.negated(), s_min, config)?,
    })
}

impl<T: Real> AsymptoticCoeffs<T> {
    pub fn tau(&self) -> T {
        self.plus.tau()
    }

    /// Leading profile coefficient `g - 2 sigma g'` at the member's far pole.
    ///
    /// Admissible `sigma`: zero (extrapolated limit) or `[s_min, 1]`.
    pub fn zeta(&self, sigma: T) -> Result<T, FamilyError<T>> {
        Self::zeta_of(&self.plus, sigma)
    }

    /// Subleading coefficient `4 (g - 2 sigma g')^2 g''` at the far pole.
    pub fn nu(&self, sigma: T) -> Result<T, FamilyError<T>> {
        Self::nu_of(&self.plus, sigma)
    }

    /// Mirror of [`AsymptoticCoeffs::zeta`]: leading coefficient seen from
    /// the opposite pole.
    pub fn xi(&self, sigma: T) -> Result<T, FamilyError<T>> {
        Self::zeta_of(&self.minus, sigma)
    }

    /// Mirror of [`AsymptoticCoeffs::nu`], with the sign flipped by the odd
    /// symmetry.
    pub fn mu(&self, sigma: T) -> Result<T, FamilyError<T>> {
        Ok(-Self::nu_of(&self.minus, sigma)?)
    }

    /// Extrapolated `zeta(0)` with error estimate.
    pub fn zeta0(&self) -> Extrapolated<T> {
        self.plus.limits_at_zero().g
    }

    /// Extrapolated `xi(0)` with error estimate.
    pub fn xi0(&self) -> Extrapolated<T> {
        self.minus.limits_at_zero().g
    }

    /// Extrapolated `nu(0)` (error estimate propagated first-order).
    pub fn nu0(&self) -> Extrapolated<T> {
        Self::nu_limit(&self.plus)
    }

    /// Extrapolated `mu(0)`.
    pub fn mu0(&self) -> Extrapolated<T> {
        let n = Self::nu_limit(&self.minus);
        Extrapolated {
            value: -n.value,
            error_estimate: n.error_estimate,
        }
    }

    pub fn pole_sweep(&self) -> &GSolution<T> {
        &self.plus
    }

    pub fn mirror_sweep(&self) -> &GSolution<T> {
        &self.minus
    }

    fn zeta_of(g: &GSolution<T>, sigma: T) -> Result<T, FamilyError<T>> {
        if sigma == T::zero() {
            return Ok(g.limits_at_zero().g.value);
        }
        let [gv, g1, _] = g.eval(sigma)?;
        Ok(gv - T::two() * sigma * g1)
    }

    fn nu_of(g: &GSolution<T>, sigma: T) -> Result<T, FamilyError<T>> {
        if sigma == T::zero() {
            return Ok(Self::nu_limit(g).value);
        }
        let [gv, g1, g2] = g.eval(sigma)?;
        let z = gv - T::two() * sigma * g1;
        Ok(T::lit(4.0) * z * z * g2)
    }

    fn nu_limit(g: &GSolution<T>) -> Extrapolated<T> {
        let lim = g.limits_at_zero();
        let z = lim.g.value;
        let value = T::lit(4.0) * z * z * lim.d2g.value;
        // first-order propagation of the two extrapolation errors
        let error_estimate = T::lit(8.0) * z.abs() * lim.d2g.value.abs() * lim.g.error_estimate
            + T::lit(4.0) * z * z * lim.d2g.error_estimate;
        Extrapolated {
            value,
            error_estimate,
        }
    }
}
