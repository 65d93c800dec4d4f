//! Pole-regularized view of a family member.
//!
//! On `s = r^{-2}` the profile `g(s) = -x(log r) / (2r)` satisfies
//!
//! ```text
//! g''' = (3 g' g'' + 4 s g''^2) / (g - 2 s g'),
//! g(1) = 0, g'(1) = -1/2, g''(1) = tau / 4,
//! ```
//!
//! which is regular through `s = 0` (the far pole `r = infinity`) as long as
//! the denominator stays away from zero. Members inside the existence window
//! keep the denominator positive on all of `(0, 1]`.

use super::{FamilyError, Tau};
use crate::ivp::{self, Direction, Event, IntegratorConfig, IvpError, Termination};
use crate::real::Real;

/// Default near-pole cutoff for the backward sweep.
pub const S_MIN_DEFAULT: f64 = 1e-6;

/// Denominator magnitudes below this abort the sweep.
pub const DENOMINATOR_FLOOR: f64 = 1e-13;

/// Coarsest grid point used by the zero-limit extrapolation.
const RICHARDSON_S0: f64 = 1e-2;
/// Number of dyadically refined grid points.
const RICHARDSON_DEPTH: usize = 10;
/// Extrapolation columns actually built.
const RICHARDSON_COLS: usize = 7;

/// Value obtained by extrapolating a grid of samples to zero, with a
/// data-driven error estimate (difference of the last two extrapolation
/// orders).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Extrapolated<T> {
    pub value: T,
    pub error_estimate: T,
}

/// Extrapolated limits of `(g, g', g'')` at `s = 0`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ZeroLimits<T> {
    pub g: Extrapolated<T>,
    pub dg: Extrapolated<T>,
    pub d2g: Extrapolated<T>,
}

/// Right-hand side of the pole-form system over `(g, g', g'')`.
pub fn rhs_g<T: Real>(s: T, state: [T; 3]) -> Result<[T; 3], FamilyError<T>> {
    let [g, g1, g2] = state;
    let den = g - T::two() * s * g1;
    if den.abs() < T::lit(DENOMINATOR_FLOOR) {
        return Err(FamilyError::DenominatorVanished { s });
    }
    let g3 = (T::lit(3.0) * g1 * g2 + T::lit(4.0) * s * g2 * g2) / den;
    Ok([g1, g2, g3])
}

/// Solved pole-form member on `[s_min, 1]`.
#[derive(Clone, Debug)]
pub struct GSolution<T> {
    tau: T,
    s_min: T,
    dense: crate::ivp::DenseSolution<T>,
    limits: ZeroLimits<T>,
}

/// Integrates the pole form backward from `s = 1` to `s_min` and extrapolates
/// the `s -> 0` limits.
pub fn solve_g<T: Real>(
    tau: Tau<T>,
    s_min: T,
    config: &IntegratorConfig<T>,
) -> Result<GSolution<T>, FamilyError<T>> {
    let finest = T::lit(RICHARDSON_S0) / T::lit((1u64 << (RICHARDSON_DEPTH - 1)) as f64);
    if !(s_min > T::zero()) || s_min > finest {
        return Err(FamilyError::OutOfDomain {
            value: s_min,
            what: "s_min must lie in (0, ~2e-5] so the zero-limit grid fits",
        });
    }
    let rhs = |s: T, y: &[T], dy: &mut [T]| match rhs_g(s, [y[0], y[1], y[2]]) {
        Ok(d) => dy.copy_from_slice(&d),
        Err(_) => dy.fill(T::nan()),
    };
    let guard = Event::new(
        Direction::Falling,
        |s: T, y: &[T]| y[0] - T::two() * s * y[1] - T::lit(DENOMINATOR_FLOOR),
    );
    let y0 = [T::zero(), -T::half(), tau.value() / T::lit(4.0)];
    let dense = ivp::integrate(rhs, (T::one(), s_min), &y0, config, &[guard]).map_err(|e| {
        match e {
            IvpError::NonFiniteRhs { t } | IvpError::StepUnderflow { t } => {
                FamilyError::DenominatorVanished { s: t }
            }
            other => FamilyError::Engine(other),
        }
    })?;
    match dense.termination {
        Termination::ReachedEnd => {}
        Termination::EventFired { t, .. } => return Err(FamilyError::DenominatorVanished { s: t }),
        Termination::BlowUp { t } => return Err(FamilyError::BlowUp { t }),
        Termination::StepLimitReached { t } => return Err(FamilyError::StepLimitReached { t }),
    }

    // dyadic grid, finest point still inside the solved span
    let mut samples = [[T::zero(); RICHARDSON_DEPTH]; 3];
    let mut s = T::lit(RICHARDSON_S0);
    for k in 0..RICHARDSON_DEPTH {
        let y = dense.eval(s)?;
        for c in 0..3 {
            samples[c][k] = y[c];
        }
        s = s * T::half();
    }
    let limits = ZeroLimits {
        g: richardson(&samples[0]),
        dg: richardson(&samples[1]),
        d2g: richardson(&samples[2]),
    };

    Ok(GSolution {
        tau: tau.value(),
        s_min,
        dense,
        limits,
    })
}

/// Extrapolates `f(s_k) -> f(0)` over the dyadic grid `s_k = s_0 2^{-k}`,
/// eliminating one power of `s` per column.
fn richardson<T: Real>(values: &[T; RICHARDSON_DEPTH]) -> Extrapolated<T> {
    let mut col: Vec<T> = values.to_vec();
    let mut tails = vec![col[col.len() - 1]];
    let mut pow = T::one();
    for _ in 1..=RICHARDSON_COLS {
        pow = pow * T::two();
        let mut next = Vec::with_capacity(col.len() - 1);
        for i in 0..col.len() - 1 {
            next.push((pow * col[i + 1] - col[i]) / (pow - T::one()));
        }
        col = next;
        tails.push(col[col.len() - 1]);
    }
    let value = tails[tails.len() - 1];
    Extrapolated {
        value,
        error_estimate: (value - tails[tails.len() - 2]).abs(),
    }
}

impl<T: Real> GSolution<T> {
    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn s_min(&self) -> T {
        self.s_min
    }

    /// `(g, g', g'')` at `s` in `[s_min, 1]`.
    pub fn eval(&self, s: T) -> Result<[T; 3], FamilyError<T>> {
        let y = self.dense.eval(s)?;
        Ok([y[0], y[1], y[2]])
    }

    /// `(g, g', g'', g''')` with the third derivative reconstructed from the
    /// equation.
    pub fn eval_with_third(&self, s: T) -> Result<[T; 4], FamilyError<T>> {
        let [g, g1, g2] = self.eval(s)?;
        let [_, _, g3] = rhs_g(s, [g, g1, g2])?;
        Ok([g, g1, g2, g3])
    }

    /// Extrapolated `s -> 0` limits with error estimates.
    pub fn limits_at_zero(&self) -> &ZeroLimits<T> {
        &self.limits
    }

    pub fn dense(&self) -> &crate::ivp::DenseSolution<T> {
        &self.dense
    }
}
