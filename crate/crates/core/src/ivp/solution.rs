use serde::Serialize;

use super::IvpError;
use crate::real::Real;

/// Why the integrator stopped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Termination<T> {
    /// The requested end of the span was reached.
    ReachedEnd,
    /// An event guard crossed in its watched direction; `index` is the
    /// position of the event in the slice passed to `integrate`.
    EventFired { index: usize, t: T },
    /// The sup-norm of the state crossed `blow_up_norm`. The solution remains
    /// evaluable up to (and including) `t`.
    BlowUp { t: T },
    /// `max_steps` step attempts were spent before reaching the span end.
    StepLimitReached { t: T },
}

/// One accepted step, stored as a quartic in the normalized step coordinate
/// `theta = (t - t0)/h`, power basis, one coefficient row per component.
#[derive(Clone, Debug)]
pub(crate) struct Segment<T> {
    pub t0: T,
    pub h: T,
    /// `coef[c] = [a0, a1, a2, a3, a4]` for component `c`.
    pub coef: Vec<[T; 5]>,
}

impl<T: Real> Segment<T> {
    /// Evaluates the `order`-th time derivative of component `c` at `theta`.
    fn eval(&self, c: usize, theta: T, order: usize) -> T {
        let a = &self.coef[c];
        // differentiate the power basis `order` times, then Horner
        let mut d = [T::zero(); 5];
        let mut n_low = 5usize;
        for (k, dk) in d.iter_mut().enumerate() {
            let mut f = T::one();
            for j in 0..order {
                f = f * T::lit((k + j + 1) as f64);
            }
            if k + order < 5 {
                *dk = a[k + order] * f;
            } else {
                n_low = n_low.min(k);
            }
        }
        let mut acc = T::zero();
        for k in (0..n_low).rev() {
            acc = acc * theta + d[k];
        }
        // d/dt = (1/h) d/dtheta
        acc / self.h.powi(order as i32)
    }
}

/// Immutable piecewise-polynomial trajectory produced by `integrate`.
///
/// Evaluation is valid on the closed span actually covered (which may be
/// shorter than requested when an event fired or a guard terminated the run).
/// Endpoints of accepted steps reproduce the step states to round-off.
#[derive(Clone, Debug)]
pub struct DenseSolution<T> {
    pub(crate) dim: usize,
    pub(crate) t_start: T,
    pub(crate) t_end: T,
    pub(crate) segments: Vec<Segment<T>>,
    pub termination: Termination<T>,
    /// Accepted steps.
    pub n_steps: usize,
    /// Total right-hand-side evaluations, including rejected steps.
    pub n_rhs_evals: usize,
}

impl<T: Real> DenseSolution<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Covered span in integration order: `(t_start, t_end)` with `t_end` on
    /// the far side (smaller than `t_start` for backward runs).
    pub fn t_span(&self) -> (T, T) {
        (self.t_start, self.t_end)
    }

    pub fn contains(&self, t: T) -> bool {
        let (lo, hi) = if self.t_start <= self.t_end {
            (self.t_start, self.t_end)
        } else {
            (self.t_end, self.t_start)
        };
        t >= lo && t <= hi
    }

    fn locate(&self, t: T) -> Result<&Segment<T>, IvpError<T>> {
        if !self.contains(t) || self.segments.is_empty() {
            let (lo, hi) = self.t_span();
            return Err(IvpError::OutOfDomain { t, lo, hi });
        }
        let forward = self.t_end >= self.t_start;
        // first segment whose start lies strictly past t, minus one
        let idx = self.segments.partition_point(|s| {
            if forward {
                s.t0 <= t
            } else {
                s.t0 >= t
            }
        });
        Ok(&self.segments[idx.saturating_sub(1)])
    }

    /// State at `t`.
    pub fn eval(&self, t: T) -> Result<Vec<T>, IvpError<T>> {
        self.derivative(t, 0)
    }

    /// Single component at `t`.
    pub fn eval_component(&self, t: T, c: usize) -> Result<T, IvpError<T>> {
        let seg = self.locate(t)?;
        let theta = (t - seg.t0) / seg.h;
        Ok(seg.eval(c, theta, 0))
    }

    /// `order`-th time derivative of the interpolant at `t` (`order <= 3`).
    ///
    /// The interpolant is locally of order five; each differentiation costs
    /// one order of accuracy, so high orders are best treated as estimates.
    pub fn derivative(&self, t: T, order: usize) -> Result<Vec<T>, IvpError<T>> {
        assert!(order <= 3, "interpolant exposes derivatives up to order 3");
        let seg = self.locate(t)?;
        let theta = (t - seg.t0) / seg.h;
        Ok((0..self.dim).map(|c| seg.eval(c, theta, order)).collect())
    }

    /// State at the end of the covered span.
    pub fn final_state(&self) -> Vec<T> {
        self.eval(self.t_end).expect("t_end is inside the span")
    }
}
