//! The conservative mechanical system on the two-sphere built from a family
//! member.
//!
//! In coordinates `(phi, y)` with `y = log r`, the member's profile `Theta`
//! (the log-radius solution `x` of the family) defines the Hamiltonian
//!
//! ```text
//! H = Theta'^2 (p_phi^2 + p_y^2) - Theta'^2 (Theta'' - Theta) cos phi
//! ```
//!
//! and the cubic-in-momenta function
//!
//! ```text
//! F = p_phi^3 + (3/2) (Theta cos phi p_phi - Theta' sin phi p_y)
//! ```
//!
//! The profile equation is exactly the condition making `{F, H}` vanish, so
//! `F` is a first integral of the flow. This module evaluates both functions
//! and their canonical Poisson bracket from analytic partial derivatives,
//! exposes the two cancellation pieces the bracket splits into, integrates
//! the flow while monitoring conservation ([`hamiltonian_flow`]), and reports
//! the geometry: Gaussian curvature of the kinetic metric and regularity at
//! the two poles ([`gaussian_curvature`], [`pole_report`]).

mod flow;
mod geometry;
#[cfg(test)]
mod tests;

pub use flow::{hamiltonian_flow, ConservationReport, FlowSample};
pub use geometry::{gaussian_curvature, polar_energy, pole_report, PoleReport};

use crate::family::{FamilyError, XSolution};
use crate::real::Real;
use rand::{RngCore, SeedableRng};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SphereError<T: Real> {
    #[error("flow left the extendable profile domain near y = {y}")]
    DomainExceeded { y: T },
    #[error(transparent)]
    Family(#[from] FamilyError<T>),
}

/// Canonical state in the log-radius chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseState<T> {
    pub phi: T,
    pub y: T,
    pub p_phi: T,
    pub p_y: T,
}

impl<T: Real> PhaseState<T> {
    pub fn new(phi: T, y: T, p_phi: T, p_y: T) -> Self {
        Self { phi, y, p_phi, p_y }
    }
}

/// Profile jet `(Theta, Theta', Theta'', Theta''')` at one `y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaJet<T> {
    pub theta: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

impl<T: Real> ThetaJet<T> {
    /// Magnitude scale of the closure combination, for relative residuals.
    pub fn magnitude_scale(&self) -> T {
        T::one()
            + (self.d1 * self.d3).abs()
            + self.theta * self.theta
            + (self.theta * self.d2).abs()
            + self.d1 * self.d1
            + T::two() * self.d2 * self.d2
    }
}

/// Profile jet at `y`, negative side served through the member's odd
/// symmetry.
pub fn theta_jet<T: Real>(sol: &XSolution<T>, y: T) -> Result<ThetaJet<T>, SphereError<T>> {
    let [theta, d1, d2, d3] = sol.eval_with_third(y)?;
    Ok(ThetaJet { theta, d1, d2, d3 })
}

/// The combination `Theta' Theta''' - Theta^2 - Theta'' Theta - Theta'^2 +
/// 2 Theta''^2`, identically zero along solutions of the profile equation.
/// Its vanishing is exactly what shuts down the one non-cancelling term of
/// `{F, H}`.
pub fn identity_residual<T: Real>(jet: &ThetaJet<T>) -> T {
    jet.d1 * jet.d3 - jet.theta * jet.theta - jet.d2 * jet.theta - jet.d1 * jet.d1
        + T::two() * jet.d2 * jet.d2
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyBreakdown<T> {
    pub kinetic: T,
    pub potential: T,
    pub total: T,
}

impl<T: Real> EnergyBreakdown<T> {
    pub fn new(kinetic: T, potential: T) -> Self {
        Self {
            kinetic,
            potential,
            total: kinetic + potential,
        }
    }
}

/// Potential factor `W(y) = Theta'^2 (Theta'' - Theta)`; the potential is
/// `-W(y) cos phi`.
pub fn potential_factor<T: Real>(jet: &ThetaJet<T>) -> T {
    jet.d1 * jet.d1 * (jet.d2 - jet.theta)
}

/// `dW/dy`, needed by the force and the bracket.
fn potential_factor_slope<T: Real>(jet: &ThetaJet<T>) -> T {
    T::two() * jet.d1 * jet.d2 * (jet.d2 - jet.theta) + jet.d1 * jet.d1 * (jet.d3 - jet.d1)
}

/// Energy of a state, split into kinetic and potential parts.
pub fn hamiltonian<T: Real>(state: &PhaseState<T>, jet: &ThetaJet<T>) -> EnergyBreakdown<T> {
    let d1sq = jet.d1 * jet.d1;
    let kinetic = d1sq * (state.p_phi * state.p_phi + state.p_y * state.p_y);
    let potential = -potential_factor(jet) * state.phi.cos();
    EnergyBreakdown::new(kinetic, potential)
}

/// The linear-in-momenta part of the cubic integral.
pub fn linear_part<T: Real>(state: &PhaseState<T>, jet: &ThetaJet<T>) -> T {
    T::lit(1.5)
        * (jet.theta * state.phi.cos() * state.p_phi - jet.d1 * state.phi.sin() * state.p_y)
}

/// The cubic first integral `F`.
pub fn cubic_integral<T: Real>(state: &PhaseState<T>, jet: &ThetaJet<T>) -> T {
    state.p_phi * state.p_phi * state.p_phi + linear_part(state, jet)
}

/// Partial derivatives of a phase-space function at one state, ordered
/// `(phi, y, p_phi, p_y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Partials<T> {
    pub d_phi: T,
    pub d_y: T,
    pub d_p_phi: T,
    pub d_p_y: T,
}

impl<T: Real> Partials<T> {
    fn zero() -> Self {
        Self {
            d_phi: T::zero(),
            d_y: T::zero(),
            d_p_phi: T::zero(),
            d_p_y: T::zero(),
        }
    }
}

/// Canonical Poisson bracket of two functions given their partials, together
/// with the magnitude scale of its four constituent terms (one plus the sum
/// of their absolute values); `bracket / scale` is the honest relative
/// residual. `poisson_bracket(a, a)` is exactly zero for any `a`.
pub fn poisson_bracket<T: Real>(a: &Partials<T>, b: &Partials<T>) -> (T, T) {
    let terms = [
        a.d_phi * b.d_p_phi,
        -(a.d_p_phi * b.d_phi),
        a.d_y * b.d_p_y,
        -(a.d_p_y * b.d_y),
    ];
    let bracket = terms.iter().fold(T::zero(), |acc, &t| acc + t);
    let scale = terms.iter().fold(T::one(), |acc, &t| acc + t.abs());
    (bracket, scale)
}

/// Partials of the energy.
pub fn hamiltonian_partials<T: Real>(state: &PhaseState<T>, jet: &ThetaJet<T>) -> Partials<T> {
    let d1sq = jet.d1 * jet.d1;
    let p2 = state.p_phi * state.p_phi + state.p_y * state.p_y;
    Partials {
        d_phi: potential_factor(jet) * state.phi.sin(),
        d_y: T::two() * jet.d1 * jet.d2 * p2 - potential_factor_slope(jet) * state.phi.cos(),
        d_p_phi: T::two() * d1sq * state.p_phi,
        d_p_y: T::two() * d1sq * state.p_y,
    }
}

/// Partials of the cubic integral.
pub fn cubic_partials<T: Real>(state: &PhaseState<T>, jet: &ThetaJet<T>) -> Partials<T> {
    let mut p = linear_partials(state, jet);
    p.d_p_phi = T::lit(3.0) * state.p_phi * state.p_phi + p.d_p_phi;
    p
}

fn linear_partials<T: Real>(state: &PhaseState<T>, jet: &ThetaJet<T>) -> Partials<T> {
    let three_halves = T::lit(1.5);
    let (sin_phi, cos_phi) = (state.phi.sin(), state.phi.cos());
    Partials {
        d_phi: three_halves
            * (-jet.theta * sin_phi * state.p_phi - jet.d1 * cos_phi * state.p_y),
        d_y: three_halves * (jet.d1 * cos_phi * state.p_phi - jet.d2 * sin_phi * state.p_y),
        d_p_phi: three_halves * jet.theta * cos_phi,
        d_p_y: -three_halves * jet.d1 * sin_phi,
    }
}

fn kinetic_partials<T: Real>(state: &PhaseState<T>, jet: &ThetaJet<T>) -> Partials<T> {
    let d1sq = jet.d1 * jet.d1;
    let p2 = state.p_phi * state.p_phi + state.p_y * state.p_y;
    Partials {
        d_phi: T::zero(),
        d_y: T::two() * jet.d1 * jet.d2 * p2,
        d_p_phi: T::two() * d1sq * state.p_phi,
        d_p_y: T::two() * d1sq * state.p_y,
    }
}

fn potential_partials<T: Real>(state: &PhaseState<T>, jet: &ThetaJet<T>) -> Partials<T> {
    let mut p = Partials::zero();
    p.d_phi = potential_factor(jet) * state.phi.sin();
    p.d_y = -potential_factor_slope(jet) * state.phi.cos();
    p
}

/// Canonical Poisson bracket `{F, H}` assembled from analytic partial
/// derivatives, returned with its term scale.
pub fn poisson_bracket_fh<T: Real>(
    state: &PhaseState<T>,
    sol: &XSolution<T>,
) -> Result<(T, T), SphereError<T>> {
    let jet = theta_jet(sol, state.y)?;
    Ok(poisson_bracket(
        &cubic_partials(state, &jet),
        &hamiltonian_partials(state, &jet),
    ))
}

/// The two cancellation pieces of `{F, H}`:
///
/// * `{V, p_phi^3} + {K, E}`, which cancels algebraically for any jet;
/// * `{V, E}`, proportional to [`identity_residual`] and hence zero exactly
///   when the jet obeys the profile equation.
///
/// By antisymmetry their sum equals the negative of `{F, H}`.
pub fn bracket_pieces<T: Real>(
    state: &PhaseState<T>,
    sol: &XSolution<T>,
) -> Result<(T, T), SphereError<T>> {
    let jet = theta_jet(sol, state.y)?;
    let v = potential_partials(state, &jet);
    let e = linear_partials(state, &jet);
    let k = kinetic_partials(state, &jet);
    let mut p_cubed = Partials::zero();
    p_cubed.d_p_phi = T::lit(3.0) * state.p_phi * state.p_phi;

    let piece_cancelling = poisson_bracket(&v, &p_cubed).0 + poisson_bracket(&k, &e).0;
    let piece_residual = poisson_bracket(&v, &e).0;
    Ok((piece_cancelling, piece_residual))
}

/// Deterministic sample of states for sweep checks: `phi` uniform on
/// `[0, 2 pi)`, `y` and both momenta uniform on `[-1, 1]`. The same seed
/// yields the same states on every platform.
pub fn random_states<T: Real>(seed: u64, n: usize) -> Vec<PhaseState<T>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    // 53-bit mantissa mapping keeps the stream stable and exactly
    // reproducible as f64
    let mut unit = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (0..n)
        .map(|_| {
            let phi = 2.0 * std::f64::consts::PI * unit();
            let y = 2.0 * unit() - 1.0;
            let p_phi = 2.0 * unit() - 1.0;
            let p_y = 2.0 * unit() - 1.0;
            PhaseState::new(T::lit(phi), T::lit(y), T::lit(p_phi), T::lit(p_y))
        })
        .collect()
}
