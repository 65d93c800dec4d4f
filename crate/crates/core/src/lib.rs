//! Numerical laboratory for a one-parameter family of integrable mechanical
//! systems on the two-sphere.
//!
//! The family is indexed by a real parameter `tau`. Each member is described
//! by one scalar profile function, available in three equivalent forms: the
//! autonomous log-radius form solved by [`family::solve_x`], the radial form
//! exposed through [`family::UView`], and the pole-regular form solved by
//! [`family::solve_g`]. On top of the profile sit
//!
//! * a phase-portrait module ([`portrait`]) that classifies the fate of the
//!   associated planar orbit,
//! * a bisection search ([`threshold`]) for the critical parameter beyond
//!   which the family ceases to exist,
//! * the mechanical layer ([`sphere`]): Hamiltonian, cubic first integral,
//!   Poisson-bracket verification, conservative flow, Gaussian curvature and
//!   pole regularity reports.
//!
//! All numerics are generic over the scalar type through [`real::Real`];
//! the aliases at the crate root fix `f64`, the precision the command-line
//! tool and the acceptance suite use.

pub mod ivp;
pub mod real;

pub mod family;
pub mod portrait;
pub mod sphere;
pub mod threshold;

/// Double-precision instantiations of the core types.
pub type IntegratorConfig64 = ivp::IntegratorConfig<f64>;
pub type DenseSolution64 = ivp::DenseSolution<f64>;
pub type Tau64 = family::Tau<f64>;
pub type XSolution64 = family::XSolution<f64>;
pub type GSolution64 = family::GSolution<f64>;
pub type AsymptoticCoeffs64 = family::AsymptoticCoeffs<f64>;
pub type PhaseState64 = sphere::PhaseState<f64>;
pub type ThetaJet64 = sphere::ThetaJet<f64>;
pub type ThresholdResult64 = threshold::ThresholdResult<f64>;
