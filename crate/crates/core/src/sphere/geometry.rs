//! Geometry of the surface behind a member: curvature and pole regularity.

use serde::Serialize;

use super::{potential_factor, theta_jet, EnergyBreakdown, SphereError};
use crate::family::{asymptotic_coeffs, solve_x, Extrapolated, Tau, XSolution, S_MIN_DEFAULT};
use crate::ivp::IntegratorConfig;
use crate::real::Real;

/// Decades sampled toward each pole for the potential decay check.
const POTENTIAL_DECADES: u32 = 3;
/// Curvature samples across `r` in `[1e-3, 1e3]`.
const CURVATURE_POINTS: usize = 25;
/// Profile span covering all radii the report touches.
const REPORT_SPAN: f64 = 7.5;

/// Gaussian curvature of the kinetic metric at radius `r`, computed from the
/// four-jet of the radial profile:
///
/// ```text
/// K(r) = r^4 (u' u''' - u''^2) + r^3 u' u''
/// ```
pub fn gaussian_curvature<T: Real>(sol: &XSolution<T>, r: T) -> Result<T, SphereError<T>> {
    let j = sol.radial().jet(r)?;
    let r2 = r * r;
    let r3 = r2 * r;
    let r4 = r2 * r2;
    Ok(r4 * (j.du * j.d3u - j.d2u * j.d2u) + r3 * j.du * j.d2u)
}

/// Energy of a state given in polar coordinates `(r, phi)` with conjugate
/// momenta `(p_r, p_phi)`. Matches [`super::hamiltonian`] in the log-radius
/// chart under `y = log r`, `p_y = r p_r`.
pub fn polar_energy<T: Real>(
    r: T,
    phi: T,
    p_r: T,
    p_phi: T,
    sol: &XSolution<T>,
) -> Result<EnergyBreakdown<T>, SphereError<T>> {
    let j = sol.radial().jet(r)?;
    let r2 = r * r;
    let du2 = j.du * j.du;
    let kinetic = r2 * r2 * du2 * p_r * p_r + r2 * du2 * p_phi * p_phi;
    let potential = -(r2 * du2 * (r2 * j.d2u + r * j.du - j.u)) * phi.cos();
    Ok(EnergyBreakdown::new(kinetic, potential))
}

/// Behavior of a member's surface at the two poles `r -> 0` and
/// `r -> infinity`.
///
/// `zeta0` and `xi0` are the extrapolated leading profile coefficients at the
/// far and near pole. The potential tables sample `V = -W(log r)` at
/// `phi = 0` one decade apart on each side; for a regular surface `|V|`
/// decays like `1/r` outward and like `r` inward, so each consecutive ratio
/// sits near `0.1`. Curvature is sampled across six decades of `r` to record
/// its range. The round member (`tau = 0`) has identically zero potential,
/// which turns its decay ratios into quotients of round-off noise.
#[derive(Clone, Debug, Serialize)]
pub struct PoleReport<T> {
    pub tau: T,
    pub zeta0: Extrapolated<T>,
    pub xi0: Extrapolated<T>,
    pub far_potential: Vec<(T, T)>,
    pub near_potential: Vec<(T, T)>,
    pub far_decay_ratios: Vec<T>,
    pub near_decay_ratios: Vec<T>,
    pub curvature: Vec<(T, T)>,
    pub max_abs_curvature: T,
    pub curvature_bounded: bool,
}

fn decay_ratios<T: Real>(table: &[(T, T)]) -> Vec<T> {
    table
        .windows(2)
        .map(|w| w[1].1.abs() / w[0].1.abs())
        .collect()
}

/// Assembles the pole regularity evidence for one member.
pub fn pole_report<T: Real>(
    tau: Tau<T>,
    config: &IntegratorConfig<T>,
) -> Result<PoleReport<T>, SphereError<T>> {
    let coeffs = asymptotic_coeffs(tau, T::lit(S_MIN_DEFAULT), config)?;
    let sol = solve_x(tau, T::lit(REPORT_SPAN), config)?;

    let potential_at = |r: T| -> Result<(T, T), SphereError<T>> {
        let jet = theta_jet(&sol, r.ln())?;
        Ok((r, -potential_factor(&jet)))
    };

    let mut far_potential = Vec::new();
    let mut near_potential = Vec::new();
    for k in 1..=POTENTIAL_DECADES {
        let decade = T::lit(10f64.powi(k as i32));
        far_potential.push(potential_at(decade)?);
        near_potential.push(potential_at(decade.recip())?);
    }

    let mut curvature = Vec::with_capacity(CURVATURE_POINTS);
    let mut max_abs_curvature = T::zero();
    let mut curvature_bounded = true;
    for i in 0..CURVATURE_POINTS {
        let e = -3.0 + 6.0 * i as f64 / (CURVATURE_POINTS - 1) as f64;
        let r = T::lit(10f64.powf(e));
        let k = gaussian_curvature(&sol, r)?;
        curvature_bounded &= k.is_finite();
        max_abs_curvature = max_abs_curvature.max(k.abs());
        curvature.push((r, k));
    }

    Ok(PoleReport {
        tau: tau.value(),
        zeta0: coeffs.zeta0(),
        xi0: coeffs.xi0(),
        far_decay_ratios: decay_ratios(&far_potential),
        near_decay_ratios: decay_ratios(&near_potential),
        far_potential,
        near_potential,
        curvature,
        max_abs_curvature,
        curvature_bounded,
    })
}
