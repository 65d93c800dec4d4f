//! Dormand–Prince 5(4) stepper with the classical quartic continuous
//! extension. Coefficients are the published ones; the test suite pins the
//! order of both the step and the interpolant numerically.

use super::solution::{DenseSolution, Segment, Termination};
use super::{Direction, Event, IntegratorConfig, IvpError};
use crate::real::Real;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// Fifth-order weights; also the last stage row (first-same-as-last).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Embedded fourth-order weights.
const BH: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
/// Weights of the fifth interpolation coefficient.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
/// Interpolation-time bisection width for event localization.

struct Arrays<T> {
    c: [T; 7],
    b: [T; 7],
    e: [T; 7],
    d: [T; 7],
}

fn arrays<T: Real>() -> Arrays<T> {
    let mut c = [T::zero(); 7];
    let mut b = [T::zero(); 7];
    let mut e = [T::zero(); 7];
    let mut d = [T::zero(); 7];
    for i in 0..7 {
        c[i] = T::lit(C[i]);
        b[i] = T::lit(B[i]);
        e[i] = T::lit(B[i] - BH[i]);
        d[i] = T::lit(D[i]);
    }
    Arrays { c, b, e, d }
}

fn all_finite<T: Real>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn sup_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Weighted RMS with per-component scale `atol + rtol*max(|y0|,|y1|)`.
fn error_norm<T: Real>(err: &[T], y0: &[T], y1: &[T], cfg: &IntegratorConfig<T>) -> T {
    let n = err.len();
    let mut acc = T::zero();
    for i in 0..n {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        acc = acc + r * r;
    }
    (acc / T::lit(n as f64)).sqrt()
}

/// Cheap starting-step heuristic: scale estimate from `y0`/`f0`, refined by a
/// single Euler probe.
fn initial_step<T: Real, F: FnMut(T, &[T], &mut [T])>(
    rhs: &mut F,
    t0: T,
    y0: &[T],
    f0: &[T],
    dir: T,
    span: T,
    cfg: &IntegratorConfig<T>,
) -> T {
    let n = y0.len();
    let weight = |v: &[T]| -> T {
        let mut acc = T::zero();
        for i in 0..n {
            let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs();
            let r = v[i] / sc;
            acc = acc + r * r;
        }
        (acc / T::lit(n as f64)).sqrt()
    };
    let d0 = weight(y0);
    let d1 = weight(f0);
    let tiny = T::lit(1e-5);
    let mut h0 = if d0 < tiny || d1 < tiny {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    h0 = h0.min(span.abs());

    let mut y1 = vec![T::zero(); n];
    for i in 0..n {
        y1[i] = y0[i] + h0 * dir * f0[i];
    }
    let mut f1 = vec![T::zero(); n];
    rhs(t0 + h0 * dir, &y1, &mut f1);
    let h1 = if all_finite(&f1) {
        let mut diff = vec![T::zero(); n];
        for i in 0..n {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = weight(&diff) / h0;
        let dm = d1.max(d2);
        if dm <= T::lit(1e-15) {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / dm).powf(T::lit(0.2))
        }
    } else {
        h0 * T::lit(1e-2)
    };
    (T::lit(100.0) * h0)
        .min(h1)
        .min(span.abs())
        .min(cfg.max_step)
        * dir
}

/// Converts the five interpolation vectors into power-basis coefficients of
/// the quartic in `theta`.
fn power_basis<T: Real>(r1: T, r2: T, r3: T, r4: T, r5: T) -> [T; 5] {
    [
        r1,
        r2 + r3,
        -r3 + r4 + r5,
        -r4 - T::two() * r5,
        r5,
    ]
}

fn crossed<T: Real>(g0: T, g1: T, direction: Direction) -> bool {
    if !g0.is_finite() || !g1.is_finite() {
        return false;
    }
    match direction {
        Direction::Rising => g0 < T::zero() && g1 >= T::zero(),
        Direction::Falling => g0 > T::zero() && g1 <= T::zero(),
        Direction::Any => {
            (g0 < T::zero() && g1 >= T::zero()) || (g0 > T::zero() && g1 <= T::zero())
        }
    }
}

pub(super) fn run<T, F>(
    mut rhs: F,
    t_span: (T, T),
    y0: &[T],
    cfg: &IntegratorConfig<T>,
    events: &[Event<T>],
) -> Result<DenseSolution<T>, IvpError<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
{
    cfg.validate()?;
    let (t0, t_end) = t_span;
    if !t0.is_finite() || !t_end.is_finite() || t0 == t_end {
        return Err(IvpError::BadSpan { t0, t1: t_end });
    }
    if y0.is_empty() || !all_finite(y0) {
        return Err(IvpError::NonFiniteInitial);
    }

    let n = y0.len();
    let tab = arrays::<T>();
    let dir = if t_end > t0 { T::one() } else { -T::one() };
    let span = t_end - t0;

    let mut n_rhs = 0usize;

    let mut k: Vec<Vec<T>> = vec![vec![T::zero(); n]; 7];
    let mut y = y0.to_vec();
    let mut t = t0;

    let mut k1 = vec![T::zero(); n];
    rhs(t, &y, &mut k1);
    n_rhs += 1;
    if !all_finite(&k1) {
        return Err(IvpError::NonFiniteRhs { t });
    }
    let mut h = initial_step(&mut rhs, t, &y, &k1, dir, span, cfg);
    n_rhs += 1;
    k[0].copy_from_slice(&k1);

    let mut guard_vals: Vec<T> = events.iter().map(|e| (e.guard)(t, &y)).collect();

    let mut sol = DenseSolution {
        dim: n,
        t_start: t0,
        t_end: t0,
        segments: Vec::new(),
        termination: Termination::ReachedEnd,
        n_steps: 0,
        n_rhs_evals: 0,
    };

    let mut y_stage = vec![T::zero(); n];
    let mut y_new = vec![T::zero(); n];
    let mut err = vec![T::zero(); n];
    let mut attempts = 0usize;

    'outer: loop {
        if attempts >= cfg.max_steps {
            sol.termination = Termination::StepLimitReached { t };
            break;
        }
        attempts += 1;

        // do not step past the far end
        let clamped = (t + h - t_end) * dir > T::zero();
        if clamped {
            h = t_end - t;
        }
        let h_floor = T::lit(16.0) * T::epsilon() * t.abs().max(T::one());

        // stages 2..=6
        let a_rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        let mut bad_stage = false;
        for (s, row) in a_rows.iter().enumerate() {
            for i in 0..n {
                let mut acc = T::zero();
                for (j, &a) in row.iter().enumerate() {
                    acc = acc + T::lit(a) * k[j][i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            rhs(t + tab.c[s + 1] * h, &y_stage, &mut k[s + 1]);
            n_rhs += 1;
            if !all_finite(&k[s + 1]) {
                bad_stage = true;
                break;
            }
        }
        // candidate y1 (row 7 equals the b-weights) and its derivative k7
        if !bad_stage {
            for i in 0..n {
                let mut acc = T::zero();
                for j in 0..6 {
                    acc = acc + tab.b[j] * k[j][i];
                }
                y_new[i] = y[i] + h * acc;
            }
            rhs(t + h, &y_new, &mut k[6]);
            n_rhs += 1;
            bad_stage = !all_finite(&k[6]) || !all_finite(&y_new);
        }
        if bad_stage {
            // shrink into the trouble spot; give up once steps degenerate
            if h.abs() <= h_floor {
                sol.n_rhs_evals = n_rhs;
                return Err(IvpError::NonFiniteRhs { t });
            }
            h = h * T::half();
            continue;
        }

        for i in 0..n {
            let mut acc = T::zero();
            for j in 0..7 {
                acc = acc + tab.e[j] * k[j][i];
            }
            err[i] = h * acc;
        }
        let en = error_norm(&err, &y, &y_new, cfg);

        if !(en <= T::one()) {
            if h.abs() <= h_floor {
                // tolerance is unreachable at the smallest representable step
                sol.n_rhs_evals = n_rhs;
                return Err(IvpError::StepUnderflow { t });
            }
            let fac = if en.is_finite() {
                (T::lit(SAFETY) * en.powf(-T::lit(0.2))).max(T::lit(FAC_MIN))
            } else {
                T::lit(FAC_MIN)
            };
            h = h * fac.min(T::one());
            continue;
        }

        // accept
        let t_new = if clamped { t_end } else { t + h };
        if t_new == t {
            sol.n_rhs_evals = n_rhs;
            return Err(IvpError::StepUnderflow { t });
        }
        let blow_up = sup_norm(&y_new) > cfg.blow_up_norm;

        // continuous extension
        let mut coef = Vec::with_capacity(n);
        for i in 0..n {
            let ydiff = y_new[i] - y[i];
            let bspl = h * k[0][i] - ydiff;
            let mut dsum = T::zero();
            for j in 0..7 {
                dsum = dsum + tab.d[j] * k[j][i];
            }
            coef.push(power_basis(
                y[i],
                ydiff,
                bspl,
                ydiff - h * k[6][i] - bspl,
                h * dsum,
            ));
        }
        sol.segments.push(Segment { t0: t, h, coef });
        sol.n_steps += 1;
        sol.t_end = t_new;

        // events, earliest crossing wins
        let mut fired: Option<(usize, T)> = None;
        for (idx, ev) in events.iter().enumerate() {
            let g_new = (ev.guard)(t_new, &y_new);
            if crossed(guard_vals[idx], g_new, ev.direction) {
                let seg = sol.segments.last().expect("just pushed");
                let t_star = bisect_event(seg, ev, guard_vals[idx], t, t_new, n);
                match fired {
                    Some((_, tf)) if (t_star - t) * dir >= (tf - t) * dir => {}
                    _ => fired = Some((idx, t_star)),
                }
            }
            guard_vals[idx] = g_new;
        }
        if let Some((index, t_star)) = fired {
            sol.t_end = t_star;
            sol.termination = Termination::EventFired { index, t: t_star };
            break 'outer;
        }

        if blow_up {
            sol.termination = Termination::BlowUp { t: t_new };
            break;
        }

        t = t_new;
        core::mem::swap(&mut y, &mut y_new);
        let (head, tail) = k.split_at_mut(6);
        head[0].copy_from_slice(&tail[0]); // first-same-as-last

        if t == t_end {
            sol.termination = Termination::ReachedEnd;
            break;
        }

        let fac = if en <= T::zero() {
            T::lit(FAC_MAX)
        } else {
            (T::lit(SAFETY) * en.powf(-T::lit(0.2)))
                .max(T::lit(FAC_MIN))
                .min(T::lit(FAC_MAX))
        };
        h = (h * fac).abs().min(cfg.max_step) * dir;
    }

    sol.n_rhs_evals = n_rhs;
    Ok(sol)
}

/// Localizes the first guard crossing inside one accepted step by bisection
/// on the continuous extension.
fn bisect_event<T: Real>(
    seg: &Segment<T>,
    ev: &Event<T>,
    g_left: T,
    t_left: T,
    t_right: T,
    n: usize,
) -> T {
    let mut ta = t_left;
    let mut tb = t_right;
    let mut ga = g_left;
    let mut state = vec![T::zero(); n];
    // bisect down to the float grid: fast crossings make the state far more
    // sensitive than any fixed time window
    for _ in 0..256 {
        let tm = (ta + tb) * T::half();
        if tm == ta || tm == tb {
            break;
        }
        let theta = (tm - seg.t0) / seg.h;
        for (c, out) in state.iter_mut().enumerate() {
            let a = &seg.coef[c];
            let mut acc = T::zero();
            for k in (0..5).rev() {
                acc = acc * theta + a[k];
            }
            *out = acc;
        }
        let gm = (ev.guard)(tm, &state);
        if crossed(ga, gm, ev.direction) {
            tb = tm;
        } else {
            ta = tm;
            ga = gm;
        }
    }
    // report the far side so the crossing predicate holds at the returned time
    tb
}
