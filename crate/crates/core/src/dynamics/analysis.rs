//! Periods, time averages and actions measured on trajectories.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::system::PhaseState;
use crate::dynamics::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::models::kinetic::norm_sq;
use crate::quadrature::GaussLegendre;
use crate::roots;

/// Subdivisions of each step scanned for sign changes.
const SCAN_POINTS: usize = 4;

/// Times in `(t_start, t_end]` where `g` changes sign in direction `dir`,
/// refined on the dense output.
fn crossings<G>(traj: &Trajectory, mut g: G, dir: f64, t_start: f64) -> Result<Vec<f64>>
where
    G: FnMut(&PhaseState) -> f64,
{
    let mut state = traj.initial().clone();
    let mut eval = |t: f64, state: &mut PhaseState| -> f64 {
        match traj.state_into(t, state) {
            Ok(()) => g(state),
            Err(_) => f64::NAN,
        }
    };
    let mut out = Vec::new();
    let mut prev_t = t_start;
    let mut prev_g = eval(t_start, &mut state);
    for seg in traj.segments() {
        if seg.t1() <= t_start {
            continue;
        }
        for k in 1..=SCAN_POINTS {
            let t = (seg.t0 + seg.h * k as f64 / SCAN_POINTS as f64).min(traj.end());
            if t <= prev_t {
                continue;
            }
            let gt = eval(t, &mut state);
            if prev_g * dir < 0.0 && gt * dir >= 0.0 {
                let mut s2 = state.clone();
                let root = roots::brent_with_values(
                    |x| eval(x, &mut s2),
                    prev_t,
                    prev_g,
                    t,
                    gt,
                    0.0,
                    4.0 * f64::EPSILON,
                    200,
                )?;
                if root > t_start {
                    out.push(root);
                }
            }
            prev_t = t;
            prev_g = gt;
        }
    }
    Ok(out)
}

/// Period of the motion recorded in `traj`.
///
/// In one dimension the period comes from successive same-direction passes
/// through the initial point and is verified by phase-space return to
/// `tol` relative to the orbit size. For central systems in two or three
/// dimensions it is the radial period between successive minima of `|r|`.
pub fn find_period(traj: &Trajectory, tol: f64) -> Result<f64> {
    if traj.escaped() {
        return Err(Error::NotPeriodic("trajectory escaped".into()));
    }
    let sys = traj.system();
    let d = sys.dim();
    if d >= 2 && sys.potential().is_central() {
        return radial_period(traj);
    }
    let (tau, _) = section_return(traj, tol, d == 1)?;
    Ok(tau)
}

/// Largest `|r|` and `|p|` reached, used to normalize distances.
fn amplitudes(traj: &Trajectory) -> (f64, f64) {
    let mut rmax: f64 = 0.0;
    let mut pmax: f64 = 0.0;
    for s in traj.samples() {
        rmax = rmax.max(norm_sq(&s.r).sqrt());
        pmax = pmax.max(norm_sq(&s.p).sqrt());
    }
    (rmax.max(f64::MIN_POSITIVE), pmax.max(f64::MIN_POSITIVE))
}

fn phase_distance(a: &PhaseState, b: &PhaseState, rs: f64, ps: f64) -> f64 {
    let dr: f64 = a.r.iter().zip(&b.r).map(|(x, y)| ((x - y) / rs).powi(2)).sum();
    let dp: f64 = a.p.iter().zip(&b.p).map(|(x, y)| ((x - y) / ps).powi(2)).sum();
    (dr + dp).sqrt()
}

/// Poincare section through the initial point on the first coordinate
/// pair. With `average` the period is the mean spacing of all returns,
/// otherwise the first return whose phase-space distance is within `tol`.
fn section_return(traj: &Trajectory, tol: f64, average: bool) -> Result<(f64, usize)> {
    let sys = traj.system();
    let s0 = traj.initial().clone();
    let (rs, ps) = amplitudes(traj);
    let mut f0 = vec![0.0; 2 * sys.dim()];
    sys.rhs(&s0.packed(), &mut f0)?;
    let d = sys.dim();
    let rate_x = f0[0] / rs;
    let rate_p = f0[d] / ps;
    if rate_x == 0.0 && rate_p == 0.0 {
        return Err(Error::NotPeriodic("initial state is an equilibrium".into()));
    }
    let use_x = rate_x.abs() >= rate_p.abs();
    let (x0, p0) = (s0.r[0], s0.p[0]);
    let dir = if use_x { rate_x.signum() } else { rate_p.signum() };
    let times = if use_x {
        crossings(traj, |s| s.r[0] - x0, dir, s0.t)?
    } else {
        crossings(traj, |s| s.p[0] - p0, dir, s0.t)?
    };
    if times.is_empty() {
        return Err(Error::NotPeriodic("no return to the initial section".into()));
    }
    for (k, &t) in times.iter().enumerate() {
        let s = traj.state_at(t)?;
        if phase_distance(&s, &s0, rs, ps) <= tol {
            let tau = if average {
                let n = times.len();
                (times[n - 1] - s0.t) / n as f64
            } else {
                t - s0.t
            };
            if average {
                let back = traj.state_at(s0.t + tau)?;
                let err = phase_distance(&back, &s0, rs, ps);
                if err > tol {
                    return Err(Error::NotPeriodic(format!(
                        "state at t0 + tau differs by {err:e} (tolerance {tol:e})"
                    )));
                }
            }
            return Ok((tau, k + 1));
        }
        if average {
            return Err(Error::NotPeriodic(format!(
                "first section return misses the initial state by {:e}",
                phase_distance(&s, &s0, rs, ps)
            )));
        }
    }
    Err(Error::NotPeriodic(
        "no phase-space recurrence within the trajectory".into(),
    ))
}

fn radial_period(traj: &Trajectory) -> Result<f64> {
    let (rmin, rmax) = traj
        .samples()
        .iter()
        .map(|s| norm_sq(&s.r).sqrt())
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    if rmax - rmin <= 1e-7 * rmax {
        return angular_period(traj);
    }
    let t0 = traj.start();
    let peri = crossings(traj, |s| s.r.iter().zip(&s.p).map(|(a, b)| a * b).sum(), 1.0, t0)?;
    if peri.len() < 2 {
        return Err(Error::NotPeriodic(format!(
            "found {} pericentre passages, need 2",
            peri.len()
        )));
    }
    Ok((peri[peri.len() - 1] - peri[0]) / (peri.len() - 1) as f64)
}

/// Time for the polar angle in the orbital plane to advance by `2 pi`, used
/// for circular orbits whose radius never varies.
fn angular_period(traj: &Trajectory) -> Result<f64> {
    let s0 = traj.initial();
    let r0 = s0.r.clone();
    let rn = norm_sq(&r0).sqrt();
    let p0n = norm_sq(&s0.p).sqrt();
    if rn == 0.0 || p0n == 0.0 {
        return Err(Error::NotPeriodic("degenerate circular orbit".into()));
    }
    // in-plane basis e1 = r0/|r0|, e2 = p0 minus its e1 component
    let e1: Vec<f64> = r0.iter().map(|x| x / rn).collect();
    let proj: f64 = s0.p.iter().zip(&e1).map(|(a, b)| a * b).sum();
    let mut e2: Vec<f64> = s0.p.iter().zip(&e1).map(|(p, e)| p - proj * e).collect();
    let n2 = norm_sq(&e2).sqrt();
    if n2 == 0.0 {
        return Err(Error::NotPeriodic("radial motion has no angular period".into()));
    }
    e2.iter_mut().for_each(|x| *x /= n2);
    // crossings of the e2 = 0 half-plane from below, moving forward
    let dot = |s: &PhaseState, e: &[f64]| s.r.iter().zip(e).map(|(a, b)| a * b).sum::<f64>();
    let all = crossings(traj, |s| dot(s, &e2), 1.0, s0.t)?;
    let returns: Vec<f64> = all
        .into_iter()
        .filter(|t| traj.state_at(*t).is_ok_and(|s| dot(&s, &e1) > 0.0))
        .collect();
    match returns.as_slice() {
        [] => Err(Error::NotPeriodic("orbit does not complete a revolution".into())),
        r => Ok((r[r.len() - 1] - s0.t) / r.len() as f64),
    }
}

/// Averaging window starting at the beginning of the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Window {
    OnePeriod { tau: f64 },
    LongWindow { length: f64 },
}

impl Window {
    pub fn length(&self) -> f64 {
        match *self {
            Window::OnePeriod { tau } => tau,
            Window::LongWindow { length } => length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageReport {
    pub value: f64,
    /// Quadrature refinement difference plus the integration tolerance and
    /// the recorded energy drift applied to the mean magnitude of the
    /// integrand.
    pub error: f64,
    pub window: Window,
    /// `|avg(length) - avg(length / 2)|` for long windows.
    pub convergence: Option<f64>,
}

struct Integral {
    value: f64,
    coarse: f64,
    magnitude: f64,
    /// The fine rule applied to 1.
    length: f64,
}

fn integrate_window<Q>(traj: &Trajectory, quantity: &mut Q, a: f64, b: f64) -> Result<Integral>
where
    Q: FnMut(&PhaseState) -> f64,
{
    thread_local! {
        static RULES: (GaussLegendre, GaussLegendre) = (GaussLegendre::new(6), GaussLegendre::new(12));
    }
    let mut state = traj.initial().clone();
    let mut fine = 0.0;
    let mut coarse = 0.0;
    let mut magnitude = 0.0;
    let mut length = 0.0;
    if b <= a {
        return Ok(Integral {
            value: 0.0,
            coarse: 0.0,
            magnitude: 0.0,
            length: 0.0,
        });
    }
    let segs = traj.segments();
    let mut idx = traj.segment_index(a);
    RULES.with(|(g6, g12)| -> Result<()> {
        while idx < segs.len() {
            let seg = &segs[idx];
            let lo = seg.t0.max(a);
            let hi = seg.t1().min(b);
            if hi > lo {
                let mut eval = |t: f64, state: &mut PhaseState| {
                    let mut y = [0.0; 6];
                    let n = seg.y0.len();
                    seg.eval_into(t, &mut y[..n]);
                    state.unpack_into(t, &y[..n]);
                    quantity(state)
                };
                let mut abs12 = 0.0;
                fine += g12.integrate(lo, hi, |t| {
                    let q = eval(t, &mut state);
                    abs12 += q.abs();
                    q
                });
                coarse += g6.integrate(lo, hi, |t| eval(t, &mut state));
                magnitude += abs12 / 12.0 * (hi - lo);
                length += g12.integrate(lo, hi, |_| 1.0);
            }
            if seg.t1() >= b {
                break;
            }
            idx += 1;
        }
        Ok(())
    })?;
    if !fine.is_finite() {
        return Err(Error::Numerical("non-finite time average".into()));
    }
    Ok(Integral {
        value: fine,
        coarse,
        magnitude,
        length,
    })
}

/// `(1/W) int q dt` over the window, integrated step by step on the dense
/// output with 6- and 12-point Gauss-Legendre rules.
pub fn time_average<Q>(traj: &Trajectory, mut quantity: Q, window: Window) -> Result<AverageReport>
where
    Q: FnMut(&PhaseState) -> f64,
{
    let a = traj.start();
    let w = window.length();
    if !(w > 0.0) {
        return Err(Error::Range {
            start: a,
            end: a + w,
            span_start: traj.start(),
            span_end: traj.end(),
        });
    }
    traj.check_window(a, a + w)?;
    let b = (a + w).min(traj.end());
    let full = integrate_window(traj, &mut quantity, a, b)?;
    let value = full.value / full.length;
    let error = (full.value - full.coarse).abs() / w + (traj.tol() + traj.energy_drift()) * full.magnitude / w;
    let convergence = match window {
        Window::OnePeriod { .. } => None,
        Window::LongWindow { .. } => {
            let half = integrate_window(traj, &mut quantity, a, a + 0.5 * w)?;
            Some((value - half.value / half.length).abs())
        }
    };
    Ok(AverageReport {
        value,
        error,
        window,
        convergence,
    })
}

/// `I = (1/2pi) int p . dr = (1/2pi) int 2 K'(p^2) p^2 dt` over the window.
pub fn action_along(traj: &Trajectory, window: Window) -> Result<f64> {
    let w = window.length();
    if w == 0.0 {
        return Ok(0.0);
    }
    let kin = traj.system().kinetic().clone();
    let avg = time_average(traj, |s| kin.virial(&s.p), window)?;
    Ok(avg.value * w / (2.0 * PI))
}
