//! Turning points of bound central orbits.

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result, UnboundKind};
use crate::roots;

/// Points per decade of the coarse search grid.
const GRID_DENSITY: usize = 24;
const GRID_MIN: f64 = 1e-9;
const GRID_MAX: f64 = 1e9;

/// A function with the sign of `p_r^2` at distance `x` from the origin:
/// `K^{-1}(E - V) - L^2/x^2` where the kinetic energy is admissible,
/// and the (negative) kinetic deficit below the rest value otherwise.
pub(crate) fn radial_sign_fn(system: &SystemSpec, e: f64, l: f64, x: f64) -> f64 {
    let excess = e - system.axis_potential(x) - system.kinetic().rest_value();
    if excess.is_nan() {
        return f64::NAN;
    }
    let centrifugal = if l == 0.0 { 0.0 } else { l * l / (x * x) };
    if excess == f64::INFINITY {
        return f64::INFINITY;
    }
    if excess < 0.0 {
        return excess - centrifugal;
    }
    match system.kinetic().inverse_above_rest(excess) {
        Ok(p2) => p2 - centrifugal,
        Err(_) => f64::NAN,
    }
}

fn grid(line: bool) -> Vec<f64> {
    let decades = (GRID_MAX / GRID_MIN).log10();
    let n = (decades * GRID_DENSITY as f64).round() as usize;
    let pos: Vec<f64> = (0..=n)
        .map(|i| GRID_MIN * 10f64.powf(decades * i as f64 / n as f64))
        .collect();
    if !line {
        return pos;
    }
    let mut all: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    all.push(0.0);
    all.extend(pos);
    all
}

/// `(r_minus, r_plus)` for `L > 0`; for `L = 0` the turning points
/// `(x_minus, x_plus)` on the line through the origin along the first axis.
pub fn turning_points(system: &SystemSpec, e: f64, l: f64) -> Result<(f64, f64)> {
    if !system.is_central() {
        return Err(Error::Unsupported("turning points need a central potential".into()));
    }
    if !(l >= 0.0) || !l.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "angular momentum must be >= 0, got {l}"
        )));
    }
    if l > 0.0 && system.dim() == 1 {
        return Err(Error::Dimension("angular momentum needs D >= 2".into()));
    }
    if !e.is_finite() {
        return Err(Error::InvalidParameter(format!("energy must be finite, got {e}")));
    }
    let line = l == 0.0;
    let xs = grid(line);
    let f = |x: f64| radial_sign_fn(system, e, l, x);
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();

    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut intervals: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    for (i, v) in vals.iter().enumerate() {
        let positive = *v > 0.0;
        match (positive, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                intervals.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        intervals.push((s, vals.len() - 1));
    }

    if intervals.is_empty() {
        // a well narrower than the grid spacing: refine around the maximum
        let (imax, _) =
            vals.iter()
                .enumerate()
                .filter(|(_, v)| v.is_finite())
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc },
                );
        let a = xs[imax.saturating_sub(1)];
        let b = xs[(imax + 1).min(xs.len() - 1)];
        let (xm, fm) = roots::golden_max(f, a, b, 200);
        if !(fm > 0.0) {
            return Err(Error::unbound(
                UnboundKind::Forbidden,
                format!("no classically allowed region at E = {e}, L = {l}"),
            ));
        }
        let lo = roots::brent(f, a, xm, 0.0, 4.0 * f64::EPSILON, 200)?;
        let hi = roots::brent(f, xm, b, 0.0, 4.0 * f64::EPSILON, 200)?;
        return Ok((lo, hi));
    }

    let last = vals.len() - 1;
    for &(s, t) in &intervals {
        if t == last || (line && s == 0) {
            return Err(Error::unbound(
                UnboundKind::Escapes,
                format!("allowed region reaches |x| = {GRID_MAX:e} at E = {e}, L = {l}"),
            ));
        }
        if !line && s == 0 {
            return Err(Error::Singularity(format!(
                "allowed region reaches r = {GRID_MIN:e}: the orbit falls to the centre at E = {e}, L = {l}"
            )));
        }
        brackets.push((xs[s - 1], xs[s]));
        brackets.push((xs[t], xs[t + 1]));
    }
    if intervals.len() > 1 {
        return Err(Error::AmbiguousWell { brackets });
    }
    let (s, t) = intervals[0];
    if line && system.potential().singular_at_origin() && xs[s] <= 0.0 && xs[t] >= 0.0 {
        return Err(Error::Singularity(format!(
            "the line orbit at E = {e} passes through the singular origin"
        )));
    }
    let lo = roots::brent_with_values(f, xs[s - 1], vals[s - 1], xs[s], vals[s], 0.0, 4.0 * f64::EPSILON, 200)?;
    let hi = roots::brent_with_values(f, xs[t], vals[t], xs[t + 1], vals[t + 1], 0.0, 4.0 * f64::EPSILON, 200)?;
    Ok((lo, hi))
}
