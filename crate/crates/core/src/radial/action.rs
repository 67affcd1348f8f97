//! Energy of the orbit carrying a given action.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result, UnboundKind};
use crate::radial::orbit::{OrbitGeometry, RadialOrbit};
use crate::roots;

const MAX_ITER: usize = 200;
const ACTION_RTOL: f64 = 1e-13;

/// Which action is held fixed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionConvention {
    /// `I = I_r + L Phi / 2pi`.
    #[default]
    Total,
    /// `I_r = (1/pi) int p_r dr`.
    Radial,
}

impl ActionConvention {
    pub fn of(self, g: &OrbitGeometry) -> f64 {
        match self {
            ActionConvention::Total => g.action,
            ActionConvention::Radial => g.radial_action,
        }
    }

    /// `dI/dE` as far as it follows from the period alone; exact except for
    /// the `L dPhi/dE` part of the total action.
    fn slope(self, g: &OrbitGeometry) -> f64 {
        match self {
            ActionConvention::Total if g.angular_momentum == 0.0 => g.circuit_time / (2.0 * PI),
            _ => g.tau_r / (2.0 * PI),
        }
    }
}

/// Smallest energy with an allowed region: the minimum of the effective
/// potential `V(r) + K(L^2/r^2)` along the first axis.
pub fn effective_minimum(system: &SystemSpec, l: f64) -> Result<f64> {
    let kin = system.kinetic();
    let u = |x: f64| {
        let v = system.axis_potential(x);
        if l == 0.0 {
            v + kin.rest_value()
        } else {
            v + kin.kernel().value(l * l / (x * x))
        }
    };
    let pos: Vec<f64> = (0..=432).map(|i| 1e-9 * 10f64.powf(i as f64 / 24.0)).collect();
    let xs: Vec<f64> = if l == 0.0 {
        pos.iter()
            .rev()
            .map(|x| -x)
            .chain(std::iter::once(0.0))
            .chain(pos.iter().copied())
            .collect()
    } else {
        pos
    };
    let (imin, umin) = xs
        .iter()
        .map(|&x| u(x))
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    if umin == f64::NEG_INFINITY {
        return Err(Error::Singularity(format!(
            "effective potential unbounded below at L = {l}"
        )));
    }
    if !umin.is_finite() {
        return Err(Error::Numerical(
            "effective potential is not finite on the search grid".into(),
        ));
    }
    let a = xs[imin.saturating_sub(1)];
    let b = xs[(imin + 1).min(xs.len() - 1)];
    let (_, neg) = roots::golden_max(|x| -u(x), a, b, 200);
    Ok((-neg).min(umin))
}

enum Probe {
    Below,
    Orbit(Box<RadialOrbit>, f64),
    Above,
}

fn probe(system: &SystemSpec, e: f64, l: f64, conv: ActionConvention) -> Result<Probe> {
    match RadialOrbit::new(system, e, l) {
        Ok(o) => {
            let i = conv.of(o.geometry());
            Ok(Probe::Orbit(Box::new(o), i))
        }
        Err(Error::Unbound {
            kind: UnboundKind::Forbidden,
            ..
        }) => Ok(Probe::Below),
        Err(Error::Unbound {
            kind: UnboundKind::Escapes,
            ..
        }) => Ok(Probe::Above),
        Err(e) => Err(e),
    }
}

/// The bound orbit at angular momentum `l` whose total action equals `action`.
pub fn energy_at_action(system: &SystemSpec, action: f64, l: f64, bracket: Option<(f64, f64)>) -> Result<RadialOrbit> {
    energy_at_action_with(system, action, l, bracket, ActionConvention::Total)
}

/// Safeguarded Newton iteration on `I(E) = action` using `dI/dE` from the
/// period, falling back to bisection of the sign bracket.
pub fn energy_at_action_with(
    system: &SystemSpec,
    action: f64,
    l: f64,
    bracket: Option<(f64, f64)>,
    conv: ActionConvention,
) -> Result<RadialOrbit> {
    if !(action > 0.0) || !action.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "action must be positive, got {action}"
        )));
    }
    let mut best: Option<(Box<RadialOrbit>, f64)> = None;
    let residual = |i: f64| i - action;
    let done = |i: f64| (i - action).abs() <= ACTION_RTOL * action;

    // lo: I(lo) < action; hi: I(hi) >= action or the orbit escapes
    let (mut lo, mut hi) = match bracket {
        Some((a, b)) => {
            if !(a < b) {
                return Err(Error::Bracket(format!("empty energy bracket [{a}, {b}]")));
            }
            match probe(system, a, l, conv)? {
                Probe::Orbit(_, i) if residual(i) > 0.0 => {
                    return Err(Error::Bracket(format!(
                        "action {i} at E = {a} already exceeds target {action}"
                    )))
                }
                Probe::Orbit(o, i) => best = Some((o, i)),
                Probe::Below => {}
                Probe::Above => return Err(Error::Bracket(format!("orbit at lower bracket E = {a} is unbound"))),
            }
            match probe(system, b, l, conv)? {
                Probe::Orbit(o, i) if residual(i) >= 0.0 => best = Some((o, i)),
                Probe::Above => {}
                _ => {
                    return Err(Error::Bracket(format!(
                        "target action {action} not reached below E = {b}"
                    )))
                }
            }
            (a, b)
        }
        None => {
            let lo = effective_minimum(system, l)?;
            let mut step = lo.abs().max(1.0);
            let mut lo = lo;
            let mut hi = None;
            for _ in 0..MAX_ITER {
                let e = lo + step;
                match probe(system, e, l, conv)? {
                    Probe::Orbit(o, i) => {
                        if residual(i) >= 0.0 {
                            hi = Some(e);
                            best = Some((o, i));
                            break;
                        }
                        lo = e;
                        best = Some((o, i));
                        step *= 4.0;
                    }
                    Probe::Below => {
                        lo = e;
                        step *= 4.0;
                    }
                    Probe::Above => {
                        hi = Some(e);
                        break;
                    }
                }
                if !e.is_finite() {
                    break;
                }
            }
            let Some(hi) = hi else {
                return Err(Error::Bracket(format!("no energy reaches action {action}")));
            };
            (lo, hi)
        }
    };
    if let Some((o, i)) = &best {
        if done(*i) {
            return Ok(*o.clone());
        }
    }

    let mut hi_bound = matches!(best.as_ref(), Some((o, _)) if o.geometry().energy == hi);
    for _ in 0..MAX_ITER {
        let newton = best.as_ref().and_then(|(o, i)| {
            let s = conv.slope(o.geometry());
            let e = o.geometry().energy - residual(*i) / s;
            (s > 0.0 && e > lo && e < hi).then_some(e)
        });
        let e = newton.unwrap_or(0.5 * (lo + hi));
        if !(e > lo && e < hi) {
            break;
        }
        match probe(system, e, l, conv)? {
            Probe::Below => lo = e,
            Probe::Above => {
                hi = e;
                hi_bound = false;
            }
            Probe::Orbit(o, i) => {
                if done(i) {
                    return Ok(*o);
                }
                if residual(i) < 0.0 {
                    lo = e;
                } else {
                    hi = e;
                    hi_bound = true;
                }
                // discard a Newton guess that did not shrink the error
                let improved = best
                    .as_ref()
                    .is_none_or(|(_, bi)| residual(i).abs() < residual(*bi).abs());
                if improved || newton.is_none() {
                    best = Some((o, i));
                } else {
                    best = None;
                }
            }
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    match best {
        Some((o, i)) if (i - action).abs() <= 1e-9 * action => Ok(*o),
        _ if !hi_bound => Err(Error::Bracket(format!(
            "target action {action} lies beyond the bound orbits (bracket [{lo}, {hi}])"
        ))),
        _ => Err(Error::Numerical(format!(
            "energy for action {action} did not converge in [{lo}, {hi}]"
        ))),
    }
}
