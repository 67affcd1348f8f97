//! Bound/unbound classification of an initial state.

use serde::Serialize;

use crate::dynamics::system::{angular_momentum, PhaseState, SystemSpec};
use crate::dynamics::trajectory::{integrate_with, IntegrationOptions};
use crate::error::{Error, UnboundKind};
use crate::models::kinetic::norm_sq;
use crate::models::Asymptote;
use crate::radial::turning_points;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundedness {
    Bound,
    Unbound,
    Undetermined,
}

/// Escape radius of the fallback integration, in units of the initial scale.
const ESCAPE_FACTOR: f64 = 1e3;

/// Classifies the motion starting at `initial` from the asymptote of the
/// potential, the turning points of central motion, and as a last resort a
/// long integration watched for escape.
pub fn classify_boundedness(system: &SystemSpec, initial: &PhaseState) -> Boundedness {
    let asymptote = system.potential().asymptote();
    if let Asymptote::Confining(_) = asymptote {
        return Boundedness::Bound;
    }
    let Ok(e) = system.energy(initial) else {
        return Boundedness::Undetermined;
    };
    let rest = system.kinetic().rest_value();
    match asymptote {
        Asymptote::Finite(v) if e < v + rest => return Boundedness::Bound,
        Asymptote::Finite(_) => return Boundedness::Unbound,
        _ => {}
    }
    if system.is_central() {
        let l = match system.dim() {
            1 => Ok(0.0),
            _ => angular_momentum(initial).map(|j| norm_sq(&j).sqrt()),
        };
        if let Ok(l) = l {
            match turning_points(system, e, l) {
                Ok(_) => return Boundedness::Bound,
                Err(Error::Unbound {
                    kind: UnboundKind::Escapes,
                    ..
                }) => return Boundedness::Unbound,
                _ => {}
            }
        }
    }
    escape_heuristic(system, initial)
}

fn escape_heuristic(system: &SystemSpec, initial: &PhaseState) -> Boundedness {
    let rs = norm_sq(&initial.r).sqrt().max(1.0);
    let speed = system
        .kinetic()
        .velocity(&initial.p)
        .map(|v| norm_sq(&v).sqrt())
        .unwrap_or(0.0)
        .max(1.0);
    let options = IntegrationOptions {
        escape_factor: Some(ESCAPE_FACTOR),
        max_steps: 200_000,
        drift_budget: Some(f64::INFINITY),
        ..IntegrationOptions::with_tol(1e-8)
    };
    let t_end = initial.t + 1e4 * rs / speed;
    match integrate_with(system, initial, t_end, &options) {
        Ok(tr) if tr.escaped() => Boundedness::Unbound,
        _ => Boundedness::Undetermined,
    }
}
