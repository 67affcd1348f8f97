//! Radial quadratures over one bound orbit.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, Side, TanhSinh};
use crate::radial::turning::turning_points;

/// Nodes closer than this fraction of the local length scale to a turning
/// point get their kinetic energy from an integral of the force.
const ENDPOINT_ZONE: f64 = 1e-2;
const MIN_LEVEL: u32 = 3;
const MAX_LEVEL: u32 = 10;
const LEVEL_RTOL: f64 = 1e-14;

/// Period, precession and actions of a bound orbit at `(E, L)`.
///
/// For `L > 0`: `tau_r` is the radial period, `phi` the apsidal advance per
/// radial period, `radial_action = (1/pi) int p_r dr` and
/// `action = radial_action + L phi / 2pi`.
///
/// For `L = 0` the orbit is the segment `[r_minus, r_plus]` of the first
/// axis: `action = (1/pi) int |p| dx` over one traversal, `circuit_time` is
/// the full back-and-forth period and `tau_r = circuit_time / 2`,
/// `radial_action = action / 2`, `phi = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitGeometry {
    pub energy: f64,
    pub angular_momentum: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub tau_r: f64,
    pub phi: f64,
    pub radial_action: f64,
    pub action: f64,
    pub circuit_time: f64,
    /// Relative change of the quadratures between the last two levels.
    pub quadrature_error: f64,
}

/// Phase-space data at one quadrature node. `r` is signed on `L = 0` orbits.
#[derive(Debug, Clone, Copy)]
pub struct RadialPoint {
    pub r: f64,
    pub p2: f64,
    pub pr: f64,
}

impl RadialPoint {
    /// `(r, 0, ...)` in `dim` dimensions.
    pub fn position(&self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[0] = self.r;
        v
    }

    /// A momentum of magnitude `sqrt(p2)` along the first axis.
    pub fn momentum(&self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[0] = self.p2.sqrt();
        v
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    /// Tanh-sinh weight times `dt/dr`.
    time_weight: f64,
    /// Tanh-sinh weight alone.
    weight: f64,
    level: u32,
    point: RadialPoint,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    left_turn: bool,
    right_turn: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialAverage {
    pub value: f64,
    pub error: f64,
}

/// A bound orbit with its quadrature nodes cached for repeated averages.
#[derive(Debug, Clone)]
pub struct RadialOrbit {
    system: SystemSpec,
    geometry: OrbitGeometry,
    nodes: Vec<Node>,
    rule: TanhSinh,
    level: u32,
}

struct Evaluator<'a> {
    system: &'a SystemSpec,
    e: f64,
    l: f64,
    gl: GaussLegendre,
}

impl Evaluator<'_> {
    fn kinetic_excess(&self, x: f64) -> f64 {
        self.e - self.system.kinetic().rest_value() - self.system.axis_potential(x)
    }

    fn p2_direct(&self, x: f64) -> Option<f64> {
        let excess = self.kinetic_excess(x);
        if !(excess > 0.0) {
            return None;
        }
        self.system.kinetic().inverse_above_rest(excess).ok()
    }

    /// `int_0^d g(t + s u) ds` with a Gauss-Legendre rule, `u = +-1`.
    fn gl_from(&self, t: f64, u: f64, d: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let h = 0.5 * d;
        self.gl
            .nodes
            .iter()
            .zip(&self.gl.weights)
            .map(|(z, w)| w * g(t + u * h * (1.0 + z)))
            .sum::<f64>()
            * h
    }

    /// `p^2` and `p_r^2` at distance `d` inside the turning point `t`;
    /// `u = +1` when the allowed region lies above `t`.
    fn near_turning(&self, t: f64, u: f64, d: f64) -> Option<(f64, f64)> {
        let x = t + u * d;
        if self.l == 0.0 {
            // V(t) - V(x) = -u int V'
            let excess = -u * self.gl_from(t, u, d, |s| self.system.axis_force_slope(s));
            if !(excess > 0.0) {
                return None;
            }
            let p2 = self.system.kinetic().inverse_above_rest(excess).ok()?;
            return Some((p2, p2));
        }
        let l2 = self.l * self.l;
        let kernel = self.system.kinetic().kernel();
        let fprime = |s: f64| {
            let p2 = self.p2_direct(s).unwrap_or(0.0);
            -self.system.axis_force_slope(s) / kernel.slope(p2) + 2.0 * l2 / (s * s * s)
        };
        let pr2 = u * self.gl_from(t, u, d, fprime);
        if !(pr2 > 0.0) {
            return None;
        }
        Some((pr2 + l2 / (x * x), pr2))
    }

    fn point(&self, piece: &Piece, side: Side, gap: f64) -> Option<RadialPoint> {
        let half = 0.5 * (piece.b - piece.a);
        let d = half * gap;
        let (x, turning) = match side {
            Side::Left => (piece.a + d, piece.left_turn.then_some((piece.a, 1.0))),
            Side::Right => (piece.b - d, piece.right_turn.then_some((piece.b, -1.0))),
            Side::Center => (0.5 * (piece.a + piece.b), None),
        };
        let (p2, pr2) = match turning {
            Some((t, u)) if d < ENDPOINT_ZONE * endpoint_scale(half, t) => self.near_turning(t, u, d)?,
            _ => {
                let p2 = self.p2_direct(x)?;
                let pr2 = if self.l == 0.0 {
                    p2
                } else {
                    p2 - self.l * self.l / (x * x)
                };
                (p2, pr2)
            }
        };
        if !(pr2 > 0.0) {
            return None;
        }
        Some(RadialPoint {
            r: x,
            p2,
            pr: pr2.sqrt(),
        })
    }
}

/// Length over which the integrand near a turning point `t` stays smooth.
fn endpoint_scale(half: f64, t: f64) -> f64 {
    if t == 0.0 {
        half
    } else {
        half.min(t.abs())
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    time: f64,
    action: f64,
    angle: f64,
}

impl RadialOrbit {
    pub fn new(system: &SystemSpec, e: f64, l: f64) -> Result<Self> {
        Self::with_rule(system, e, l, TanhSinh::default())
    }

    /// Same as [`RadialOrbit::new`] with an explicit tanh-sinh rule.
    pub fn with_rule(system: &SystemSpec, e: f64, l: f64, rule: TanhSinh) -> Result<Self> {
        let (lo, hi) = turning_points(system, e, l)?;
        if !(hi > lo) {
            return Err(Error::Numerical(format!("degenerate orbit [{lo}, {hi}]")));
        }
        let mut pieces = vec![Piece {
            a: lo,
            b: hi,
            left_turn: true,
            right_turn: true,
        }];
        if l == 0.0 && lo < 0.0 && hi > 0.0 && !system.potential().smooth_at_origin() {
            pieces = vec![
                Piece {
                    a: lo,
                    b: 0.0,
                    left_turn: true,
                    right_turn: false,
                },
                Piece {
                    a: 0.0,
                    b: hi,
                    left_turn: false,
                    right_turn: true,
                },
            ];
        }
        let ev = Evaluator {
            system,
            e,
            l,
            gl: GaussLegendre::new(4),
        };
        let kernel = system.kinetic().kernel();

        let mut nodes = Vec::new();
        let mut totals = Sums::default();
        let mut prev: Option<Sums> = None;
        let mut level = 0;
        let mut rel_change = f64::INFINITY;
        loop {
            for piece in &pieces {
                let half = 0.5 * (piece.b - piece.a);
                for n in rule.level_nodes(level) {
                    let Some(pt) = ev.point(piece, n.side, n.gap) else {
                        continue;
                    };
                    let weight = n.jacobian * half;
                    let kp = kernel.slope(pt.p2);
                    let time_weight = weight / (2.0 * kp * pt.pr);
                    if !time_weight.is_finite() {
                        continue;
                    }
                    totals.time += time_weight;
                    totals.action += weight * pt.pr;
                    if l > 0.0 {
                        totals.angle += weight * l / (pt.r * pt.r * pt.pr);
                    }
                    nodes.push(Node {
                        time_weight,
                        weight,
                        level,
                        point: pt,
                    });
                }
            }
            let h = rule.step(level);
            let cur = Sums {
                time: totals.time * h,
                action: totals.action * h,
                angle: totals.angle * h,
            };
            if let Some(p) = prev {
                let rel = |a: f64, b: f64| {
                    if a == b {
                        0.0
                    } else {
                        (a - b).abs() / a.abs().max(b.abs())
                    }
                };
                rel_change = rel(cur.time, p.time)
                    .max(rel(cur.action, p.action))
                    .max(rel(cur.angle, p.angle));
                if level >= MIN_LEVEL && rel_change <= LEVEL_RTOL {
                    prev = Some(cur);
                    break;
                }
            }
            prev = Some(cur);
            if level == MAX_LEVEL {
                if rel_change > 1e-8 {
                    return Err(Error::Numerical(format!(
                        "radial quadrature did not converge at E = {e}, L = {l} (change {rel_change:e})"
                    )));
                }
                break;
            }
            level += 1;
        }
        let s = prev.expect("at least one level");
        let geometry = if l == 0.0 {
            let action = s.action / PI;
            OrbitGeometry {
                energy: e,
                angular_momentum: 0.0,
                r_minus: lo,
                r_plus: hi,
                tau_r: s.time,
                phi: 0.0,
                radial_action: 0.5 * action,
                action,
                circuit_time: 2.0 * s.time,
                quadrature_error: rel_change,
            }
        } else {
            let radial_action = s.action / PI;
            let phi = 2.0 * s.angle;
            OrbitGeometry {
                energy: e,
                angular_momentum: l,
                r_minus: lo,
                r_plus: hi,
                tau_r: 2.0 * s.time,
                phi,
                radial_action,
                action: radial_action + l * phi / (2.0 * PI),
                circuit_time: 2.0 * s.time,
                quadrature_error: rel_change,
            }
        };
        Ok(Self {
            system: system.clone(),
            geometry,
            nodes,
            rule,
            level,
        })
    }

    pub fn geometry(&self) -> &OrbitGeometry {
        &self.geometry
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn rule(&self) -> &TanhSinh {
        &self.rule
    }

    /// Number of tanh-sinh levels used beyond the first.
    pub fn levels(&self) -> u32 {
        self.level
    }

    pub fn points(&self) -> impl Iterator<Item = &RadialPoint> {
        self.nodes.iter().map(|n| &n.point)
    }

    /// Time average of `q` over one radial period.
    pub fn average(&self, mut q: impl FnMut(&RadialPoint) -> f64) -> RadialAverage {
        let (mut num, mut den, mut num_c, mut den_c) = (0.0, 0.0, 0.0, 0.0);
        for n in &self.nodes {
            let v = n.time_weight * q(&n.point);
            num += v;
            den += n.time_weight;
            if n.level < self.level {
                num_c += v;
                den_c += n.time_weight;
            }
        }
        let value = num / den;
        let coarse = if den_c > 0.0 { num_c / den_c } else { value };
        RadialAverage {
            value,
            error: (value - coarse).abs() + 4.0 * f64::EPSILON * value.abs(),
        }
    }

    /// `(1/pi) int q(r) dr` over `[r_minus, r_plus]` with the tanh-sinh
    /// weights of this orbit.
    pub fn integral(&self, mut q: impl FnMut(&RadialPoint) -> f64) -> f64 {
        let h = self.rule.step(self.level);
        self.nodes.iter().map(|n| n.weight * q(&n.point)).sum::<f64>() * h / PI
    }
}

pub fn orbit_geometry(system: &SystemSpec, e: f64, l: f64) -> Result<OrbitGeometry> {
    Ok(*RadialOrbit::new(system, e, l)?.geometry())
}

/// Time average of `q` over the bound orbit at `(E, L)`.
pub fn radial_average(
    system: &SystemSpec,
    e: f64,
    l: f64,
    q: impl FnMut(&RadialPoint) -> f64,
) -> Result<RadialAverage> {
    Ok(RadialOrbit::new(system, e, l)?.average(q))
}
