use serde_json::json;

use crate::dynamics::{angular_momentum, time_average, SystemSpec, Trajectory, Window};
use crate::error::{Error, Result, UnboundKind};
use crate::models::kinetic::norm_sq;
use crate::radial::RadialOrbit;
use crate::theorems::{number, relative_residual, Diagnostics, TheoremKind, TheoremReport, Verdict};

/// The orbit a virial check averages over.
#[derive(Debug, Clone, Copy)]
pub enum VirialOrbit<'a> {
    /// Time averages along an integrated trajectory.
    Trajectory { trajectory: &'a Trajectory, window: Window },
    /// Radial quadrature at `(E, L)`.
    Quadrature { energy: f64, angular_momentum: f64 },
}

struct Averages {
    kinetic_virial: f64,
    potential_virial: f64,
    kinetic: f64,
    potential: f64,
    error: f64,
}

fn quadrature_averages(system: &SystemSpec, e: f64, l: f64) -> Result<Averages> {
    let orbit = RadialOrbit::new(system, e, l)?;
    let d = system.dim();
    let kernel = system.kinetic().kernel();
    let pot = system.potential();
    let kv = orbit.average(|pt| kernel.virial(pt.p2));
    let pv = orbit.average(|pt| pot.virial(&pt.position(d)).unwrap_or(f64::NAN));
    let t = orbit.average(|pt| kernel.value(pt.p2));
    let v = orbit.average(|pt| pot.value_unchecked(&pt.position(d)));
    Ok(Averages {
        kinetic_virial: kv.value,
        potential_virial: pv.value,
        kinetic: t.value,
        potential: v.value,
        error: kv.error.max(pv.error),
    })
}

fn trajectory_averages(traj: &Trajectory, window: Window) -> Result<Averages> {
    if traj.escaped() {
        return Err(Error::unbound(
            UnboundKind::Escapes,
            "trajectory left the escape radius",
        ));
    }
    let sys = traj.system();
    let kin = sys.kinetic();
    let pot = sys.potential();
    let kv = time_average(traj, |s| kin.virial(&s.p), window)?;
    let pv = time_average(traj, |s| pot.virial(&s.r).unwrap_or(f64::NAN), window)?;
    let t = time_average(traj, |s| kin.energy(&s.p).unwrap_or(f64::NAN), window)?;
    let v = time_average(traj, |s| pot.value_unchecked(&s.r), window)?;
    Ok(Averages {
        kinetic_virial: kv.value,
        potential_virial: pv.value,
        kinetic: t.value,
        potential: v.value,
        error: kv.error.max(pv.error),
    })
}

/// `<p . dT/dp> = <r . grad V>` over a bound orbit. A trajectory of a
/// central system is also checked against the radial quadrature at its
/// `(E, |J|)`; both paths must agree to `tol`.
pub fn check_virial(system: &SystemSpec, orbit: VirialOrbit<'_>, tol: f64) -> Result<TheoremReport> {
    let mut diag = Diagnostics::new();
    let (avg, inputs, cross) = match orbit {
        VirialOrbit::Quadrature {
            energy,
            angular_momentum: l,
        } => {
            let avg = quadrature_averages(system, energy, l)?;
            diag.put("path", json!("quadrature"));
            (
                avg,
                json!({"system": system.describe(), "energy": number(energy), "angular_momentum": number(l)}),
                None,
            )
        }
        VirialOrbit::Trajectory { trajectory, window } => {
            if trajectory.system().dim() != system.dim() {
                return Err(Error::Dimension("trajectory and system dimensions differ".into()));
            }
            let avg = trajectory_averages(trajectory, window)?;
            diag.put("path", json!("trajectory"));
            let s0 = trajectory.initial();
            let e = trajectory.initial_energy();
            let l = if system.dim() == 1 {
                0.0
            } else {
                angular_momentum(s0).map(|j| norm_sq(&j).sqrt())?
            };
            let cross = if system.is_central() {
                match quadrature_averages(system, e, l) {
                    Ok(q) => Some(q),
                    Err(err) => {
                        diag.put("quadrature_unavailable", json!(err.to_string()));
                        None
                    }
                }
            } else {
                None
            };
            let inputs = json!({
                "system": system.describe(),
                "initial": {"t": s0.t, "r": s0.r, "p": s0.p},
                "energy": number(e),
                "window": window,
            });
            (avg, inputs, cross)
        }
    };
    if ![avg.kinetic_virial, avg.potential_virial, avg.kinetic, avg.potential]
        .iter()
        .all(|x| x.is_finite())
    {
        return Err(Error::Numerical("non-finite orbit average".into()));
    }
    let e_scale = avg.kinetic.abs() + avg.potential.abs();
    let residual = relative_residual(avg.kinetic_virial, avg.potential_virial, e_scale);
    let mut pass = residual <= tol;
    diag.num("mean_kinetic", avg.kinetic)
        .num("mean_potential", avg.potential)
        .num("energy_scale", e_scale)
        .num("average_error", avg.error);
    if let Some(q) = cross {
        let c = relative_residual(avg.kinetic_virial, q.kinetic_virial, e_scale).max(relative_residual(
            avg.potential_virial,
            q.potential_virial,
            e_scale,
        ));
        diag.num("quadrature_kinetic_virial", q.kinetic_virial)
            .num("quadrature_potential_virial", q.potential_virial)
            .num("cross_path_residual", c);
        pass &= c <= tol;
    }
    Ok(TheoremReport {
        kind: TheoremKind::Virial,
        inputs,
        lhs: avg.kinetic_virial,
        rhs: avg.potential_virial,
        residual,
        tolerance: tol,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        diagnostics: diag.finish(),
    })
}
