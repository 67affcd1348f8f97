use rayon::prelude::*;
use serde_json::json;

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::models::ParamBinding;
use crate::radial::{energy_at_action_with, ActionConvention, RadialOrbit};
use crate::theorems::{number, relative_residual, Diagnostics, TheoremKind, TheoremReport, Verdict};

/// `dE/dλ = <dH/dλ>` at fixed action `I` and angular momentum `L`, with the
/// total action `I = I_r + L Phi / 2pi` held fixed.
pub fn check_hellmann_feynman(
    system: &SystemSpec,
    binding: &ParamBinding,
    action: f64,
    l: f64,
    delta: f64,
    tol: f64,
) -> Result<TheoremReport> {
    check_hellmann_feynman_with(system, binding, action, l, delta, tol, ActionConvention::Total)
}

/// As [`check_hellmann_feynman`], holding the action named by `convention`
/// fixed.
///
/// The left side is the Richardson extrapolation `(4 D(h/2) - D(h)) / 3` of
/// central differences `D(h)` of the solved energy with `h = delta |λ|`; its
/// error estimate is `|R - D(h/2)|`. The right side averages `dH/dλ` over the
/// orbit at `λ` by radial quadrature.
pub fn check_hellmann_feynman_with(
    system: &SystemSpec,
    binding: &ParamBinding,
    action: f64,
    l: f64,
    delta: f64,
    tol: f64,
    convention: ActionConvention,
) -> Result<TheoremReport> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "relative step must lie in (0, 0.5), got {delta}"
        )));
    }
    let target = system.resolve(&binding.target)?;
    let lam = binding.value;
    let base = system.with_target(&target, lam)?;
    let h = if lam == 0.0 { delta } else { delta * lam.abs() };

    let lams = [lam, lam + h, lam - h, lam + 0.5 * h, lam - 0.5 * h];
    let orbits: Vec<RadialOrbit> = lams
        .par_iter()
        .map(|&x| {
            let sys = if x == lam {
                base.clone()
            } else {
                base.with_target(&target, x)?
            };
            energy_at_action_with(&sys, action, l, None, convention)
        })
        .collect::<Result<_>>()?;
    let en: Vec<f64> = orbits.iter().map(|o| o.geometry().energy).collect();
    let d_h = (en[1] - en[2]) / (2.0 * h);
    let d_h2 = (en[3] - en[4]) / h;
    let lhs = (4.0 * d_h2 - d_h) / 3.0;
    let extrapolation_error = (lhs - d_h2).abs();

    let orbit = &orbits[0];
    let d = base.dim();
    let mut failure = None;
    let rhs = orbit.average(
        |pt| match base.param_derivative(&target, &pt.position(d), &pt.momentum(d)) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let kernel = base.kinetic().kernel();
    let pot = base.potential();
    let t = orbit.average(|pt| kernel.value(pt.p2)).value;
    let v = orbit.average(|pt| pot.value_unchecked(&pt.position(d))).value;
    let e_scale = t.abs() + v.abs();
    if !(lhs.is_finite() && rhs.value.is_finite()) {
        return Err(Error::Numerical("non-finite derivative".into()));
    }
    let residual = relative_residual(lhs, rhs.value, e_scale);
    let g = orbit.geometry();

    let mut diag = Diagnostics::new();
    diag.num("energy", g.energy)
        .num("tau_r", g.tau_r)
        .num("phi", g.phi)
        .num("step", h)
        .num("derivative_h", d_h)
        .num("derivative_half_h", d_h2)
        .num("extrapolation_error", extrapolation_error)
        .num("average_error", rhs.error)
        .num("mean_kinetic", t)
        .num("mean_potential", v)
        .num("energy_scale", e_scale);
    Ok(TheoremReport {
        kind: TheoremKind::HellmannFeynman,
        inputs: json!({
            "system": base.describe(),
            "binding": binding,
            "action": number(action),
            "angular_momentum": number(l),
            "delta": number(delta),
            "convention": convention,
        }),
        lhs,
        rhs: rhs.value,
        residual,
        tolerance: tol,
        verdict: if residual <= tol { Verdict::Pass } else { Verdict::Fail },
        diagnostics: diag.finish(),
    })
}
