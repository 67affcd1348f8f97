use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::radial::{energy_at_action_with, ActionConvention};
use crate::theorems::{number, relative_residual, Diagnostics, TheoremKind, TheoremReport, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonOptions {
    /// Sorted interpolation weights in `[0, 1]`, at least two.
    pub mu_grid: Vec<f64>,
    /// Tolerance on the slope identity `dE/dmu = <H2 - H1>`.
    pub tol: f64,
    /// Relative step of the finite differences in `mu`.
    pub delta: f64,
    /// Log-spaced dominance samples per grid, before random extras.
    pub samples: usize,
    /// Seeded random dominance samples per grid.
    pub random_samples: usize,
    pub seed: u64,
    pub convention: ActionConvention,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            mu_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            tol: 1e-4,
            delta: 1e-2,
            samples: 1000,
            random_samples: 256,
            seed: 0,
            convention: ActionConvention::Total,
        }
    }
}

/// The slope identity at one interpolation weight.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonPoint {
    pub mu: f64,
    pub energy: f64,
    pub mean_kinetic: f64,
    pub mean_potential: f64,
    pub mean_kinetic_difference: f64,
    pub mean_potential_difference: f64,
    pub slope: f64,
    pub slope_error: f64,
    pub residual: f64,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|_| (rng.gen_range(lo.ln()..hi.ln())).exp()).collect()
}

struct Margin {
    min: f64,
    at: f64,
}

/// Smallest `f2 - f1` over `xs`, tolerating rounding of the two values.
fn worst_margin(xs: &[f64], f1: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64) -> (Margin, bool) {
    let mut worst = Margin {
        min: f64::INFINITY,
        at: f64::NAN,
    };
    let mut violated = false;
    for &x in xs {
        let (a, b) = (f1(x), f2(x));
        let m = b - a;
        if m.is_nan() {
            continue;
        }
        let slack = 1e-12 * (a.abs() + b.abs());
        if m < -slack {
            violated = true;
        }
        if m < worst.min {
            worst = Margin { min: m, at: x };
        }
    }
    (worst, violated)
}

#[allow(clippy::too_many_arguments)]
fn slope(
    sys1: &SystemSpec,
    sys2: &SystemSpec,
    mu: f64,
    e_mu: f64,
    h: f64,
    action: f64,
    l: f64,
    conv: ActionConvention,
) -> Result<(f64, f64)> {
    let energy = |m: f64| -> Result<f64> {
        let sys = SystemSpec::interpolate(sys1, sys2, m)?;
        Ok(energy_at_action_with(&sys, action, l, None, conv)?.geometry().energy)
    };
    let (d_h, d_h2) = if mu - h >= 0.0 && mu + h <= 1.0 {
        let e = [
            energy(mu + h)?,
            energy(mu - h)?,
            energy(mu + 0.5 * h)?,
            energy(mu - 0.5 * h)?,
        ];
        ((e[0] - e[1]) / (2.0 * h), (e[2] - e[3]) / h)
    } else {
        // one-sided three-point differences pointing into [0, 1]
        let s = if mu - h < 0.0 { 1.0 } else { -1.0 };
        let e = [
            energy(mu + s * h)?,
            energy(mu + 2.0 * s * h)?,
            energy(mu + 0.5 * s * h)?,
        ];
        let d_h = s * (-3.0 * e_mu + 4.0 * e[0] - e[1]) / (2.0 * h);
        let d_h2 = s * (-3.0 * e_mu + 4.0 * e[2] - e[0]) / h;
        (d_h, d_h2)
    };
    let r = (4.0 * d_h2 - d_h) / 3.0;
    Ok((r, (r - d_h2).abs()))
}

/// Energy, orbit averages of `H2 - H1` and the finite-difference slope
/// `dE/dmu` of the interpolated system at `mu`, at fixed action. Dominance
/// is not checked.
pub fn comparison_point(
    sys1: &SystemSpec,
    sys2: &SystemSpec,
    mu: f64,
    action: f64,
    l: f64,
    delta: f64,
    conv: ActionConvention,
) -> Result<ComparisonPoint> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "mu step must lie in (0, 0.5), got {delta}"
        )));
    }
    let d = sys1.dim();
    let (k1, k2) = (sys1.kinetic().kernel(), sys2.kinetic().kernel());
    let sys = SystemSpec::interpolate(sys1, sys2, mu)?;
    let orbit = energy_at_action_with(&sys, action, l, None, conv)?;
    let e = orbit.geometry().energy;
    let dt = orbit.average(|pt| k2.value(pt.p2) - k1.value(pt.p2)).value;
    let dv = orbit
        .average(|pt| {
            let r = pt.position(d);
            sys2.potential().value_unchecked(&r) - sys1.potential().value_unchecked(&r)
        })
        .value;
    let t = orbit.average(|pt| sys.kinetic().kernel().value(pt.p2)).value;
    let v = orbit
        .average(|pt| sys.potential().value_unchecked(&pt.position(d)))
        .value;
    let (s, s_err) = slope(sys1, sys2, mu, e, delta, action, l, conv)?;
    Ok(ComparisonPoint {
        mu,
        energy: e,
        mean_kinetic: t,
        mean_potential: v,
        mean_kinetic_difference: dt,
        mean_potential_difference: dv,
        slope: s,
        slope_error: s_err,
        residual: relative_residual(s, dt + dv, t.abs() + v.abs()),
    })
}

/// Comparison of two dominated Hamiltonians at equal action: checks
/// `T2 >= T1` and `V2 >= V1` on dense sample grids, then `E1 <= E2`,
/// monotonicity of `E(mu)` for `H(mu) = (1 - mu) H1 + mu H2`, and the slope
/// identity `dE/dmu = <T2 - T1> + <V2 - V1>` on the grid.
///
/// The report's `lhs` and `rhs` are the finite-difference slope and the
/// averaged difference at the grid point with the largest residual.
pub fn check_comparison(
    sys1: &SystemSpec,
    sys2: &SystemSpec,
    action: f64,
    l: f64,
    options: &ComparisonOptions,
) -> Result<TheoremReport> {
    if sys1.dim() != sys2.dim() {
        return Err(Error::Dimension(format!(
            "compared systems have dimensions {} and {}",
            sys1.dim(),
            sys2.dim()
        )));
    }
    if !sys1.is_central() || !sys2.is_central() {
        return Err(Error::Unsupported(
            "comparison needs central or one-dimensional systems".into(),
        ));
    }
    let grid = &options.mu_grid;
    if grid.len() < 2 || grid.iter().any(|m| !(0.0..=1.0).contains(m)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "mu grid needs at least two increasing values in [0, 1]".into(),
        ));
    }
    if options.samples < 2 {
        return Err(Error::InvalidParameter(
            "at least two dominance samples are needed".into(),
        ));
    }
    let conv = options.convention;
    let d = sys1.dim();
    let orbit1 = energy_at_action_with(sys1, action, l, None, conv)?;
    let g1 = *orbit1.geometry();

    // dominance grids spanning the first orbit
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let p2_top = orbit1.points().map(|p| p.p2).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let x_max = sys1.kinetic().x_max().min(sys2.kinetic().x_max());
    let (p_lo, p_hi) = (1e-8 * p2_top, (1e4 * p2_top).min(x_max));
    let mut p2s = log_grid(p_lo, p_hi, options.samples);
    p2s.extend(log_uniform(&mut rng, p_lo, p_hi, options.random_samples));
    let (r_lo, r_hi) = if l > 0.0 {
        (0.1 * g1.r_minus, 10.0 * g1.r_plus)
    } else {
        let reach = g1.r_minus.abs().max(g1.r_plus.abs());
        (1e-4 * reach, 3.0 * reach)
    };
    let mut rs = log_grid(r_lo, r_hi, options.samples);
    rs.extend(log_uniform(&mut rng, r_lo, r_hi, options.random_samples));
    if l == 0.0 {
        let neg: Vec<f64> = rs.iter().map(|r| -r).collect();
        rs.extend(neg);
    }
    let (k1, k2) = (sys1.kinetic().kernel(), sys2.kinetic().kernel());
    let (kin, kin_bad) = worst_margin(&p2s, |x| k1.value(x), |x| k2.value(x));
    if kin_bad {
        return Err(Error::Dominance {
            quantity: "kinetic",
            witness: format!("p^2 = {:e}", kin.at),
            margin: kin.min,
        });
    }
    let (pot, pot_bad) = worst_margin(&rs, |x| sys1.axis_potential(x), |x| sys2.axis_potential(x));
    if pot_bad {
        return Err(Error::Dominance {
            quantity: "potential",
            witness: format!("r = {:e}", pot.at),
            margin: pot.min,
        });
    }

    let orbit2 = energy_at_action_with(sys2, action, l, None, conv)?;
    let (e1, e2) = (g1.energy, orbit2.geometry().energy);

    let points: Vec<ComparisonPoint> = grid
        .par_iter()
        .map(|&mu| comparison_point(sys1, sys2, mu, action, l, options.delta, conv))
        .collect::<Result<_>>()?;

    let e_scale = {
        let kernel = sys1.kinetic().kernel();
        let t = orbit1.average(|pt| kernel.value(pt.p2)).value;
        let v = orbit1
            .average(|pt| sys1.potential().value_unchecked(&pt.position(d)))
            .value;
        t.abs() + v.abs()
    };
    let scale = e1.abs().max(e2.abs()).max(e_scale);
    let ordered = e1 <= e2 + 1e-12 * scale;
    let monotone = points.windows(2).all(|w| w[1].energy >= w[0].energy - 1e-10 * scale);
    let worst = points
        .iter()
        .max_by(|a, b| a.residual.total_cmp(&b.residual))
        .expect("grid has at least two points");
    let residual = worst.residual;
    let pass = residual <= options.tol && ordered && monotone;

    let mut diag = Diagnostics::new();
    diag.num("energy_1", e1)
        .num("energy_2", e2)
        .put("ordered", json!(ordered))
        .put("monotone", json!(monotone))
        .num("worst_mu", worst.mu)
        .num("min_kinetic_margin", kin.min)
        .num("min_potential_margin", pot.min)
        .put(
            "dominance_grids",
            json!({
                "p2": [number(p_lo), number(p_hi), p2s.len()],
                "r": [number(r_lo), number(r_hi), rs.len()],
                "seed": options.seed,
            }),
        )
        .num("energy_scale", e_scale)
        .put("grid", serde_json::to_value(&points).unwrap_or_default());
    Ok(TheoremReport {
        kind: TheoremKind::Comparison,
        inputs: json!({
            "system_1": sys1.describe(),
            "system_2": sys2.describe(),
            "action": number(action),
            "angular_momentum": number(l),
            "options": options,
        }),
        lhs: worst.slope,
        rhs: worst.mean_kinetic_difference + worst.mean_potential_difference,
        residual,
        tolerance: options.tol,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        diagnostics: diag.finish(),
    })
}
