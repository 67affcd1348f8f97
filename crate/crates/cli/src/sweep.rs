//! One-parameter sweeps of the energy at fixed action.

use gkh_core::dynamics::trajectory::fmt17;
use gkh_core::dynamics::SystemSpec;
use gkh_core::models::ParamBinding;
use gkh_core::radial::{energy_at_action_with, ActionConvention};
use gkh_core::theorems::{check_hellmann_feynman_with, check_virial, comparison_point, VirialOrbit};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, SweepTask};
use crate::tasks::{binding_for, Outcome};
use crate::RunError;

const COLUMNS: [&str; 10] = [
    "parameter",
    "energy",
    "tau_r",
    "radial_action",
    "apsidal_angle",
    "mean_kinetic",
    "mean_potential",
    "virial_residual",
    "derivative_residual",
    "error",
];

fn fmt17_opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Row {
    pub parameter: f64,
    pub energy: Option<f64>,
    pub tau_r: Option<f64>,
    pub radial_action: Option<f64>,
    pub apsidal_angle: Option<f64>,
    pub mean_kinetic: Option<f64>,
    pub mean_potential: Option<f64>,
    pub virial_residual: Option<f64>,
    pub derivative_residual: Option<f64>,
    pub error: Option<String>,
}

impl Row {
    fn csv(&self) -> String {
        let nums = [
            self.energy,
            self.tau_r,
            self.radial_action,
            self.apsidal_angle,
            self.mean_kinetic,
            self.mean_potential,
            self.virial_residual,
            self.derivative_residual,
        ];
        let mut cells = vec![fmt17_opt(Some(self.parameter))];
        cells.extend(nums.iter().map(|x| fmt17_opt(*x)));
        cells.push(self.error.clone().unwrap_or_default());
        cells.join(",")
    }
}

enum Sweep {
    Param { base: SystemSpec, binding: ParamBinding },
    Mu { sys1: SystemSpec, sys2: SystemSpec },
}

struct Point<'a> {
    action: f64,
    l: f64,
    delta: f64,
    tol: f64,
    conv: ActionConvention,
    sweep: &'a Sweep,
}

impl Point<'_> {
    fn row(&self, value: f64) -> Row {
        match self.evaluate(value) {
            Ok(row) => row,
            Err(e) => Row {
                parameter: value,
                error: Some(e.name().to_string()),
                ..Row::default()
            },
        }
    }

    fn evaluate(&self, value: f64) -> gkh_core::Result<Row> {
        let (sys, derivative, hf_means) = match self.sweep {
            Sweep::Param { base, binding } => {
                let binding = ParamBinding {
                    value,
                    ..binding.clone()
                };
                let sys = base.with_param(&binding.target, value)?;
                let hf =
                    check_hellmann_feynman_with(&sys, &binding, self.action, self.l, self.delta, self.tol, self.conv)?;
                (sys, hf.residual, None)
            }
            Sweep::Mu { sys1, sys2 } => {
                let p = comparison_point(sys1, sys2, value, self.action, self.l, self.delta, self.conv)?;
                let sys = SystemSpec::interpolate(sys1, sys2, value)?;
                (sys, p.residual, Some((p.mean_kinetic, p.mean_potential)))
            }
        };
        let orbit = energy_at_action_with(&sys, self.action, self.l, None, self.conv)?;
        let g = *orbit.geometry();
        let virial = check_virial(
            &sys,
            VirialOrbit::Quadrature {
                energy: g.energy,
                angular_momentum: self.l,
            },
            self.tol,
        )?;
        let (t, v) = match hf_means {
            Some(tv) => tv,
            None => (
                virial.diagnostic("mean_kinetic").unwrap_or(f64::NAN),
                virial.diagnostic("mean_potential").unwrap_or(f64::NAN),
            ),
        };
        Ok(Row {
            parameter: value,
            energy: Some(g.energy),
            tau_r: Some(g.tau_r),
            radial_action: Some(g.radial_action),
            apsidal_angle: Some(g.phi),
            mean_kinetic: Some(t),
            mean_potential: Some(v),
            virial_residual: Some(virial.residual),
            derivative_residual: Some(derivative),
            error: None,
        })
    }
}

pub fn run(cfg: &ExperimentConfig, task: &SweepTask) -> Result<Outcome, RunError> {
    let SweepTask {
        parameter,
        values,
        action,
        angular_momentum,
        delta,
        tol,
        convention,
    } = task;
    let sweep = if parameter == "mu" {
        let (a, b) = cfg.pair();
        Sweep::Mu {
            sys1: a.build()?,
            sys2: b.build()?,
        }
    } else {
        let base = cfg.single().build()?;
        let binding = binding_for(&base, parameter)?;
        Sweep::Param { base, binding }
    };
    let point = Point {
        action: *action,
        l: *angular_momentum,
        delta: *delta,
        tol: *tol,
        conv: *convention,
        sweep: &sweep,
    };
    let rows: Vec<Row> = values.par_iter().map(|&v| point.row(v)).collect();

    let mut table = COLUMNS.join(",");
    table.push('\n');
    for r in &rows {
        table.push_str(&r.csv());
        table.push('\n');
    }
    let mut warnings = Vec::new();
    let mut failed = false;
    for r in &rows {
        if let Some(e) = &r.error {
            warnings.push(format!("parameter {}: {e}", r.parameter));
        }
        let over = [r.virial_residual, r.derivative_residual]
            .iter()
            .flatten()
            .any(|x| x.is_nan() || *x > *tol);
        failed |= over;
    }
    let energies: Vec<f64> = rows.iter().filter_map(|r| r.energy).collect();
    let scale = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let monotone = energies.windows(2).all(|w| w[1] >= w[0] - 1e-10 * scale);
    let failed_rows = rows.iter().filter(|r| r.error.is_some()).count();
    let results = json!({
        "parameter": parameter,
        "rows": rows,
        "failed_rows": failed_rows,
        "non_decreasing_energy": monotone,
        "tolerance": tol,
    });
    Ok(Outcome {
        checks: Vec::new(),
        results,
        files: vec![(cfg.output.table.clone(), table.into_bytes())],
        warnings,
        failed,
    })
}
