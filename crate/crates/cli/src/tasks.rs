//! Execution of the configured task.

use gkh_core::dynamics::{angular_momentum, find_period, integrate_with, IntegrationOptions, Trajectory, Window};
use gkh_core::models::{validate_kinetic, ParamBinding};
use gkh_core::registry::{self, Params};
use gkh_core::theorems::{
    check_comparison, check_hellmann_feynman_with, check_virial, ComparisonOptions, TheoremReport, VirialOrbit,
};
use serde_json::{json, Value};

use crate::config::{CompareTask, ExperimentConfig, HellmannFeynmanTask, SimulateTask, SystemConfig, Task, VirialTask};
use crate::sweep;
use crate::RunError;

/// What a task produced, before it is wrapped into a report.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<TheoremReport>,
    pub results: Value,
    /// Files to write next to the report, by configured name.
    pub files: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
    /// A failed verdict that is not a theorem check.
    pub failed: bool,
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    match &cfg.task {
        Task::Simulate(SimulateTask {
            initial,
            t_end,
            tol,
            integrator,
        }) => {
            let sys = cfg.single().build()?;
            let s0 = initial.build()?;
            let opts = IntegrationOptions {
                tol: *tol,
                stepper: registry::steppers().build(integrator, &Params::new())?,
                ..IntegrationOptions::default()
            };
            let traj = integrate_with(&sys, &s0, *t_end, &opts)?;
            let mut csv = Vec::new();
            traj.write_csv(&mut csv).map_err(|e| RunError::Io(e.to_string()))?;
            let last = traj.last();
            let mut results = json!({
                "samples": traj.samples().len(),
                "rejected_steps": traj.rejected_steps(),
                "initial_energy": traj.initial_energy(),
                "energy_drift": traj.energy_drift(),
                "drift_budget": traj.drift_budget(),
                "escaped": traj.escaped(),
                "final_state": {"t": last.t, "r": last.r, "p": last.p},
            });
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if sys.dim() >= 2 {
                let j0 = angular_momentum(&s0)?;
                let j1 = angular_momentum(last)?;
                let diff: Vec<f64> = j0.iter().zip(&j1).map(|(a, b)| b - a).collect();
                let rel = norm(&diff) / norm(&j0).max(f64::MIN_POSITIVE);
                results["angular_momentum_drift"] = json!(rel);
            }
            let mut out = Outcome {
                results,
                files: vec![(cfg.output.trajectory.clone(), csv)],
                ..Outcome::default()
            };
            if traj.escaped() {
                out.warnings
                    .push("trajectory left the escape radius before t_end".into());
            }
            Ok(out)
        }
        Task::Virial(VirialTask {
            energy,
            angular_momentum: l,
            initial,
            t_end,
            window,
            integration_tol,
            integrator,
            tol,
        }) => {
            let sys = cfg.single().build()?;
            let mut warnings = Vec::new();
            let report = match (energy, initial, t_end) {
                (Some(e), _, _) => check_virial(
                    &sys,
                    VirialOrbit::Quadrature {
                        energy: *e,
                        angular_momentum: *l,
                    },
                    *tol,
                )?,
                (None, Some(init), Some(t_end)) => {
                    let s0 = init.build()?;
                    let opts = IntegrationOptions {
                        tol: *integration_tol,
                        stepper: registry::steppers().build(integrator, &Params::new())?,
                        ..IntegrationOptions::default()
                    };
                    let traj = integrate_with(&sys, &s0, *t_end, &opts)?;
                    let window = match window {
                        Some(w) => *w,
                        None => whole_periods(&traj, t_end - s0.t, &mut warnings),
                    };
                    check_virial(
                        &sys,
                        VirialOrbit::Trajectory {
                            trajectory: &traj,
                            window,
                        },
                        *tol,
                    )?
                }
                _ => unreachable!("validated"),
            };
            let mut out = Outcome {
                warnings,
                ..Outcome::default()
            };
            if let Some(Value::String(why)) = report.diagnostics.get("quadrature_unavailable") {
                out.warnings.push(format!("no quadrature cross-check: {why}"));
            }
            out.checks.push(report);
            Ok(out)
        }
        Task::HellmannFeynman(HellmannFeynmanTask {
            parameter,
            action,
            angular_momentum,
            delta,
            tol,
            convention,
        }) => {
            let sys = cfg.single().build()?;
            let binding = binding_for(&sys, parameter)?;
            let report =
                check_hellmann_feynman_with(&sys, &binding, *action, *angular_momentum, *delta, *tol, *convention)?;
            Ok(Outcome {
                checks: vec![report],
                ..Outcome::default()
            })
        }
        Task::Compare(CompareTask {
            action,
            angular_momentum,
            mu_grid,
            tol,
            delta,
            samples,
            random_samples,
            convention,
        }) => {
            let (a, b) = cfg.pair();
            let (s1, s2) = (a.build()?, b.build()?);
            let options = ComparisonOptions {
                mu_grid: mu_grid.clone(),
                tol: *tol,
                delta: *delta,
                samples: *samples,
                random_samples: *random_samples,
                seed: cfg.seed,
                convention: *convention,
            };
            let report = check_comparison(&s1, &s2, *action, *angular_momentum, &options)?;
            Ok(Outcome {
                checks: vec![report],
                ..Outcome::default()
            })
        }
        Task::ValidateKinetic(v) => validate(cfg.single(), v.x_max, v.n_samples),
        Task::Sweep(s) => sweep::run(cfg, s),
    }
}

/// The longest run of whole periods fitting in `span`, or all of `span`
/// when no period is detected.
fn whole_periods(traj: &Trajectory, span: f64, warnings: &mut Vec<String>) -> Window {
    match find_period(traj, traj.tol().max(1e-10)) {
        Ok(tau) if tau <= span => Window::LongWindow {
            length: (span / tau).floor() * tau,
        },
        Ok(_) => {
            warnings.push("trajectory is shorter than one period; averaging over all of it".into());
            Window::LongWindow { length: span }
        }
        Err(e) => {
            warnings.push(format!("no period detected ({e}); averaging over the whole trajectory"));
            Window::LongWindow { length: span }
        }
    }
}

fn validate(system: &SystemConfig, x_max: f64, n_samples: usize) -> Result<Outcome, RunError> {
    let kernel = system.raw_kernel()?;
    let report = validate_kinetic(kernel.as_ref(), x_max, n_samples)?;
    let admissible = report.admissible();
    let mut results = serde_json::to_value(&report).map_err(|e| RunError::Io(e.to_string()))?;
    results["kernel"] = kernel.describe();
    results["admissible"] = json!(admissible);
    let mut out = Outcome {
        results,
        failed: !admissible,
        ..Outcome::default()
    };
    if admissible && !report.velocity_map_invertible {
        out.warnings
            .push("velocity map is not invertible: momenta cannot be recovered from velocities".into());
    }
    Ok(out)
}

/// A binding for `parameter`, which is either a binding name of `sys` or a
/// target path; the value is the parameter's present value.
pub fn binding_for(sys: &gkh_core::dynamics::SystemSpec, parameter: &str) -> gkh_core::Result<ParamBinding> {
    if let Ok(b) = sys.binding(parameter) {
        return Ok(b.clone());
    }
    let target = sys.resolve(parameter)?;
    Ok(ParamBinding {
        name: parameter.into(),
        target: parameter.into(),
        value: sys.param_value(&target)?,
    })
}
