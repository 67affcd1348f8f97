//! Experiment configuration: a single JSON document naming the system(s),
//! one task and the output file names.

use std::sync::Arc;

use gkh_core::dynamics::{PhaseState, SystemSpec, Window};
use gkh_core::models::kinetic::{KineticKernel, KineticModel};
use gkh_core::models::{ParamBinding, PotentialModel};
use gkh_core::radial::ActionConvention;
use gkh_core::registry::{self, Params};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::RunError;

/// Version of the configuration and report formats.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub version: u32,
    /// Seed of the random dominance samples.
    pub seed: u64,
    pub system: Option<SystemConfig>,
    /// The pair compared by `compare` and by a sweep over `mu`.
    pub systems: Option<Vec<SystemConfig>>,
    pub task: Task,
    pub output: OutputConfig,
}

/// The document with the task left unparsed, so that task errors can be
/// located by field.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "format_version")]
    version: u32,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    system: Option<SystemConfig>,
    #[serde(default)]
    systems: Option<Vec<SystemConfig>>,
    task: Value,
    #[serde(default)]
    output: OutputConfig,
}

fn format_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub dimension: usize,
    pub kinetic: Component,
    #[serde(default)]
    pub potential: Vec<Component>,
    #[serde(default)]
    pub bindings: Vec<ParamBinding>,
    /// Upper end of the `p^2` range on which the kernel is validated.
    #[serde(default)]
    pub kinetic_domain: Option<f64>,
}

/// A registry entry and its parameters, e.g. `{"kind": "harmonic", "stiffness": 2}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Component {
    pub kind: String,
    #[serde(flatten)]
    pub params: Params,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    #[serde(default)]
    pub t: f64,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
}

impl StateConfig {
    pub fn build(&self) -> gkh_core::Result<PhaseState> {
        PhaseState::new(self.t, self.r.clone(), self.p.clone())
    }
}

#[derive(Debug, Clone)]
pub enum Task {
    Simulate(SimulateTask),
    Virial(VirialTask),
    HellmannFeynman(HellmannFeynmanTask),
    Compare(CompareTask),
    ValidateKinetic(ValidateKineticTask),
    Sweep(SweepTask),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateTask {
    pub initial: StateConfig,
    pub t_end: f64,
    #[serde(default = "default_integration_tol")]
    pub tol: f64,
    #[serde(default = "default_integrator")]
    pub integrator: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirialTask {
    /// Quadrature path: the orbit at `(energy, angular_momentum)`.
    #[serde(default)]
    pub energy: Option<f64>,
    #[serde(default)]
    pub angular_momentum: f64,
    /// Trajectory path: integrate from `initial` up to `t_end`.
    #[serde(default)]
    pub initial: Option<StateConfig>,
    #[serde(default)]
    pub t_end: Option<f64>,
    /// Defaults to the whole radial periods that fit in the trajectory.
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default = "default_integration_tol")]
    pub integration_tol: f64,
    #[serde(default = "default_integrator")]
    pub integrator: String,
    #[serde(default = "default_virial_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HellmannFeynmanTask {
    /// A binding name of the system or a target path.
    pub parameter: String,
    pub action: f64,
    #[serde(default)]
    pub angular_momentum: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_hf_tol")]
    pub tol: f64,
    #[serde(default)]
    pub convention: ActionConvention,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareTask {
    pub action: f64,
    #[serde(default)]
    pub angular_momentum: f64,
    #[serde(default = "default_mu_grid")]
    pub mu_grid: Vec<f64>,
    #[serde(default = "default_compare_tol")]
    pub tol: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_random_samples")]
    pub random_samples: usize,
    #[serde(default)]
    pub convention: ActionConvention,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateKineticTask {
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_validation_samples")]
    pub n_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTask {
    /// A binding name or target path of `system`, or `mu` to
    /// interpolate between `systems`.
    pub parameter: String,
    pub values: Vec<f64>,
    pub action: f64,
    #[serde(default)]
    pub angular_momentum: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_hf_tol")]
    pub tol: f64,
    #[serde(default)]
    pub convention: ActionConvention,
}

fn default_integration_tol() -> f64 {
    1e-12
}
fn default_integrator() -> String {
    "dopri5".into()
}
fn default_virial_tol() -> f64 {
    1e-6
}
fn default_delta() -> f64 {
    1e-2
}
fn default_hf_tol() -> f64 {
    1e-5
}
fn default_compare_tol() -> f64 {
    1e-4
}
fn default_mu_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}
fn default_samples() -> usize {
    1000
}
fn default_random_samples() -> usize {
    256
}
fn default_x_max() -> f64 {
    KineticModel::DEFAULT_DOMAIN
}
fn default_validation_samples() -> usize {
    KineticModel::DEFAULT_SAMPLES
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Simulate(_) => "simulate",
            Task::Virial(_) => "virial",
            Task::HellmannFeynman(_) => "hellmann_feynman",
            Task::Compare(_) => "compare",
            Task::ValidateKinetic(_) => "validate_kinetic",
            Task::Sweep(_) => "sweep",
        }
    }

    fn parse(value: &Value) -> Result<Self, RunError> {
        let Value::Object(map) = value else {
            return Err(invalid("task", "expected an object"));
        };
        let mut fields = map.clone();
        let kind = match fields.remove("kind") {
            Some(Value::String(k)) => k,
            Some(_) => return Err(invalid("task.kind", "expected a string")),
            None => return Err(invalid("task", "missing field `kind`")),
        };
        let fields = Value::Object(fields);
        Ok(match kind.as_str() {
            "simulate" => Task::Simulate(located("task", &fields)?),
            "virial" => Task::Virial(located("task", &fields)?),
            "hellmann_feynman" => Task::HellmannFeynman(located("task", &fields)?),
            "compare" => Task::Compare(located("task", &fields)?),
            "validate_kinetic" => Task::ValidateKinetic(located("task", &fields)?),
            "sweep" => Task::Sweep(located("task", &fields)?),
            other => {
                return Err(invalid(
                    "task.kind",
                    format!(
                        "unknown task `{other}`, expected one of simulate, virial, hellmann_feynman, \
                         compare, validate_kinetic, sweep"
                    ),
                ))
            }
        })
    }
}

/// Deserializes `value`, prefixing error locations with `prefix`.
fn located<T: serde::de::DeserializeOwned>(prefix: &str, value: &Value) -> Result<T, RunError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix, inner.as_str()) {
            ("", p) => p.to_string(),
            (pre, ".") => pre.to_string(),
            (pre, p) if p.starts_with('[') => format!("{pre}{p}"),
            (pre, p) => format!("{pre}.{p}"),
        };
        invalid(&path, e.into_inner().to_string())
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub report: String,
    pub trajectory: String,
    pub table: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            report: "report.json".into(),
            trajectory: "trajectory.csv".into(),
            table: "sweep.csv".into(),
        }
    }
}

fn invalid(path: &str, message: impl Into<String>) -> RunError {
    RunError::Config {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses a configuration, reporting the path of the first offending field.
pub fn parse(value: &Value) -> Result<ExperimentConfig, RunError> {
    let raw: RawConfig = located("", value)?;
    let cfg = ExperimentConfig {
        version: raw.version,
        seed: raw.seed,
        system: raw.system,
        systems: raw.systems,
        task: Task::parse(&raw.task)?,
        output: raw.output,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), RunError> {
        if self.version != FORMAT_VERSION {
            return Err(invalid(
                "version",
                format!("unsupported format version {}", self.version),
            ));
        }
        for (name, file) in [
            ("output.report", &self.output.report),
            ("output.trajectory", &self.output.trajectory),
            ("output.table", &self.output.table),
        ] {
            let p = std::path::Path::new(file);
            if file.is_empty() || p.is_absolute() || p.components().count() != 1 {
                return Err(invalid(name, "output names must be plain file names"));
            }
        }
        let pair = match &self.task {
            Task::Compare(_) => true,
            Task::Sweep(s) => s.parameter == "mu",
            _ => false,
        };
        if pair {
            match &self.systems {
                Some(s) if s.len() == 2 => {}
                Some(_) => return Err(invalid("systems", "exactly two systems are needed")),
                None => return Err(invalid("systems", "missing field `systems`")),
            }
            if self.system.is_some() {
                return Err(invalid("system", "use `systems` for this task"));
            }
        } else {
            if self.system.is_none() {
                return Err(invalid("system", "missing field `system`"));
            }
            if self.systems.is_some() {
                return Err(invalid("systems", "this task takes a single `system`"));
            }
        }
        match &self.task {
            Task::Virial(v) => match (&v.energy, &v.initial) {
                (Some(_), None) if v.t_end.is_none() => {}
                (Some(_), None) => return Err(invalid("task.t_end", "only used with `initial`")),
                (None, Some(_)) if v.t_end.is_some() => {}
                (None, Some(_)) => return Err(invalid("task.t_end", "missing field `t_end`")),
                _ => return Err(invalid("task", "give exactly one of `energy` and `initial`")),
            },
            Task::Sweep(s) if s.values.len() < 2 => {
                return Err(invalid("task.values", "a sweep needs at least two values"));
            }
            Task::Compare(c) if c.mu_grid.len() < 2 => {
                return Err(invalid("task.mu_grid", "at least two values are needed"));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn single(&self) -> &SystemConfig {
        self.system.as_ref().expect("validated")
    }

    pub fn pair(&self) -> (&SystemConfig, &SystemConfig) {
        let s = self.systems.as_ref().expect("validated");
        (&s[0], &s[1])
    }
}

impl SystemConfig {
    /// The kernel as configured, before admissibility checks.
    pub fn raw_kernel(&self) -> gkh_core::Result<Arc<dyn KineticKernel>> {
        registry::kernels().build(&self.kinetic.kind, &self.kinetic.params)
    }

    pub fn build(&self) -> gkh_core::Result<SystemSpec> {
        let kernel = self.raw_kernel()?;
        let kinetic = match self.kinetic_domain {
            Some(x_max) => KineticModel::with_domain(kernel, x_max, KineticModel::DEFAULT_SAMPLES)?,
            None => KineticModel::new(kernel)?,
        };
        let reg = registry::potentials();
        let terms = self
            .potential
            .iter()
            .map(|c| reg.build(&c.kind, &c.params))
            .collect::<gkh_core::Result<Vec<_>>>()?;
        let mut sys = SystemSpec::new(self.dimension, kinetic, PotentialModel::new(terms))?;
        for b in &self.bindings {
            sys = sys.with_binding(b.clone())?;
        }
        Ok(sys)
    }
}
