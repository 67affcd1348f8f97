//! Systems `H = K(p^2) + V(r)` and phase-space states.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::models::kinetic::{norm_sq, KineticModel, LinearCombination};
use crate::models::potential::{PotentialModel, PotentialTerm, Scaled};
use crate::models::{KineticKernel, ParamBinding, ParamTarget};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseState {
    pub t: f64,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhaseState {
    pub fn new(t: f64, r: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if r.len() != p.len() || r.is_empty() || r.len() > 3 {
            return Err(Error::Dimension(format!(
                "position has {} components, momentum {}",
                r.len(),
                p.len()
            )));
        }
        if !r.iter().chain(&p).all(|x| x.is_finite()) || !t.is_finite() {
            return Err(Error::Numerical("non-finite phase-space state".into()));
        }
        Ok(Self { t, r, p })
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    /// `(r, p)` packed into one vector.
    pub fn packed(&self) -> Vec<f64> {
        let mut y = self.r.clone();
        y.extend_from_slice(&self.p);
        y
    }

    pub(crate) fn unpack_into(&mut self, t: f64, y: &[f64]) {
        let d = self.r.len();
        self.t = t;
        self.r.copy_from_slice(&y[..d]);
        self.p.copy_from_slice(&y[d..]);
    }
}

/// `J = r x p`: one component in two dimensions, three in three.
pub fn angular_momentum(state: &PhaseState) -> Result<Vec<f64>> {
    let (r, p) = (&state.r, &state.p);
    match state.dim() {
        2 => Ok(vec![r[0] * p[1] - r[1] * p[0]]),
        3 => Ok(vec![
            r[1] * p[2] - r[2] * p[1],
            r[2] * p[0] - r[0] * p[2],
            r[0] * p[1] - r[1] * p[0],
        ]),
        d => Err(Error::Dimension(format!("angular momentum needs D >= 2, got {d}"))),
    }
}

/// A Hamiltonian together with the parameters exposed for variation.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    dim: usize,
    kinetic: KineticModel,
    potential: PotentialModel,
    bindings: Vec<ParamBinding>,
}

impl SystemSpec {
    pub fn new(dim: usize, kinetic: KineticModel, potential: PotentialModel) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        potential.check_dimension(dim)?;
        Ok(Self {
            dim,
            kinetic,
            potential,
            bindings: Vec::new(),
        })
    }

    /// Registers a named parameter. The binding's value is applied to the
    /// model.
    pub fn with_binding(self, binding: ParamBinding) -> Result<Self> {
        let mut sys = self.with_param(&binding.target, binding.value)?;
        sys.bindings.retain(|b| b.name != binding.name);
        sys.bindings.push(binding);
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kinetic(&self) -> &KineticModel {
        &self.kinetic
    }

    pub fn potential(&self) -> &PotentialModel {
        &self.potential
    }

    pub fn bindings(&self) -> &[ParamBinding] {
        &self.bindings
    }

    pub fn binding(&self, name: &str) -> Result<&ParamBinding> {
        self.bindings
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::UnknownParameter(format!("no binding named `{name}`")))
    }

    /// Central potentials and all one-dimensional systems.
    pub fn is_central(&self) -> bool {
        self.dim == 1 || self.potential.is_central()
    }

    pub fn check_state(&self, state: &PhaseState) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "state has dimension {}, system {}",
                state.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn hamiltonian(&self, r: &[f64], p: &[f64]) -> Result<f64> {
        Ok(self.kinetic.energy(p)? + self.potential.value(r)?)
    }

    pub fn energy(&self, state: &PhaseState) -> Result<f64> {
        self.hamiltonian(&state.r, &state.p)
    }

    /// `(p . dT/dp, r . dV/dr)`.
    pub fn virial_terms(&self, state: &PhaseState) -> Result<(f64, f64)> {
        self.kinetic.energy(&state.p)?;
        Ok((self.kinetic.virial(&state.p), self.potential.virial(&state.r)?))
    }

    /// Hamilton's equations for the packed state `y = (r, p)`.
    pub fn rhs(&self, y: &[f64], dydt: &mut [f64]) -> Result<()> {
        let d = self.dim;
        let (r, p) = y.split_at(d);
        let (dr, dp) = dydt.split_at_mut(d);
        self.kinetic.velocity_into(p, dr)?;
        self.potential.gradient_into(r, dp)?;
        dp.iter_mut().for_each(|g| *g = -*g);
        Ok(())
    }

    /// Packed-state components whose sign changes mark a kink of the
    /// equations of motion. Only one-dimensional systems report any.
    pub fn switching_components(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if self.dim == 1 {
            if !self.potential.smooth_at_origin() {
                out.push(0);
            }
            if !self.kinetic.kernel().smooth_at_zero() {
                out.push(1);
            }
        }
        out
    }

    /// The potential along the first axis, `V(x, 0, ...)`.
    pub fn axis_potential(&self, x: f64) -> f64 {
        let mut r = [0.0; 3];
        r[0] = x;
        self.potential.value_unchecked(&r[..self.dim])
    }

    /// `dV/dx` along the first axis.
    pub fn axis_force_slope(&self, x: f64) -> f64 {
        let mut r = [0.0; 3];
        r[0] = x;
        let mut g = [0.0; 3];
        let _ = self.potential.gradient_into(&r[..self.dim], &mut g[..self.dim]);
        g[0]
    }

    pub fn resolve(&self, target: &str) -> Result<ParamTarget> {
        ParamTarget::resolve(target, &self.kinetic, &self.potential)
    }

    /// Resolves a binding name or, failing that, a target path.
    pub fn resolve_named(&self, name_or_target: &str) -> Result<ParamTarget> {
        match self.bindings.iter().find(|b| b.name == name_or_target) {
            Some(b) => self.resolve(&b.target),
            None => self.resolve(name_or_target),
        }
    }

    pub fn param_value(&self, target: &ParamTarget) -> Result<f64> {
        target.current(&self.kinetic, &self.potential)
    }

    /// Copy of the system with one parameter replaced.
    pub fn with_param(&self, target: &str, value: f64) -> Result<Self> {
        let t = self.resolve(target)?;
        self.with_target(&t, value)
    }

    pub fn with_target(&self, target: &ParamTarget, value: f64) -> Result<Self> {
        let mut sys = self.clone();
        match target {
            ParamTarget::Kinetic { param } => {
                let kernel = self.kinetic.kernel().with_param(param, value)?;
                sys.kinetic = KineticModel::with_domain(kernel, self.kinetic.x_max(), self.kinetic.report().n_samples)?;
            }
            ParamTarget::Potential { index, param } => {
                sys.potential = self.potential.with_term_param(*index, param, value)?;
            }
        }
        for b in &mut sys.bindings {
            if sys_target_matches(&self.kinetic, &self.potential, &b.target, target) {
                b.value = value;
            }
        }
        Ok(sys)
    }

    /// `dH/dλ` at fixed `(r, p)`: closed form when the model provides one,
    /// otherwise a central difference in `λ`.
    pub fn param_derivative(&self, target: &ParamTarget, r: &[f64], p: &[f64]) -> Result<f64> {
        let closed = match target {
            ParamTarget::Kinetic { param } => self.kinetic.kernel().param_slope(param, norm_sq(p)),
            ParamTarget::Potential { index, param } => self.potential.terms()[*index].param_derivative(param, r),
        };
        if let Some(d) = closed {
            return Ok(d);
        }
        let lam = self.param_value(target)?;
        let h = 1e-5 * lam.abs().max(1e-3);
        let up = self.with_target(target, lam + h)?.hamiltonian(r, p)?;
        let down = self.with_target(target, lam - h)?.hamiltonian(r, p)?;
        Ok((up - down) / (2.0 * h))
    }

    /// `c H` for `c > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        let kernel = Arc::new(LinearCombination::new(vec![(factor, self.kinetic.kernel().clone())]));
        Ok(Self {
            dim: self.dim,
            kinetic: KineticModel::with_domain(kernel, self.kinetic.x_max(), self.kinetic.report().n_samples)?,
            potential: self.potential.scaled(factor),
            bindings: Vec::new(),
        })
    }

    /// `H(mu) = (1 - mu) H1 + mu H2`, revalidated.
    pub fn interpolate(h1: &Self, h2: &Self, mu: f64) -> Result<Self> {
        if h1.dim != h2.dim {
            return Err(Error::Dimension(format!(
                "cannot mix systems of dimension {} and {}",
                h1.dim, h2.dim
            )));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!("mu = {mu} outside [0, 1]")));
        }
        let kernel: Arc<dyn KineticKernel> = Arc::new(LinearCombination::new(vec![
            (1.0 - mu, h1.kinetic.kernel().clone()),
            (mu, h2.kinetic.kernel().clone()),
        ]));
        let x_max = h1.kinetic.x_max().min(h2.kinetic.x_max());
        let n = h1.kinetic.report().n_samples.max(h2.kinetic.report().n_samples);
        let mut terms: Vec<Arc<dyn PotentialTerm>> = Vec::new();
        for t in h1.potential.terms() {
            terms.push(Arc::new(Scaled::new(1.0 - mu, t.clone())));
        }
        for t in h2.potential.terms() {
            terms.push(Arc::new(Scaled::new(mu, t.clone())));
        }
        Self::new(
            h1.dim,
            KineticModel::with_domain(kernel, x_max, n)?,
            PotentialModel::new(terms),
        )
    }

    pub fn describe(&self) -> Value {
        json!({
            "dimension": self.dim,
            "kinetic": self.kinetic.kernel().describe(),
            "potential": self.potential.describe(),
            "bindings": self.bindings,
        })
    }
}

fn sys_target_matches(kinetic: &KineticModel, potential: &PotentialModel, path: &str, target: &ParamTarget) -> bool {
    ParamTarget::resolve(path, kinetic, potential).is_ok_and(|t| &t == target)
}
