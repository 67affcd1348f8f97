//! Name-keyed constructors for the interchangeable pieces of a system:
//! kinetic kernels, potential terms and integrators.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{Map, Value};

use crate::dynamics::integrator::{Dop853, Dopri5, Stepper};
use crate::error::{Error, Result};
use crate::models::kinetic::{KineticKernel, NonRelativistic, PolynomialKernel, PowerLawKernel, Relativistic};
use crate::models::potential::{AnisotropicHarmonic, Coulomb, Harmonic, Linear, PotentialTerm, PowerLawTerm};

pub type Params = Map<String, Value>;

/// Typed access to a parameter map that remembers which keys were used,
/// so that misspelled parameters are reported instead of ignored.
pub struct ParamReader<'a> {
    params: &'a Params,
    used: std::cell::RefCell<Vec<&'a str>>,
}

impl<'a> ParamReader<'a> {
    pub fn new(params: &'a Params) -> Self {
        Self {
            params,
            used: Default::default(),
        }
    }

    fn mark(&self, key: &str) {
        if let Some((k, _)) = self.params.get_key_value(key) {
            self.used.borrow_mut().push(k.as_str());
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.mark(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::InvalidParameter(format!("`{key}` must be a number"))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.mark(key);
        self.params
            .get(key)
            .ok_or_else(|| Error::InvalidParameter(format!("missing `{key}`")))?
            .as_f64()
            .ok_or_else(|| Error::InvalidParameter(format!("`{key}` must be a number")))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        self.mark(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| Error::InvalidParameter(format!("`{key}` must be a boolean"))),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.mark(key);
        let arr = self
            .params
            .get(key)
            .ok_or_else(|| Error::InvalidParameter(format!("missing `{key}`")))?
            .as_array()
            .ok_or_else(|| Error::InvalidParameter(format!("`{key}` must be an array")))?;
        arr.iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Error::InvalidParameter(format!("`{key}` must contain numbers")))
            })
            .collect()
    }

    /// Fails if any key was never read.
    pub fn finish(self) -> Result<()> {
        let used = self.used.into_inner();
        for key in self.params.keys() {
            if !used.contains(&key.as_str()) {
                return Err(Error::InvalidParameter(format!("unexpected parameter `{key}`")));
            }
        }
        Ok(())
    }
}

pub type Builder<T> = fn(&ParamReader<'_>) -> Result<T>;

struct Entry<T> {
    summary: &'static str,
    build: Builder<T>,
}

/// A table of named constructors.
pub struct Registry<T> {
    label: &'static str,
    entries: BTreeMap<&'static str, Entry<T>>,
}

impl<T> Registry<T> {
    pub fn new(label: &'static str) -> Self {
        Self {
            label,
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, summary: &'static str, build: Builder<T>) {
        self.entries.insert(name, Entry { summary, build });
    }

    pub fn names(&self) -> impl Iterator<Item = (&'static str, &'static str)> + '_ {
        self.entries.iter().map(|(k, e)| (*k, e.summary))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn build(&self, name: &str, params: &Params) -> Result<T> {
        let entry = self.entries.get(name).ok_or_else(|| Error::UnknownEntry {
            registry: self.label,
            name: name.to_string(),
        })?;
        let reader = ParamReader::new(params);
        let value = (entry.build)(&reader)?;
        reader.finish()?;
        Ok(value)
    }
}

pub type KernelRegistry = Registry<Arc<dyn KineticKernel>>;
pub type PotentialRegistry = Registry<Arc<dyn PotentialTerm>>;
pub type StepperRegistry = Registry<Arc<dyn Stepper>>;

/// Kinetic kernels shipped with the library.
pub fn kernels() -> KernelRegistry {
    let mut r = Registry::new("kinetic kernels");
    r.register("nonrelativistic", "K(x) = x / 2m", |p| {
        Ok(Arc::new(NonRelativistic::new(p.f64_or("mass", 1.0)?)?) as Arc<dyn KineticKernel>)
    });
    r.register(
        "relativistic",
        "K(x) = sqrt(x + m^2) - m (rest mass subtracted by default)",
        |p| {
            Ok(Arc::new(Relativistic::new(
                p.f64_or("mass", 1.0)?,
                p.bool_or("subtract_rest_mass", true)?,
            )?) as Arc<dyn KineticKernel>)
        },
    );
    r.register("power_law", "K(x) = A x^(beta/2), i.e. T = A |p|^beta", |p| {
        Ok(Arc::new(PowerLawKernel::new(p.f64_or("amplitude", 1.0)?, p.f64("exponent")?)?) as Arc<dyn KineticKernel>)
    });
    r.register("polynomial", "K(x) = sum_i c_i x^i", |p| {
        Ok(Arc::new(PolynomialKernel::new(p.f64_list("coefficients")?)?) as Arc<dyn KineticKernel>)
    });
    r
}

/// Potential terms shipped with the library.
pub fn potentials() -> PotentialRegistry {
    let mut r = Registry::new("potential terms");
    r.register("power_law", "V = sign * B * |r|^a", |p| {
        Ok(Arc::new(PowerLawTerm::new(
            p.f64_or("amplitude", 1.0)?,
            p.f64("exponent")?,
            p.f64_or("sign", 1.0)?,
        )?) as Arc<dyn PotentialTerm>)
    });
    r.register("coulomb", "V = -kappa / |r|", |p| {
        Ok(Arc::new(Coulomb::new(p.f64_or("strength", 1.0)?)) as Arc<dyn PotentialTerm>)
    });
    r.register("harmonic", "V = k |r|^2 / 2", |p| {
        Ok(Arc::new(Harmonic::new(p.f64_or("stiffness", 1.0)?)) as Arc<dyn PotentialTerm>)
    });
    r.register("linear", "V = b |r|", |p| {
        Ok(Arc::new(Linear::new(p.f64_or("slope", 1.0)?)) as Arc<dyn PotentialTerm>)
    });
    r.register("anisotropic_harmonic", "V = sum_i k_i x_i^2 / 2", |p| {
        Ok(Arc::new(AnisotropicHarmonic::new(p.f64_list("stiffness")?)?) as Arc<dyn PotentialTerm>)
    });
    r
}

/// Embedded Runge-Kutta pairs with dense output.
pub fn steppers() -> StepperRegistry {
    let mut r = Registry::new("integrators");
    r.register("dopri5", "Dormand-Prince 5(4), quartic dense output", |_| {
        Ok(Arc::new(Dopri5) as Arc<dyn Stepper>)
    });
    r.register("dop853", "Dormand-Prince 8(5,3), degree-7 dense output", |_| {
        Ok(Arc::new(Dop853) as Arc<dyn Stepper>)
    });
    r
}
