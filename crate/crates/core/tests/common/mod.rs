#![allow(dead_code)]

use std::sync::Arc;

use gkh_core::dynamics::SystemSpec;
use gkh_core::models::{
    Coulomb, Harmonic, KineticKernel, KineticModel, Linear, NonRelativistic, PotentialModel, PotentialTerm,
    PowerLawKernel, PowerLawTerm, Relativistic,
};

pub fn system(dim: usize, kernel: impl KineticKernel + 'static, terms: Vec<Arc<dyn PotentialTerm>>) -> SystemSpec {
    SystemSpec::new(
        dim,
        KineticModel::new(Arc::new(kernel)).unwrap(),
        PotentialModel::new(terms),
    )
    .unwrap()
}

pub fn nonrel(m: f64) -> NonRelativistic {
    NonRelativistic::new(m).unwrap()
}

pub fn rel(m: f64) -> Relativistic {
    Relativistic::new(m, true).unwrap()
}

pub fn power(a: f64, beta: f64) -> PowerLawKernel {
    PowerLawKernel::new(a, beta).unwrap()
}

pub fn harmonic(k: f64) -> Vec<Arc<dyn PotentialTerm>> {
    vec![Arc::new(Harmonic::new(k))]
}

pub fn coulomb(kappa: f64) -> Vec<Arc<dyn PotentialTerm>> {
    vec![Arc::new(Coulomb::new(kappa))]
}

pub fn linear(b: f64) -> Vec<Arc<dyn PotentialTerm>> {
    vec![Arc::new(Linear::new(b))]
}

pub fn quartic(b: f64) -> Vec<Arc<dyn PotentialTerm>> {
    vec![Arc::new(PowerLawTerm::new(b, 4.0, 1.0).unwrap())]
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
