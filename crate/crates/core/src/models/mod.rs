pub mod binding;
pub mod kinetic;
pub mod potential;

pub use binding::{ParamBinding, ParamTarget};
pub use kinetic::{
    validate_kinetic, CustomKernel, KineticKernel, KineticModel, LinearCombination, NonRelativistic, PolynomialKernel,
    PowerLawKernel, Relativistic, ValidationReport, Violation,
};
pub use potential::{
    AnisotropicHarmonic, Asymptote, Coulomb, CustomTerm, Harmonic, Linear, PotentialModel, PotentialTerm, PowerLawTerm,
    Scaled,
};
