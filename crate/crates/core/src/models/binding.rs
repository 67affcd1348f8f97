//! Named handles on scalar model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::kinetic::KineticModel;
use crate::models::potential::PotentialModel;

/// A parameter `λ` of the Hamiltonian, addressed by a dotted path:
/// `kinetic.<param>`, `potential.<index>.<param>` or
/// `potential.<term kind>.<param>` when that kind occurs once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBinding {
    pub name: String,
    pub target: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamTarget {
    Kinetic { param: String },
    Potential { index: usize, param: String },
}

impl ParamTarget {
    /// Parses `target` and checks that it names exactly one scalar of the
    /// given models.
    pub fn resolve(target: &str, kinetic: &KineticModel, potential: &PotentialModel) -> Result<Self> {
        let parts: Vec<&str> = target.split('.').collect();
        let resolved = match parts.as_slice() {
            ["kinetic", param] => ParamTarget::Kinetic {
                param: param.to_string(),
            },
            ["potential", term, param] => {
                let index = match term.parse::<usize>() {
                    Ok(i) if i < potential.terms().len() => i,
                    Ok(i) => return Err(Error::UnknownParameter(format!("`{target}`: no potential term {i}"))),
                    Err(_) => {
                        let hits: Vec<usize> = potential
                            .terms()
                            .iter()
                            .enumerate()
                            .filter(|(_, t)| t.name() == *term)
                            .map(|(i, _)| i)
                            .collect();
                        match hits.as_slice() {
                            [i] => *i,
                            [] => return Err(Error::UnknownParameter(format!("`{target}`: no `{term}` term"))),
                            _ => {
                                return Err(Error::UnknownParameter(format!(
                                    "`{target}`: {} `{term}` terms, use an index",
                                    hits.len()
                                )))
                            }
                        }
                    }
                };
                ParamTarget::Potential {
                    index,
                    param: param.to_string(),
                }
            }
            _ => {
                return Err(Error::UnknownParameter(format!(
                    "`{target}` is not `kinetic.<p>` or `potential.<term>.<p>`"
                )))
            }
        };
        resolved.current(kinetic, potential)?;
        Ok(resolved)
    }

    /// Present value of the parameter.
    pub fn current(&self, kinetic: &KineticModel, potential: &PotentialModel) -> Result<f64> {
        let (params, param) = match self {
            ParamTarget::Kinetic { param } => (kinetic.kernel().params(), param),
            ParamTarget::Potential { index, param } => (potential.terms()[*index].params(), param),
        };
        let hits: Vec<f64> = params.iter().filter(|(k, _)| k == param).map(|(_, v)| *v).collect();
        match hits.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::UnknownParameter(format!("no scalar parameter `{param}`"))),
        }
    }
}
