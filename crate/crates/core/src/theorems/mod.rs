//! Checks of the virial, Hellmann-Feynman and comparison theorems.
//!
//! Every check returns a [`TheoremReport`] whose residual is
//! `|lhs - rhs| / max(|lhs|, |rhs|, E_scale)`, with `E_scale = |<T>| + |<V>|`
//! on the orbit concerned.

mod comparison;
mod hellmann_feynman;
mod virial;

use serde::Serialize;
use serde_json::{Map, Value};

pub use comparison::{check_comparison, comparison_point, ComparisonOptions, ComparisonPoint};
pub use hellmann_feynman::{check_hellmann_feynman, check_hellmann_feynman_with};
pub use virial::{check_virial, VirialOrbit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremKind {
    Virial,
    HellmannFeynman,
    Comparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub kind: TheoremKind,
    pub inputs: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub diagnostics: Map<String, Value>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).and_then(Value::as_f64)
    }
}

/// `|lhs - rhs| / max(|lhs|, |rhs|, scale)`, zero when both sides vanish.
pub fn relative_residual(lhs: f64, rhs: f64, scale: f64) -> f64 {
    let diff = (lhs - rhs).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / lhs.abs().max(rhs.abs()).max(scale.abs())
}

pub(crate) fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub(crate) struct Diagnostics(Map<String, Value>);

impl Diagnostics {
    pub(crate) fn new() -> Self {
        Self(Map::new())
    }

    pub(crate) fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.0.insert(key.into(), number(v));
        self
    }

    pub(crate) fn put(&mut self, key: &str, v: Value) -> &mut Self {
        self.0.insert(key.into(), v);
        self
    }

    pub(crate) fn finish(self) -> Map<String, Value> {
        self.0
    }
}
