//! Potentials `V(r)` built as sums of terms.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::models::kinetic::norm_sq;

/// Behaviour of a term as `|r| -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Asymptote {
    Finite(f64),
    /// Grows like `+|r|^order`.
    Confining(f64),
    /// Falls like `-|r|^order`.
    Falling(f64),
    Unknown,
}

impl Asymptote {
    /// Limit of a sum of terms.
    pub fn combine(items: impl IntoIterator<Item = Asymptote>) -> Asymptote {
        let mut finite = 0.0;
        let mut top: Option<(f64, i8)> = None;
        for a in items {
            match a {
                Asymptote::Unknown => return Asymptote::Unknown,
                Asymptote::Finite(v) => finite += v,
                Asymptote::Confining(o) | Asymptote::Falling(o) => {
                    let s = if matches!(a, Asymptote::Confining(_)) { 1 } else { -1 };
                    top = match top {
                        None => Some((o, s)),
                        Some((to, _)) if o > to => Some((o, s)),
                        Some((to, ts)) if o == to && ts != s => Some((to, 0)),
                        keep => keep,
                    };
                }
            }
        }
        match top {
            None => Asymptote::Finite(finite),
            Some((o, 1)) => Asymptote::Confining(o),
            Some((o, -1)) => Asymptote::Falling(o),
            Some(_) => Asymptote::Unknown,
        }
    }
}

pub trait PotentialTerm: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    fn value(&self, r: &[f64]) -> f64;

    /// Adds `grad V(r)` to `out`. The default uses central differences with
    /// step `max(1e-6, 1e-6 |r|)`.
    fn add_gradient(&self, r: &[f64], out: &mut [f64]) {
        let h = (1e-6 * norm_sq(r).sqrt()).max(1e-6);
        let mut probe = r.to_vec();
        for i in 0..r.len() {
            probe[i] = r[i] + h;
            let up = self.value(&probe);
            probe[i] = r[i] - h;
            let down = self.value(&probe);
            probe[i] = r[i];
            out[i] += (up - down) / (2.0 * h);
        }
    }

    fn is_central(&self) -> bool {
        true
    }

    fn asymptote(&self) -> Asymptote {
        Asymptote::Unknown
    }

    fn singular_at_origin(&self) -> bool {
        false
    }

    /// False when `V` has a kink or cusp at `r = 0`.
    fn smooth_at_origin(&self) -> bool {
        true
    }

    fn check_dimension(&self, _dim: usize) -> Result<()> {
        Ok(())
    }

    fn params(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn with_param(&self, name: &str, _value: f64) -> Result<Arc<dyn PotentialTerm>> {
        Err(Error::UnknownParameter(format!(
            "{} has no parameter `{name}`",
            self.name()
        )))
    }

    /// `dV/d(param)` at fixed `r`, when known in closed form.
    fn param_derivative(&self, _name: &str, _r: &[f64]) -> Option<f64> {
        None
    }

    fn describe(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("kind".into(), Value::from(self.name()));
        for (k, v) in self.params() {
            m.insert(k, Value::from(v));
        }
        Value::Object(m)
    }
}

fn add_central(dv_drho_over_rho: f64, r: &[f64], out: &mut [f64]) {
    for (o, x) in out.iter_mut().zip(r) {
        *o += dv_drho_over_rho * x;
    }
}

/// `V = sign * B * |r|^a`.
#[derive(Debug, Clone)]
pub struct PowerLawTerm {
    amplitude: f64,
    exponent: f64,
    sign: f64,
}

impl PowerLawTerm {
    pub fn new(amplitude: f64, exponent: f64, sign: f64) -> Result<Self> {
        if !(amplitude.is_finite() && exponent.is_finite()) {
            return Err(Error::InvalidParameter("power_law needs finite parameters".into()));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {sign}")));
        }
        Ok(Self {
            amplitude,
            exponent,
            sign,
        })
    }
}

impl PotentialTerm for PowerLawTerm {
    fn name(&self) -> &str {
        "power_law"
    }
    fn value(&self, r: &[f64]) -> f64 {
        let rho = norm_sq(r).sqrt();
        if rho == 0.0 && self.exponent == 0.0 {
            return self.sign * self.amplitude;
        }
        self.sign * self.amplitude * rho.powf(self.exponent)
    }
    fn add_gradient(&self, r: &[f64], out: &mut [f64]) {
        let rho2 = norm_sq(r);
        let a = self.exponent;
        if rho2 == 0.0 {
            if a < 1.0 && a != 0.0 {
                out.iter_mut().for_each(|o| *o = f64::NAN);
            }
            return;
        }
        let k = self.sign * self.amplitude * a * rho2.sqrt().powf(a - 2.0);
        add_central(k, r, out);
    }
    fn asymptote(&self) -> Asymptote {
        let v = self.sign * self.amplitude;
        if self.exponent < 0.0 || v == 0.0 {
            Asymptote::Finite(0.0)
        } else if self.exponent == 0.0 {
            Asymptote::Finite(v)
        } else if v > 0.0 {
            Asymptote::Confining(self.exponent)
        } else {
            Asymptote::Falling(self.exponent)
        }
    }
    fn singular_at_origin(&self) -> bool {
        self.exponent < 0.0
    }
    fn smooth_at_origin(&self) -> bool {
        self.exponent >= 0.0 && self.exponent % 2.0 == 0.0
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![
            ("amplitude".into(), self.amplitude),
            ("exponent".into(), self.exponent),
            ("sign".into(), self.sign),
        ]
    }
    fn with_param(&self, name: &str, value: f64) -> Result<Arc<dyn PotentialTerm>> {
        let mut t = self.clone();
        match name {
            "amplitude" => t.amplitude = value,
            "exponent" => t.exponent = value,
            _ => return Err(Error::UnknownParameter(format!("power_law has no `{name}`"))),
        }
        Ok(Arc::new(Self::new(t.amplitude, t.exponent, t.sign)?))
    }
    fn param_derivative(&self, name: &str, r: &[f64]) -> Option<f64> {
        let rho = norm_sq(r).sqrt();
        match name {
            "amplitude" => Some(self.sign * rho.powf(self.exponent)),
            "exponent" if rho > 0.0 => Some(self.sign * self.amplitude * rho.powf(self.exponent) * rho.ln()),
            _ => None,
        }
    }
}

/// `V = -kappa / |r|`.
#[derive(Debug, Clone)]
pub struct Coulomb {
    strength: f64,
}

impl Coulomb {
    pub fn new(strength: f64) -> Self {
        Self { strength }
    }
}

impl PotentialTerm for Coulomb {
    fn name(&self) -> &str {
        "coulomb"
    }
    fn smooth_at_origin(&self) -> bool {
        false
    }
    fn value(&self, r: &[f64]) -> f64 {
        -self.strength / norm_sq(r).sqrt()
    }
    fn add_gradient(&self, r: &[f64], out: &mut [f64]) {
        let rho2 = norm_sq(r);
        add_central(self.strength / (rho2 * rho2.sqrt()), r, out);
    }
    fn asymptote(&self) -> Asymptote {
        Asymptote::Finite(0.0)
    }
    fn singular_at_origin(&self) -> bool {
        true
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("strength".into(), self.strength)]
    }
    fn with_param(&self, name: &str, value: f64) -> Result<Arc<dyn PotentialTerm>> {
        match name {
            "strength" => Ok(Arc::new(Self::new(value))),
            _ => Err(Error::UnknownParameter(format!("coulomb has no `{name}`"))),
        }
    }
    fn param_derivative(&self, name: &str, r: &[f64]) -> Option<f64> {
        (name == "strength").then(|| -1.0 / norm_sq(r).sqrt())
    }
}

/// `V = k |r|^2 / 2`.
#[derive(Debug, Clone)]
pub struct Harmonic {
    stiffness: f64,
}

impl Harmonic {
    pub fn new(stiffness: f64) -> Self {
        Self { stiffness }
    }
}

impl PotentialTerm for Harmonic {
    fn name(&self) -> &str {
        "harmonic"
    }
    fn value(&self, r: &[f64]) -> f64 {
        0.5 * self.stiffness * norm_sq(r)
    }
    fn add_gradient(&self, r: &[f64], out: &mut [f64]) {
        add_central(self.stiffness, r, out);
    }
    fn asymptote(&self) -> Asymptote {
        match self.stiffness {
            k if k > 0.0 => Asymptote::Confining(2.0),
            k if k < 0.0 => Asymptote::Falling(2.0),
            _ => Asymptote::Finite(0.0),
        }
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("stiffness".into(), self.stiffness)]
    }
    fn with_param(&self, name: &str, value: f64) -> Result<Arc<dyn PotentialTerm>> {
        match name {
            "stiffness" => Ok(Arc::new(Self::new(value))),
            _ => Err(Error::UnknownParameter(format!("harmonic has no `{name}`"))),
        }
    }
    fn param_derivative(&self, name: &str, r: &[f64]) -> Option<f64> {
        (name == "stiffness").then(|| 0.5 * norm_sq(r))
    }
}

/// `V = b |r|`; in one dimension the symmetric well `b |x|`.
#[derive(Debug, Clone)]
pub struct Linear {
    slope: f64,
}

impl Linear {
    pub fn new(slope: f64) -> Self {
        Self { slope }
    }
}

impl PotentialTerm for Linear {
    fn name(&self) -> &str {
        "linear"
    }
    fn smooth_at_origin(&self) -> bool {
        self.slope == 0.0
    }
    fn value(&self, r: &[f64]) -> f64 {
        self.slope * norm_sq(r).sqrt()
    }
    fn add_gradient(&self, r: &[f64], out: &mut [f64]) {
        let rho = norm_sq(r).sqrt();
        if rho > 0.0 {
            add_central(self.slope / rho, r, out);
        }
    }
    fn asymptote(&self) -> Asymptote {
        match self.slope {
            b if b > 0.0 => Asymptote::Confining(1.0),
            b if b < 0.0 => Asymptote::Falling(1.0),
            _ => Asymptote::Finite(0.0),
        }
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("slope".into(), self.slope)]
    }
    fn with_param(&self, name: &str, value: f64) -> Result<Arc<dyn PotentialTerm>> {
        match name {
            "slope" => Ok(Arc::new(Self::new(value))),
            _ => Err(Error::UnknownParameter(format!("linear has no `{name}`"))),
        }
    }
    fn param_derivative(&self, name: &str, r: &[f64]) -> Option<f64> {
        (name == "slope").then(|| norm_sq(r).sqrt())
    }
}

/// `V = sum_i k_i x_i^2 / 2`, central only when all stiffnesses agree.
#[derive(Debug, Clone)]
pub struct AnisotropicHarmonic {
    stiffness: Vec<f64>,
}

impl AnisotropicHarmonic {
    pub fn new(stiffness: Vec<f64>) -> Result<Self> {
        if stiffness.is_empty() || stiffness.len() > 3 {
            return Err(Error::InvalidParameter(
                "anisotropic_harmonic needs 1 to 3 stiffness values".into(),
            ));
        }
        Ok(Self { stiffness })
    }
}

impl PotentialTerm for AnisotropicHarmonic {
    fn name(&self) -> &str {
        "anisotropic_harmonic"
    }
    fn value(&self, r: &[f64]) -> f64 {
        r.iter().zip(&self.stiffness).map(|(x, k)| 0.5 * k * x * x).sum()
    }
    fn add_gradient(&self, r: &[f64], out: &mut [f64]) {
        for ((o, x), k) in out.iter_mut().zip(r).zip(&self.stiffness) {
            *o += k * x;
        }
    }
    fn is_central(&self) -> bool {
        self.stiffness.windows(2).all(|w| w[0] == w[1])
    }
    fn asymptote(&self) -> Asymptote {
        if self.stiffness.iter().all(|k| *k > 0.0) {
            Asymptote::Confining(2.0)
        } else {
            Asymptote::Unknown
        }
    }
    fn check_dimension(&self, dim: usize) -> Result<()> {
        if dim == self.stiffness.len() {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "anisotropic_harmonic has {} stiffness values for dimension {dim}",
                self.stiffness.len()
            )))
        }
    }
    fn params(&self) -> Vec<(String, f64)> {
        self.stiffness
            .iter()
            .enumerate()
            .map(|(i, k)| (format!("k{i}"), *k))
            .collect()
    }
    fn with_param(&self, name: &str, value: f64) -> Result<Arc<dyn PotentialTerm>> {
        let idx = name
            .strip_prefix('k')
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|i| *i < self.stiffness.len())
            .ok_or_else(|| Error::UnknownParameter(format!("anisotropic_harmonic has no `{name}`")))?;
        let mut s = self.stiffness.clone();
        s[idx] = value;
        Ok(Arc::new(Self::new(s)?))
    }
    fn param_derivative(&self, name: &str, r: &[f64]) -> Option<f64> {
        let idx: usize = name.strip_prefix('k')?.parse().ok()?;
        r.get(idx).map(|x| 0.5 * x * x)
    }
    fn describe(&self) -> Value {
        json!({"kind": "anisotropic_harmonic", "stiffness": self.stiffness})
    }
}

/// `factor * V_inner`.
#[derive(Debug, Clone)]
pub struct Scaled {
    factor: f64,
    inner: Arc<dyn PotentialTerm>,
}

impl Scaled {
    pub fn new(factor: f64, inner: Arc<dyn PotentialTerm>) -> Self {
        Self { factor, inner }
    }
}

impl PotentialTerm for Scaled {
    fn name(&self) -> &str {
        "scaled"
    }
    fn value(&self, r: &[f64]) -> f64 {
        if self.factor == 0.0 {
            return 0.0;
        }
        self.factor * self.inner.value(r)
    }
    fn add_gradient(&self, r: &[f64], out: &mut [f64]) {
        if self.factor == 0.0 {
            return;
        }
        let mut g = vec![0.0; r.len()];
        self.inner.add_gradient(r, &mut g);
        for (o, gi) in out.iter_mut().zip(g) {
            *o += self.factor * gi;
        }
    }
    fn is_central(&self) -> bool {
        self.inner.is_central()
    }
    fn asymptote(&self) -> Asymptote {
        match (self.inner.asymptote(), self.factor) {
            (_, 0.0) => Asymptote::Finite(0.0),
            (Asymptote::Finite(v), f) => Asymptote::Finite(f * v),
            (Asymptote::Confining(o), f) if f > 0.0 => Asymptote::Confining(o),
            (Asymptote::Confining(o), _) => Asymptote::Falling(o),
            (Asymptote::Falling(o), f) if f > 0.0 => Asymptote::Falling(o),
            (Asymptote::Falling(o), _) => Asymptote::Confining(o),
            (Asymptote::Unknown, _) => Asymptote::Unknown,
        }
    }
    fn singular_at_origin(&self) -> bool {
        self.factor != 0.0 && self.inner.singular_at_origin()
    }
    fn smooth_at_origin(&self) -> bool {
        self.factor == 0.0 || self.inner.smooth_at_origin()
    }
    fn check_dimension(&self, dim: usize) -> Result<()> {
        self.inner.check_dimension(dim)
    }
    fn param_derivative(&self, name: &str, r: &[f64]) -> Option<f64> {
        self.inner.param_derivative(name, r).map(|d| self.factor * d)
    }
    fn describe(&self) -> Value {
        json!({"kind": "scaled", "factor": self.factor, "term": self.inner.describe()})
    }
}

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A term given by user callables. Without a gradient callable the gradient
/// falls back to central differences.
#[derive(Clone)]
pub struct CustomTerm {
    label: String,
    value: ValueFn,
    gradient: Option<GradientFn>,
    central: bool,
    asymptote: Asymptote,
}

impl fmt::Debug for CustomTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomTerm")
            .field("label", &self.label)
            .field("central", &self.central)
            .finish()
    }
}

impl CustomTerm {
    pub fn new(label: impl Into<String>, central: bool, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(value),
            gradient: None,
            central,
            asymptote: Asymptote::Unknown,
        }
    }

    /// `grad` must add the gradient into its output slice.
    pub fn with_gradient(mut self, grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(grad));
        self
    }

    pub fn with_asymptote(mut self, a: Asymptote) -> Self {
        self.asymptote = a;
        self
    }
}

impl PotentialTerm for CustomTerm {
    fn name(&self) -> &str {
        "custom"
    }
    fn value(&self, r: &[f64]) -> f64 {
        (self.value)(r)
    }
    fn add_gradient(&self, r: &[f64], out: &mut [f64]) {
        match &self.gradient {
            Some(g) => g(r, out),
            None => {
                let h = (1e-6 * norm_sq(r).sqrt()).max(1e-6);
                let mut probe = r.to_vec();
                for i in 0..r.len() {
                    probe[i] = r[i] + h;
                    let up = (self.value)(&probe);
                    probe[i] = r[i] - h;
                    let down = (self.value)(&probe);
                    probe[i] = r[i];
                    out[i] += (up - down) / (2.0 * h);
                }
            }
        }
    }
    fn is_central(&self) -> bool {
        self.central
    }
    fn asymptote(&self) -> Asymptote {
        self.asymptote
    }
    fn describe(&self) -> Value {
        json!({"kind": "custom", "label": self.label, "central": self.central})
    }
}

/// Sum of potential terms.
#[derive(Debug, Clone, Default)]
pub struct PotentialModel {
    terms: Vec<Arc<dyn PotentialTerm>>,
}

impl PotentialModel {
    pub fn new(terms: Vec<Arc<dyn PotentialTerm>>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[Arc<dyn PotentialTerm>] {
        &self.terms
    }

    pub fn is_central(&self) -> bool {
        self.terms.iter().all(|t| t.is_central())
    }

    pub fn asymptote(&self) -> Asymptote {
        Asymptote::combine(self.terms.iter().map(|t| t.asymptote()))
    }

    pub fn singular_at_origin(&self) -> bool {
        self.terms.iter().any(|t| t.singular_at_origin())
    }

    pub fn smooth_at_origin(&self) -> bool {
        self.terms.iter().all(|t| t.smooth_at_origin())
    }

    pub fn check_dimension(&self, dim: usize) -> Result<()> {
        self.terms.iter().try_for_each(|t| t.check_dimension(dim))
    }

    /// `V(r)` without domain checks; may be infinite at singularities.
    pub fn value_unchecked(&self, r: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.value(r)).sum()
    }

    pub fn value(&self, r: &[f64]) -> Result<f64> {
        let v = self.value_unchecked(r);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("potential is singular at r = {r:?}")))
        }
    }

    /// Writes `grad V(r)` into `out`.
    pub fn gradient_into(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|o| *o = 0.0);
        for t in &self.terms {
            t.add_gradient(r, out);
        }
        if out.iter().all(|g| g.is_finite()) {
            Ok(())
        } else {
            Err(Error::Domain(format!("force is singular at r = {r:?}")))
        }
    }

    /// `F = -grad V(r)`.
    pub fn force(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; r.len()];
        self.gradient_into(r, &mut g)?;
        g.iter_mut().for_each(|x| *x = -*x);
        Ok(g)
    }

    /// `r . grad V(r)`.
    pub fn virial(&self, r: &[f64]) -> Result<f64> {
        let mut g = vec![0.0; r.len()];
        self.gradient_into(r, &mut g)?;
        Ok(r.iter().zip(&g).map(|(a, b)| a * b).sum())
    }

    /// Largest relative deviation between the model gradient and central
    /// differences of `V` at `points`.
    pub fn gradient_consistency(&self, points: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in points {
            let mut g = vec![0.0; r.len()];
            if self.gradient_into(r, &mut g).is_err() {
                continue;
            }
            let h = 1e-5 * norm_sq(r).sqrt().max(1e-3);
            let mut probe = r.clone();
            let gnorm = norm_sq(&g).sqrt().max(1e-300);
            for i in 0..r.len() {
                probe[i] = r[i] + h;
                let up = self.value_unchecked(&probe);
                probe[i] = r[i] - h;
                let down = self.value_unchecked(&probe);
                probe[i] = r[i];
                let fd = (up - down) / (2.0 * h);
                worst = worst.max((fd - g[i]).abs() / gnorm);
            }
        }
        worst
    }

    pub fn with_term_param(&self, index: usize, name: &str, value: f64) -> Result<Self> {
        let term = self
            .terms
            .get(index)
            .ok_or_else(|| Error::UnknownParameter(format!("no potential term {index}")))?;
        let mut terms = self.terms.clone();
        terms[index] = term.with_param(name, value)?;
        Ok(Self { terms })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Arc::new(Scaled::new(factor, t.clone())) as Arc<dyn PotentialTerm>)
                .collect(),
        }
    }

    pub fn describe(&self) -> Value {
        Value::Array(self.terms.iter().map(|t| t.describe()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(t: impl PotentialTerm + 'static) -> PotentialModel {
        PotentialModel::new(vec![Arc::new(t)])
    }

    #[test]
    fn force_examples() {
        assert_eq!(
            single(Harmonic::new(1.0)).force(&[1.0, 0.0, 0.0]).unwrap(),
            vec![-1.0, 0.0, 0.0]
        );
        let f = single(Coulomb::new(1.0)).force(&[0.0, 2.0, 0.0]).unwrap();
        assert!((f[1] + 0.25).abs() < 1e-15 && f[0] == 0.0);
        assert_eq!(single(Linear::new(2.0)).force(&[3.0]).unwrap(), vec![-2.0]);
    }

    #[test]
    fn coulomb_origin_is_a_domain_error() {
        let m = single(Coulomb::new(1.0));
        assert_eq!(m.force(&[0.0, 0.0]).unwrap_err().name(), "DomainError");
        assert_eq!(m.value(&[0.0, 0.0]).unwrap_err().name(), "DomainError");
    }

    #[test]
    fn virial_of_power_laws_is_homogeneous() {
        let m = single(Coulomb::new(1.0));
        assert!((m.virial(&[1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        let m = single(PowerLawTerm::new(0.7, 4.0, 1.0).unwrap());
        let r = [0.3, -1.1];
        let v = m.value(&r).unwrap();
        assert!((m.virial(&r).unwrap() - 4.0 * v).abs() < 1e-14 * v.abs());
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let m = PotentialModel::new(vec![
            Arc::new(Coulomb::new(0.3)),
            Arc::new(Harmonic::new(1.5)),
            Arc::new(Linear::new(0.2)),
            Arc::new(PowerLawTerm::new(0.1, 4.0, 1.0).unwrap()),
        ]);
        let pts = vec![vec![0.7, 0.2], vec![-1.5, 2.0], vec![3.0, -0.1]];
        assert!(m.gradient_consistency(&pts) < 1e-6);
    }

    #[test]
    fn custom_term_without_gradient_uses_differences() {
        let m = single(CustomTerm::new("quartic", true, |r: &[f64]| norm_sq(r) * norm_sq(r)));
        let f = m.force(&[1.0, 0.0]).unwrap();
        assert!((f[0] + 4.0).abs() < 1e-6);
    }

    #[test]
    fn anisotropic_is_not_central() {
        let t = AnisotropicHarmonic::new(vec![2.0, 4.0]).unwrap();
        assert!(!t.is_central());
        assert!(t.check_dimension(3).is_err());
        assert!(AnisotropicHarmonic::new(vec![1.0, 1.0]).unwrap().is_central());
    }

    #[test]
    fn asymptotes_combine() {
        use Asymptote::*;
        assert_eq!(Asymptote::combine([Finite(0.0), Confining(2.0)]), Confining(2.0));
        assert_eq!(Asymptote::combine([Falling(2.0), Confining(4.0)]), Confining(4.0));
        assert_eq!(Asymptote::combine([Falling(2.0), Confining(2.0)]), Unknown);
        assert_eq!(Asymptote::combine([Finite(1.0), Finite(-0.5)]), Finite(0.5));
    }
}
