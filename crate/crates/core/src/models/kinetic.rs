//! Kinetic kernels `T(p) = K(p^2)`.
//!
//! A kernel only knows `K` as a function of the squared momentum `x = p^2`.
//! [`KineticModel`] wraps a kernel together with its sampled admissibility
//! report and provides the vector-valued maps used by the dynamics: the
//! velocity `2 K'(p^2) p` and its inverse through `Q`, the inverse of the
//! squared-speed map `g(x) = 4 x K'(x)^2`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::roots;

pub trait KineticKernel: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    /// `K(x)`.
    fn value(&self, x: f64) -> f64;

    /// `K'(x)`.
    fn slope(&self, x: f64) -> f64;

    /// `p . dT/dp = 2 x K'(x)`.
    fn virial(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            2.0 * x * self.slope(x)
        }
    }

    /// Closed-form `K^{-1}(t)`, if the kernel has one.
    fn inverse(&self, _t: f64) -> Option<f64> {
        None
    }

    /// False when the velocity `2 K'(p^2) p` is not smooth at `p = 0`.
    fn smooth_at_zero(&self) -> bool {
        true
    }

    /// Closed-form `K^{-1}(K(0) + excess)`, for kernels where adding the
    /// rest value back would lose precision.
    fn inverse_above_rest(&self, excess: f64) -> Option<f64> {
        self.inverse(self.value(0.0) + excess)
    }

    /// Closed-form `Q(s)`, the inverse of `g(x) = 4 x K'(x)^2`. A non-finite
    /// result means `s` lies outside the range of `g`.
    fn speed_inverse(&self, _s: f64) -> Option<f64> {
        None
    }

    fn params(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn with_param(&self, name: &str, _value: f64) -> Result<Arc<dyn KineticKernel>> {
        Err(Error::UnknownParameter(format!(
            "{} has no parameter `{name}`",
            self.name()
        )))
    }

    /// `dK/d(param)` at fixed `x`, when known in closed form.
    fn param_slope(&self, _name: &str, _x: f64) -> Option<f64> {
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

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// `K(x) = x / 2m`.
#[derive(Debug, Clone)]
pub struct NonRelativistic {
    mass: f64,
}

impl NonRelativistic {
    pub fn new(mass: f64) -> Result<Self> {
        Ok(Self {
            mass: positive("mass", mass)?,
        })
    }
}

impl KineticKernel for NonRelativistic {
    fn name(&self) -> &str {
        "nonrelativistic"
    }
    fn value(&self, x: f64) -> f64 {
        x / (2.0 * self.mass)
    }
    fn slope(&self, _x: f64) -> f64 {
        0.5 / self.mass
    }
    fn virial(&self, x: f64) -> f64 {
        x / self.mass
    }
    fn inverse(&self, t: f64) -> Option<f64> {
        Some(2.0 * self.mass * t)
    }
    fn speed_inverse(&self, s: f64) -> Option<f64> {
        Some(self.mass * self.mass * s)
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("mass".into(), self.mass)]
    }
    fn with_param(&self, name: &str, value: f64) -> Result<Arc<dyn KineticKernel>> {
        match name {
            "mass" => Ok(Arc::new(Self::new(value)?)),
            _ => Err(Error::UnknownParameter(format!("nonrelativistic has no `{name}`"))),
        }
    }
    fn param_slope(&self, name: &str, x: f64) -> Option<f64> {
        (name == "mass").then(|| -x / (2.0 * self.mass * self.mass))
    }
}

/// `K(x) = sqrt(x + m^2) - m`, or `sqrt(x + m^2)` without rest-mass
/// subtraction. Natural units, `c = 1`.
#[derive(Debug, Clone)]
pub struct Relativistic {
    mass: f64,
    subtract_rest_mass: bool,
}

impl Relativistic {
    pub fn new(mass: f64, subtract_rest_mass: bool) -> Result<Self> {
        Ok(Self {
            mass: positive("mass", mass)?,
            subtract_rest_mass,
        })
    }
}

impl KineticKernel for Relativistic {
    fn name(&self) -> &str {
        "relativistic"
    }
    fn value(&self, x: f64) -> f64 {
        let root = (x + self.mass * self.mass).sqrt();
        if self.subtract_rest_mass {
            // sqrt(x + m^2) - m without cancellation
            x / (root + self.mass)
        } else {
            root
        }
    }
    fn slope(&self, x: f64) -> f64 {
        0.5 / (x + self.mass * self.mass).sqrt()
    }
    fn virial(&self, x: f64) -> f64 {
        x / (x + self.mass * self.mass).sqrt()
    }
    fn inverse(&self, t: f64) -> Option<f64> {
        let m = self.mass;
        Some(if self.subtract_rest_mass {
            t * (t + 2.0 * m)
        } else {
            (t - m) * (t + m)
        })
    }
    fn inverse_above_rest(&self, excess: f64) -> Option<f64> {
        Some(excess * (excess + 2.0 * self.mass))
    }
    fn speed_inverse(&self, s: f64) -> Option<f64> {
        Some(if s < 1.0 {
            s * self.mass * self.mass / (1.0 - s)
        } else {
            f64::INFINITY
        })
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![
            ("mass".into(), self.mass),
            (
                "subtract_rest_mass".into(),
                if self.subtract_rest_mass { 1.0 } else { 0.0 },
            ),
        ]
    }
    fn with_param(&self, name: &str, value: f64) -> Result<Arc<dyn KineticKernel>> {
        match name {
            "mass" => Ok(Arc::new(Self::new(value, self.subtract_rest_mass)?)),
            _ => Err(Error::UnknownParameter(format!("relativistic has no `{name}`"))),
        }
    }
    fn param_slope(&self, name: &str, x: f64) -> Option<f64> {
        if name != "mass" {
            return None;
        }
        let m = self.mass;
        let r = m / (x + m * m).sqrt();
        Some(if self.subtract_rest_mass { r - 1.0 } else { r })
    }
    fn describe(&self) -> Value {
        json!({
            "kind": "relativistic",
            "mass": self.mass,
            "subtract_rest_mass": self.subtract_rest_mass,
        })
    }
}

/// `T = A |p|^beta`, i.e. `K(x) = A x^(beta/2)`. `beta = 1` is the
/// ultrarelativistic massless kernel.
#[derive(Debug, Clone)]
pub struct PowerLawKernel {
    amplitude: f64,
    exponent: f64,
}

impl PowerLawKernel {
    pub fn new(amplitude: f64, exponent: f64) -> Result<Self> {
        Ok(Self {
            amplitude: positive("amplitude", amplitude)?,
            exponent: positive("exponent", exponent)?,
        })
    }
}

impl KineticKernel for PowerLawKernel {
    fn name(&self) -> &str {
        "power_law"
    }
    fn value(&self, x: f64) -> f64 {
        self.amplitude * x.powf(0.5 * self.exponent)
    }
    fn slope(&self, x: f64) -> f64 {
        0.5 * self.amplitude * self.exponent * x.powf(0.5 * self.exponent - 1.0)
    }
    fn virial(&self, x: f64) -> f64 {
        self.exponent * self.value(x)
    }
    fn smooth_at_zero(&self) -> bool {
        self.exponent % 2.0 == 0.0
    }
    fn inverse(&self, t: f64) -> Option<f64> {
        Some((t / self.amplitude).powf(2.0 / self.exponent))
    }
    fn speed_inverse(&self, s: f64) -> Option<f64> {
        let (a, b) = (self.amplitude, self.exponent);
        if b > 1.0 {
            Some((s / (a * a * b * b)).powf(1.0 / (b - 1.0)))
        } else {
            None
        }
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("amplitude".into(), self.amplitude), ("exponent".into(), self.exponent)]
    }
    fn with_param(&self, name: &str, value: f64) -> Result<Arc<dyn KineticKernel>> {
        match name {
            "amplitude" => Ok(Arc::new(Self::new(value, self.exponent)?)),
            "exponent" => Ok(Arc::new(Self::new(self.amplitude, value)?)),
            _ => Err(Error::UnknownParameter(format!("power_law has no `{name}`"))),
        }
    }
    fn param_slope(&self, name: &str, x: f64) -> Option<f64> {
        let half = 0.5 * self.exponent;
        match name {
            "amplitude" => Some(x.powf(half)),
            "exponent" if x > 0.0 => Some(0.5 * self.amplitude * x.powf(half) * x.ln()),
            "exponent" => Some(0.0),
            _ => None,
        }
    }
}

/// `K(x) = sum_i c_i x^i`. Mostly useful for trying kernels from a config
/// file, including inadmissible ones.
#[derive(Debug, Clone)]
pub struct PolynomialKernel {
    coefficients: Vec<f64>,
}

impl PolynomialKernel {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "polynomial kernel needs finite coefficients".into(),
            ));
        }
        Ok(Self { coefficients })
    }
}

impl KineticKernel for PolynomialKernel {
    fn name(&self) -> &str {
        "polynomial"
    }
    fn value(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
    fn slope(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * x + i as f64 * c)
    }
    fn params(&self) -> Vec<(String, f64)> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("c{i}"), *c))
            .collect()
    }
    fn with_param(&self, name: &str, value: f64) -> Result<Arc<dyn KineticKernel>> {
        let idx = name
            .strip_prefix('c')
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|i| *i < self.coefficients.len())
            .ok_or_else(|| Error::UnknownParameter(format!("polynomial has no `{name}`")))?;
        let mut c = self.coefficients.clone();
        c[idx] = value;
        Ok(Arc::new(Self::new(c)?))
    }
    fn param_slope(&self, name: &str, x: f64) -> Option<f64> {
        let idx: i32 = name.strip_prefix('c')?.parse().ok()?;
        Some(x.powi(idx))
    }
    fn describe(&self) -> Value {
        json!({"kind": "polynomial", "coefficients": self.coefficients})
    }
}

/// `K(x) = sum_i w_i K_i(x)`. Used for interpolated Hamiltonians and for
/// uniformly rescaled ones.
#[derive(Debug, Clone)]
pub struct LinearCombination {
    parts: Vec<(f64, Arc<dyn KineticKernel>)>,
}

impl LinearCombination {
    pub fn new(parts: Vec<(f64, Arc<dyn KineticKernel>)>) -> Self {
        Self { parts }
    }
}

impl KineticKernel for LinearCombination {
    fn name(&self) -> &str {
        "combination"
    }
    fn value(&self, x: f64) -> f64 {
        self.parts.iter().map(|(w, k)| w * k.value(x)).sum()
    }
    fn slope(&self, x: f64) -> f64 {
        self.parts
            .iter()
            .filter(|(w, _)| *w != 0.0)
            .map(|(w, k)| w * k.slope(x))
            .sum()
    }
    fn virial(&self, x: f64) -> f64 {
        self.parts
            .iter()
            .filter(|(w, _)| *w != 0.0)
            .map(|(w, k)| w * k.virial(x))
            .sum()
    }
    fn smooth_at_zero(&self) -> bool {
        self.parts.iter().all(|(w, k)| *w == 0.0 || k.smooth_at_zero())
    }
    fn describe(&self) -> Value {
        let parts: Vec<Value> = self
            .parts
            .iter()
            .map(|(w, k)| json!({"weight": w, "kernel": k.describe()}))
            .collect();
        json!({"kind": "combination", "parts": parts})
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Kernel given by user callables.
#[derive(Clone)]
pub struct CustomKernel {
    label: String,
    value: ScalarFn,
    slope: ScalarFn,
    inverse: Option<ScalarFn>,
    speed_inverse: Option<ScalarFn>,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel").field("label", &self.label).finish()
    }
}

impl CustomKernel {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        slope: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(value),
            slope: Arc::new(slope),
            inverse: None,
            speed_inverse: None,
        }
    }

    pub fn with_inverse(mut self, inv: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.inverse = Some(Arc::new(inv));
        self
    }

    pub fn with_speed_inverse(mut self, q: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.speed_inverse = Some(Arc::new(q));
        self
    }
}

impl KineticKernel for CustomKernel {
    fn name(&self) -> &str {
        "custom"
    }
    fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }
    fn slope(&self, x: f64) -> f64 {
        (self.slope)(x)
    }
    fn inverse(&self, t: f64) -> Option<f64> {
        self.inverse.as_ref().map(|f| f(t))
    }
    fn speed_inverse(&self, s: f64) -> Option<f64> {
        self.speed_inverse.as_ref().map(|f| f(s))
    }
    fn describe(&self) -> Value {
        json!({"kind": "custom", "label": self.label})
    }
}

/// Location and kind of the first failed admissibility check.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Violation {
    pub check: &'static str,
    pub x: f64,
}

/// Sampled admissibility verdicts for a kernel on `(0, x_max]`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ValidationReport {
    pub x_min: f64,
    pub x_max: f64,
    pub n_samples: usize,
    pub finite_at_zero: bool,
    pub slope_positive: bool,
    pub strictly_increasing: bool,
    pub velocity_map_invertible: bool,
    pub min_slope: f64,
    /// `g(x_max)`, the largest squared speed reachable on the domain.
    pub max_speed_sq: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn admissible(&self) -> bool {
        self.finite_at_zero && self.slope_positive && self.strictly_increasing
    }
}

/// Ratio between the top and the bottom of the log-spaced sampling grid.
const SAMPLE_DECADES: f64 = 16.0;

/// Checks `K' > 0`, monotonicity of `K` and of `g(x) = 4 x K'(x)^2` on
/// `n_samples` log-spaced points of `(0, x_max]`. `x = 0` itself is only
/// checked for finiteness of `K`.
pub fn validate_kinetic(kernel: &dyn KineticKernel, x_max: f64, n_samples: usize) -> Result<ValidationReport> {
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("x_max must be positive, got {x_max}")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter("validation needs at least 2 samples".into()));
    }
    let x_min = x_max * 10f64.powf(-SAMPLE_DECADES);
    let ratio = (x_max / x_min).ln() / (n_samples - 1) as f64;
    let xs: Vec<f64> = (0..n_samples)
        .map(|i| {
            if i + 1 == n_samples {
                x_max
            } else {
                x_min * (ratio * i as f64).exp()
            }
        })
        .collect();

    let mut violations = Vec::new();
    let k0 = kernel.value(0.0);
    let finite_at_zero = k0.is_finite();
    if !finite_at_zero {
        violations.push(Violation {
            check: "finite_at_zero",
            x: 0.0,
        });
    }

    let mut slope_positive = true;
    let mut increasing = true;
    let mut g_increasing = true;
    let mut min_slope = f64::INFINITY;
    let mut prev_k = k0;
    let mut prev_g = f64::NEG_INFINITY;
    for &x in &xs {
        let k = kernel.value(x);
        let d = kernel.slope(x);
        min_slope = min_slope.min(d);
        if !(d > 0.0) || !d.is_finite() {
            if slope_positive {
                violations.push(Violation {
                    check: "slope_positive",
                    x,
                });
            }
            slope_positive = false;
        }
        if !(k > prev_k) || !k.is_finite() {
            if increasing {
                violations.push(Violation {
                    check: "strictly_increasing",
                    x,
                });
            }
            increasing = false;
        }
        let g = 4.0 * x * d * d;
        if !(g > prev_g) || !g.is_finite() {
            if g_increasing {
                violations.push(Violation {
                    check: "velocity_map_invertible",
                    x,
                });
            }
            g_increasing = false;
        }
        prev_k = k;
        prev_g = g;
    }
    let d_max = kernel.slope(x_max);
    Ok(ValidationReport {
        x_min,
        x_max,
        n_samples,
        finite_at_zero,
        slope_positive,
        strictly_increasing: increasing,
        velocity_map_invertible: g_increasing && slope_positive,
        min_slope,
        max_speed_sq: 4.0 * x_max * d_max * d_max,
        violations,
    })
}

/// A validated kernel.
#[derive(Debug, Clone)]
pub struct KineticModel {
    kernel: Arc<dyn KineticKernel>,
    report: ValidationReport,
    rest_value: f64,
}

impl KineticModel {
    pub const DEFAULT_DOMAIN: f64 = 1e8;
    pub const DEFAULT_SAMPLES: usize = 512;

    pub fn new(kernel: Arc<dyn KineticKernel>) -> Result<Self> {
        Self::with_domain(kernel, Self::DEFAULT_DOMAIN, Self::DEFAULT_SAMPLES)
    }

    /// Validates `kernel` on `(0, x_max]` and rejects it unless `K' > 0` and
    /// `K` is increasing there. Non-invertible velocity maps are accepted.
    pub fn with_domain(kernel: Arc<dyn KineticKernel>, x_max: f64, n_samples: usize) -> Result<Self> {
        let report = validate_kinetic(kernel.as_ref(), x_max, n_samples)?;
        if !report.admissible() {
            let v = report.violations.first().cloned();
            return Err(Error::Admissibility(match v {
                Some(v) => format!("{} fails `{}` at x = {:e}", kernel.name(), v.check, v.x),
                None => kernel.name().to_string(),
            }));
        }
        let rest_value = kernel.value(0.0);
        Ok(Self {
            kernel,
            report,
            rest_value,
        })
    }

    pub fn kernel(&self) -> &Arc<dyn KineticKernel> {
        &self.kernel
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn x_max(&self) -> f64 {
        self.report.x_max
    }

    /// `K(0)`, the smallest kinetic energy.
    pub fn rest_value(&self) -> f64 {
        self.rest_value
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if x.is_finite() && x <= self.report.x_max * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "p^2 = {x:e} outside validated range (0, {:e}]",
                self.report.x_max
            )))
        }
    }

    /// `T(p) = K(|p|^2)`.
    pub fn energy(&self, p: &[f64]) -> Result<f64> {
        let x = norm_sq(p);
        self.check_domain(x)?;
        Ok(self.kernel.value(x))
    }

    /// `dr/dt = 2 K'(p^2) p`, written into `out`.
    pub fn velocity_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        let x = norm_sq(p);
        self.check_domain(x)?;
        if x == 0.0 {
            out.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        let d = self.kernel.slope(x);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Admissibility(format!("K'({x:e}) = {d:e}")));
        }
        let scale = 2.0 * d;
        for (o, pi) in out.iter_mut().zip(p) {
            *o = scale * pi;
        }
        Ok(())
    }

    pub fn velocity(&self, p: &[f64]) -> Result<Vec<f64>> {
        let mut v = vec![0.0; p.len()];
        self.velocity_into(p, &mut v)?;
        Ok(v)
    }

    /// `Q(s)`: the squared momentum whose squared speed is `s`.
    pub fn speed_inverse(&self, s: f64) -> Result<f64> {
        if !self.report.velocity_map_invertible {
            return Err(Error::NonInvertibleVelocityMap);
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        if !(s > 0.0) || s > self.report.max_speed_sq {
            return Err(Error::Domain(format!(
                "squared speed {s:e} outside range of the velocity map (max {:e})",
                self.report.max_speed_sq
            )));
        }
        let x = match self.kernel.speed_inverse(s) {
            Some(x) => x,
            None => {
                let k = &self.kernel;
                roots::solve_increasing(
                    |x| {
                        let d = k.slope(x);
                        4.0 * x * d * d
                    },
                    s,
                    1e-300,
                    1.0,
                    self.report.x_max,
                )?
            }
        };
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("squared speed {s:e} has no preimage")));
        }
        self.check_domain(x)?;
        Ok(x)
    }

    /// `p = v / (2 K'(Q(v^2)))`.
    pub fn momentum(&self, v: &[f64]) -> Result<Vec<f64>> {
        let x = self.speed_inverse(norm_sq(v))?;
        if x == 0.0 {
            return Ok(vec![0.0; v.len()]);
        }
        let scale = 0.5 / self.kernel.slope(x);
        Ok(v.iter().map(|vi| vi * scale).collect())
    }

    /// `K^{-1}(t)`: the squared momentum carrying kinetic energy `t`.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        if t < self.rest_value || t.is_nan() {
            return Err(Error::Domain(format!(
                "kinetic energy {t:e} below K(0) = {:e}",
                self.rest_value
            )));
        }
        if t == self.rest_value {
            return Ok(0.0);
        }
        if let Some(x) = self.kernel.inverse(t) {
            return Ok(x.max(0.0));
        }
        let k = &self.kernel;
        roots::solve_increasing(|x| k.value(x), t, 0.0, 1.0, f64::MAX / 8.0)
    }

    /// `K^{-1}(K(0) + excess)`, accurate for small `excess`.
    pub fn inverse_above_rest(&self, excess: f64) -> Result<f64> {
        if excess < 0.0 || excess.is_nan() {
            return Err(Error::Domain(format!("kinetic energy {excess:e} below K(0)")));
        }
        if excess == 0.0 {
            return Ok(0.0);
        }
        if let Some(x) = self.kernel.inverse_above_rest(excess) {
            return Ok(x.max(0.0));
        }
        let k = &self.kernel;
        let rest = self.rest_value;
        roots::solve_increasing(|x| k.value(x) - rest, excess, 0.0, 1.0, f64::MAX / 8.0)
    }

    /// `p . dT/dp`.
    pub fn virial(&self, p: &[f64]) -> f64 {
        self.kernel.virial(norm_sq(p))
    }
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}
