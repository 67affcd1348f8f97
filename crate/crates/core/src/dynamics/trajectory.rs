//! Integrated trajectories with dense output.

use std::io::{self, Write};
use std::sync::Arc;

use crate::dynamics::integrator::{self, Control, Dopri5, Segment, Stepper, Tolerance};
use crate::dynamics::system::{angular_momentum, PhaseState, SystemSpec};
use crate::error::{Error, Result};
use crate::models::kinetic::norm_sq;

#[derive(Debug, Clone)]
pub struct IntegrationOptions {
    /// Relative local tolerance, in `[1e-14, 1e-3]`.
    pub tol: f64,
    pub stepper: Arc<dyn Stepper>,
    pub max_steps: usize,
    /// Stop once `|r|` exceeds this multiple of the initial length scale.
    pub escape_factor: Option<f64>,
    /// Largest relative energy drift accepted; `None` picks
    /// `max(1e-6, 1e4 tol)`.
    pub drift_budget: Option<f64>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            stepper: Arc::new(Dopri5),
            max_steps: 20_000_000,
            escape_factor: None,
            drift_budget: None,
        }
    }
}

impl IntegrationOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    system: SystemSpec,
    samples: Vec<PhaseState>,
    energies: Vec<f64>,
    segments: Vec<Segment>,
    tol: f64,
    e_scale: f64,
    drift: f64,
    drift_budget: f64,
    escaped: bool,
    rejected_steps: usize,
}

/// Length and momentum scales of a state, used for absolute tolerances.
fn state_scales(system: &SystemSpec, state: &PhaseState) -> (f64, f64) {
    let rs = norm_sq(&state.r).sqrt();
    let mut ps = norm_sq(&state.p).sqrt();
    if ps == 0.0 {
        let v = system.potential().value_unchecked(&state.r).abs();
        let e = system.energy(state).map(|e| e.abs()).unwrap_or(0.0);
        ps = system.kinetic().inverse_above_rest(v + e).map(f64::sqrt).unwrap_or(0.0);
    }
    let ps = if ps > 0.0 { ps } else { 1.0 };
    if rs > 0.0 {
        return (rs, ps);
    }
    // at the origin: distance covered in the time the force needs to
    // change the momentum by its own size
    let mut f = vec![0.0; 2 * state.dim()];
    let d = state.dim();
    let mut probe = state.clone();
    if probe.p.iter().all(|x| *x == 0.0) {
        probe.p[0] = ps;
    }
    let rs = match system.rhs(&probe.packed(), &mut f) {
        Ok(()) => {
            let v = norm_sq(&f[..d]).sqrt();
            let force = norm_sq(&f[d..]).sqrt();
            if v > 0.0 && force > 0.0 {
                v * ps / force
            } else {
                1.0
            }
        }
        Err(_) => 1.0,
    };
    (rs, ps)
}

/// Integrates Hamilton's equations `dr/dt = 2 K'(p^2) p`, `dp/dt = -grad V`
/// with the default Dormand-Prince 5(4) pair.
pub fn integrate(system: &SystemSpec, initial: &PhaseState, t_end: f64, tol: f64) -> Result<Trajectory> {
    integrate_with(system, initial, t_end, &IntegrationOptions::with_tol(tol))
}

pub fn integrate_with(
    system: &SystemSpec,
    initial: &PhaseState,
    t_end: f64,
    options: &IntegrationOptions,
) -> Result<Trajectory> {
    system.check_state(initial)?;
    let tol = options.tol;
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol:e} outside [1e-14, 1e-3]"
        )));
    }
    let d = system.dim();
    let e0 = system.energy(initial)?;
    let (rs, ps) = state_scales(system, initial);
    let mut atol = vec![tol * rs; d];
    atol.extend(std::iter::repeat_n(tol * ps, d));
    let tolerance = Tolerance { rtol: tol, atol };
    let r_min = if system.potential().singular_at_origin() {
        1e-8 * rs
    } else {
        0.0
    };
    let escape = options.escape_factor.map(|f| f * rs);

    let mut samples = vec![initial.clone()];
    let mut energies = vec![e0];
    let mut segments = Vec::new();
    let mut escaped = false;
    let mut sum_t = system.kinetic().energy(&initial.p)?;
    let mut sum_v = e0 - sum_t;

    let mut rhs = |_t: f64, y: &[f64], out: &mut [f64]| system.rhs(y, out);
    let mut observe = |seg: &Segment, y: &[f64]| -> Result<Control> {
        let t = seg.t1();
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite state at t = {t}")));
        }
        let (r, p) = y.split_at(d);
        let rad = norm_sq(r).sqrt();
        if rad < r_min {
            return Err(Error::Singularity(format!(
                "|r| = {rad:e} below guard radius {r_min:e} at t = {t}"
            )));
        }
        let kin = system.kinetic().energy(p)?;
        let pot = system.potential().value(r)?;
        sum_t += kin;
        sum_v += pot;
        samples.push(PhaseState {
            t,
            r: r.to_vec(),
            p: p.to_vec(),
        });
        energies.push(kin + pot);
        segments.push(seg.clone());
        if escape.is_some_and(|lim| rad > lim) {
            escaped = true;
            return Ok(Control::Stop);
        }
        Ok(Control::Continue)
    };
    let stats = integrator::solve(
        options.stepper.as_ref(),
        &mut rhs,
        initial.t,
        &initial.packed(),
        t_end,
        &tolerance,
        options.max_steps,
        &system.switching_components(),
        &mut observe,
    )?;
    if let Some(last) = samples.last_mut() {
        if !escaped && (last.t - t_end).abs() <= 4.0 * f64::EPSILON * t_end.abs() {
            last.t = t_end;
        }
    }

    let n = samples.len() as f64;
    let e_scale = (sum_t / n).abs() + (sum_v / n).abs();
    let denom = e0.abs().max(e_scale).max(f64::MIN_POSITIVE);
    let drift = energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / denom;
    let drift_budget = options.drift_budget.unwrap_or((1e4 * tol).max(1e-6));
    if drift > drift_budget {
        return Err(Error::Numerical(format!(
            "relative energy drift {drift:e} exceeds budget {drift_budget:e}"
        )));
    }
    Ok(Trajectory {
        system: system.clone(),
        samples,
        energies,
        segments,
        tol,
        e_scale,
        drift,
        drift_budget,
        escaped,
        rejected_steps: stats.rejected,
    })
}

impl Trajectory {
    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn samples(&self) -> &[PhaseState] {
        &self.samples
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn initial(&self) -> &PhaseState {
        &self.samples[0]
    }

    pub fn last(&self) -> &PhaseState {
        &self.samples[self.samples.len() - 1]
    }

    pub fn initial_energy(&self) -> f64 {
        self.energies[0]
    }

    /// `<T> + |<V>|` estimated from the step samples.
    pub fn e_scale(&self) -> f64 {
        self.e_scale
    }

    /// Largest `|H_i - H_0| / max(|H_0|, E_scale)` over the samples.
    pub fn energy_drift(&self) -> f64 {
        self.drift
    }

    pub fn drift_budget(&self) -> f64 {
        self.drift_budget
    }

    /// True when integration stopped early on the escape radius.
    pub fn escaped(&self) -> bool {
        self.escaped
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected_steps
    }

    pub(crate) fn check_window(&self, start: f64, end: f64) -> Result<()> {
        let slack = 8.0 * f64::EPSILON * self.end().abs().max(self.start().abs());
        if start < self.start() - slack || end > self.end() + slack || end < start || !end.is_finite() {
            return Err(Error::Range {
                start,
                end,
                span_start: self.start(),
                span_end: self.end(),
            });
        }
        Ok(())
    }

    /// Index of the segment containing `t`.
    pub(crate) fn segment_index(&self, t: f64) -> usize {
        let idx = self.segments.partition_point(|s| s.t1() < t);
        idx.min(self.segments.len().saturating_sub(1))
    }

    /// Dense-output state at time `t` written into `state`.
    pub fn state_into(&self, t: f64, state: &mut PhaseState) -> Result<()> {
        self.check_window(t, t)?;
        if self.segments.is_empty() {
            state.clone_from(&self.samples[0]);
            return Ok(());
        }
        let seg = &self.segments[self.segment_index(t)];
        let mut y = [0.0; 6];
        let n = seg.y0.len();
        seg.eval_into(t, &mut y[..n]);
        state.unpack_into(t, &y[..n]);
        Ok(())
    }

    pub fn state_at(&self, t: f64) -> Result<PhaseState> {
        let mut s = self.samples[0].clone();
        self.state_into(t, &mut s)?;
        Ok(s)
    }

    /// Writes `t, r..., p..., H, |J|` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.system.dim();
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("r{i}")));
        header.extend((1..=d).map(|i| format!("p{i}")));
        header.push("H".into());
        header.push("J".into());
        writeln!(w, "{}", header.join(","))?;
        for (s, e) in self.samples.iter().zip(&self.energies) {
            let j = angular_momentum(s).map(|j| norm_sq(&j).sqrt()).unwrap_or(0.0);
            let mut row = Vec::with_capacity(2 * d + 3);
            row.push(fmt17(s.t));
            row.extend(s.r.iter().map(|x| fmt17(*x)));
            row.extend(s.p.iter().map(|x| fmt17(*x)));
            row.push(fmt17(*e));
            row.push(fmt17(j));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Seventeen significant digits, correctly rounded.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
