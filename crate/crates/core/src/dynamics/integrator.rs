//! Adaptive embedded Runge-Kutta integration with dense output.

use std::fmt;

use crate::dynamics::tableau::*;
use crate::error::{Error, Result};

/// Right-hand side `dy/dt = f(t, y)` written into the last argument.
pub type Rhs<'a> = dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()> + 'a;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Mixed error control: component `i` is accepted when its local error is
/// below `atol[i] + rtol * |y_i|`.
#[derive(Debug, Clone)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: Vec<f64>,
}

impl Tolerance {
    fn scale(&self, y: &[f64], y_new: &[f64], out: &mut [f64]) {
        for i in 0..y.len() {
            out[i] = self.atol[i] + self.rtol * y[i].abs().max(y_new[i].abs());
        }
    }
}

/// Interpolant over one accepted step.
#[derive(Debug, Clone)]
pub enum DenseForm {
    /// `y = y0 + h sum_k q[i][k] x^(k+1)`, four coefficients per component.
    Quartic(Vec<f64>),
    /// Nested degree-7 form over seven rows of coefficients.
    Septic(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    pub y0: Vec<f64>,
    pub form: DenseForm,
}

impl Segment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let x = (t - self.t0) / self.h;
        let n = self.y0.len();
        match &self.form {
            DenseForm::Quartic(q) => {
                for i in 0..n {
                    let c = &q[4 * i..4 * i + 4];
                    let poly = x * (c[0] + x * (c[1] + x * (c[2] + x * c[3])));
                    out[i] = self.y0[i] + self.h * poly;
                }
            }
            DenseForm::Septic(f) => {
                let rows = f.len() / n;
                for i in 0..n {
                    let mut y = 0.0;
                    for (j, k) in (0..rows).rev().enumerate() {
                        y += f[k * n + i];
                        y *= if j % 2 == 0 { x } else { 1.0 - x };
                    }
                    out[i] = y + self.y0[i];
                }
            }
        }
    }
}

/// Result of one trial step.
pub struct Attempt {
    pub y_new: Vec<f64>,
    pub f_new: Vec<f64>,
    pub error_norm: f64,
    /// Stage derivatives, row-major: `stages x n`.
    stages: Vec<f64>,
}

/// An embedded Runge-Kutta pair.
pub trait Stepper: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Order of the embedded error estimator.
    fn error_order(&self) -> u32;

    fn attempt(&self, f: &mut Rhs<'_>, t: f64, y: &[f64], f0: &[f64], h: f64, tol: &Tolerance) -> Result<Attempt>;

    /// Interpolant for an accepted attempt from `(t, y)` with step `h`.
    fn dense(&self, f: &mut Rhs<'_>, attempt: &Attempt, t: f64, y: &[f64], h: f64) -> Result<Segment>;
}

fn combine(stages: &[f64], n: usize, coeffs: &[f64], h: f64, base: &[f64], out: &mut [f64]) {
    out.copy_from_slice(base);
    for (s, &a) in coeffs.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let k = &stages[s * n..(s + 1) * n];
        for i in 0..n {
            out[i] += h * a * k[i];
        }
    }
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

#[allow(clippy::too_many_arguments)]
/// Runs the explicit stages `1..c.len()` given `stages[0] = f0`.
fn run_stages(
    f: &mut Rhs<'_>,
    t: f64,
    y: &[f64],
    h: f64,
    c: &[f64],
    a: &[&[f64]],
    stages: &mut [f64],
    n: usize,
) -> Result<()> {
    let mut ys = vec![0.0; n];
    for s in 1..c.len() {
        let (done, rest) = stages.split_at_mut(s * n);
        combine(done, n, &a[s][..s], h, y, &mut ys);
        f(t + c[s] * h, &ys, &mut rest[..n])?;
    }
    Ok(())
}

/// Dormand-Prince 5(4) with quartic dense output.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dopri5;

impl Stepper for Dopri5 {
    fn name(&self) -> &'static str {
        "dopri5"
    }

    fn error_order(&self) -> u32 {
        4
    }

    fn attempt(&self, f: &mut Rhs<'_>, t: f64, y: &[f64], f0: &[f64], h: f64, tol: &Tolerance) -> Result<Attempt> {
        let n = y.len();
        let mut stages = vec![0.0; 7 * n];
        stages[..n].copy_from_slice(f0);
        let a: Vec<&[f64]> = DP5_A.iter().map(|r| &r[..]).collect();
        run_stages(f, t, y, h, &DP5_C, &a, &mut stages, n)?;
        let mut y_new = vec![0.0; n];
        combine(&stages, n, &DP5_B, h, y, &mut y_new);
        let mut f_new = vec![0.0; n];
        f(t + h, &y_new, &mut f_new)?;
        stages[6 * n..].copy_from_slice(&f_new);

        let mut err = vec![0.0; n];
        combine(&stages, n, &DP5_E, h, &vec![0.0; n], &mut err);
        let mut scale = vec![0.0; n];
        tol.scale(y, &y_new, &mut scale);
        err.iter_mut().zip(&scale).for_each(|(e, s)| *e /= s);
        Ok(Attempt {
            error_norm: rms(&err),
            y_new,
            f_new,
            stages,
        })
    }

    fn dense(&self, _f: &mut Rhs<'_>, attempt: &Attempt, t: f64, y: &[f64], h: f64) -> Result<Segment> {
        let n = y.len();
        let mut q = vec![0.0; 4 * n];
        for i in 0..n {
            for k in 0..4 {
                let mut acc = 0.0;
                for (s, row) in DP5_P.iter().enumerate() {
                    acc += attempt.stages[s * n + i] * row[k];
                }
                q[4 * i + k] = acc;
            }
        }
        Ok(Segment {
            t0: t,
            h,
            y0: y.to_vec(),
            form: DenseForm::Quartic(q),
        })
    }
}

/// Dormand-Prince 8(5,3) with degree-7 dense output.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dop853;

const DOP853_EXTENDED: usize = 16;

impl Stepper for Dop853 {
    fn name(&self) -> &'static str {
        "dop853"
    }

    fn error_order(&self) -> u32 {
        7
    }

    fn attempt(&self, f: &mut Rhs<'_>, t: f64, y: &[f64], f0: &[f64], h: f64, tol: &Tolerance) -> Result<Attempt> {
        let n = y.len();
        let m = DOP853_STAGES;
        let mut stages = vec![0.0; DOP853_EXTENDED * n];
        stages[..n].copy_from_slice(f0);
        let a: Vec<&[f64]> = DOP853_A[..m].iter().map(|r| &r[..]).collect();
        run_stages(f, t, y, h, &DOP853_C[..m], &a, &mut stages, n)?;
        let mut y_new = vec![0.0; n];
        combine(&stages, n, &DOP853_B, h, y, &mut y_new);
        let mut f_new = vec![0.0; n];
        f(t + h, &y_new, &mut f_new)?;
        stages[m * n..(m + 1) * n].copy_from_slice(&f_new);

        let mut scale = vec![0.0; n];
        tol.scale(y, &y_new, &mut scale);
        let zero = vec![0.0; n];
        let mut e5 = vec![0.0; n];
        let mut e3 = vec![0.0; n];
        combine(&stages, n, &DOP853_E5, 1.0, &zero, &mut e5);
        combine(&stages, n, &DOP853_E3, 1.0, &zero, &mut e3);
        let mut n5 = 0.0;
        let mut n3 = 0.0;
        for i in 0..n {
            n5 += (e5[i] / scale[i]).powi(2);
            n3 += (e3[i] / scale[i]).powi(2);
        }
        let error_norm = if n5 == 0.0 && n3 == 0.0 {
            0.0
        } else {
            h.abs() * n5 / ((n5 + 0.01 * n3) * n as f64).sqrt()
        };
        Ok(Attempt {
            y_new,
            f_new,
            error_norm,
            stages,
        })
    }

    fn dense(&self, f: &mut Rhs<'_>, attempt: &Attempt, t: f64, y: &[f64], h: f64) -> Result<Segment> {
        let n = y.len();
        let mut stages = attempt.stages.clone();
        let mut ys = vec![0.0; n];
        for s in DOP853_STAGES + 1..DOP853_EXTENDED {
            let (done, rest) = stages.split_at_mut(s * n);
            combine(done, n, &DOP853_A[s][..s], h, y, &mut ys);
            f(t + DOP853_C[s] * h, &ys, &mut rest[..n])?;
        }
        let mut rows = vec![0.0; 7 * n];
        let f_old = &stages[..n];
        for i in 0..n {
            let dy = attempt.y_new[i] - y[i];
            rows[i] = dy;
            rows[n + i] = h * f_old[i] - dy;
            rows[2 * n + i] = 2.0 * dy - h * (attempt.f_new[i] + f_old[i]);
        }
        for (r, d) in DOP853_D.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (s, c) in d.iter().enumerate() {
                    acc += c * stages[s * n + i];
                }
                rows[(3 + r) * n + i] = h * acc;
            }
        }
        Ok(Segment {
            t0: t,
            h,
            y0: y.to_vec(),
            form: DenseForm::Septic(rows),
        })
    }
}

/// What the driver should do after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates from `(t0, y0)` to `t_end`, calling `observe` with the dense
/// segment of every accepted step.
#[allow(clippy::too_many_arguments)]
pub fn solve(
    stepper: &dyn Stepper,
    f: &mut Rhs<'_>,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    tol: &Tolerance,
    max_steps: usize,
    switches: &[usize],
    observe: &mut dyn FnMut(&Segment, &[f64]) -> Result<Control>,
) -> Result<SolveStats> {
    let n = y0.len();
    if t_end < t0 || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!("end time {t_end} before start {t0}")));
    }
    let mut stats = SolveStats::default();
    if t_end == t0 {
        return Ok(stats);
    }
    let exponent = -1.0 / (stepper.error_order() as f64 + 1.0);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut fy = vec![0.0; n];
    f(t, &y, &mut fy)?;
    let mut h_abs = initial_step(f, t, &y, &fy, t_end - t0, stepper.error_order(), tol)?;

    while t < t_end {
        if stats.accepted >= max_steps {
            return Err(Error::Numerical(format!("step limit {max_steps} reached at t = {t}")));
        }
        let min_step = 10.0 * ((t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE));
        h_abs = h_abs.max(min_step);
        let mut rejected = false;
        let mut landings = 0;
        // linear prediction of the next switching-surface crossing
        let preferred = h_abs;
        let mut capped = false;
        let mut probe: Option<Vec<f64>> = None;
        for &i in switches {
            let gap = -y[i] / fy[i];
            if y[i] == 0.0 || (gap > 0.0 && gap <= 100.0 * min_step) {
                // on the surface: use the derivative of the side being entered
                let side = if y[i] == 0.0 { fy[i].signum() } else { -y[i].signum() };
                if side != 0.0 {
                    probe.get_or_insert_with(|| y.clone())[i] = side * 1e-150;
                }
            } else if gap > 0.0 && gap < h_abs {
                // stop just short so that no stage sees the far side
                h_abs = gap * (1.0 - 1e-9);
                capped = true;
            }
        }
        if let Some(yp) = probe {
            f(t, &yp, &mut fy)?;
        }
        let (attempt, h) = loop {
            if h_abs < min_step {
                return Err(Error::Singularity(format!("step size underflow at t = {t}")));
            }
            let t_new = (t + h_abs).min(t_end);
            let h = t_new - t;
            h_abs = h;
            let trial = match stepper.attempt(f, t, &y, &fy, h, tol) {
                Ok(a) if a.error_norm.is_finite() && a.y_new.iter().all(|v| v.is_finite()) => Ok(a),
                Ok(_) => Err(Error::Numerical("non-finite trial step".into())),
                Err(e) => Err(e),
            };
            if let Ok(a) = &trial {
                if landings < MAX_LANDINGS {
                    if let Some(theta) = first_crossing(stepper, f, a, t, &y, h, switches)? {
                        if theta < 1.0 - 1e-9 {
                            landings += 1;
                            h_abs = (theta * h * (1.0 - 1e-9)).max(min_step);
                            continue;
                        }
                    }
                }
            }
            match trial {
                Ok(a) if a.error_norm < 1.0 => {
                    let mut factor = if a.error_norm == 0.0 {
                        MAX_FACTOR
                    } else {
                        MAX_FACTOR.min(SAFETY * a.error_norm.powf(exponent))
                    };
                    if rejected {
                        factor = factor.min(1.0);
                    }
                    h_abs *= factor;
                    break (a, h);
                }
                Ok(a) => {
                    h_abs *= MIN_FACTOR.max(SAFETY * a.error_norm.powf(exponent));
                }
                // a trial stage left the domain: shrink and retry
                Err(Error::Domain(_) | Error::Numerical(_) | Error::Admissibility(_)) => {
                    h_abs *= 0.25;
                }
                Err(e) => return Err(e),
            }
            stats.rejected += 1;
            rejected = true;
        };
        if capped {
            h_abs = h_abs.max(preferred);
        }
        let seg = stepper.dense(f, &attempt, t, &y, h)?;
        t = if t + h >= t_end { t_end } else { t + h };
        y = attempt.y_new;
        fy = attempt.f_new;
        stats.accepted += 1;
        if observe(&seg, &y)? == Control::Stop {
            break;
        }
    }
    Ok(stats)
}

/// Attempts per step spent landing on a switching surface.
const MAX_LANDINGS: usize = 8;

/// Fraction of the step at which the first listed component changes sign,
/// located on the attempt's interpolant.
fn first_crossing(
    stepper: &dyn Stepper,
    f: &mut Rhs<'_>,
    a: &Attempt,
    t: f64,
    y: &[f64],
    h: f64,
    switches: &[usize],
) -> Result<Option<f64>> {
    let hits: Vec<usize> = switches.iter().copied().filter(|&i| y[i] * a.y_new[i] < 0.0).collect();
    if hits.is_empty() {
        return Ok(None);
    }
    let seg = stepper.dense(f, a, t, y, h)?;
    let mut buf = vec![0.0; y.len()];
    let mut best: Option<f64> = None;
    for i in hits {
        let root = crate::roots::brent_with_values(
            |s| {
                seg.eval_into(t + s * h, &mut buf);
                buf[i]
            },
            0.0,
            y[i],
            1.0,
            a.y_new[i],
            1e-15,
            0.0,
            200,
        )?;
        best = Some(best.map_or(root, |b: f64| b.min(root)));
    }
    Ok(best)
}

fn initial_step(
    f: &mut Rhs<'_>,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    span: f64,
    order: u32,
    tol: &Tolerance,
) -> Result<f64> {
    let n = y0.len();
    let scale: Vec<f64> = (0..n).map(|i| tol.atol[i] + y0[i].abs() * tol.rtol).collect();
    let d0 = rms(&y0.iter().zip(&scale).map(|(y, s)| y / s).collect::<Vec<_>>());
    let d1 = rms(&f0.iter().zip(&scale).map(|(y, s)| y / s).collect::<Vec<_>>());
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(span);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    let d2 = match f(t0 + h0, &y1, &mut f1) {
        Ok(()) => rms(&(0..n).map(|i| (f1[i] - f0[i]) / scale[i]).collect::<Vec<_>>()) / h0,
        Err(_) => return Ok(h0 * 1e-3),
    };
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / (order as f64 + 1.0))
    };
    Ok((100.0 * h0).min(h1).min(span))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(stepper: &dyn Stepper) -> (f64, Vec<Segment>) {
        let mut f = |_t: f64, y: &[f64], out: &mut [f64]| {
            out[0] = -y[0];
            Ok(())
        };
        let tol = Tolerance {
            rtol: 1e-10,
            atol: vec![1e-12],
        };
        let mut segs = Vec::new();
        let mut last = 0.0;
        solve(stepper, &mut f, 0.0, &[1.0], 3.0, &tol, 100_000, &[], &mut |s, y| {
            segs.push(s.clone());
            last = y[0];
            Ok(Control::Continue)
        })
        .unwrap();
        (last, segs)
    }

    #[test]
    fn exponential_decay_end_value() {
        for st in [&Dopri5 as &dyn Stepper, &Dop853] {
            let (y, _) = decay(st);
            assert!((y - (-3f64).exp()).abs() < 1e-9, "{}: {y}", st.name());
        }
    }

    #[test]
    fn dense_output_matches_solution_inside_steps() {
        for st in [&Dopri5 as &dyn Stepper, &Dop853] {
            let (_, segs) = decay(st);
            let mut out = [0.0];
            for s in &segs {
                for frac in [0.0, 0.3, 0.77, 1.0] {
                    let t = s.t0 + frac * s.h;
                    s.eval_into(t, &mut out);
                    assert!((out[0] - (-t).exp()).abs() < 1e-8, "{} at {t}", st.name());
                }
            }
        }
    }

    #[test]
    fn harmonic_oscillator_returns() {
        let mut f = |_t: f64, y: &[f64], out: &mut [f64]| {
            out[0] = y[1];
            out[1] = -y[0];
            Ok(())
        };
        let tol = Tolerance {
            rtol: 1e-12,
            atol: vec![1e-12; 2],
        };
        let mut end = vec![];
        solve(
            &Dop853,
            &mut f,
            0.0,
            &[1.0, 0.0],
            2.0 * std::f64::consts::PI,
            &tol,
            100_000,
            &[],
            &mut |_, y| {
                end = y.to_vec();
                Ok(Control::Continue)
            },
        )
        .unwrap();
        assert!((end[0] - 1.0).abs() < 1e-10 && end[1].abs() < 1e-10, "{end:?}");
    }
}
