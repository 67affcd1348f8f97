//! Acceptance suite: one test per criterion, each printing a PASS or FAIL
//! line. Run with `cargo test -p gkh-cli --test acceptance -- --nocapture`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use gkh_core::dynamics::{
    action_along, angular_momentum, find_period, integrate, time_average, PhaseState, SystemSpec, Window,
};
use gkh_core::error::Error;
use gkh_core::models::{
    validate_kinetic, Coulomb, CustomKernel, Harmonic, KineticKernel, KineticModel, Linear, NonRelativistic,
    ParamBinding, PotentialModel, PotentialTerm, PowerLawKernel, PowerLawTerm, Relativistic,
};
use gkh_core::radial::{energy_at_action, orbit_geometry, RadialOrbit};
use gkh_core::theorems::{check_comparison, check_hellmann_feynman, check_virial, ComparisonOptions, VirialOrbit};

fn verdict(n: u32, title: &str, ok: bool, detail: &str) {
    println!(
        "criterion {n:>2} {title}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
}

#[derive(Clone, Copy, Debug)]
enum Kin {
    NonRel,
    Rel,
    Power(f64),
}

impl Kin {
    const ALL: [Kin; 5] = [Kin::NonRel, Kin::Rel, Kin::Power(1.0), Kin::Power(1.5), Kin::Power(3.0)];

    fn kernel(self) -> Arc<dyn KineticKernel> {
        match self {
            Kin::NonRel => Arc::new(NonRelativistic::new(1.0).unwrap()),
            Kin::Rel => Arc::new(Relativistic::new(1.0, true).unwrap()),
            Kin::Power(b) => Arc::new(PowerLawKernel::new(1.0, b).unwrap()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Pot {
    Coulomb,
    Harmonic,
    Linear,
    Quartic,
}

impl Pot {
    const ALL: [Pot; 4] = [Pot::Coulomb, Pot::Harmonic, Pot::Linear, Pot::Quartic];

    fn term(self) -> Arc<dyn PotentialTerm> {
        match self {
            Pot::Coulomb => Arc::new(Coulomb::new(1.0)),
            Pot::Harmonic => Arc::new(Harmonic::new(1.0)),
            Pot::Linear => Arc::new(Linear::new(1.0)),
            Pot::Quartic => Arc::new(PowerLawTerm::new(1.0, 4.0, 1.0).unwrap()),
        }
    }
}

fn build(dim: usize, kernel: Arc<dyn KineticKernel>, terms: Vec<Arc<dyn PotentialTerm>>) -> SystemSpec {
    SystemSpec::new(dim, KineticModel::new(kernel).unwrap(), PotentialModel::new(terms)).unwrap()
}

fn state(r: &[f64], p: &[f64]) -> PhaseState {
    PhaseState::new(0.0, r.to_vec(), p.to_vec()).unwrap()
}

fn ang(s: &PhaseState) -> f64 {
    if s.dim() == 1 {
        return 0.0;
    }
    angular_momentum(s).unwrap().iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Planar starting state of the kernel/potential grid; the relativistic
/// Coulomb orbit needs `L > kappa` to avoid falling into the centre.
fn grid_state(k: Kin, p: Pot) -> PhaseState {
    match (k, p) {
        (Kin::Rel, Pot::Coulomb) => state(&[1.0, 0.0], &[0.2, 1.2]),
        _ => state(&[1.0, 0.0], &[0.2, 0.8]),
    }
}

/// Worst residual of the trajectory and quadrature virial checks.
fn virial_cell(k: Kin, p: Pot) -> Result<f64, Error> {
    let sys = build(2, k.kernel(), vec![p.term()]);
    let s0 = grid_state(k, p);
    let (e, l) = (sys.energy(&s0)?, ang(&s0));
    let tau = orbit_geometry(&sys, e, l)?.tau_r;
    let span = 10.0 * tau;
    let traj = integrate(&sys, &s0, span, 1e-12)?;
    let t = check_virial(
        &sys,
        VirialOrbit::Trajectory {
            trajectory: &traj,
            window: Window::LongWindow { length: span },
        },
        1e-6,
    )?;
    let q = check_virial(
        &sys,
        VirialOrbit::Quadrature {
            energy: e,
            angular_momentum: l,
        },
        1e-6,
    )?;
    let cross = t.diagnostic("cross_path_residual").unwrap_or(f64::INFINITY);
    Ok(t.residual.max(q.residual).max(cross))
}

fn criterion_1_cells() -> Vec<(Kin, Pot, Result<f64, Error>)> {
    let mut cells = Vec::new();
    for k in Kin::ALL {
        for p in Pot::ALL {
            cells.push((k, p, virial_cell(k, p)));
        }
    }
    cells
}

#[test]
fn criterion_01_virial_identity() {
    let start = Instant::now();
    let cells = criterion_1_cells();
    let secs = start.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for (k, p, r) in &cells {
        match r {
            Ok(res) if *res <= 1e-6 => worst = worst.max(*res),
            Ok(res) => failed.push(format!("{k:?} x {p:?}: residual {res:e}")),
            Err(e) => failed.push(format!("{k:?} x {p:?}: {}", e.name())),
        }
    }
    let ok = failed.is_empty() && secs < 30.0;
    verdict(
        1,
        "virial identity, 5 kernels x 4 potentials, both paths",
        ok,
        &format!(
            "{} of {} cells within 1e-6, worst {worst:.1e}, {secs:.1} s; failing: {}",
            cells.len() - failed.len(),
            cells.len(),
            if failed.is_empty() {
                "none".into()
            } else {
                failed.join("; ")
            }
        ),
    );
    // T = |p| with V = -1/r has no bound orbit: the virial relation forces
    // E = 0, where every orbit either falls in or escapes.
    for (k, p, r) in &cells {
        let infeasible = matches!(k, Kin::Power(b) if *b == 1.0) && *p == Pot::Coulomb;
        match r {
            Ok(res) => assert!(*res <= 1e-6 && !infeasible, "{k:?} x {p:?}: {res:e}"),
            Err(e) => assert!(
                infeasible && matches!(e, Error::Singularity(_) | Error::Unbound { .. }),
                "{k:?} x {p:?}: {e}"
            ),
        }
    }
    assert!(secs < 30.0, "{secs} s");
}

/// The unconditional form of criterion 1. It cannot pass: see the
/// ultrarelativistic Coulomb cell above.
#[test]
#[ignore = "the ultrarelativistic Coulomb cell has no bound orbit"]
fn criterion_01_virial_identity_all_cells() {
    for (k, p, r) in criterion_1_cells() {
        let res = r.unwrap_or_else(|e| panic!("{k:?} x {p:?}: {e}"));
        assert!(res <= 1e-6, "{k:?} x {p:?}: {res:e}");
    }
}

#[test]
fn criterion_02_homogeneity() {
    // (beta, a, sign of V, dimension, E, L)
    let cases = [
        (1.5, 4.0, 1.0, 2, 2.0, 0.5),
        (3.0, 2.0, 1.0, 1, 1.0, 0.0),
        (2.0, -1.0, -1.0, 2, -0.5, 0.5),
        (1.0, 2.0, 1.0, 2, 2.0, 0.5),
        (2.5, 1.0, 1.0, 3, 1.5, 0.3),
    ];
    let mut worst_ratio: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    for (beta, a, sign, dim, e, l) in cases {
        let kernel: Arc<dyn KineticKernel> = Arc::new(PowerLawKernel::new(0.7, beta).unwrap());
        let term: Arc<dyn PotentialTerm> = Arc::new(PowerLawTerm::new(1.3, a, sign).unwrap());
        let sys = build(dim, kernel.clone(), vec![term]);
        let orbit = RadialOrbit::new(&sys, e, l).unwrap();
        let pot = sys.potential();
        let t = orbit.average(|pt| kernel.value(pt.p2)).value;
        let v = orbit.average(|pt| pot.value_unchecked(&pt.position(dim))).value;
        let kv = orbit.average(|pt| kernel.virial(pt.p2)).value;
        let pv = orbit.average(|pt| pot.virial(&pt.position(dim)).unwrap()).value;
        worst_ratio = worst_ratio.max(rel_err(kv / t, beta)).max(rel_err(pv / v, a));
        worst_t = worst_t.max(rel_err(t, e * a / (a + beta)));
    }
    let ok = worst_ratio <= 1e-8 && worst_t <= 1e-6;
    verdict(
        2,
        "homogeneity oracle",
        ok,
        &format!(
            "{} cases, degree error {worst_ratio:.1e}, <T> error {worst_t:.1e}",
            cases.len()
        ),
    );
    assert!(ok);
}

fn bind(target: &str, value: f64) -> ParamBinding {
    ParamBinding {
        name: target.into(),
        target: target.into(),
        value,
    }
}

#[test]
fn criterion_03_hellmann_feynman() {
    let start = Instant::now();
    let nonrel = || -> Arc<dyn KineticKernel> { Arc::new(NonRelativistic::new(1.0).unwrap()) };
    let harmonic = || -> Vec<Arc<dyn PotentialTerm>> { vec![Arc::new(Harmonic::new(1.0))] };
    // system, binding, L, closed form of dE/dλ in terms of E
    type Closed = Option<fn(f64) -> f64>;
    let cases: Vec<(&str, SystemSpec, ParamBinding, f64, Closed)> = vec![
        (
            "harmonic k",
            build(1, nonrel(), harmonic()),
            bind("potential.harmonic.stiffness", 1.0),
            0.0,
            Some(|e| e / 2.0),
        ),
        (
            "harmonic m",
            build(1, nonrel(), harmonic()),
            bind("kinetic.mass", 1.0),
            0.0,
            Some(|e| -e / 2.0),
        ),
        (
            "Kepler kappa",
            build(2, nonrel(), vec![Arc::new(Coulomb::new(1.0))]),
            bind("potential.coulomb.strength", 1.0),
            0.5,
            Some(|e| 2.0 * e),
        ),
        (
            "relativistic linear m",
            build(
                1,
                Arc::new(Relativistic::new(1.0, true).unwrap()),
                vec![Arc::new(Linear::new(1.0))],
            ),
            bind("kinetic.mass", 1.0),
            0.0,
            None,
        ),
        (
            "power kernel A",
            build(1, Arc::new(PowerLawKernel::new(1.0, 3.0).unwrap()), harmonic()),
            bind("kinetic.amplitude", 1.0),
            0.0,
            None,
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    let mut notes = Vec::new();
    for (name, sys, b, l, closed) in &cases {
        let r = check_hellmann_feynman(sys, b, 1.0, *l, 1e-2, 1e-5).unwrap();
        worst = worst.max(r.residual);
        if let Some(f) = closed {
            let e = r.diagnostic("energy").unwrap();
            let err = rel_err(r.lhs, f(e));
            worst_closed = worst_closed.max(err);
            notes.push(format!("{name} {err:.0e}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-5 && worst_closed <= 1e-6 && secs < 60.0;
    verdict(
        3,
        "Hellmann-Feynman at fixed action",
        ok,
        &format!(
            "{} cases, worst residual {worst:.1e}, closed forms: {}, {secs:.1} s",
            cases.len(),
            notes.join(", ")
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_04_comparison() {
    let start = Instant::now();
    let nonrel = || -> Arc<dyn KineticKernel> { Arc::new(NonRelativistic::new(1.0).unwrap()) };
    let k = |s: f64| -> Arc<dyn PotentialTerm> { Arc::new(Harmonic::new(s)) };
    let pairs = [
        (
            "k=1 vs k=2",
            build(1, nonrel(), vec![k(1.0)]),
            build(1, nonrel(), vec![k(2.0)]),
        ),
        (
            "relativistic vs nonrelativistic",
            build(1, Arc::new(Relativistic::new(1.0, true).unwrap()), vec![k(1.0)]),
            build(1, nonrel(), vec![k(1.0)]),
        ),
        (
            "V vs V + 0.1 r^4",
            build(1, nonrel(), vec![k(1.0)]),
            build(
                1,
                nonrel(),
                vec![k(1.0), Arc::new(PowerLawTerm::new(0.1, 4.0, 1.0).unwrap())],
            ),
        ),
    ];
    let opts = ComparisonOptions::default();
    assert_eq!(opts.mu_grid.len(), 11);
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, a, b) in &pairs {
        let r = check_comparison(a, b, 1.0, 0.0, &opts).unwrap();
        let (e1, e2) = (r.diagnostic("energy_1").unwrap(), r.diagnostic("energy_2").unwrap());
        let monotone = r.diagnostics["monotone"] == true;
        ok &= r.passed() && e1 <= e2 && monotone;
        notes.push(format!(
            "{name}: E1 {e1:.6} <= E2 {e2:.6}, slope residual {:.1e}",
            r.residual
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    verdict(
        4,
        "comparison theorem",
        ok,
        &format!("{}; {secs:.1} s", notes.join("; ")),
    );
    assert!(ok);
}

/// Richardson-extrapolated `d f / dE`.
fn d_de(f: impl Fn(f64) -> f64, e: f64, h: f64) -> f64 {
    let d1 = (f(e + h) - f(e - h)) / (2.0 * h);
    let d2 = (f(e + 0.5 * h) - f(e - 0.5 * h)) / h;
    (4.0 * d2 - d1) / 3.0
}

#[test]
fn criterion_05_action_derivative() {
    let mut cases = Vec::new();
    for k in Kin::ALL {
        for p in Pot::ALL {
            if matches!(k, Kin::Power(b) if b == 1.0) && p == Pot::Coulomb {
                continue;
            }
            cases.push((2, k, p, grid_state(k, p)));
            if p != Pot::Coulomb {
                cases.push((1, k, p, state(&[1.0], &[0.5])));
            }
        }
    }
    let mut worst_radial: f64 = 0.0;
    let mut worst_total: f64 = 0.0;
    let mut closed = 0;
    for (dim, k, p, s0) in &cases {
        let sys = build(*dim, k.kernel(), vec![p.term()]);
        let (e, l) = (sys.energy(s0).unwrap(), ang(s0));
        let g = orbit_geometry(&sys, e, l).unwrap();
        let h = 1e-3 * e.abs().max(1e-2);
        let at = |x: f64| orbit_geometry(&sys, x, l).unwrap();
        let di_r = d_de(|x| at(x).radial_action, e, h);
        worst_radial = worst_radial.max(rel_err(di_r, g.tau_r / (2.0 * PI)));
        // the total action is a function of E alone when Phi does not move
        let fixed_phi = *dim == 1 || matches!((k, p), (Kin::NonRel, Pot::Harmonic | Pot::Coulomb));
        if fixed_phi {
            closed += 1;
            let di = d_de(|x| at(x).action, e, h);
            worst_total = worst_total.max(rel_err(di, g.circuit_time / (2.0 * PI)));
        }
    }
    let ok = worst_radial <= 1e-5 && worst_total <= 1e-5;
    verdict(
        5,
        "dI/dE equals the circuit period over 2 pi",
        ok,
        &format!(
            "{} bound systems dI_r/dE worst {worst_radial:.1e}; {closed} closed orbits dI/dE worst {worst_total:.1e}",
            cases.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_06_energy_at_action() {
    let mut worst = [0.0f64; 3];
    for (kk, m, i) in [(1.0, 1.0, 1.0), (2.0, 0.5, 0.3), (0.3, 3.0, 4.0), (5.0, 1.0, 0.05)] {
        let sys = build(
            1,
            Arc::new(NonRelativistic::new(m).unwrap()),
            vec![Arc::new(Harmonic::new(kk))],
        );
        let e = energy_at_action(&sys, i, 0.0, None).unwrap().geometry().energy;
        worst[0] = worst[0].max(rel_err(e, i * (kk / m).sqrt()));
    }
    for (kappa, m, l, i) in [
        (1.0, 1.0, 0.5, 1.0),
        (2.0, 0.5, 1.0, 3.0),
        (0.5, 2.0, 0.2, 0.7),
        (1.0, 1.0, 1.5, 1.6),
    ] {
        let sys = build(
            2,
            Arc::new(NonRelativistic::new(m).unwrap()),
            vec![Arc::new(Coulomb::new(kappa))],
        );
        let e = energy_at_action(&sys, i, l, None).unwrap().geometry().energy;
        worst[1] = worst[1].max(rel_err(e, -m * kappa * kappa / (2.0 * i * i)));
    }
    for (b, m, i) in [(1.0, 1.0, 1.0), (0.5, 2.0, 3.0), (3.0, 0.25, 0.2)] {
        let sys = build(
            1,
            Arc::new(NonRelativistic::new(m).unwrap()),
            vec![Arc::new(Linear::new(b))],
        );
        let e = energy_at_action(&sys, i, 0.0, None).unwrap().geometry().energy;
        let oracle = (3.0 * PI * b * i / (4.0 * (2.0 * m).sqrt())).powf(2.0 / 3.0);
        worst[2] = worst[2].max(rel_err(e, oracle));
    }
    let ok = worst[0] <= 1e-9 && worst[1] <= 1e-8 && worst[2] <= 1e-7;
    verdict(
        6,
        "energy at action oracles",
        ok,
        &format!(
            "harmonic {:.1e}, Kepler {:.1e}, linear well {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_07_conservation() {
    let systems = [
        (
            build(2, Kin::NonRel.kernel(), vec![Pot::Coulomb.term()]),
            state(&[1.0, 0.0], &[0.3, 0.8]),
        ),
        (
            build(3, Kin::Rel.kernel(), vec![Arc::new(Coulomb::new(0.3))]),
            state(&[1.0, 0.0, 0.0], &[0.05, 0.5, 0.1]),
        ),
        (
            build(2, Kin::Power(1.5).kernel(), vec![Pot::Harmonic.term()]),
            state(&[1.0, 0.5], &[0.0, 0.7]),
        ),
        (
            build(3, Kin::Rel.kernel(), vec![Pot::Quartic.term()]),
            state(&[1.0, 0.2, 0.0], &[0.0, 0.9, 0.4]),
        ),
        (
            build(2, Kin::Rel.kernel(), vec![Pot::Linear.term()]),
            state(&[1.0, 0.0], &[0.0, 1.2]),
        ),
    ];
    let (mut drift, mut dj, mut cross) = (0.0f64, 0.0f64, 0.0f64);
    let norm = |x: &[f64]| x.iter().map(|y| y * y).sum::<f64>().sqrt();
    for (sys, s0) in &systems {
        let (e, l) = (sys.energy(s0).unwrap(), ang(s0));
        let tau = orbit_geometry(sys, e, l).unwrap().circuit_time;
        let tr = integrate(sys, s0, 100.0 * tau, 1e-12).unwrap();
        drift = drift.max(tr.energy_drift());
        let j0 = angular_momentum(s0).unwrap();
        for s in tr.samples() {
            let j = angular_momentum(s).unwrap();
            let d: Vec<f64> = j.iter().zip(&j0).map(|(a, b)| a - b).collect();
            dj = dj.max(norm(&d) / norm(&j0));
            let v = sys.kinetic().velocity(&s.p).unwrap();
            let c = match s.dim() {
                2 => vec![v[0] * s.p[1] - v[1] * s.p[0]],
                _ => vec![
                    v[1] * s.p[2] - v[2] * s.p[1],
                    v[2] * s.p[0] - v[0] * s.p[2],
                    v[0] * s.p[1] - v[1] * s.p[0],
                ],
            };
            cross = cross.max(norm(&c) / (norm(&v) * norm(&s.p)));
        }
    }
    let ok = drift <= 1e-8 && dj <= 1e-8 && cross <= 1e-12;
    verdict(
        7,
        "conservation over 100 periods",
        ok,
        &format!("energy drift {drift:.1e}, |dJ|/|J| {dj:.1e}, |v x p|/(|v||p|) {cross:.1e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_08_cross_engine() {
    let systems = [
        (
            "Kepler",
            build(2, Kin::NonRel.kernel(), vec![Pot::Coulomb.term()]),
            state(&[1.0, 0.0], &[0.3, 0.8]),
        ),
        (
            "relativistic Coulomb",
            build(2, Kin::Rel.kernel(), vec![Arc::new(Coulomb::new(0.3))]),
            state(&[1.0, 0.0], &[0.1, 0.45]),
        ),
        (
            "power kernel harmonic",
            build(2, Kin::Power(1.5).kernel(), vec![Pot::Harmonic.term()]),
            state(&[1.0, 0.0], &[0.2, 0.7]),
        ),
        (
            "relativistic linear well",
            build(1, Kin::Rel.kernel(), vec![Pot::Linear.term()]),
            state(&[0.3], &[0.9]),
        ),
    ];
    let mut worst = [0.0f64; 4];
    for (_, sys, s0) in &systems {
        let (e, l) = (sys.energy(s0).unwrap(), ang(s0));
        let orbit = RadialOrbit::new(sys, e, l).unwrap();
        let g = *orbit.geometry();
        let tr = integrate(sys, s0, 3.0 * g.circuit_time, 1e-12).unwrap();
        let tau = find_period(&tr, 1e-10).unwrap();
        let w = Window::OnePeriod { tau };
        let kin = sys.kinetic().clone();
        let pot = sys.potential().clone();
        let t_dyn = time_average(&tr, |s| kin.energy(&s.p).unwrap(), w).unwrap().value;
        let v_dyn = time_average(&tr, |s| pot.value_unchecked(&s.r), w).unwrap().value;
        let kernel = sys.kinetic().kernel();
        let t_rad = orbit.average(|pt| kernel.value(pt.p2)).value;
        let v_rad = orbit.average(|pt| pot.value_unchecked(&pt.position(sys.dim()))).value;
        let i_dyn = action_along(&tr, w).unwrap();
        worst[0] = worst[0].max(rel_err(tau, g.circuit_time));
        worst[1] = worst[1].max(rel_err(t_dyn, t_rad));
        worst[2] = worst[2].max(rel_err(v_dyn, v_rad));
        worst[3] = worst[3].max(rel_err(i_dyn, g.action));
    }
    let ok = worst.iter().all(|w| *w <= 1e-6);
    verdict(
        8,
        "radial quadrature vs integrated trajectories",
        ok,
        &format!(
            "{} systems: period {:.1e}, <T> {:.1e}, <V> {:.1e}, action {:.1e}",
            systems.len(),
            worst[0],
            worst[1],
            worst[2],
            worst[3]
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_09_admissibility_gate() {
    let ultra = KineticModel::new(Kin::Power(1.0).kernel());
    let accepted = ultra.is_ok();
    let mut runs = false;
    let mut no_inverse = false;
    if let Ok(model) = ultra {
        let sys = SystemSpec::new(2, model.clone(), PotentialModel::new(vec![Pot::Harmonic.term()])).unwrap();
        runs = integrate(&sys, &state(&[1.0, 0.0], &[0.0, 0.8]), 10.0, 1e-10).is_ok();
        no_inverse = matches!(model.momentum(&[0.5, 0.1]), Err(Error::NonInvertibleVelocityMap));
    }
    let decreasing = CustomKernel::new("decreasing", |x| x - 0.25 * x * x, |x| 1.0 - 0.5 * x);
    let report = validate_kinetic(&decreasing, 10.0, 256).unwrap();
    let rejected = !report.admissible()
        && matches!(
            KineticModel::with_domain(Arc::new(decreasing), 10.0, 256),
            Err(Error::Admissibility(_))
        );
    let ok = accepted && runs && no_inverse && rejected;
    verdict(
        9,
        "admissibility gate",
        ok,
        &format!(
            "beta = 1 accepted {accepted}, integrates {runs}, momentum recovery refused {no_inverse}; \
             decreasing kernel rejected {rejected}"
        ),
    );
    assert!(ok);
}

/// Expected exit code of every shipped configuration.
const SUITE: [(&str, i32); 14] = [
    ("compare_dominance_violation.json", 1),
    ("compare_harmonic.json", 0),
    ("compare_quartic.json", 0),
    ("compare_relativistic.json", 0),
    ("hf_harmonic_stiffness.json", 0),
    ("hf_kepler_strength.json", 0),
    ("hf_relativistic_linear_mass.json", 0),
    ("simulate_harmonic.json", 0),
    ("sweep_harmonic_stiffness.json", 0),
    ("sweep_mu.json", 0),
    ("validate_decreasing.json", 2),
    ("validate_relativistic.json", 0),
    ("virial_kepler.json", 0),
    ("virial_relativistic_coulomb.json", 0),
];

fn run_suite(out: &Path, jobs: &str) -> Vec<(String, Option<i32>)> {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    SUITE
        .iter()
        .map(|(name, _)| {
            let o = Command::new(env!("CARGO_BIN_EXE_gkh"))
                .arg("--config")
                .arg(configs.join(name))
                .arg("--out")
                .arg(out.join(name.trim_end_matches(".json")))
                .args(["--normalize-report", "--quiet", "--jobs", jobs])
                .output()
                .unwrap();
            (name.to_string(), o.status.code())
        })
        .collect()
}

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in std::fs::read_dir(dir).unwrap() {
        let sub = sub.unwrap().path();
        for f in std::fs::read_dir(&sub).unwrap() {
            let f = f.unwrap().path();
            let key = f.strip_prefix(dir).unwrap().display().to_string();
            out.push((key, std::fs::read(&f).unwrap()));
        }
    }
    out.sort();
    out
}

#[test]
fn criterion_10_cli_determinism() {
    let shipped: Vec<String> = std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let golden = tempfile::TempDir::new().unwrap();
    let again = tempfile::TempDir::new().unwrap();
    let codes_a = run_suite(golden.path(), "1");
    let codes_b = run_suite(again.path(), "4");
    let expected_codes = SUITE
        .iter()
        .zip(&codes_a)
        .zip(&codes_b)
        .all(|(((_, want), (_, a)), (_, b))| *a == Some(*want) && *b == Some(*want));
    let (fa, fb) = (files_under(golden.path()), files_under(again.path()));
    let reports = fa.iter().filter(|(k, _)| k.ends_with("report.json")).count();
    let identical = fa == fb;
    let covered = shipped.len() == SUITE.len() && SUITE.iter().all(|(n, _)| shipped.iter().any(|s| s == n));
    let ok = expected_codes && identical && covered && reports == SUITE.len();
    verdict(
        10,
        "CLI determinism and exit codes",
        ok,
        &format!(
            "{} configs on 1 and 4 threads, {reports} reports and {} tables byte-identical: {identical}, exit codes as expected: {expected_codes}",
            SUITE.len(),
            fa.len() - reports
        ),
    );
    assert!(ok, "{codes_a:?} {codes_b:?}");
}
