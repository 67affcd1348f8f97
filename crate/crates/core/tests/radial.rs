mod common;

use std::f64::consts::PI;

use common::*;
use gkh_core::error::{Error, UnboundKind};
use gkh_core::quadrature::TanhSinh;
use gkh_core::radial::{
    energy_at_action, energy_at_action_with, orbit_geometry, radial_average, turning_points, ActionConvention,
    RadialOrbit,
};
use proptest::prelude::*;

#[test]
fn kepler_turning_points() {
    let sys = system(2, nonrel(1.0), coulomb(1.0));
    let (a, b) = turning_points(&sys, -0.5, 0.5).unwrap();
    let s = 0.75f64.sqrt();
    assert!(rel_err(a, 1.0 - s) < 1e-12, "{a}");
    assert!(rel_err(b, 1.0 + s) < 1e-12, "{b}");
}

#[test]
fn harmonic_line_turning_points() {
    let sys = system(1, nonrel(1.0), harmonic(1.0));
    let (a, b) = turning_points(&sys, 2.0, 0.0).unwrap();
    assert!(rel_err(a, -2.0) < 1e-12 && rel_err(b, 2.0) < 1e-12, "{a} {b}");
}

#[test]
fn positive_kepler_energy_is_unbound() {
    let sys = system(2, nonrel(1.0), coulomb(1.0));
    match turning_points(&sys, 0.1, 0.5) {
        Err(Error::Unbound {
            kind: UnboundKind::Escapes,
            ..
        }) => {}
        other => panic!("{other:?}"),
    }
    assert!(matches!(orbit_geometry(&sys, 0.1, 0.5), Err(Error::Unbound { .. })));
}

#[test]
fn energy_below_the_well_is_forbidden() {
    let sys = system(2, nonrel(1.0), coulomb(1.0));
    // the effective minimum at L = 1 is -0.5
    match turning_points(&sys, -0.6, 1.0) {
        Err(Error::Unbound {
            kind: UnboundKind::Forbidden,
            ..
        }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn double_well_is_ambiguous() {
    // V = x^4 - 2 x^2 + 0.3 x has two wells below E = -0.2
    let terms = vec![quartic(1.0).remove(0), harmonic(-4.0).remove(0), linear_term(0.3)];
    let sys = system(1, nonrel(1.0), terms);
    match turning_points(&sys, -0.2, 0.0) {
        Err(Error::AmbiguousWell { brackets }) => assert_eq!(brackets.len(), 4),
        other => panic!("{other:?}"),
    }
}

fn linear_term(b: f64) -> std::sync::Arc<dyn gkh_core::models::PotentialTerm> {
    std::sync::Arc::new(gkh_core::models::CustomTerm::new("tilt", false, move |r: &[f64]| {
        b * r[0]
    }))
}

#[test]
fn kepler_geometry() {
    let sys = system(2, nonrel(1.0), coulomb(1.0));
    let g = orbit_geometry(&sys, -0.5, 0.5).unwrap();
    assert!(rel_err(g.radial_action, 0.5) < 1e-12, "{g:?}");
    assert!(rel_err(g.phi, 2.0 * PI) < 1e-12, "{g:?}");
    assert!(rel_err(g.tau_r, 2.0 * PI) < 1e-12, "{g:?}");
    assert!(rel_err(g.action, 1.0) < 1e-12, "{g:?}");
    assert!(g.quadrature_error < 1e-12);
}

#[test]
fn isotropic_oscillator_advances_by_pi() {
    let sys = system(2, nonrel(1.0), harmonic(1.0));
    for (e, l) in [(1.0, 0.3), (2.5, 2.0), (10.0, 0.01)] {
        let g = orbit_geometry(&sys, e, l).unwrap();
        assert!(rel_err(g.phi, PI) < 1e-11, "E={e} L={l}: {}", g.phi);
        // radial frequency is 2 omega
        assert!(rel_err(g.tau_r, PI) < 1e-11, "{}", g.tau_r);
    }
}

#[test]
fn harmonic_line_geometry() {
    let sys = system(1, nonrel(1.0), harmonic(1.0));
    let g = orbit_geometry(&sys, 1.0, 0.0).unwrap();
    assert!(rel_err(g.action, 1.0) < 1e-12, "{g:?}");
    assert!(rel_err(g.tau_r, PI) < 1e-12, "{g:?}");
    assert!(rel_err(g.circuit_time, 2.0 * PI) < 1e-12, "{g:?}");
    assert_eq!(g.phi, 0.0);
}

#[test]
fn averages() {
    let sys = system(2, nonrel(1.0), coulomb(1.0));
    let one = radial_average(&sys, -0.5, 0.7, |_| 1.0).unwrap();
    assert_eq!(one.value, 1.0);
    let v = radial_average(&sys, -0.5, 0.7, |pt| -1.0 / pt.r).unwrap();
    assert!((v.value + 1.0).abs() < 1e-8, "{v:?}");

    let sys = system(1, power(1.0, 1.0), linear(1.0));
    let orbit = RadialOrbit::new(&sys, 1.0, 0.0).unwrap();
    let kernel = sys.kinetic().kernel().clone();
    let d = orbit.average(|pt| kernel.virial(pt.p2) - pt.r.abs());
    assert!(d.value.abs() < 1e-8, "{d:?}");
}

#[test]
fn energy_at_action_examples() {
    let sys = system(1, nonrel(1.0), harmonic(1.0));
    let e = energy_at_action(&sys, 1.0, 0.0, None).unwrap().geometry().energy;
    assert!(rel_err(e, 1.0) < 1e-10, "{e}");

    let sys = system(2, nonrel(1.0), coulomb(1.0));
    let e = energy_at_action(&sys, 1.0, 0.5, None).unwrap().geometry().energy;
    assert!(rel_err(e, -0.5) < 1e-10, "{e}");
    let e = energy_at_action(&sys, 1.0, 0.5, Some((-0.9, -0.1)))
        .unwrap()
        .geometry()
        .energy;
    assert!(rel_err(e, -0.5) < 1e-10, "{e}");

    let sys = system(1, nonrel(1.0), linear(1.0));
    let target = 4.0 * 2f64.sqrt() / (3.0 * PI);
    let e = energy_at_action(&sys, target, 0.0, None).unwrap().geometry().energy;
    assert!(rel_err(e, 1.0) < 1e-10, "{e}");
}

#[test]
fn energy_at_action_rejects_unreachable_targets() {
    let sys = system(1, nonrel(1.0), harmonic(1.0));
    assert!(matches!(
        energy_at_action(&sys, 5.0, 0.0, Some((0.5, 2.0))),
        Err(Error::Bracket(_))
    ));
    assert!(matches!(
        energy_at_action(&sys, 0.1, 0.0, Some((0.5, 2.0))),
        Err(Error::Bracket(_))
    ));
}

#[test]
fn radial_convention_inverts_radial_action() {
    // precessing orbit: quartic well in 2D
    let sys = system(2, nonrel(1.0), quartic(1.0));
    let g = orbit_geometry(&sys, 3.0, 0.8).unwrap();
    let back = energy_at_action_with(&sys, g.radial_action, 0.8, None, ActionConvention::Radial).unwrap();
    assert!(rel_err(back.geometry().energy, 3.0) < 1e-10);
    let back = energy_at_action(&sys, g.action, 0.8, None).unwrap();
    assert!(rel_err(back.geometry().energy, 3.0) < 1e-10);
}

/// dI/dE identities by central differences.
fn check_derivative(sys: &gkh_core::dynamics::SystemSpec, e: f64, l: f64) {
    let h = 1e-4 * e.abs().max(1e-2);
    let g = orbit_geometry(sys, e, l).unwrap();
    let up = orbit_geometry(sys, e + h, l).unwrap();
    let down = orbit_geometry(sys, e - h, l).unwrap();
    let d_radial = (up.radial_action - down.radial_action) / (2.0 * h);
    assert!(
        rel_err(d_radial, g.tau_r / (2.0 * PI)) < 1e-5,
        "E={e} L={l}: {d_radial} vs {}",
        g.tau_r / (2.0 * PI)
    );
    if l == 0.0 {
        let d_total = (up.action - down.action) / (2.0 * h);
        assert!(rel_err(d_total, g.circuit_time / (2.0 * PI)) < 1e-5);
    }
}

#[test]
fn action_derivative_is_the_period() {
    check_derivative(&system(1, nonrel(1.0), harmonic(1.0)), 1.3, 0.0);
    check_derivative(&system(1, nonrel(1.0), linear(1.0)), 1.0, 0.0);
    check_derivative(&system(1, nonrel(1.0), quartic(1.0)), 0.7, 0.0);
    check_derivative(&system(1, rel(1.0), harmonic(1.0)), 2.0, 0.0);
    check_derivative(&system(1, power(1.0, 1.0), linear(1.0)), 1.0, 0.0);
    check_derivative(&system(1, power(0.5, 3.0), harmonic(1.0)), 1.0, 0.0);
    check_derivative(&system(2, nonrel(1.0), coulomb(1.0)), -0.4, 0.6);
    check_derivative(&system(3, rel(1.0), coulomb(0.5)), -0.05, 0.9);
    check_derivative(&system(2, nonrel(1.0), quartic(1.0)), 3.0, 0.8);
    check_derivative(&system(2, rel(2.0), linear(1.0)), 3.0, 1.5);
}

#[test]
fn apsidal_angle_does_not_depend_on_the_kernel() {
    // nonrelativistic m = 1 in V and relativistic m = 1 in W = K_rel^{-1}-matched
    // potential share p^2(r) = 2(E - V(r)) when E_rel - W(r) = K_rel(2(E - V(r)))
    let e = -0.5;
    let l = 0.6;
    let nr = system(2, nonrel(1.0), coulomb(1.0));
    let matched = std::sync::Arc::new(gkh_core::models::CustomTerm::new(
        "matched",
        true,
        move |r: &[f64]| {
            let rr = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            let x = 2.0 * (e + 1.0 / rr);
            let k = x / ((x + 1.0).sqrt() + 1.0);
            -k
        },
    ));
    let rl = system(2, rel(1.0), vec![matched]);
    let a = orbit_geometry(&nr, e, l).unwrap();
    let b = orbit_geometry(&rl, 0.0, l).unwrap();
    assert!(rel_err(b.r_plus, a.r_plus) < 1e-10);
    assert!(rel_err(b.phi, a.phi) < 1e-10, "{} vs {}", b.phi, a.phi);
    assert!(rel_err(b.radial_action, a.radial_action) < 1e-10);
}

#[test]
fn halving_the_node_spacing_stays_within_the_error_estimate() {
    for (sys, e, l) in [
        (system(2, nonrel(1.0), quartic(1.0)), 3.0, 0.8),
        (system(1, power(1.0, 1.0), linear(1.0)), 1.0, 0.0),
        (system(3, rel(1.0), coulomb(0.5)), -0.05, 0.9),
    ] {
        let a = RadialOrbit::new(&sys, e, l).unwrap();
        let b = RadialOrbit::with_rule(
            &sys,
            e,
            l,
            TanhSinh {
                base_step: 0.25,
                t_max: 6.0,
            },
        )
        .unwrap();
        let (ga, gb) = (a.geometry(), b.geometry());
        let tol = ga.quadrature_error.max(gb.quadrature_error) + 1e-14;
        for (x, y) in [
            (ga.tau_r, gb.tau_r),
            (ga.radial_action, gb.radial_action),
            (ga.phi, gb.phi),
        ] {
            assert!(x == y || rel_err(x, y) <= tol, "{x} vs {y} (tol {tol:e})");
        }
        let va = a.average(|pt| pt.p2);
        let vb = b.average(|pt| pt.p2);
        assert!((va.value - vb.value).abs() <= va.error.max(vb.error));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kepler_actions_match_closed_form(e in -2.0f64..-0.05, frac in 0.05f64..0.95) {
        let sys = system(2, nonrel(1.0), coulomb(1.0));
        let lmax = 1.0 / (-2.0 * e).sqrt();
        let l = frac * lmax;
        let g = orbit_geometry(&sys, e, l).unwrap();
        prop_assert!(rel_err(g.radial_action, lmax - l) < 1e-10);
        prop_assert!(rel_err(g.tau_r, 2.0 * PI / (-2.0 * e).powf(1.5)) < 1e-10);
        prop_assert!(rel_err(g.phi, 2.0 * PI) < 1e-10);
        prop_assert!(g.r_minus > 0.0 && g.r_minus < g.r_plus);
    }

    #[test]
    fn action_round_trip(i in 0.05f64..20.0, l in 0.0f64..3.0) {
        let sys = system(2, rel(1.0), harmonic(1.0));
        let orbit = energy_at_action(&sys, i + l, l, None).unwrap();
        let g = orbit.geometry();
        prop_assert!(rel_err(g.action, i + l) < 1e-12);
        let again = orbit_geometry(&sys, g.energy, l).unwrap();
        prop_assert!(rel_err(again.action, i + l) < 1e-12);
    }
}
