use num_complex::Complex64;
use pencil_graph::cheb::ChebSeries;
use pencil_graph::pencil::{EdgeCoefficients, LoopGraphPencil};
use pencil_graph::spectral::{
    check_condition_c, classify_theta, omega_sequence_for_loop, SpectralOptions, SubspectrumKind, ThetaClass,
};
use std::f64::consts::PI;

fn constant_edge(p: f64, q: f64) -> EdgeCoefficients {
    EdgeCoefficients::new(
        ChebSeries::constant(Complex64::new(p, 0.0)),
        ChebSeries::constant(Complex64::new(q, 0.0)),
    )
}

/// At λ = 5/2 both boundary edges have `ω² = 1`, so `S_1(π)` and `S_2(π)`
/// vanish while the free loop does not.
fn engineered() -> LoopGraphPencil {
    LoopGraphPencil::new(vec![constant_edge(0.3, 3.75), constant_edge(0.7, 1.75), constant_edge(0.0, 0.0)]).unwrap()
}

#[test]
fn edge_kind_sees_only_the_second_edge() {
    let opts = SpectralOptions::default();
    let class = classify_theta(&engineered(), Complex64::new(2.5, 0.0), SubspectrumKind::Edge, &opts).unwrap();
    assert_eq!(class, ThetaClass::Two { j_theta: 2 });
}

#[test]
fn loop_kind_rejects_two_vanishing_edges() {
    let opts = SpectralOptions::default();
    let err = classify_theta(&engineered(), Complex64::new(2.5, 0.0), SubspectrumKind::Loop, &opts).unwrap_err();
    assert!(matches!(err, pencil_graph::Error::AssumptionDViolated { .. }), "{err:?}");
}

#[test]
fn generic_value_is_class_one() {
    let opts = SpectralOptions::default();
    let class = classify_theta(&engineered(), Complex64::new(2.3, 0.1), SubspectrumKind::Edge, &opts).unwrap();
    assert_eq!(class, ThetaClass::One);
}

#[test]
fn reflecting_the_loop_flips_every_sign() {
    let opts = SpectralOptions::default();
    let p = |t: f64| 0.2 * t.cos() + 0.05 * (2.0 * t).sin();
    let q = |t: f64| 0.4 * t.cos() + 0.1 * (2.0 * t).cos();
    let edge = EdgeCoefficients::from_real_fns(p, q, 24);
    let mirror = EdgeCoefficients::from_real_fns(move |t| p(PI - t), move |t| q(PI - t), 24);
    assert!(edge.alpha().norm() < 1e-12 && mirror.alpha().norm() < 1e-12);

    let a = omega_sequence_for_loop(&edge, 8, &opts).unwrap();
    let b = omega_sequence_for_loop(&mirror, 8, &opts).unwrap();
    assert!(check_condition_c(&a).0);
    assert_eq!(a.entries.len(), b.entries.len());
    for (x, y) in a.entries.iter().zip(&b.entries) {
        assert_eq!(x.n, y.n);
        assert!((x.nu - y.nu).norm() < 1e-8, "ν_{} moved: {} vs {}", x.n, x.nu, y.nu);
        assert!((x.q + y.q).norm() < 1e-8 * (1.0 + x.q.norm()));
        assert_eq!(x.omega, -y.omega);
    }
}
