//! Work moments: closed forms against traces of dense matrix powers, and the
//! two-point distribution against both.

use std::f64::consts::PI;

use ionlag::dense::dense_hamiltonians;
use ionlag::params::{bnu_from_nbar, ReducedParams};
use ionlag::workstats::{moment_from_dense, moments_analytic, moments_si, work_pmf_sideband};
use ionlag::{Branch, QuenchSpec, ThermalSpec, TrapIonConfig};

/// (ω₀/ν, Ω/ν, η, n̄)
const DESK: [(f64, f64, f64, f64); 6] = [
    (10.0, 1.0, 0.5, 0.38),
    (5.0, 0.3, 0.1, 0.2),
    (20.0, 2.0, 1.0, 0.5),
    (100.0, 4.0, 0.8, 0.1),
    (1000.0, 10.0, 0.3, 0.38),
    (2.0, 1.5, 1.5, 0.05),
];

fn rp(point: (f64, f64, f64, f64), q: QuenchSpec) -> ReducedParams<f64> {
    let (w0, om, eta, nbar) = point;
    ReducedParams::from_ratios(bnu_from_nbar(nbar), w0, om, eta, q).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn full_quench_moments() {
    for point in DESK {
        let rp = rp(point, QuenchSpec::carrier());
        let dq = dense_hamiltonians(&rp, 80).unwrap();
        let exact = moments_analytic(&rp);
        let norm = dq.h_full.norm();
        let m1 = moment_from_dense(&dq, 1, true).unwrap();
        let m2 = moment_from_dense(&dq, 2, true).unwrap();
        let m3 = moment_from_dense(&dq, 3, true).unwrap();
        assert!(m1.value.abs() <= 1e-10 * norm, "{point:?}: ⟨W⟩ = {}", m1.value);
        assert!(rel(m2.value, exact.second) <= 1e-8, "{point:?}: {} vs {}", m2.value, exact.second);
        assert!(rel(m3.value, exact.third) <= 1e-6, "{point:?}: {} vs {}", m3.value, exact.third);
    }
}

#[test]
fn desk_point_second_moment() {
    let rp = rp(DESK[0], QuenchSpec::carrier());
    let m2 = moment_from_dense(&dense_hamiltonians(&rp, 80).unwrap(), 2, true).unwrap();
    assert!(rel(m2.value, 0.25) <= 1e-8);
}

#[test]
fn sideband_mean_vanishes() {
    for point in DESK {
        for q in [QuenchSpec::jc(1).unwrap(), QuenchSpec::ajc(2).unwrap()] {
            let rp = rp(point, q);
            let dq = dense_hamiltonians(&rp, 80).unwrap();
            let m1 = moment_from_dense(&dq, 1, false).unwrap();
            assert!(m1.value.abs() <= 1e-10 * dq.h_sideband.norm());
        }
    }
}

#[test]
fn cancellation_flag() {
    let wide = rp((1e4, 1.0, 0.5, 0.38), QuenchSpec::carrier());
    let dq = dense_hamiltonians(&wide, 20).unwrap();
    assert!(moment_from_dense(&dq, 3, true).unwrap().cancellation_warning);
    let narrow = rp(DESK[0], QuenchSpec::carrier());
    let dq = dense_hamiltonians(&narrow, 40).unwrap();
    assert!(!moment_from_dense(&dq, 2, true).unwrap().cancellation_warning);
}

#[test]
fn pmf_reproduces_dense_moments() {
    for point in DESK {
        for branch in [Branch::Jc, Branch::Ajc] {
            for m in 0..=2 {
                let q = QuenchSpec::new(m, branch).unwrap();
                let rp = rp(point, q);
                let dq = dense_hamiltonians(&rp, 80).unwrap();
                let pmf = work_pmf_sideband(&rp, 80).unwrap();
                assert!((pmf.total_probability() - 1.0).abs() < 1e-10);
                assert!(pmf.moment(1).abs() < 1e-10 * dq.h_sideband.norm());
                for order in 2..=3 {
                    let dense = moment_from_dense(&dq, order, false).unwrap();
                    let got = pmf.moment(order);
                    // the trace formula itself loses digits to cancellation
                    let slack = 1e-8 * dense.value.abs() + 1e-15 * dense.largest_term;
                    assert!(
                        (got - dense.value).abs() <= slack,
                        "{point:?} {q:?} n={order}: {got} vs {}",
                        dense.value
                    );
                }
            }
        }
    }
}

#[test]
fn pmf_resolves_experimental_scale() {
    let rp = ReducedParams::from_ratios(
        bnu_from_nbar(0.38),
        822.0 * PI * 1e12 / 5e3,
        PI * 1e6 / 5e3,
        0.5,
        QuenchSpec::jc(1).unwrap(),
    )
    .unwrap();
    let pmf = work_pmf_sideband(&rp, 60).unwrap();
    assert!((pmf.total_probability() - 1.0).abs() < 1e-10);
    // the upper level is empty; the small negative work of order Ω²/ω₀
    // stays distinct from zero
    let small: f64 = pmf
        .points
        .iter()
        .filter(|&&(w, _)| w < 0.0 && w > -1e-3)
        .map(|&(_, p)| p)
        .sum();
    // everything outside the |0,g⟩ edge state, weight e^{−βħν}
    assert!((small - (-bnu_from_nbar(0.38f64)).exp()).abs() < 1e-9);
    assert!(!pmf.tail_warning);
}

#[test]
fn third_moment_independent_of_trap_frequency() {
    let t = ThermalSpec::beta(2.0e-13 / 1.054571817e-34 / 1e12).unwrap();
    let q = QuenchSpec::carrier();
    let at = |nu: f64| {
        let cfg = TrapIonConfig::new(7.0e-26, nu, 822.0 * PI * 1e12, PI * 1e6, 0.3).unwrap();
        moments_si(&cfg, q, t).unwrap()
    };
    let (a, b) = (at(5e3), at(5e5));
    assert!(rel(a.third, b.third) <= 1e-10);
    assert!(a.third > 0.0);
    assert_eq!(a.mean, 0.0);
}
