//! Partition functions and the lag: brute-force oracle, closed forms, limits
//! and the low-temperature classification.

use std::f64::consts::PI;

use ionlag::dense::{dense_hamiltonians, ln_trace_exp};
use ionlag::params::{bnu_from_nbar, reduce, ReducedParams};
use ionlag::thermo::{
    default_scan, divergence_predicate, ln_partition_final, ln_partition_initial,
    low_temperature_limit, nonequilibrium_lag, nu_to_zero_limit, phi, phi_scan, PhiSign,
};
use ionlag::{Branch, QuenchSpec, ThermalSpec, TrapIonConfig, TruncationPolicy};

fn fig1_cfg() -> TrapIonConfig {
    TrapIonConfig::new(7.0e-26, 5e3, 822.0 * PI * 1e12, PI * 1e6, 0.0).unwrap()
}

fn fig1(q: QuenchSpec, eta: f64) -> ReducedParams<f64> {
    reduce(&fig1_cfg(), q, ThermalSpec::Nbar(0.38), Some(eta)).unwrap()
}

fn lag(rp: &ReducedParams<f64>) -> f64 {
    nonequilibrium_lag(rp, TruncationPolicy::default()).unwrap().value
}

fn all_quenches() -> Vec<QuenchSpec> {
    let mut out = vec![QuenchSpec::carrier()];
    for m in 1..=2 {
        out.push(QuenchSpec::jc(m).unwrap());
        out.push(QuenchSpec::ajc(m).unwrap());
    }
    out
}

#[test]
fn partition_matches_dense_trace() {
    for (w0, om, eta, nbar) in [(10.0, 1.0, 0.5, 0.38), (5.0, 2.0, 1.2, 1.0), (50.0, 3.0, 0.3, 0.2)] {
        for q in all_quenches() {
            let rp = ReducedParams::from_ratios(bnu_from_nbar(nbar), w0, om, eta, q).unwrap();
            let dense = dense_hamiltonians(&rp, 120).unwrap().h_sideband.eigenvalues();
            let brute = ln_trace_exp(&dense, rp.b_nu(), rp.b_w0()).unwrap();
            let z = ln_partition_final(&rp, TruncationPolicy::default()).unwrap();
            assert!(
                (z.shifted_log - brute).abs() <= 1e-8 * brute.abs().max(1.0),
                "{q:?}: {} vs {brute}",
                z.shifted_log
            );
        }
    }
}

#[test]
fn initial_partition_at_fig1() {
    let z = ln_partition_initial(&fig1(QuenchSpec::carrier(), 0.5));
    assert!((z.shifted_log - 1.38f64.ln()).abs() < 1e-15);
    assert!((z.shifted_log - 0.32208).abs() < 1e-5);
}

/// `½(√(b_w0² + b_om²) − b_w0)` by its binomial series in `r = (b_om/b_w0)²`.
fn carrier_closed_form(b_w0: f64, b_om: f64) -> f64 {
    let r = (b_om / b_w0).powi(2);
    0.5 * b_w0 * (r / 2.0 - r * r / 8.0 + r * r * r / 16.0)
}

#[test]
fn carrier_at_zero_eta() {
    let rp = fig1(QuenchSpec::carrier(), 0.0);
    let exact = carrier_closed_form(rp.b_w0(), rp.b_om());
    let got = lag(&rp);
    assert!((got - exact).abs() <= 1e-10 * exact, "{got} vs {exact}");
    assert!((got - 2.4647e-7).abs() < 1e-10);
    // η → 0 limit is continuous
    let near = lag(&fig1(QuenchSpec::carrier(), 1e-6));
    assert!((near - exact).abs() <= 1e-6 * exact);
}

#[test]
fn red_sideband_reversible_at_small_eta() {
    for m in 1..=2 {
        assert_eq!(lag(&fig1(QuenchSpec::jc(m).unwrap(), 0.0)), 0.0);
        assert!(lag(&fig1(QuenchSpec::jc(m).unwrap(), 1e-6)) <= 1e-8);
    }
}

#[test]
fn large_eta_is_reversible() {
    for q in all_quenches() {
        assert!(lag(&fig1(q, 50.0)) <= 1e-12);
    }
}

#[test]
fn high_temperature_is_reversible() {
    let cfg = fig1_cfg();
    for q in all_quenches() {
        let rp = reduce(&cfg, q, ThermalSpec::Nbar(1e6), Some(0.5)).unwrap();
        let res = nonequilibrium_lag(&rp, TruncationPolicy::default()).unwrap();
        assert!(res.truncation.converged);
        assert!(res.value <= 1e-6 && res.value >= 0.0, "{q:?}: {}", res.value);
    }
}

#[test]
fn zero_rabi_gives_zero() {
    for q in all_quenches() {
        let rp = fig1(q, 0.7).with_b_om(0.0).unwrap();
        assert_eq!(lag(&rp), 0.0);
    }
}

#[test]
fn monotone_in_rabi_frequency() {
    for q in all_quenches() {
        let mut prev = 0.0;
        for k in 0..41 {
            let om = PI * 1e5 * 100f64.powf(k as f64 / 40.0);
            let cfg = fig1_cfg().with_omega_rabi(om).unwrap();
            let rp = reduce(&cfg, q, ThermalSpec::Nbar(0.38), Some(0.5)).unwrap();
            let l = lag(&rp);
            assert!(l > prev, "{q:?} at Ω = {om}");
            prev = l;
        }
    }
}

#[test]
fn blue_partition_exceeds_red() {
    for m in 1..=2 {
        for k in 1..=35 {
            let eta = 0.1 * k as f64;
            let red = ln_partition_final(&fig1(QuenchSpec::jc(m).unwrap(), eta), TruncationPolicy::Fixed(40))
                .unwrap();
            let blue = ln_partition_final(&fig1(QuenchSpec::ajc(m).unwrap(), eta), TruncationPolicy::Fixed(40))
                .unwrap();
            // both sit on ln(n̄+1) plus something tiny; compare the lags
            assert!(lag(&fig1(QuenchSpec::ajc(m).unwrap(), eta)) > lag(&fig1(QuenchSpec::jc(m).unwrap(), eta)));
            assert!(blue.shifted_log >= red.shifted_log);
        }
    }
}

#[test]
fn lag_is_nonnegative_on_fig1_grid() {
    for q in all_quenches() {
        for k in 0..=35 {
            let l = lag(&fig1(q, 0.1 * k as f64));
            assert!(l >= 0.0);
        }
    }
}

#[test]
fn fig1_red_sideband_has_finite_cold_limit() {
    for m in 1..=2 {
        for eta in [0.1, 0.5, 1.5, 3.5] {
            let rp = fig1(QuenchSpec::jc(m).unwrap(), eta);
            let lt = low_temperature_limit(&rp, default_scan(m));
            assert!(lt.finite);
            assert_eq!(lt.limit_value, Some(0.0));
            assert!(lt.zeros.is_empty());
            assert!(!divergence_predicate(&rp, default_scan(m)).diverges);
        }
    }
}

#[test]
fn blue_sideband_diverges() {
    for m in 1..=3 {
        for eta in [0.01, 0.5, 2.0] {
            for q in [QuenchSpec::ajc(m).unwrap(), QuenchSpec::carrier()] {
                let rp = fig1(q, eta);
                let d = divergence_predicate(&rp, default_scan(m));
                assert!(d.diverges, "{q:?} η={eta}");
                assert!(!low_temperature_limit(&rp, default_scan(m)).finite);
                assert!(nonequilibrium_lag(&rp, TruncationPolicy::default())
                    .unwrap()
                    .regime_flags
                    .divergence_predicted);
            }
        }
    }
}

fn fig4(eta: f64, omega_rabi: f64, m: u32) -> ReducedParams<f64> {
    let cfg = TrapIonConfig::new(7.0e-26, 1.2e8, 1e8, omega_rabi, 0.0).unwrap();
    reduce(&cfg, QuenchSpec::jc(m).unwrap(), ThermalSpec::Nbar(0.1), Some(eta)).unwrap()
}

#[test]
fn fig4_sign_patterns() {
    // the caption's first summand is the n = 0 term of the 0-based sum
    let left1 = fig4(1.5, 0.5e9, 1);
    let left2 = fig4(1.5, 0.5e9, 2);
    assert_eq!(phi(0, &left1).sign(), PhiSign::Negative);
    assert!(phi_scan(&left2, 50).iter().all(|p| p.phi >= 0.0));
    assert!(divergence_predicate(&left1, default_scan(1)).diverges);
    assert!(!divergence_predicate(&left2, default_scan(2)).diverges);

    let right1 = fig4(1.0, 1e9, 1);
    let right2 = fig4(1.0, 1e9, 2);
    assert!(phi(0, &right1).phi <= 0.0);
    assert!(phi(0, &right2).phi <= 0.0);
    for rp in [right1, right2] {
        let d = divergence_predicate(&rp, default_scan(rp.m()));
        assert!(d.diverges && d.witnesses.contains(&0));
    }
}

#[test]
fn constructed_zero_gives_ln_two() {
    // choose Ω so that Φ_0^1 = 0 exactly: √(ω_L² + u²) − ω_L = 2ν
    let (w0, eta) = (10.0, 0.5);
    let wl = w0 - 1.0;
    let f0 = ionlag::numerics::coupling_f(0, 1, eta).magnitude();
    let om = (4.0 * wl + 4.0f64).sqrt() / f0;
    let at = |b_nu: f64| {
        ReducedParams::from_ratios(b_nu, w0, om, eta, QuenchSpec::jc(1).unwrap()).unwrap()
    };
    let rp = at(1.0);
    let scan = phi_scan(&rp, default_scan(1));
    assert_eq!(scan[0].sign(), PhiSign::Zero);
    assert!(scan[1..].iter().all(|p| p.sign() == PhiSign::Positive));
    let lt = low_temperature_limit(&rp, default_scan(1));
    assert_eq!(lt.zeros, vec![0]);
    assert!((lt.limit_value.unwrap() - 2f64.ln()).abs() < 1e-15);
    // and the lag itself approaches it
    assert!((lag(&at(200.0)) - 2f64.ln()).abs() < 1e-9);
}

#[test]
fn blue_sideband_slope_ladder() {
    let at = |b_nu: f64| {
        ReducedParams::from_ratios(b_nu, 10.0, 3.0, 0.6, QuenchSpec::ajc(1).unwrap()).unwrap()
    };
    let phi_min = phi_scan(&at(1.0), 100)
        .iter()
        .map(|p| p.phi)
        .fold(f64::INFINITY, f64::min);
    assert!(phi_min < 0.0);
    let mut b = 2.0;
    let mut prev_lag = lag(&at(b));
    let mut last_slope = 0.0;
    for _ in 0..6 {
        let l = lag(&at(2.0 * b));
        assert!(l > prev_lag);
        last_slope = (l - prev_lag) / b;
        prev_lag = l;
        b *= 2.0;
    }
    assert!((last_slope - 0.5 * phi_min.abs()).abs() <= 1e-6 * phi_min.abs());
}

#[test]
fn nu_to_zero_limit_consistency() {
    // fixed β and η while ν shrinks
    let beta_cfg = fig1_cfg();
    let t = ThermalSpec::beta(ThermalSpec::Nbar(0.38).beta_at(5e3)).unwrap();
    let gap = |nu: f64, q: QuenchSpec| {
        let cfg = beta_cfg.with_nu(nu).unwrap();
        let rp = reduce(&cfg, q, t, Some(0.5)).unwrap();
        let generic = lag(&rp);
        let limit = nu_to_zero_limit(&rp, TruncationPolicy::default()).unwrap();
        assert!(limit.truncation.converged);
        ((generic - limit.value) / limit.value).abs()
    };
    // the carrier expressions coincide at any ν
    let g = gap(5e3, QuenchSpec::carrier());
    assert!(g < 1e-12, "{g}");
    for q in [QuenchSpec::jc(1).unwrap(), QuenchSpec::ajc(1).unwrap()] {
        let coarse = gap(5e2, q);
        let fine = gap(5e0, q);
        assert!(fine < coarse);
        assert!(fine < 0.01, "{q:?}: {fine}");
    }
}

#[test]
fn nu_limit_converges_for_moderate_eta() {
    let rp = ReducedParams::<f64>::from_ratios(1e-2, 1e4, 5.0, 1.0, QuenchSpec::carrier()).unwrap();
    let v = nu_to_zero_limit(&rp, TruncationPolicy::default()).unwrap();
    assert!(v.truncation.converged && v.value.is_finite() && v.value > 0.0);
}

#[test]
fn branch_ordering_at_small_eta() {
    // higher sidebands cost more recoil: JC lag falls with m
    for eta in [0.1, 0.5, 1.5, 3.0] {
        let l: Vec<f64> = (0..=2)
            .map(|m| lag(&fig1(QuenchSpec::new(m, Branch::Jc).unwrap(), eta)))
            .collect();
        assert!(l[0] > l[1] && l[1] > l[2], "η={eta}: {l:?}");
    }
}
