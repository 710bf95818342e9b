//! Laguerre polynomials and couplings against exact rational arithmetic.

use ionlag::numerics::{coupling_f, laguerre_assoc, laguerre_scaled, CouplingSeries};
use ionlag::thermo::small_eta_expansion;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `L_n^m(p/q) = Σ_k (−1)^k C(n+m, n−k) x^k / k!`, exactly.
fn laguerre_exact(n: u64, m: u64, p: i64, q: i64) -> BigRational {
    let x = BigRational::new(BigInt::from(p), BigInt::from(q));
    let mut sum = BigRational::zero();
    let mut x_pow = BigRational::one();
    let mut k_fact = BigInt::one();
    for k in 0..=n {
        if k > 0 {
            x_pow *= &x;
            k_fact *= BigInt::from(k);
        }
        let term = BigRational::from_integer(binomial(n + m, n - k)) * &x_pow
            / BigRational::from_integer(k_fact.clone());
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// `|f_n^m(η)|` with `η² = p/q`, from the exact Laguerre value.
fn coupling_exact(n: u64, m: u64, p: i64, q: i64) -> f64 {
    let l = laguerre_exact(n, m, p, q).to_f64().unwrap();
    let x = p as f64 / q as f64;
    let log_ratio: f64 = (1..=m).map(|k| ((n + k) as f64).ln()).sum();
    (0.5 * m as f64 * x.ln() - 0.5 * x - 0.5 * log_ratio).exp() * l.abs()
}

const GRID: [(i64, i64); 5] = [(1, 100), (1, 4), (1, 1), (9, 4), (49, 4)];

#[test]
fn laguerre_matches_exact() {
    for (p, q) in GRID {
        let x = p as f64 / q as f64;
        for m in 0..=5u32 {
            for n in 0..=40usize {
                let exact = laguerre_exact(n as u64, m as u64, p, q);
                let exact_f = exact.to_f64().unwrap();
                let got = laguerre_assoc(n, m, x).unwrap();
                // absolute slack scaled by the largest term of the sum
                let scale = laguerre_exact(n as u64, m as u64, -p, q).to_f64().unwrap();
                assert!(
                    (got - exact_f).abs() <= 1e-13 * scale,
                    "L_{n}^{m}({x}) = {got} vs {exact_f}"
                );
            }
        }
    }
}

#[test]
fn scaled_laguerre_consistent() {
    for n in [0usize, 3, 17, 60] {
        let (mant, scale) = laguerre_scaled(n, 2, 2.25f64);
        let direct = laguerre_assoc(n, 2, 2.25f64).unwrap();
        assert!((mant * scale.exp() - direct).abs() <= 1e-14 * direct.abs().max(1.0));
    }
}

#[test]
fn couplings_match_exact() {
    for (p, q) in GRID {
        let eta = (p as f64 / q as f64).sqrt();
        for m in 0..=4u32 {
            for (n, f) in CouplingSeries::new(m, eta).take(41).enumerate() {
                let exact = coupling_exact(n as u64, m as u64, p, q);
                let got = f.magnitude();
                // couplings are matrix elements of a unitary, so |f| ≤ 1
                assert!(got <= 1.0 + 1e-15);
                assert!((got - exact).abs() <= 1e-13, "|f_{n}^{m}({eta})| = {got} vs {exact}");
                if exact > 1e-6 {
                    assert!((got - exact).abs() <= 1e-10 * exact);
                }
            }
        }
    }
}

#[test]
fn single_and_series_agree() {
    let series: Vec<_> = CouplingSeries::new(3, 0.8f64).take(30).collect();
    for (n, f) in series.iter().enumerate() {
        assert_eq!(*f, coupling_f(n, 3, 0.8));
    }
}

#[test]
fn small_eta_against_exact() {
    let eta = 1e-3f64;
    let exact = coupling_f(2, 1, eta).norm_sqr();
    let approx = small_eta_expansion(2, 1, eta);
    assert!((exact - approx).abs() <= 1e-5 * exact);
    for m in 0..4 {
        for n in 0..10 {
            let exact = coupling_f(n, m, 0.01f64).norm_sqr();
            let approx = small_eta_expansion(n, m, 0.01f64);
            assert!((exact - approx).abs() <= 1e-5 * exact, "n={n} m={m}");
        }
    }
}

#[test]
fn deep_series_stays_finite() {
    // far beyond the range where L_n^m overflows a double
    let f = CouplingSeries::new(2, 3.0f64).nth(200_000).unwrap();
    assert!(f.log_mag.is_finite() && f.log_mag < 0.0);
}
