//! Special functions and summation kernels.
//!
//! Everything here is written so that it stays accurate when the inputs span
//! many orders of magnitude: Laguerre values carry a separate log scale,
//! couplings are stored as phase + sign + log magnitude, and square-root
//! differences are evaluated without subtracting nearly equal numbers.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Associated Laguerre polynomial `L_n^m(x)` by the upward three-term recurrence.
///
/// Returns a range error if the value leaves the representable range; use
/// [`laguerre_scaled`] when that can happen.
pub fn laguerre_assoc<T: Real>(n: usize, m: u32, x: T) -> Result<T> {
    let mut seq = LaguerreSequence::new(m, x);
    let (mantissa, log_scale) = seq.nth(n).expect("sequence is infinite");
    let value = mantissa * log_scale.exp();
    let underflow = mantissa != T::zero() && value == T::zero();
    if value.is_finite() && !underflow {
        Ok(value)
    } else {
        Err(Error::Range(format!(
            "L_{n}^{m}({x}) is outside the floating-point range"
        )))
    }
}

/// `L_n^m(x) = mantissa · e^{log_scale}` without overflow for any `n`.
pub fn laguerre_scaled<T: Real>(n: usize, m: u32, x: T) -> (T, T) {
    LaguerreSequence::new(m, x).nth(n).expect("sequence is infinite")
}

/// Iterator over `L_0^m(x), L_1^m(x), …` as `(mantissa, log_scale)` pairs.
///
/// Both recurrence values are rescaled together whenever they drift outside
/// `[1/big, big]`, with `big = max^{1/4}` of the scalar type.
#[derive(Debug, Clone)]
pub struct LaguerreSequence<T> {
    m: T,
    x: T,
    k: usize,
    prev: T,
    curr: T,
    log_scale: T,
    big: T,
    ln_big: T,
}

impl<T: Real> LaguerreSequence<T> {
    pub fn new(m: u32, x: T) -> Self {
        let big = T::max_value().sqrt().sqrt();
        Self {
            m: T::of(f64::from(m)),
            x,
            k: 0,
            prev: T::zero(),
            curr: T::one(),
            log_scale: T::zero(),
            big,
            ln_big: big.ln(),
        }
    }
}

impl<T: Real> Iterator for LaguerreSequence<T> {
    type Item = (T, T);

    fn next(&mut self) -> Option<(T, T)> {
        let out = (self.curr, self.log_scale);
        let k = T::of_usize(self.k);
        let next = if self.k == 0 {
            self.m + T::one() - self.x
        } else {
            ((T::two() * k + self.m + T::one() - self.x) * self.curr - (k + self.m) * self.prev)
                / (k + T::one())
        };
        self.prev = self.curr;
        self.curr = next;
        self.k += 1;

        let size = self.curr.abs().max(self.prev.abs());
        if size > self.big {
            self.curr = self.curr / self.big;
            self.prev = self.prev / self.big;
            self.log_scale = self.log_scale + self.ln_big;
        } else if size > T::zero() && size < self.big.recip() {
            self.curr = self.curr * self.big;
            self.prev = self.prev * self.big;
            self.log_scale = self.log_scale - self.ln_big;
        }
        Some(out)
    }
}

/// `f_n^m = (iη)^m · √(n!/(n+m)!) · e^{−η²/2} · L_n^m(η²)` as phase, sign and
/// log magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingValue<T> {
    /// Power of `i`, reduced mod 4.
    pub m_phase: u8,
    /// Sign of the real Laguerre factor.
    pub sign: i8,
    /// `ln |f_n^m|`; `−∞` when the coupling vanishes.
    pub log_mag: T,
}

impl<T: Real> CouplingValue<T> {
    pub fn magnitude(&self) -> T {
        self.log_mag.exp()
    }

    /// `|f|²`.
    pub fn norm_sqr(&self) -> T {
        (T::two() * self.log_mag).exp()
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == T::neg_infinity()
    }

    /// The complex coupling itself (may underflow to zero).
    pub fn value(&self) -> Complex<T> {
        let r = T::of(f64::from(self.sign)) * self.magnitude();
        match self.m_phase % 4 {
            0 => Complex::new(r, T::zero()),
            1 => Complex::new(T::zero(), r),
            2 => Complex::new(-r, T::zero()),
            _ => Complex::new(T::zero(), -r),
        }
    }
}

/// Iterator over `f_0^m(η), f_1^m(η), …` in O(1) work per term.
#[derive(Debug, Clone)]
pub struct CouplingSeries<T> {
    m: u32,
    n: usize,
    prefactor: T,
    laguerre: LaguerreSequence<T>,
}

impl<T: Real> CouplingSeries<T> {
    pub fn new(m: u32, eta: T) -> Self {
        let x = eta * eta;
        // m·ln η with the convention 0·ln 0 = 0
        let power = if m == 0 {
            T::zero()
        } else {
            T::of(f64::from(m)) * eta.ln()
        };
        Self {
            m,
            n: 0,
            prefactor: power - x * T::half(),
            laguerre: LaguerreSequence::new(m, x),
        }
    }
}

impl<T: Real> Iterator for CouplingSeries<T> {
    type Item = CouplingValue<T>;

    fn next(&mut self) -> Option<CouplingValue<T>> {
        let (mantissa, scale) = self.laguerre.next()?;
        // ½·ln(n!/(n+m)!) = −½·Σ_{k=1}^{m} ln(n+k)
        let log_rising: T = (1..=self.m as usize)
            .map(|k| T::of_usize(self.n + k).ln())
            .sum();
        let log_mag = if mantissa == T::zero() || self.prefactor == T::neg_infinity() {
            T::neg_infinity()
        } else {
            self.prefactor - T::half() * log_rising + mantissa.abs().ln() + scale
        };
        self.n += 1;
        Some(CouplingValue {
            m_phase: (self.m % 4) as u8,
            sign: if mantissa < T::zero() { -1 } else { 1 },
            log_mag,
        })
    }
}

/// Single coupling `f_n^m(η)`.
pub fn coupling_f<T: Real>(n: usize, m: u32, eta: T) -> CouplingValue<T> {
    CouplingSeries::new(m, eta).nth(n).expect("series is infinite")
}

/// `ln cosh x`, exact for any finite `x`.
pub fn lncosh<T: Real>(x: T) -> T {
    let a = x.abs();
    a - T::LN_2() + (-(T::two() * a)).exp().ln_1p()
}

/// `ln sinh x` for `x ≥ 0` (`−∞` at zero).
pub fn ln_sinh<T: Real>(x: T) -> T {
    if x < T::one() {
        x.sinh().ln()
    } else {
        x - T::LN_2() + (-(-(T::two() * x)).exp_m1()).ln()
    }
}

/// `ln(1 − e^{−x})` for `x > 0`.
pub fn ln_one_minus_exp_neg<T: Real>(x: T) -> T {
    if x < T::LN_2() {
        (-(-x).exp_m1()).ln()
    } else {
        (-(-x).exp()).ln_1p()
    }
}

/// `ln Σ e^{tᵢ}` with max shift; `−∞` for empty or all-`−∞` input.
pub fn log_sum_exp<T: Real>(terms: &[T]) -> Result<T> {
    let mut acc = LogSumExp::new();
    for &t in terms {
        acc.push(t)?;
    }
    Ok(acc.value())
}

/// Streaming log-sum-exp accumulator; the result depends only on the push
/// order, which callers keep fixed.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp<T> {
    max: T,
    sum: T,
}

impl<T: Real> Default for LogSumExp<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> LogSumExp<T> {
    pub fn new() -> Self {
        Self {
            max: T::neg_infinity(),
            sum: T::zero(),
        }
    }

    pub fn push(&mut self, t: T) -> Result<()> {
        if t.is_nan() || t == T::infinity() {
            return Err(Error::Range(format!("log-sum-exp term {t} is not summable")));
        }
        if t == T::neg_infinity() {
            return Ok(());
        }
        if t > self.max {
            self.sum = self.sum * (self.max - t).exp() + T::one();
            self.max = t;
        } else {
            self.sum = self.sum + (t - self.max).exp();
        }
        Ok(())
    }

    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            T::neg_infinity()
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// `√(w² + u²) − |w|` without cancellation.
pub fn sqrt_excess<T: Real>(w: T, u: T) -> T {
    let u = u.abs();
    if u == T::zero() {
        return T::zero();
    }
    let denom = w.hypot(u) + w.abs();
    u * (u / denom)
}

/// `√(wL² + u²) − w0`, evaluated as `(wL − w0) + u²/(√(wL² + u²) + wL)`.
pub fn sqrt_shift<T: Real>(wl: T, u: T, w0: T) -> T {
    (wl - w0) + sqrt_excess(wl, u)
}
