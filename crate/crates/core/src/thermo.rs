//! Partition functions, the nonequilibrium lag and its limits.
//!
//! Every partition function is stored as `ln Z − βħω₀/2`. The lag itself is
//! assembled from the per-block excess `Z_f − Z_i`, which is a sum of
//! nonnegative terms, so `L ≥ 0` holds exactly and values down to the
//! underflow threshold are resolved even when `βħω₀ ~ 10¹²`.

use crate::error::{Error, Result};
use crate::numerics::{
    ln_one_minus_exp_neg, ln_sinh, CouplingSeries, CouplingValue, LogSumExp, sqrt_excess,
};
use crate::params::{Branch, ReducedParams};
use crate::scalar::Real;

/// Default relative tolerance on the neglected tail.
pub const DEFAULT_TOL: f64 = 1e-16;
/// Default number of consecutive negligible terms before stopping.
pub const DEFAULT_PATIENCE: usize = 64;
/// Default hard cap on the number of summed blocks.
pub const DEFAULT_CAP: usize = 100_000_000;
/// Relative tolerance under which `Φ` counts as zero.
pub const PHI_ZERO_TOL: f64 = 1e-9;

/// How many blocks `n = 0, 1, …` of a partition sum to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationPolicy {
    /// Exactly `N` blocks, `n = 0..N−1`.
    Fixed(usize),
    /// Stop once `patience` consecutive terms are each below `rel_tol` of the
    /// running total and the rigorous tail bound is below `rel_tol` too.
    Adaptive {
        rel_tol: f64,
        patience: usize,
        cap: usize,
    },
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy::Adaptive {
            rel_tol: DEFAULT_TOL,
            patience: DEFAULT_PATIENCE,
            cap: DEFAULT_CAP,
        }
    }
}

impl TruncationPolicy {
    fn tol(&self) -> f64 {
        match *self {
            TruncationPolicy::Fixed(_) => DEFAULT_TOL,
            TruncationPolicy::Adaptive { rel_tol, .. } => rel_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    pub n_used: usize,
    /// ln of a rigorous bound on the neglected tail relative to the total.
    pub tail_bound_log: f64,
    pub converged: bool,
}

impl TruncationReport {
    /// Report for a closed form.
    pub fn exact() -> Self {
        Self {
            n_used: 0,
            tail_bound_log: f64::NEG_INFINITY,
            converged: true,
        }
    }
}

/// `ln Z − βħω₀/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPartition<T> {
    pub shifted_log: T,
    /// `βħω₀/2`; never added back implicitly.
    pub shift_reference: T,
    pub truncation: TruncationReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegimeFlags {
    /// The lag grows without bound as `β → ∞`.
    pub divergence_predicted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagResult<T> {
    /// The lag in nats.
    pub value: T,
    pub truncation: TruncationReport,
    pub regime_flags: RegimeFlags,
}

/// A series value with its truncation report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue<T> {
    pub value: T,
    pub truncation: TruncationReport,
}

/// Drives a block series `Σ_n e^{t_n}` under a truncation policy.
///
/// `base_log` is a fixed contribution to the reference total the relative
/// criteria are measured against. `tail_log(N)` must bound
/// `ln Σ_{n≥N} e^{t_n}` from above.
fn run_series<T: Real>(
    policy: TruncationPolicy,
    base_log: T,
    m: u32,
    eta: T,
    mut term: impl FnMut(usize, &CouplingValue<T>) -> T,
    tail_log: impl Fn(usize) -> T,
) -> Result<(T, TruncationReport)> {
    let log_tol = T::of(policy.tol().ln());
    let mut acc = LogSumExp::new();
    let mut quiet = 0usize;
    let mut series = CouplingSeries::new(m, eta);
    let reference = |acc: &LogSumExp<T>| {
        let mut r = LogSumExp::new();
        let _ = r.push(base_log);
        let _ = r.push(acc.value());
        r.value()
    };
    let (limit, patience) = match policy {
        TruncationPolicy::Fixed(n) => (n, usize::MAX),
        TruncationPolicy::Adaptive { patience, cap, .. } => (cap, patience),
    };
    let mut n = 0usize;
    while n < limit {
        let f = series.next().expect("series is infinite");
        let t = term(n, &f);
        acc.push(t)?;
        n += 1;
        if t - reference(&acc) < log_tol {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= patience && tail_log(n) - reference(&acc) <= log_tol {
            break;
        }
    }
    let tail = (tail_log(n) - reference(&acc)).f64();
    let tail = if tail.is_nan() { f64::NEG_INFINITY } else { tail };
    let report = TruncationReport {
        n_used: n,
        tail_bound_log: tail,
        converged: tail <= policy.tol().ln(),
    };
    if !report.converged && matches!(policy, TruncationPolicy::Adaptive { .. }) {
        return Err(Error::NotConverged {
            report,
            partial: acc.value().f64(),
        });
    }
    Ok((acc.value(), report))
}

fn logaddexp<T: Real>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == T::neg_infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 + eˣ)` without overflow.
fn softplus<T: Real>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(n̄ + 1)`.
fn ln_nbar_plus_one<T: Real>(b_nu: T) -> T {
    -ln_one_minus_exp_neg(b_nu)
}

/// Initial (bare) partition function, exact:
/// `ln Z_i − βħω₀/2 = ln(n̄ + 1) + ln(1 + e^{−βħω₀})`.
pub fn ln_partition_initial<T: Real>(rp: &ReducedParams<T>) -> LogPartition<T> {
    LogPartition {
        shifted_log: ln_nbar_plus_one(rp.b_nu()) + (-rp.b_w0()).exp().ln_1p(),
        shift_reference: rp.b_w0() * T::half(),
        truncation: TruncationReport::exact(),
    }
}

/// Shifted log of the `m` edge states, which are common to `Z_i` and `Z_f`.
fn ln_edges<T: Real>(rp: &ReducedParams<T>) -> T {
    if rp.m() == 0 {
        return T::neg_infinity();
    }
    let geometric =
        ln_nbar_plus_one(rp.b_nu()) + ln_one_minus_exp_neg(T::of(f64::from(rp.m())) * rp.b_nu());
    match rp.branch() {
        Branch::Ajc => geometric - rp.b_w0(),
        _ => geometric,
    }
}

/// `½√(b_wl² + b_om²|f|²) − ½|b_wl|` at `|f| = 1`, the largest possible value.
fn half_excess_max<T: Real>(rp: &ReducedParams<T>) -> T {
    sqrt_excess(rp.b_wl(), rp.b_om()) * T::half()
}

/// `−b_nu·(n + m/2) + ½(|b_wl| − b_w0)`: the block prefactor in shifted form.
fn block_prefactor<T: Real>(rp: &ReducedParams<T>, n: usize) -> T {
    let c = T::of_usize(n) + T::of(f64::from(rp.m())) * T::half();
    -rp.b_nu() * c + rp.abs_wl_minus_w0() * T::half()
}

/// Final partition function after a sideband (or carrier) quench, summed
/// block by block: `Z = Σ_{edges} e^{−βζ} + Σ_n 2e^{−βħν(n+m/2)}
/// cosh(½βħ√(ω_L² + Ω²|f_n^m|²))`.
pub fn ln_partition_final<T: Real>(
    rp: &ReducedParams<T>,
    policy: TruncationPolicy,
) -> Result<LogPartition<T>> {
    let abs_wl = rp.b_wl().abs();
    let b_om = rp.b_om();
    let edges = ln_edges(rp);
    let term = |n: usize, f: &CouplingValue<T>| {
        let excess = sqrt_excess(abs_wl, b_om * f.magnitude());
        let y = (abs_wl + excess) * T::half();
        block_prefactor(rp, n) + excess * T::half() + (-(T::two() * y)).exp().ln_1p()
    };
    let bound_top = half_excess_max(rp) + T::LN_2();
    let ln_geo = ln_nbar_plus_one(rp.b_nu());
    let tail = |n: usize| block_prefactor(rp, n) + bound_top + ln_geo;
    let (pairs, truncation) = run_series(policy, edges, rp.m(), rp.eta(), term, tail)?;
    Ok(LogPartition {
        shifted_log: logaddexp(edges, pairs),
        shift_reference: rp.b_w0() * T::half(),
        truncation,
    })
}

/// `ln Σ_n (Z_f − Z_i)_n`, shifted like the partition functions.
///
/// Block `n` contributes `4e^{−βħν(n+m/2)} sinh(P) sinh(Q)` with
/// `Q = ¼(√(b_wl² + u²) − |b_wl|)` and `P = |b_wl|/2 + Q`.
fn ln_partition_excess<T: Real>(
    rp: &ReducedParams<T>,
    policy: TruncationPolicy,
    base_log: T,
) -> Result<(T, TruncationReport)> {
    let abs_wl = rp.b_wl().abs();
    let b_om = rp.b_om();
    let quarter = T::half() * T::half();
    let term = |n: usize, f: &CouplingValue<T>| {
        let q = sqrt_excess(abs_wl, b_om * f.magnitude()) * quarter;
        if q == T::zero() {
            return T::neg_infinity();
        }
        let p = abs_wl * T::half() + q;
        T::LN_2() + block_prefactor(rp, n) + q + ln_one_minus_exp_neg(T::two() * p) + ln_sinh(q)
    };
    let q_max = half_excess_max(rp) * T::half();
    let bound_top = T::LN_2() + q_max + ln_sinh(q_max);
    let ln_geo = ln_nbar_plus_one(rp.b_nu());
    let tail = |n: usize| block_prefactor(rp, n) + bound_top + ln_geo;
    run_series(policy, base_log, rp.m(), rp.eta(), term, tail)
}

/// Nonequilibrium lag `L = ln Z_f − ln Z_i` of the sideband quench.
///
/// Returns [`Error::NotConverged`] with the partial value when an adaptive
/// policy hits its cap.
pub fn nonequilibrium_lag<T: Real>(
    rp: &ReducedParams<T>,
    policy: TruncationPolicy,
) -> Result<LagResult<T>> {
    let z_i = ln_partition_initial(rp).shifted_log;
    let lag_of = |ln_excess: T| softplus(ln_excess - z_i);
    let (ln_excess, truncation) = match ln_partition_excess(rp, policy, z_i) {
        Ok(v) => v,
        Err(Error::NotConverged { report, partial }) => {
            return Err(Error::NotConverged {
                report,
                partial: lag_of(T::of(partial)).f64(),
            })
        }
        Err(e) => return Err(e),
    };
    let regime_flags = RegimeFlags {
        divergence_predicted: divergence_predicate(rp, default_scan(rp.m())).diverges,
    };
    Ok(LagResult {
        value: lag_of(ln_excess),
        truncation,
        regime_flags,
    })
}

/// `Φ_n^m` in units of `ν`, with the scale used to decide whether it vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue<T> {
    pub n: usize,
    pub m: u32,
    pub branch: Branch,
    /// `Φ_n^m/ν`.
    pub phi: T,
    /// Magnitude of the two pieces that cancel in `Φ`.
    pub scale: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiSign {
    Negative,
    Zero,
    Positive,
}

impl<T: Real> PhiValue<T> {
    /// `Φ_n^m` in rad/s.
    pub fn rad_per_s(&self, nu: f64) -> f64 {
        self.phi.f64() * nu
    }

    /// Sign with `|Φ| ≤ 1e-9·scale` counted as zero.
    pub fn sign(&self) -> PhiSign {
        if self.phi.abs() <= T::of(PHI_ZERO_TOL) * self.scale {
            PhiSign::Zero
        } else if self.phi < T::zero() {
            PhiSign::Negative
        } else {
            PhiSign::Positive
        }
    }
}

/// `Φ_n^m = ν(2n + m) + ω₀ − √(ω_L² + Ω²|f_n^m|²)`, twice the gap between a
/// lower block eigenvalue and the bare ground energy.
///
/// Evaluated as `ν(2n + m) + (ω₀ − |ω_L|)` minus the square-root excess, so
/// the sign survives `|Φ| ≪ ω₀`.
pub fn phi<T: Real>(n: usize, rp: &ReducedParams<T>) -> PhiValue<T> {
    let f = crate::numerics::coupling_f(n, rp.m(), rp.eta());
    phi_from_coupling(n, rp, &f)
}

fn phi_from_coupling<T: Real>(n: usize, rp: &ReducedParams<T>, f: &CouplingValue<T>) -> PhiValue<T> {
    let m = T::of(f64::from(rp.m()));
    let wl = rp.wl_over_nu();
    let w0_minus_abs_wl = if wl >= T::zero() {
        -T::of(f64::from(rp.quench().detuning_sign())) * m
    } else {
        rp.w0_over_nu() + wl
    };
    let linear = T::two() * T::of_usize(n) + m + w0_minus_abs_wl;
    let excess = sqrt_excess(wl, rp.om_over_nu() * f.magnitude());
    PhiValue {
        n,
        m: rp.m(),
        branch: rp.branch(),
        phi: linear - excess,
        scale: linear.abs().max(excess),
    }
}

/// `Φ_n^m` for `n = 0..=n_max`.
pub fn phi_scan<T: Real>(rp: &ReducedParams<T>, n_max: usize) -> Vec<PhiValue<T>> {
    CouplingSeries::new(rp.m(), rp.eta())
        .take(n_max + 1)
        .enumerate()
        .map(|(n, f)| phi_from_coupling(n, rp, &f))
        .collect()
}

/// Default scan length `10·m + 100` for the low-temperature classification.
pub fn default_scan(m: u32) -> usize {
    10 * m as usize + 100
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub diverges: bool,
    /// Every scanned `n` with `Φ_n^m < 0`.
    pub witnesses: Vec<usize>,
}

/// Whether the lag grows without bound as `β → ∞`: some block has `Φ_n^m < 0`.
///
/// On the red sideband this is `|f_n^m| > (2/Ω)√(ν(n+m)(ω₀ + nν))`
/// (see [`jc_coupling_threshold`]). For the blue sideband and the carrier
/// `Φ_0 < 0` whenever `Ω·f_0^m ≠ 0`.
pub fn divergence_predicate<T: Real>(rp: &ReducedParams<T>, n_scan_max: usize) -> Divergence {
    let witnesses: Vec<usize> = phi_scan(rp, n_scan_max)
        .into_iter()
        .filter(|p| p.sign() == PhiSign::Negative)
        .map(|p| p.n)
        .collect();
    Divergence {
        diverges: !witnesses.is_empty(),
        witnesses,
    }
}

/// `(2/Ω)√(ν(n+m)(ω₀ + nν))`, the red-sideband coupling above which `Φ_n^m < 0`.
pub fn jc_coupling_threshold<T: Real>(n: usize, rp: &ReducedParams<T>) -> T {
    let nm = T::of_usize(n + rp.m() as usize);
    let w = rp.w0_over_nu() + T::of_usize(n);
    T::two() / rp.om_over_nu() * (nm * w).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowTemperature<T> {
    pub finite: bool,
    /// `ln(g + k)` when finite: `g = 1` for the red-sideband edge ground
    /// state, `k` the number of vanishing `Φ_n^m`.
    pub limit_value: Option<T>,
    pub zeros: Vec<usize>,
}

/// `β → ∞` limit of the lag.
pub fn low_temperature_limit<T: Real>(rp: &ReducedParams<T>, n_scan_max: usize) -> LowTemperature<T> {
    let scan = phi_scan(rp, n_scan_max);
    let finite = scan.iter().all(|p| p.sign() != PhiSign::Negative);
    let zeros: Vec<usize> = scan
        .iter()
        .filter(|p| p.sign() == PhiSign::Zero)
        .map(|p| p.n)
        .collect();
    let edge_ground = usize::from(rp.branch() == Branch::Jc);
    let limit_value = finite.then(|| T::of_usize(edge_ground + zeros.len()).ln());
    LowTemperature {
        finite,
        limit_value,
        zeros,
    }
}

/// Small-η form of `|f_n^m|²`:
/// `(n+m)!/(n!·m!²)·[1 − η²(2n+m+1)/(m+1)]·η^{2m}`. Valid for `η ≲ 0.3`.
pub fn small_eta_expansion<T: Real>(n: usize, m: u32, eta: T) -> T {
    let mu = m as usize;
    // (n+m)!/(n!·m!) · 1/m!
    let mut coeff = T::one();
    for k in 1..=mu {
        coeff = coeff * T::of_usize(n + k) / T::of_usize(k) / T::of_usize(k);
    }
    let eta2 = eta * eta;
    let bracket = T::one() - eta2 * T::of_usize(2 * n + mu + 1) / T::of_usize(mu + 1);
    coeff * bracket * eta2.powi(m as i32)
}

/// [`small_eta_expansion`] kept to order `η²`: nonzero only for `m ≤ 1`.
pub fn small_eta_leading<T: Real>(n: usize, m: u32, eta: T) -> T {
    let eta2 = eta * eta;
    match m {
        0 => T::one() - T::of_usize(2 * n + 1) * eta2,
        1 => T::of_usize(n + 1) * eta2,
        _ => T::zero(),
    }
}

/// Lag in the `ν → 0` limit at fixed `β` and `η`:
/// `ln[(1 − e^{−βħν}) Σ_n e^{−βħνn} cosh(½βħ√(ω₀² + Ω²|f_n^m|²)) / cosh(½βħω₀)]`.
///
/// The occupation weights keep the current `βħν`, which is what makes the sum
/// finite; with `Ω = 0` the value is exactly zero.
pub fn nu_to_zero_limit<T: Real>(
    rp: &ReducedParams<T>,
    policy: TruncationPolicy,
) -> Result<SeriesValue<T>> {
    let b_nu = rp.b_nu();
    let b_w0 = rp.b_w0();
    let b_om = rp.b_om();
    let quarter = T::half() * T::half();
    // cosh(a + 2Q) − cosh a = 2 sinh(a + Q) sinh Q, relative to cosh a; the
    // ratio sinh(a + Q)/cosh a is taken apart so that a never meets Q
    let a = b_w0 * T::half();
    let ln_cosh_rest = (-(T::two() * a)).exp().ln_1p();
    let ratio = |q: T| q + ln_one_minus_exp_neg(T::two() * (a + q)) - ln_cosh_rest;
    let term = |n: usize, f: &CouplingValue<T>| {
        let q = sqrt_excess(b_w0, b_om * f.magnitude()) * quarter;
        if q == T::zero() {
            return T::neg_infinity();
        }
        T::LN_2() - b_nu * T::of_usize(n) + ratio(q) + ln_sinh(q)
    };
    let q_max = sqrt_excess(b_w0, b_om) * quarter;
    let bound_top = T::LN_2() + ratio(q_max) + ln_sinh(q_max);
    let ln_norm = ln_one_minus_exp_neg(b_nu);
    let tail = |n: usize| -b_nu * T::of_usize(n) + bound_top - ln_norm;
    let (ln_sum, truncation) = run_series(policy, -ln_norm, rp.m(), rp.eta(), term, tail)?;
    Ok(SeriesValue {
        value: softplus(ln_sum + ln_norm),
        truncation,
    })
}
