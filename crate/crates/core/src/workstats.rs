//! Moments and two-point distribution of the work done by the quench.
//!
//! Reduced quantities are in units of `(ħν)^k`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dense::{dense_hamiltonians, DenseQuench};
use crate::error::{Error, Result};
use crate::numerics::sqrt_excess;
use crate::params::{eta_from_geometry, QuenchSpec, ReducedParams, ThermalSpec, TrapIonConfig, HBAR};
use crate::scalar::Real;
use crate::spectra::{sideband_block, sideband_eigenvectors, Ket};

/// Ratio of the largest binomial term to the result above which a numeric
/// moment is flagged.
pub const CANCELLATION_WARN: f64 = 1e6;
/// Relative tolerance for merging work values in a [`WorkPmf`].
pub const PMF_MERGE_TOL: f64 = 1e-9;
const PMF_TAIL_WARN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkMoments<T> {
    pub mean: T,
    pub second: T,
    pub third: T,
    /// `third / second^{3/2}`; NaN when `second = 0`.
    pub skewness: T,
}

impl<T: Real> WorkMoments<T> {
    fn from_central(mean: T, second: T, third: T) -> Self {
        let skewness = if second > T::zero() {
            third / second.powf(T::of(1.5))
        } else {
            T::nan()
        };
        Self {
            mean,
            second,
            third,
            skewness,
        }
    }
}

/// Closed-form moments of the full Lamb-Dicke quench from the Gibbs state:
/// `⟨W⟩ = 0`, `⟨W²⟩ = (Ω/2ν)²`, `⟨W³⟩ = (Ω/2ν)²·(η² + (ω₀/ν)·tanh(βħω₀/2))`.
pub fn moments_analytic<T: Real>(rp: &ReducedParams<T>) -> WorkMoments<T> {
    let half_om = rp.om_over_nu() * T::half();
    let second = half_om * half_om;
    let eta2 = rp.eta() * rp.eta();
    let third = second * (eta2 + rp.w0_over_nu() * (rp.b_w0() * T::half()).tanh());
    WorkMoments::from_central(T::zero(), second, third)
}

/// [`moments_analytic`] in SI units (J, J², J³), with η from the geometry.
///
/// `νη²` equals `(ω_L/c)²·ħ·cos²φ/(2M)`, so the third moment does not depend on
/// the trap frequency once the laser frequency is fixed.
pub fn moments_si(cfg: &TrapIonConfig, q: QuenchSpec, t: ThermalSpec) -> Result<WorkMoments<f64>> {
    let eta = eta_from_geometry(cfg, &q)?;
    let om = cfg.omega_rabi();
    let second = (HBAR * om).powi(2) / 4.0;
    let b_w0 = t.beta_at(cfg.nu()) * HBAR * cfg.omega0();
    let third = HBAR.powi(3) * om * om / 4.0
        * (cfg.nu() * eta * eta + cfg.omega0() * (0.5 * b_w0).tanh());
    Ok(WorkMoments::from_central(0.0, second, third))
}

/// A numerically evaluated moment and its cancellation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericMoment {
    pub value: f64,
    /// Largest `|C(n,k)·Tr[H_f^{n−k} H_i^k ρ_i]|` entering the sum.
    pub largest_term: f64,
    pub cancellation_warning: bool,
}

/// `⟨Wⁿ⟩ = Σ_k (−1)^k C(n,k) Tr[H_f^{n−k} H_i^k ρ_i]` on dense matrices.
///
/// Desk-scale ratios only: the binomial terms grow like `(ω₀/ν)ⁿ` while the
/// result does not.
pub fn moment_from_dense(dq: &DenseQuench, order: u32, use_full: bool) -> Result<NumericMoment> {
    if !(1..=4).contains(&order) {
        return Err(Error::param("order", format!("must be in 1..=4, got {order}")));
    }
    let h_f = if use_full { &dq.h_full } else { &dq.h_sideband };
    let dim = h_f.dim();
    let energies: Vec<f64> = (0..dim).map(|i| dq.h_i.matrix()[(i, i)].re).collect();
    let pops: Vec<f64> = (0..dim).map(|i| dq.rho_i.matrix()[(i, i)].re).collect();

    let mut power = DMatrix::<Complex64>::identity(dim, dim);
    let mut diag_powers = vec![vec![1.0; dim]];
    for _ in 0..order {
        power = &power * h_f.matrix();
        diag_powers.push((0..dim).map(|i| power[(i, i)].re).collect());
    }

    let n = order as usize;
    let mut value = 0.0;
    let mut largest = 0.0f64;
    for k in 0..=n {
        let binom = binomial(n, k) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let tr: f64 = (0..dim)
            .map(|i| diag_powers[n - k][i] * energies[i].powi(k as i32) * pops[i])
            .sum();
        let term = sign * binom * tr;
        largest = largest.max(term.abs());
        value += term;
    }
    Ok(NumericMoment {
        value,
        largest_term: largest,
        cancellation_warning: largest > CANCELLATION_WARN * value.abs(),
    })
}

/// Builds the dense quench with phonon numbers `≤ n_trunc` and evaluates
/// [`moment_from_dense`].
pub fn moments_numeric(
    rp: &ReducedParams<f64>,
    n_trunc: usize,
    order: u32,
    use_full: bool,
) -> Result<NumericMoment> {
    moment_from_dense(&dense_hamiltonians(rp, n_trunc)?, order, use_full)
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Two-point-measurement work distribution, sorted by work value.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkPmf {
    /// `(work in units of ħν, probability)`.
    pub points: Vec<(f64, f64)>,
    /// Thermal weight beyond the truncation.
    pub tail_probability: f64,
    pub tail_warning: bool,
}

impl WorkPmf {
    pub fn total_probability(&self) -> f64 {
        self.points.iter().map(|&(_, p)| p).sum()
    }

    pub fn moment(&self, order: u32) -> f64 {
        self.points
            .iter()
            .map(|&(w, p)| p * w.powi(order as i32))
            .sum()
    }
}

/// Work distribution of the sideband quench from a Gibbs state truncated to
/// phonon numbers `≤ n_trunc`.
///
/// Work values come from the block algebra directly (never as a difference of
/// two absolute energies), so the distribution stays resolved at
/// `ω₀/ν ~ 10¹¹`. Adjacent values within `1e-9·max(|a|, |b|)` are merged at
/// their probability-weighted mean.
pub fn work_pmf_sideband(rp: &ReducedParams<f64>, n_trunc: usize) -> Result<WorkPmf> {
    let m = rp.m() as usize;
    if n_trunc < m {
        return Err(Error::param(
            "n_trunc",
            format!("must be at least m = {m}, got {n_trunc}"),
        ));
    }
    let b_nu = rp.b_nu();
    let b_w0 = rp.b_w0();
    // normalized populations over n ≤ n_trunc, both levels
    let log_z = -crate::numerics::ln_one_minus_exp_neg(b_nu) + (-b_w0).exp().ln_1p()
        + crate::numerics::ln_one_minus_exp_neg(b_nu * (n_trunc + 1) as f64);
    let pop = |k: Ket| {
        let level = if k.index() % 2 == 1 { -b_w0 } else { 0.0 };
        (-b_nu * k.n as f64 + level - log_z).exp()
    };

    let wl = rp.wl_over_nu();
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(4 * (n_trunc + 1));
    // edges and partnerless kets do not move
    let mut still = 0.0;
    for n in 0..m {
        still += pop(match rp.branch() {
            crate::params::Branch::Ajc => Ket::excited(n),
            _ => Ket::ground(n),
        });
    }
    for n in (n_trunc + 1 - m)..=n_trunc {
        still += pop(match rp.branch() {
            crate::params::Branch::Ajc => Ket::ground(n),
            _ => Ket::excited(n),
        });
    }
    if still > 0.0 {
        raw.push((0.0, still));
    }
    for n in 0..=(n_trunc - m) {
        let block = sideband_block(n, rp);
        let u = rp.om_over_nu() * block.f.magnitude();
        let s = 0.5 * sqrt_excess(wl, u);
        let [mu, gamma] = sideband_eigenvectors(n, rp);
        let (p_up, p_lo) = (pop(block.upper), pop(block.lower));
        // upper ket sits at c + ω_L/2, lower at c − ω_L/2; h = |ω_L|/2 + s
        let (up_to_g, up_to_m, lo_to_g, lo_to_m) = if wl >= 0.0 {
            (s, -(wl + s), wl + s, -s)
        } else {
            (-wl + s, -s, s, wl - s)
        };
        raw.push((up_to_g, p_up * gamma.amplitude(block.upper).norm_sqr()));
        raw.push((up_to_m, p_up * mu.amplitude(block.upper).norm_sqr()));
        raw.push((lo_to_g, p_lo * gamma.amplitude(block.lower).norm_sqr()));
        raw.push((lo_to_m, p_lo * mu.amplitude(block.lower).norm_sqr()));
    }

    raw.retain(|&(_, p)| p > 0.0);
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (w, p) in raw {
        match points.last_mut() {
            Some((w0, p0)) if (w - *w0).abs() <= PMF_MERGE_TOL * w.abs().max(w0.abs()) => {
                *w0 = (*w0 * *p0 + w * p) / (*p0 + p);
                *p0 += p;
            }
            _ => points.push((w, p)),
        }
    }
    let tail_probability = (-b_nu * (n_trunc + 1) as f64).exp();
    Ok(WorkPmf {
        points,
        tail_probability,
        tail_warning: tail_probability > PMF_TAIL_WARN,
    })
}
