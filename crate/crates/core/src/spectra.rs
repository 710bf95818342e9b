//! Exact block spectra of the sideband Hamiltonians at the quench instant.
//!
//! Energies are in units of `ħν`. The JC Hamiltonian leaves
//! `{|n,e⟩, |n+m,g⟩}` invariant and the AJC Hamiltonian `{|n+m,e⟩, |n,g⟩}`;
//! the `m` kets left over at the bottom of the ladder are eigenstates on their
//! own ("edge" states).

use num_complex::Complex;

use crate::numerics::{coupling_f, CouplingValue};
use crate::params::{Branch, ReducedParams};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Ground,
    Excited,
}

/// Product basis ket `|n, level⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ket {
    pub n: usize,
    pub level: Level,
}

impl Ket {
    pub fn ground(n: usize) -> Self {
        Self {
            n,
            level: Level::Ground,
        }
    }

    pub fn excited(n: usize) -> Self {
        Self {
            n,
            level: Level::Excited,
        }
    }

    /// Position in the ordered basis `|0,g⟩, |0,e⟩, |1,g⟩, …`.
    pub fn index(&self) -> usize {
        2 * self.n + usize::from(self.level == Level::Excited)
    }

    /// Eigenvalue of the bare Hamiltonian `n + σ_z·ω₀/(2ν)`.
    pub fn bare_energy<T: Real>(&self, w0_over_nu: T) -> T {
        let half = w0_over_nu * T::half();
        match self.level {
            Level::Ground => T::of_usize(self.n) - half,
            Level::Excited => T::of_usize(self.n) + half,
        }
    }
}

/// Energy (units of `ħν`) with its eigenvector over labeled kets.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub value: T,
    pub vector: Vec<(Ket, Complex<T>)>,
}

impl<T: Real> EigenPair<T> {
    fn basis(value: T, ket: Ket) -> Self {
        Self {
            value,
            vector: vec![(ket, Complex::new(T::one(), T::zero()))],
        }
    }

    /// `⟨ket|self⟩`.
    pub fn amplitude(&self, ket: Ket) -> Complex<T> {
        self.vector
            .iter()
            .find(|(k, _)| *k == ket)
            .map(|&(_, a)| a)
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }
}

/// One 2×2 invariant block: `[[a, c], [c*, d]]` over `(upper, lower)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandBlock<T> {
    /// Excited-level ket of the block.
    pub upper: Ket,
    /// Ground-level ket of the block.
    pub lower: Ket,
    pub coupling: Complex<T>,
    pub f: CouplingValue<T>,
}

/// Block `n` of the quench Hamiltonian for `rp`'s branch and sideband.
pub fn sideband_block<T: Real>(n: usize, rp: &ReducedParams<T>) -> SidebandBlock<T> {
    let m = rp.m() as usize;
    let f = coupling_f(n, rp.m(), rp.eta());
    let half_om = rp.om_over_nu() * T::half();
    let fv = f.value();
    match rp.branch() {
        Branch::Jc | Branch::Carrier => SidebandBlock {
            upper: Ket::excited(n),
            lower: Ket::ground(n + m),
            coupling: fv.scale(half_om),
            f,
        },
        Branch::Ajc => SidebandBlock {
            upper: Ket::excited(n + m),
            lower: Ket::ground(n),
            coupling: fv.conj().scale(half_om),
            f,
        },
    }
}

/// `(μ, γ)` of block `n`: `n + m/2 ∓ ½√((ω_L/ν)² + (Ω/ν)²|f_n^m|²)`.
pub fn sideband_eigenvalues<T: Real>(n: usize, rp: &ReducedParams<T>) -> (T, T) {
    let f = coupling_f(n, rp.m(), rp.eta());
    pair_from_coupling(n, rp, &f)
}

pub(crate) fn pair_from_coupling<T: Real>(
    n: usize,
    rp: &ReducedParams<T>,
    f: &CouplingValue<T>,
) -> (T, T) {
    let center = T::of_usize(n) + T::of(f64::from(rp.m())) * T::half();
    let u = rp.om_over_nu() * f.magnitude();
    let h = rp.wl_over_nu().hypot(u) * T::half();
    (center - h, center + h)
}

/// Edge energies for `n = 0..m−1`: `n ∓ ω₀/(2ν)` (JC: `|n,g⟩`, AJC: `|n,e⟩`).
pub fn edge_eigenvalues<T: Real>(rp: &ReducedParams<T>) -> Vec<T> {
    edge_kets(rp.branch(), rp.m() as usize)
        .map(|k| k.bare_energy(rp.w0_over_nu()))
        .collect()
}

fn edge_kets(branch: Branch, m: usize) -> impl Iterator<Item = Ket> {
    (0..m).map(move |n| match branch {
        Branch::Ajc => Ket::excited(n),
        _ => Ket::ground(n),
    })
}

/// Normalized eigenvectors of block `n`, lower (`μ`) first.
///
/// When the coupling vanishes the block is already diagonal and the bare kets
/// are returned.
pub fn sideband_eigenvectors<T: Real>(n: usize, rp: &ReducedParams<T>) -> [EigenPair<T>; 2] {
    let block = sideband_block(n, rp);
    let (mu, gamma) = pair_from_coupling(n, rp, &block.f);
    block_eigenvectors(&block, rp.wl_over_nu(), mu, gamma)
}

fn block_eigenvectors<T: Real>(
    block: &SidebandBlock<T>,
    wl_over_nu: T,
    mu: T,
    gamma: T,
) -> [EigenPair<T>; 2] {
    // a − d = ω_L/ν for every branch
    let delta = wl_over_nu * T::half();
    let c = block.coupling;
    let h = delta.hypot(c.norm());
    let zero = Complex::new(T::zero(), T::zero());
    let (x, y) = if delta >= T::zero() {
        (Complex::new(h + delta, T::zero()), c.conj())
    } else {
        (c, Complex::new(h - delta, T::zero()))
    };
    let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if norm == T::zero() || !norm.is_finite() {
        return [
            EigenPair::basis(mu, block.lower),
            EigenPair::basis(gamma, block.upper),
        ];
    }
    let (x, y) = (x.unscale(norm), y.unscale(norm));
    let upper_state = EigenPair {
        value: gamma,
        vector: vec![(block.upper, x), (block.lower, y)],
    };
    let lower_state = EigenPair {
        value: mu,
        vector: vec![(block.upper, zero - y.conj()), (block.lower, x.conj())],
    };
    [lower_state, upper_state]
}

/// Edge and paired eigenvalues for `n = 0..=n_trunc`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable<T> {
    pub branch: Branch,
    pub m: u32,
    pub n_trunc: usize,
    pub edge: Vec<T>,
    /// `(μ_n, γ_n)`, with `μ_n ≤ γ_n`.
    pub pairs: Vec<(T, T)>,
}

pub fn spectrum_table<T: Real>(rp: &ReducedParams<T>, n_trunc: usize) -> SpectrumTable<T> {
    let pairs = crate::numerics::CouplingSeries::new(rp.m(), rp.eta())
        .take(n_trunc + 1)
        .enumerate()
        .map(|(n, f)| pair_from_coupling(n, rp, &f))
        .collect();
    SpectrumTable {
        branch: rp.branch(),
        m: rp.m(),
        n_trunc,
        edge: edge_eigenvalues(rp),
        pairs,
    }
}

/// Complete eigenbasis of the sideband Hamiltonian restricted to phonon
/// numbers `0..=n_max`.
///
/// Truncation keeps the block structure exact: blocks that would reach past
/// `n_max` lose their partner and their surviving ket is a bare eigenstate.
pub fn truncated_eigenbasis<T: Real>(rp: &ReducedParams<T>, n_max: usize) -> Vec<EigenPair<T>> {
    let m = rp.m() as usize;
    let w0 = rp.w0_over_nu();
    let mut out = Vec::with_capacity(2 * (n_max + 1));
    for ket in edge_kets(rp.branch(), m.min(n_max + 1)) {
        out.push(EigenPair::basis(ket.bare_energy(w0), ket));
    }
    if n_max >= m {
        for n in 0..=(n_max - m) {
            out.extend(sideband_eigenvectors(n, rp));
        }
    }
    // partnerless kets at the top of the ladder
    for n in (n_max + 1).saturating_sub(m)..=n_max {
        let ket = match rp.branch() {
            Branch::Ajc => Ket::ground(n),
            _ => Ket::excited(n),
        };
        out.push(EigenPair::basis(ket.bare_energy(w0), ket));
    }
    out
}
