//! Brute-force truncated-Fock matrices, used as an independent oracle.
//!
//! Basis ordering is `|0,g⟩, |0,e⟩, |1,g⟩, |1,e⟩, …, |N,g⟩, |N,e⟩` (see
//! [`Ket::index`]). Matrices are dimensionless, in units of `ħν`. Only meant
//! for desk-scale ratios `ω₀/ν ≲ 10⁴`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{coupling_f, CouplingSeries, LogSumExp};
use crate::params::ReducedParams;
use crate::spectra::{sideband_block, EigenPair, Ket};

const HERMITIAN_TOL: f64 = 1e-12;
const TAIL_WARN: f64 = 1e-12;

/// Square complex matrix over the truncated product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_trunc: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    /// Wraps `matrix`, rejecting anything that is not Hermitian to `1e-12`
    /// relative to its Frobenius norm.
    pub fn new(n_trunc: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = 2 * (n_trunc + 1);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Construction(format!(
                "expected {dim}×{dim} matrix, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let op = Self { n_trunc, matrix };
        let dev = op.hermitian_deviation();
        if dev > HERMITIAN_TOL * op.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::Construction(format!(
                "operator not Hermitian: max |A − A†| = {dev:e}"
            )));
        }
        Ok(op)
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn get(&self, row: Ket, col: Ket) -> Complex64 {
        self.matrix[(row.index(), col.index())]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `‖A·v − E·v‖` for an analytic eigenpair.
    pub fn residual(&self, pair: &EigenPair<f64>) -> f64 {
        let v = embed(self.dim(), pair);
        (&self.matrix * &v - v.scale(pair.value)).norm()
    }
}

/// Dense column vector of an eigenpair over the truncated basis; kets beyond
/// the truncation are dropped.
pub fn embed(dim: usize, pair: &EigenPair<f64>) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    for &(ket, a) in &pair.vector {
        if ket.index() < dim {
            v[ket.index()] = a;
        }
    }
    v
}

/// `⟨n_row| e^{iη(a + a†)} |n_col⟩`.
///
/// The operator is complex symmetric: both triangles carry `(iη)^m`, with `m`
/// the index difference.
pub fn displacement_element(n_row: usize, n_col: usize, eta: f64) -> Complex64 {
    let (lo, hi) = if n_row <= n_col {
        (n_row, n_col)
    } else {
        (n_col, n_row)
    };
    coupling_f(lo, (hi - lo) as u32, eta).value()
}

/// Phonon-space displacement operator truncated to `0..=n_trunc`.
pub fn displacement_matrix(n_trunc: usize, eta: f64) -> DMatrix<Complex64> {
    let dim = n_trunc + 1;
    let mut d = DMatrix::zeros(dim, dim);
    for m in 0..dim {
        for (n, f) in CouplingSeries::new(m as u32, eta).take(dim - m).enumerate() {
            let v = f.value();
            d[(n + m, n)] = v;
            d[(n, n + m)] = v;
        }
    }
    d
}

/// Hamiltonians and initial state of one quench on the truncated space.
#[derive(Debug, Clone)]
pub struct DenseQuench {
    pub h_i: DenseOperator,
    pub h_full: DenseOperator,
    pub h_sideband: DenseOperator,
    /// Gibbs state of `h_i`, renormalized on the truncated space.
    pub rho_i: DenseOperator,
    /// Set when the discarded thermal weight `e^{−βħν·N}` exceeds `1e-12`.
    pub thermal_tail_warning: bool,
}

/// Builds the bare, full and sideband quench Hamiltonians with `n ≤ n_trunc`.
pub fn dense_hamiltonians(rp: &ReducedParams<f64>, n_trunc: usize) -> Result<DenseQuench> {
    let m = rp.m() as usize;
    if n_trunc < m + 2 {
        return Err(Error::param(
            "n_trunc",
            format!("need at least m + 2 = {}, got {n_trunc}", m + 2),
        ));
    }
    let dim = 2 * (n_trunc + 1);
    let w0 = rp.w0_over_nu();
    let half_om = 0.5 * rp.om_over_nu();
    let zero = Complex64::new(0.0, 0.0);

    let mut h_i = DMatrix::from_element(dim, dim, zero);
    for n in 0..=n_trunc {
        for ket in [Ket::ground(n), Ket::excited(n)] {
            h_i[(ket.index(), ket.index())] = Complex64::new(ket.bare_energy(w0), 0.0);
        }
    }

    let d = displacement_matrix(n_trunc, rp.eta());
    let mut h_full = h_i.clone();
    for row in 0..=n_trunc {
        for col in 0..=n_trunc {
            // σ₊ ⊗ D and its adjoint σ₋ ⊗ D†
            let v = d[(row, col)] * half_om;
            h_full[(Ket::excited(row).index(), Ket::ground(col).index())] += v;
            h_full[(Ket::ground(col).index(), Ket::excited(row).index())] += v.conj();
        }
    }

    let mut h_sb = h_i.clone();
    for n in 0..=(n_trunc - m) {
        let b = sideband_block(n, rp);
        h_sb[(b.upper.index(), b.lower.index())] = b.coupling;
        h_sb[(b.lower.index(), b.upper.index())] = b.coupling.conj();
    }

    // thermal populations, shifted by b_w0/2 before normalizing
    let b_nu = rp.b_nu();
    let b_w0 = rp.b_w0();
    let log_weight = |k: Ket| {
        let level = if k.index() % 2 == 1 { -b_w0 } else { 0.0 };
        -b_nu * k.n as f64 + level
    };
    let mut lse = LogSumExp::new();
    for i in 0..dim {
        lse.push(log_weight(ket_at(i)))?;
    }
    let log_z = lse.value();
    let rho = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new((log_weight(ket_at(i)) - log_z).exp(), 0.0)
        } else {
            zero
        }
    });

    Ok(DenseQuench {
        h_i: DenseOperator::new(n_trunc, h_i)?,
        h_full: DenseOperator::new(n_trunc, h_full)?,
        h_sideband: DenseOperator::new(n_trunc, h_sb)?,
        rho_i: DenseOperator::new(n_trunc, rho)?,
        thermal_tail_warning: (-b_nu * n_trunc as f64).exp() >= TAIL_WARN,
    })
}

/// Inverse of [`Ket::index`].
pub fn ket_at(index: usize) -> Ket {
    if index.is_multiple_of(2) {
        Ket::ground(index / 2)
    } else {
        Ket::excited(index / 2)
    }
}

/// `ln Σ e^{−βħν·E} − βħω₀/2` over energies in units of `ħν`.
pub fn ln_trace_exp(energies: &[f64], b_nu: f64, b_w0: f64) -> Result<f64> {
    let mut lse = LogSumExp::new();
    for &e in energies {
        lse.push(-b_nu * e - 0.5 * b_w0)?;
    }
    Ok(lse.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::QuenchSpec;

    fn desk(q: QuenchSpec, om: f64, eta: f64) -> ReducedParams<f64> {
        ReducedParams::from_ratios(1.29, 10.0, om, eta, q).unwrap()
    }

    #[test]
    fn displacement_identity_at_zero_eta() {
        let d = displacement_matrix(6, 0.0);
        assert_eq!(d, DMatrix::identity(7, 7));
        assert_eq!(displacement_element(3, 5, 0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn displacement_ground_element() {
        let v = displacement_element(0, 0, 0.8);
        assert!((v.re - (-0.32f64).exp()).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn displacement_is_symmetric() {
        let d = displacement_matrix(10, 0.7);
        assert_eq!(d, d.transpose());
        assert_eq!(displacement_element(7, 2, 0.7), d[(7, 2)]);
    }

    #[test]
    fn zero_rabi_leaves_hamiltonian() {
        let rp = desk(QuenchSpec::jc(1).unwrap(), 0.0, 0.5);
        let q = dense_hamiltonians(&rp, 10).unwrap();
        assert_eq!(q.h_full.matrix(), q.h_i.matrix());
        assert_eq!(q.h_sideband.matrix(), q.h_i.matrix());
    }

    #[test]
    fn gibbs_state_normalized() {
        let rp = desk(QuenchSpec::ajc(2).unwrap(), 1.0, 0.5);
        let q = dense_hamiltonians(&rp, 15).unwrap();
        assert!((q.rho_i.trace().re - 1.0).abs() < 1e-12);
        assert!(q.thermal_tail_warning);
        let q = dense_hamiltonians(&rp, 80).unwrap();
        assert!(!q.thermal_tail_warning);
    }

    #[test]
    fn truncation_too_small() {
        let rp = desk(QuenchSpec::jc(3).unwrap(), 1.0, 0.5);
        assert!(matches!(
            dense_hamiltonians(&rp, 4),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn ket_index_round_trip() {
        for i in 0..20 {
            assert_eq!(ket_at(i).index(), i);
        }
    }
}
