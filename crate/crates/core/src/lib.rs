//! Work statistics and nonequilibrium lag of a single trapped ion suddenly
//! illuminated by a classical laser.
//!
//! The ion is a two-level electronic system coupled to one harmonic mode of
//! center-of-mass motion. A quench switches the laser coupling on at `t = 0`,
//! either as the full Lamb-Dicke exponential or as one of its resonant
//! sideband (Jaynes-Cummings / anti-Jaynes-Cummings) reductions. This crate
//! computes
//!
//! * the first work moments of the quench (closed forms and a dense-matrix
//!   oracle),
//! * the block spectra of the sideband Hamiltonians,
//! * partition functions and the nonequilibrium lag `L = ln Z_f / Z_i` in a
//!   shifted log domain that survives `βħω₀ ~ 10¹²`,
//! * the low-temperature classification (`Φ` function, divergence predicate).
//!
//! Core math is generic over [`Real`] (implemented for `f32` and `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what every
//! experimental-scale computation needs.

pub mod dense;
pub mod error;
pub mod numerics;
pub mod params;
pub mod scalar;
pub mod spectra;
pub mod thermo;
pub mod workstats;

pub use error::{Error, Result};
pub use params::{Branch, QuenchSpec, ThermalSpec, TrapIonConfig, HBAR, SPEED_OF_LIGHT};
pub use scalar::Real;
pub use thermo::{TruncationPolicy, TruncationReport};

/// Dimensionless quench parameters in double precision.
pub type Reduced = params::ReducedParams<f64>;
/// Log-domain coupling `f_n^m` in double precision.
pub type Coupling = numerics::CouplingValue<f64>;
/// Eigenpair of a sideband block in double precision.
pub type EigenPair = spectra::EigenPair<f64>;
/// Sideband spectrum table in double precision.
pub type SpectrumTable = spectra::SpectrumTable<f64>;
/// Shifted log partition function in double precision.
pub type LogPartition = thermo::LogPartition<f64>;
/// Nonequilibrium lag with metadata in double precision.
pub type LagResult = thermo::LagResult<f64>;
/// Value of the low-temperature classification function in double precision.
pub type PhiValue = thermo::PhiValue<f64>;
/// Work moments in double precision.
pub type WorkMoments = workstats::WorkMoments<f64>;
