//! Physical parameters, unit conventions and the reduced dimensionless groups.
//!
//! All frequencies are angular (rad/s). Everything downstream of [`reduce`]
//! works with products `βħ·frequency`, so SI magnitudes never reach the
//! numerical kernels.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054571817e-34;
/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;

/// Which resonance the laser is tuned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// Red sideband, `ω_L = ω₀ − mν`.
    Jc,
    /// Blue sideband, `ω_L = ω₀ + mν`.
    Ajc,
    /// `ω_L = ω₀`.
    Carrier,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Jc => "jc",
            Branch::Ajc => "ajc",
            Branch::Carrier => "carrier",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jc" | "red" => Ok(Branch::Jc),
            "ajc" | "blue" => Ok(Branch::Ajc),
            "carrier" | "c" => Ok(Branch::Carrier),
            other => Err(Error::param("branch", format!("unknown branch `{other}`"))),
        }
    }
}

/// Sideband order plus branch; fixes the laser frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuenchSpec {
    m: u32,
    branch: Branch,
}

impl QuenchSpec {
    /// `m = 0` on either sideband branch is normalized to the carrier.
    pub fn new(m: u32, branch: Branch) -> Result<Self> {
        match (branch, m) {
            (Branch::Carrier, 0) => Ok(Self::carrier()),
            (Branch::Carrier, _) => Err(Error::param(
                "m",
                format!("carrier quench requires m = 0, got {m}"),
            )),
            (_, 0) => Ok(Self::carrier()),
            (b, m) => Ok(Self { m, branch: b }),
        }
    }

    pub fn carrier() -> Self {
        Self {
            m: 0,
            branch: Branch::Carrier,
        }
    }

    pub fn jc(m: u32) -> Result<Self> {
        Self::new(m, Branch::Jc)
    }

    pub fn ajc(m: u32) -> Result<Self> {
        Self::new(m, Branch::Ajc)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Sign `s` in `ω_L = ω₀ + s·mν`.
    pub fn detuning_sign(&self) -> i32 {
        match self.branch {
            Branch::Jc => -1,
            Branch::Ajc => 1,
            Branch::Carrier => 0,
        }
    }

    /// Laser angular frequency for the given transition and trap frequencies.
    pub fn laser_frequency(&self, omega0: f64, nu: f64) -> f64 {
        omega0 + f64::from(self.detuning_sign()) * f64::from(self.m) * nu
    }
}

/// Ion, trap and laser parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapIonConfig {
    mass: f64,
    nu: f64,
    omega0: f64,
    omega_rabi: f64,
    phi: f64,
}

fn positive(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {x}")))
    }
}

impl TrapIonConfig {
    pub fn new(mass: f64, nu: f64, omega0: f64, omega_rabi: f64, phi: f64) -> Result<Self> {
        positive("mass", mass)?;
        positive("nu", nu)?;
        positive("omega0", omega0)?;
        if !(omega_rabi.is_finite() && omega_rabi >= 0.0) {
            return Err(Error::param(
                "omega_rabi",
                format!("must be nonnegative and finite, got {omega_rabi}"),
            ));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&phi) {
            return Err(Error::param(
                "phi",
                format!("must lie in [0, π/2], got {phi}"),
            ));
        }
        Ok(Self {
            mass,
            nu,
            omega0,
            omega_rabi,
            phi,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn omega0(&self) -> f64 {
        self.omega0
    }
    pub fn omega_rabi(&self) -> f64 {
        self.omega_rabi
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn with_nu(self, nu: f64) -> Result<Self> {
        Self::new(self.mass, nu, self.omega0, self.omega_rabi, self.phi)
    }
    pub fn with_omega_rabi(self, omega_rabi: f64) -> Result<Self> {
        Self::new(self.mass, self.nu, self.omega0, omega_rabi, self.phi)
    }
    pub fn with_phi(self, phi: f64) -> Result<Self> {
        Self::new(self.mass, self.nu, self.omega0, self.omega_rabi, phi)
    }
}

/// Temperature of the initial Gibbs state, given either way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalSpec {
    /// Inverse temperature β (1/J).
    Beta(f64),
    /// Mean phonon occupation n̄ of the trap mode.
    Nbar(f64),
}

impl ThermalSpec {
    pub fn beta(beta: f64) -> Result<Self> {
        positive("beta", beta).map(ThermalSpec::Beta)
    }

    pub fn nbar(nbar: f64) -> Result<Self> {
        positive("nbar", nbar).map(ThermalSpec::Nbar)
    }

    /// `βħν` for a trap of angular frequency `nu`.
    pub fn b_nu(&self, nu: f64) -> f64 {
        match *self {
            ThermalSpec::Beta(beta) => beta * HBAR * nu,
            ThermalSpec::Nbar(nbar) => bnu_from_nbar(nbar),
        }
    }

    pub fn beta_at(&self, nu: f64) -> f64 {
        match *self {
            ThermalSpec::Beta(beta) => beta,
            ThermalSpec::Nbar(nbar) => bnu_from_nbar(nbar) / (HBAR * nu),
        }
    }

    pub fn nbar_at(&self, nu: f64) -> f64 {
        match *self {
            ThermalSpec::Beta(_) => nbar_from_bnu(self.b_nu(nu)),
            ThermalSpec::Nbar(nbar) => nbar,
        }
    }
}

/// `n̄ = 1/(e^{βħν} − 1)`.
pub fn nbar_from_bnu<T: Real>(b_nu: T) -> T {
    b_nu.exp_m1().recip()
}

/// `βħν = ln(1 + 1/n̄)`.
pub fn bnu_from_nbar<T: Real>(nbar: T) -> T {
    nbar.recip().ln_1p()
}

/// Returns the representation of `t` that was not given, at trap frequency `nu`.
pub fn nbar_beta_convert(t: ThermalSpec, nu: f64) -> Result<ThermalSpec> {
    positive("nu", nu)?;
    match t {
        ThermalSpec::Beta(beta) => {
            positive("beta", beta).map_err(|e| Error::Domain(e.to_string()))?;
            Ok(ThermalSpec::Nbar(nbar_from_bnu(beta * HBAR * nu)))
        }
        ThermalSpec::Nbar(nbar) => {
            positive("nbar", nbar).map_err(|e| Error::Domain(e.to_string()))?;
            Ok(ThermalSpec::Beta(bnu_from_nbar(nbar) / (HBAR * nu)))
        }
    }
}

/// Lamb-Dicke parameter `η = (ω_L/c)·√(ħ/(2Mν))·cos φ`.
pub fn eta_from_geometry(cfg: &TrapIonConfig, q: &QuenchSpec) -> Result<f64> {
    let omega_l = q.laser_frequency(cfg.omega0, cfg.nu);
    if omega_l <= 0.0 {
        return Err(Error::param(
            "omega0",
            format!("laser frequency ω_L = {omega_l} is not positive for this sideband"),
        ));
    }
    // sin(π/2 − φ) is exactly zero at φ = π/2, unlike cos(π/2).
    let cos_phi = (std::f64::consts::FRAC_PI_2 - cfg.phi).sin();
    Ok(omega_l / SPEED_OF_LIGHT * (HBAR / (2.0 * cfg.mass * cfg.nu)).sqrt() * cos_phi)
}

/// Dimensionless parameters of one quench at one temperature.
///
/// Every frequency is stored as `βħ·frequency`. The laser detuning
/// `b_wl − b_w0 = ∓m·b_nu` is never recovered by subtracting the two stored
/// values; use [`ReducedParams::detuning`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams<T> {
    b_nu: T,
    b_w0: T,
    b_om: T,
    b_wl: T,
    eta: T,
    quench: QuenchSpec,
}

impl<T: Real> ReducedParams<T> {
    /// Builds the reduced set from `βħν` and frequency ratios to `ν`.
    pub fn from_ratios(
        b_nu: T,
        w0_over_nu: T,
        om_over_nu: T,
        eta: T,
        quench: QuenchSpec,
    ) -> Result<Self> {
        let b_w0 = b_nu * w0_over_nu;
        let b_om = b_nu * om_over_nu;
        let b_wl = b_w0 + T::of(f64::from(quench.detuning_sign() * quench.m() as i32)) * b_nu;
        let rp = Self {
            b_nu,
            b_w0,
            b_om,
            b_wl,
            eta,
            quench,
        };
        rp.validate()?;
        Ok(rp)
    }

    fn validate(&self) -> Result<()> {
        let check = |name: &'static str, x: T, strict: bool| {
            let ok = x.is_finite() && if strict { x > T::zero() } else { x >= T::zero() };
            if ok {
                Ok(())
            } else {
                Err(Error::param(
                    name,
                    format!("reduced value {x} is not finite or out of range"),
                ))
            }
        };
        check("b_nu", self.b_nu, true)?;
        check("b_w0", self.b_w0, true)?;
        check("b_om", self.b_om, false)?;
        check("eta", self.eta, false)?;
        if !self.b_wl.is_finite() {
            return Err(Error::param("b_wl", "laser frequency overflowed"));
        }
        Ok(())
    }

    pub fn b_nu(&self) -> T {
        self.b_nu
    }
    pub fn b_w0(&self) -> T {
        self.b_w0
    }
    pub fn b_om(&self) -> T {
        self.b_om
    }
    pub fn b_wl(&self) -> T {
        self.b_wl
    }
    pub fn eta(&self) -> T {
        self.eta
    }
    pub fn quench(&self) -> QuenchSpec {
        self.quench
    }
    pub fn m(&self) -> u32 {
        self.quench.m()
    }
    pub fn branch(&self) -> Branch {
        self.quench.branch()
    }

    /// Mean thermal occupation of the trap mode.
    pub fn nbar(&self) -> T {
        nbar_from_bnu(self.b_nu)
    }

    /// `b_wl − b_w0 = ∓m·b_nu`, exact.
    pub fn detuning(&self) -> T {
        T::of(f64::from(self.quench.detuning_sign())) * T::of(f64::from(self.m())) * self.b_nu
    }

    /// `|b_wl| − b_w0`, without subtracting the two large stored values
    /// whenever `b_wl ≥ 0`.
    pub fn abs_wl_minus_w0(&self) -> T {
        if self.b_wl >= T::zero() {
            self.detuning()
        } else {
            // Only reachable on the red sideband with mν > ω₀.
            -self.b_wl - self.b_w0
        }
    }

    pub fn w0_over_nu(&self) -> T {
        self.b_w0 / self.b_nu
    }

    pub fn om_over_nu(&self) -> T {
        self.b_om / self.b_nu
    }

    /// `ω_L/ν = ω₀/ν ∓ m`.
    pub fn wl_over_nu(&self) -> T {
        self.w0_over_nu()
            + T::of(f64::from(self.quench.detuning_sign())) * T::of(f64::from(self.m()))
    }

    pub fn with_quench(&self, quench: QuenchSpec) -> Result<Self> {
        Self::from_ratios(self.b_nu, self.w0_over_nu(), self.om_over_nu(), self.eta, quench)
    }

    pub fn with_eta(&self, eta: T) -> Result<Self> {
        let rp = Self { eta, ..*self };
        rp.validate()?;
        Ok(rp)
    }

    pub fn with_b_om(&self, b_om: T) -> Result<Self> {
        let rp = Self { b_om, ..*self };
        rp.validate()?;
        Ok(rp)
    }

    pub fn cast<U: Real>(&self) -> ReducedParams<U> {
        let c = |x: T| U::of(x.f64());
        ReducedParams {
            b_nu: c(self.b_nu),
            b_w0: c(self.b_w0),
            b_om: c(self.b_om),
            b_wl: c(self.b_wl),
            eta: c(self.eta),
            quench: self.quench,
        }
    }
}

/// Collects the reduced parameters of a quench.
///
/// `eta_override` replaces the geometric Lamb-Dicke parameter, for sweeps in
/// which η itself is the independent variable.
pub fn reduce(
    cfg: &TrapIonConfig,
    q: QuenchSpec,
    t: ThermalSpec,
    eta_override: Option<f64>,
) -> Result<ReducedParams<f64>> {
    let eta = match eta_override {
        Some(eta) if eta.is_finite() && eta >= 0.0 => eta,
        Some(eta) => return Err(Error::param("eta", format!("must be ≥ 0, got {eta}"))),
        None => eta_from_geometry(cfg, &q)?,
    };
    let b_nu = t.b_nu(cfg.nu);
    ReducedParams::from_ratios(
        b_nu,
        cfg.omega0 / cfg.nu,
        cfg.omega_rabi / cfg.nu,
        eta,
        q,
    )
}
