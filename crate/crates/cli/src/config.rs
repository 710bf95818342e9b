//! Settings layers and value parsing.
//!
//! Every setting is a `key = value` pair; command-line flags and config files
//! go through the same [`Settings::set`], so config keys are exactly the flag
//! names without the leading dashes.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ionlag::Branch;

use crate::output::g17;
use crate::sweep::{Axis, Grid};
use crate::CliError;

/// A frequency in rad/s, or a multiple of the trap frequency (`2nu`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Freq {
    Abs(f64),
    TimesNu(f64),
}

impl Freq {
    pub fn resolve(self, nu: f64) -> f64 {
        match self {
            Freq::Abs(x) => x,
            Freq::TimesNu(k) => k * nu,
        }
    }
}

impl fmt::Display for Freq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Freq::Abs(x) => f.write_str(&g17(x)),
            Freq::TimesNu(k) => write!(f, "{}nu", g17(k)),
        }
    }
}

/// Parses a real number with an optional `pi` factor: `822e12pi`, `0.5pi`,
/// `pi`.
pub fn parse_number(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("cannot parse `{s}` as a number"));
    let (mantissa, factor) = match s.strip_suffix("pi") {
        Some(rest) => (rest.trim_end_matches('*').trim(), PI),
        None => (s, 1.0),
    };
    let x = if mantissa.is_empty() {
        1.0
    } else {
        mantissa.parse::<f64>().map_err(|_| bad())?
    };
    let x = x * factor;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

pub fn parse_freq(s: &str) -> Result<Freq, CliError> {
    let s = s.trim();
    match s.strip_suffix("nu") {
        Some(rest) => {
            let k = if rest.trim().is_empty() {
                1.0
            } else {
                parse_number(rest.trim_end_matches('*'))?
            };
            Ok(Freq::TimesNu(k))
        }
        None => parse_number(s).map(Freq::Abs),
    }
}

fn parse_bool(key: &str, s: &str) -> Result<bool, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" | "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(CliError::Usage(format!("`{key}` expects a boolean, got `{other}`"))),
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    let items: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(item)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(CliError::Usage(format!("empty list `{s}`")));
    }
    Ok(items)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Thermal {
    Nbar(f64),
    Beta(f64),
}

/// Number of blocks summed in each partition function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nmax {
    Auto,
    Fixed(usize),
    /// Figure presets that pin a different count per branch.
    PerBranch { carrier: usize, jc: usize, ajc: usize },
}

impl Nmax {
    pub fn for_branch(self, branch: Branch) -> Option<usize> {
        match self {
            Nmax::Auto => None,
            Nmax::Fixed(n) => Some(n),
            Nmax::PerBranch { carrier, jc, ajc } => Some(match branch {
                Branch::Carrier => carrier,
                Branch::Jc => jc,
                Branch::Ajc => ajc,
            }),
        }
    }
}

impl fmt::Display for Nmax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Nmax::Auto => f.write_str("auto"),
            Nmax::Fixed(n) => write!(f, "{n}"),
            Nmax::PerBranch { carrier, jc, ajc } => {
                write!(f, "carrier:{carrier},jc:{jc},ajc:{ajc}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::Jsonl),
            other => Err(CliError::Usage(format!("unknown format `{other}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig1,
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6,
    ];
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            "fig6" => Ok(Preset::Fig6),
            other => Err(CliError::Usage(format!("unknown preset `{other}` (fig1..fig6)"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = Preset::ALL.iter().position(|p| p == self).unwrap() + 1;
        write!(f, "fig{i}")
    }
}

/// One layer of settings. `None` means "not set here".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub preset: Option<Preset>,
    pub branch: Option<Vec<Branch>>,
    pub m: Option<Vec<u32>>,
    pub eta: Option<f64>,
    pub phi: Option<f64>,
    pub omega: Option<Freq>,
    pub omega0: Option<Freq>,
    pub nu: Option<f64>,
    pub mass: Option<f64>,
    pub thermal: Option<Thermal>,
    pub nmax: Option<Nmax>,
    pub tol: Option<f64>,
    pub axis: Option<Axis>,
    pub grid: Option<Grid>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub allow_nonconverged: Option<bool>,
    pub desk_scale: Option<bool>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('_', "-");
        let v = value.trim();
        match key.as_str() {
            "preset" => self.preset = Some(v.parse()?),
            "branch" => {
                self.branch = Some(parse_list(v, |t| {
                    t.parse::<Branch>().map_err(|e| CliError::Usage(e.to_string()))
                })?)
            }
            "m" => {
                self.m = Some(parse_list(v, |t| {
                    t.parse::<u32>()
                        .map_err(|_| CliError::Usage(format!("`m` expects integers, got `{t}`")))
                })?)
            }
            "eta" => self.eta = Some(nonneg(&key, parse_number(v)?)?),
            "phi" => self.phi = Some(parse_number(v)?),
            "omega" => self.omega = Some(parse_freq(v)?),
            "omega0" => self.omega0 = Some(parse_freq(v)?),
            "nu" => self.nu = Some(positive(&key, parse_number(v)?)?),
            "mass" => self.mass = Some(positive(&key, parse_number(v)?)?),
            "nbar" => self.set_thermal(Thermal::Nbar(positive(&key, parse_number(v)?)?))?,
            "beta" => self.set_thermal(Thermal::Beta(positive(&key, parse_number(v)?)?))?,
            "nmax" => {
                self.nmax = Some(if v.eq_ignore_ascii_case("auto") {
                    Nmax::Auto
                } else {
                    let n: usize = v
                        .parse()
                        .map_err(|_| CliError::Usage(format!("`nmax` expects an integer or `auto`, got `{v}`")))?;
                    if n == 0 {
                        return Err(CliError::Usage("`nmax` must be at least 1".into()));
                    }
                    Nmax::Fixed(n)
                })
            }
            "tol" => {
                let t = parse_number(v)?;
                if !(t > 0.0 && t < 1.0) {
                    return Err(CliError::Usage(format!("`tol` must lie in (0, 1), got {t}")));
                }
                self.tol = Some(t)
            }
            "axis" => self.axis = Some(v.parse()?),
            "grid" => self.grid = Some(v.parse()?),
            "format" => self.format = Some(v.parse()?),
            "out" => self.out = Some(PathBuf::from(v)),
            "threads" => {
                let n: usize = v
                    .parse()
                    .map_err(|_| CliError::Usage(format!("`threads` expects an integer, got `{v}`")))?;
                self.threads = Some(n)
            }
            "allow-nonconverged" => self.allow_nonconverged = Some(parse_bool(&key, v)?),
            "desk-scale" => self.desk_scale = Some(parse_bool(&key, v)?),
            other => return Err(CliError::Usage(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    fn set_thermal(&mut self, t: Thermal) -> Result<(), CliError> {
        match (self.thermal, t) {
            (Some(Thermal::Nbar(_)), Thermal::Beta(_)) | (Some(Thermal::Beta(_)), Thermal::Nbar(_)) => {
                Err(CliError::Usage("`nbar` and `beta` are mutually exclusive".into()))
            }
            _ => {
                self.thermal = Some(t);
                Ok(())
            }
        }
    }

    /// Parses a flat `key = value` file. `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected `key = value`, got `{raw}`", i + 1))
            })?;
            s.set(key, value)
                .map_err(|e| CliError::Usage(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(s)
    }

    /// `self` overridden by every field `upper` sets.
    pub fn overlay(mut self, upper: &Settings) -> Settings {
        macro_rules! take {
            ($($f:ident),*) => { $( if upper.$f.is_some() { self.$f = upper.$f.clone(); } )* };
        }
        take!(
            preset, branch, m, eta, phi, omega, omega0, nu, mass, thermal, nmax, tol, axis, grid,
            format, out, threads, allow_nonconverged, desk_scale
        );
        self
    }

    /// Whether this layer pins the quantity an axis sweeps.
    pub fn pins(&self, axis: Axis) -> bool {
        match axis {
            Axis::Eta => self.eta.is_some(),
            Axis::OmegaRabi => self.omega.is_some(),
            Axis::Nbar => self.thermal.is_some(),
            Axis::Nu => self.nu.is_some(),
            Axis::Phi => self.phi.is_some(),
            Axis::M => self.m.is_some(),
        }
    }
}

fn positive(key: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("`{key}` must be positive, got {x}")))
    }
}

fn nonneg(key: &str, x: f64) -> Result<f64, CliError> {
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("`{key}` must be nonnegative, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("pi").unwrap(), PI);
        assert_eq!(parse_number("822e12pi").unwrap(), 822e12 * PI);
        assert_eq!(parse_number("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_number("1.5").unwrap(), 1.5);
        assert!(parse_number("abc").is_err());
    }

    #[test]
    fn trap_multiples() {
        assert_eq!(parse_freq("2nu").unwrap(), Freq::TimesNu(2.0));
        assert_eq!(parse_freq("nu").unwrap(), Freq::TimesNu(1.0));
        assert_eq!(parse_freq("1e6pi").unwrap(), Freq::Abs(1e6 * PI));
        assert_eq!(Freq::TimesNu(2.0).resolve(5e3), 1e4);
    }

    #[test]
    fn file_layer() {
        let s = Settings::from_text("# comment\npreset = fig2\nm = 1, 2\nnbar=0.5 # trailing\n").unwrap();
        assert_eq!(s.preset, Some(Preset::Fig2));
        assert_eq!(s.m, Some(vec![1, 2]));
        assert_eq!(s.thermal, Some(Thermal::Nbar(0.5)));
        assert!(Settings::from_text("bogus = 1").is_err());
        assert!(Settings::from_text("nbar = 1\nbeta = 2").is_err());
    }

    #[test]
    fn upper_layer_wins() {
        let mut low = Settings::default();
        low.set("eta", "0.1").unwrap();
        low.set("nu", "5e3").unwrap();
        let mut high = Settings::default();
        high.set("eta", "0.7").unwrap();
        let s = low.overlay(&high);
        assert_eq!(s.eta, Some(0.7));
        assert_eq!(s.nu, Some(5e3));
    }
}
