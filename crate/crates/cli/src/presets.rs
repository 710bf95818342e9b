//! Figure presets and the layering that turns settings into sweeps.
//!
//! Caption frequencies are read as angular frequencies in rad/s.

use std::f64::consts::{FRAC_PI_2, PI};

use ionlag::params::bnu_from_nbar;
use ionlag::{Branch, HBAR};

use crate::config::{Freq, Nmax, Preset, Settings, Thermal};
use crate::output::g17;
use crate::sweep::{Axis, Fixed, Grid, Spacing, SweepSpec};
use crate::CliError;

pub const MASS: f64 = 7.0e-26;
pub const NU: f64 = 5.0e3;
pub const OMEGA0: f64 = 822.0 * PI * 1e12;
pub const OMEGA_RABI: f64 = PI * 1e6;
pub const NBAR: f64 = 0.38;
pub const DEFAULT_TOL: f64 = ionlag::thermo::DEFAULT_TOL;

/// One panel of a figure: fixed settings plus sweep axes.
#[derive(Debug, Clone)]
pub struct Panel {
    pub label: String,
    pub settings: Settings,
    pub axes: Vec<(Axis, Grid)>,
}

/// Defaults under every preset: the trapped-ion parameters shared by most
/// figures, a carrier quench and adaptive truncation.
pub fn defaults() -> Settings {
    Settings {
        branch: Some(vec![Branch::Jc, Branch::Ajc]),
        m: Some(vec![0]),
        phi: Some(0.0),
        omega: Some(Freq::Abs(OMEGA_RABI)),
        omega0: Some(Freq::Abs(OMEGA0)),
        nu: Some(NU),
        mass: Some(MASS),
        thermal: Some(Thermal::Nbar(NBAR)),
        nmax: Some(Nmax::Auto),
        tol: Some(DEFAULT_TOL),
        ..Settings::default()
    }
}

/// Frequencies a few trap quanta apart, where dense matrices are usable.
pub fn desk_scale() -> Settings {
    Settings {
        omega0: Some(Freq::TimesNu(10.0)),
        omega: Some(Freq::TimesNu(1.0)),
        eta: Some(0.5),
        ..Settings::default()
    }
}

fn grid(min: f64, max: f64, count: usize, spacing: Spacing) -> Grid {
    Grid::range(min, max, count, spacing).expect("preset grid")
}

fn sidebands(nmax: Nmax) -> Settings {
    Settings {
        branch: Some(vec![Branch::Ajc, Branch::Jc]),
        m: Some(vec![0, 1, 2]),
        nmax: Some(nmax),
        ..Settings::default()
    }
}

/// Inverse temperature that gives `n̄ = 0.38` at `ν = 5 kHz`.
pub fn fig1_beta() -> f64 {
    bnu_from_nbar(NBAR) / (HBAR * NU)
}

pub fn nbar_grid() -> Grid {
    grid(1e-3, 10.0, 41, Spacing::Log)
}

pub fn panels(preset: Preset) -> Vec<Panel> {
    let one = |settings: Settings, axes: Vec<(Axis, Grid)>| {
        vec![Panel {
            label: preset.to_string(),
            settings,
            axes,
        }]
    };
    match preset {
        Preset::Fig1 => one(
            sidebands(Nmax::Fixed(40)),
            vec![(Axis::Eta, grid(0.0, 3.5, 36, Spacing::Linear))],
        ),
        Preset::Fig2 => one(
            Settings {
                eta: Some(0.5),
                ..sidebands(Nmax::Fixed(40))
            },
            vec![(Axis::OmegaRabi, grid(PI * 1e5, PI * 1e7, 41, Spacing::Log))],
        ),
        Preset::Fig3 => one(
            Settings {
                eta: Some(0.5),
                ..sidebands(Nmax::PerBranch {
                    carrier: 2000,
                    jc: 5000,
                    ajc: 2000,
                })
            },
            vec![(Axis::Nbar, nbar_grid())],
        ),
        Preset::Fig4 => [("left", 1.5, 0.5e9), ("right", 1.0, 1e9)]
            .into_iter()
            .map(|(side, eta, omega)| Panel {
                label: format!("fig4-{side}"),
                settings: Settings {
                    branch: Some(vec![Branch::Jc]),
                    m: Some(vec![1, 2]),
                    eta: Some(eta),
                    omega: Some(Freq::Abs(omega)),
                    nu: Some(1.2e8),
                    omega0: Some(Freq::Abs(1e8)),
                    nmax: Some(Nmax::Fixed(50)),
                    ..Settings::default()
                },
                axes: vec![(Axis::Nbar, nbar_grid())],
            })
            .collect(),
        Preset::Fig5 => one(
            Settings {
                branch: Some(vec![Branch::Carrier]),
                m: Some(vec![0]),
                thermal: Some(Thermal::Beta(fig1_beta())),
                nmax: Some(Nmax::Auto),
                ..Settings::default()
            },
            vec![
                (Axis::Nu, grid(5e2, 5e5, 31, Spacing::Log)),
                (Axis::Phi, grid(0.0, FRAC_PI_2, 16, Spacing::Linear)),
            ],
        ),
        Preset::Fig6 => one(
            Settings {
                branch: Some(vec![Branch::Jc, Branch::Ajc]),
                nmax: Some(Nmax::Fixed(40)),
                ..Settings::default()
            },
            vec![
                (Axis::Eta, Grid::explicit(vec![0.5, 1.5, 2.5, 3.5]).expect("preset grid")),
                (Axis::M, grid(0.0, 30.0, 31, Spacing::Linear)),
            ],
        ),
    }
}

/// Sweeps from a flag layer and an optional config-file layer.
///
/// Layers, lowest first: defaults, preset, desk scale, config file, flags. A
/// preset axis whose quantity is set explicitly above the preset collapses
/// to that single value; an explicit `axis`/`grid` pair replaces the preset
/// axes.
pub fn resolve(flags: &Settings, config: Option<&Settings>) -> Result<(Settings, Vec<SweepSpec>), CliError> {
    let user = config.cloned().unwrap_or_default().overlay(flags);
    let over = if user.desk_scale == Some(true) {
        desk_scale().overlay(&user)
    } else {
        user.clone()
    };
    let explicit_axis = match (over.axis, &over.grid) {
        (Some(axis), Some(grid)) => Some((axis, grid.clone())),
        (None, None) => None,
        (Some(_), None) => return Err(CliError::Usage("`axis` needs a `grid`".into())),
        (None, Some(_)) => return Err(CliError::Usage("`grid` needs an `axis`".into())),
    };
    let panels = match user.preset {
        Some(p) => panels(p),
        None => vec![Panel {
            label: "custom".into(),
            settings: Settings::default(),
            axes: Vec::new(),
        }],
    };
    let mut specs = Vec::new();
    for panel in panels {
        let merged = defaults().overlay(&panel.settings).overlay(&over);
        let axes = match &explicit_axis {
            Some(a) => vec![a.clone()],
            None => panel
                .axes
                .into_iter()
                .filter(|(axis, _)| !over.pins(*axis))
                .collect(),
        };
        let spec = SweepSpec {
            label: panel.label,
            axes,
            fixed: Fixed {
                mass: merged.mass.expect("default"),
                nu: merged.nu.expect("default"),
                omega0: merged.omega0.expect("default"),
                omega: merged.omega.expect("default"),
                phi: merged.phi.expect("default"),
                eta: merged.eta,
                thermal: merged.thermal.expect("default"),
            },
            branches: merged.branch.clone().expect("default"),
            ms: merged.m.clone().expect("default"),
            nmax: merged.nmax.expect("default"),
            tol: merged.tol.expect("default"),
        };
        spec.validate()?;
        specs.push(spec);
    }
    Ok((user, specs))
}

/// `key = value` lines describing the effective configuration of each sweep.
pub fn echo(command: &str, specs: &[SweepSpec]) -> Vec<(String, String)> {
    let mut out = vec![("command".to_string(), command.to_string())];
    for s in specs {
        let p = |k: &str| format!("{}.{k}", s.label);
        let f = &s.fixed;
        out.push((p("mass"), g17(f.mass)));
        out.push((p("nu"), g17(f.nu)));
        out.push((p("omega0"), f.omega0.to_string()));
        out.push((p("omega"), f.omega.to_string()));
        out.push((p("phi"), g17(f.phi)));
        out.push((
            p("eta"),
            f.eta.map_or_else(|| "geometric".to_string(), g17),
        ));
        match f.thermal {
            Thermal::Nbar(x) => out.push((p("nbar"), g17(x))),
            Thermal::Beta(x) => out.push((p("beta"), g17(x))),
        }
        let branches: Vec<String> = s.branches.iter().map(|b| b.to_string()).collect();
        out.push((p("branch"), branches.join(",")));
        let ms: Vec<String> = s.ms.iter().map(|m| m.to_string()).collect();
        out.push((p("m"), ms.join(",")));
        out.push((p("nmax"), s.nmax.to_string()));
        out.push((p("tol"), g17(s.tol)));
        for (axis, grid) in &s.axes {
            out.push((p(&format!("axis.{axis}")), grid.to_string()));
        }
    }
    out
}
