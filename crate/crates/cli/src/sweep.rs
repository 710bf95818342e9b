//! Parameter grids, sweep expansion and per-point evaluation.

use std::fmt;
use std::str::FromStr;

use ionlag::params::reduce;
use ionlag::spectra::spectrum_table;
use ionlag::thermo::{default_scan, divergence_predicate, nonequilibrium_lag};
use ionlag::workstats::{moments_analytic, moments_numeric};
use ionlag::{Branch, Error, QuenchSpec, Reduced, ThermalSpec, TrapIonConfig, TruncationPolicy};
use rayon::prelude::*;

use crate::config::{parse_number, Freq, Nmax, Thermal};
use crate::output::{g17, Value};
use crate::CliError;

/// Quantity varied along a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Eta,
    OmegaRabi,
    Nbar,
    Nu,
    Phi,
    M,
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "eta" => Ok(Axis::Eta),
            "omega" | "omega_rabi" => Ok(Axis::OmegaRabi),
            "nbar" => Ok(Axis::Nbar),
            "nu" => Ok(Axis::Nu),
            "phi" => Ok(Axis::Phi),
            "m" => Ok(Axis::M),
            other => Err(CliError::Usage(format!(
                "unknown axis `{other}` (eta, omega_rabi, nbar, nu, phi, m)"
            ))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Eta => "eta",
            Axis::OmegaRabi => "omega_rabi",
            Axis::Nbar => "nbar",
            Axis::Nu => "nu",
            Axis::Phi => "phi",
            Axis::M => "m",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Nonempty, strictly monotone list of axis values.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    values: Vec<f64>,
    /// Range form it was built from, kept for echoing.
    range: Option<(f64, f64, usize, Spacing)>,
}

impl Grid {
    pub fn explicit(values: Vec<f64>) -> Result<Self, CliError> {
        let g = Grid { values, range: None };
        g.validate()?;
        Ok(g)
    }

    pub fn range(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self, CliError> {
        if count == 0 {
            return Err(CliError::Usage("grid count must be at least 1".into()));
        }
        if spacing == Spacing::Log && !(min > 0.0 && max > 0.0) {
            return Err(CliError::Usage("log grid needs positive bounds".into()));
        }
        let values = if count == 1 {
            vec![min]
        } else {
            let last = (count - 1) as f64;
            (0..count)
                .map(|i| {
                    // endpoints exactly as given
                    if i == 0 {
                        return min;
                    }
                    if i == count - 1 {
                        return max;
                    }
                    let t = i as f64 / last;
                    match spacing {
                        Spacing::Linear => min + (max - min) * t,
                        Spacing::Log => (min.ln() + (max.ln() - min.ln()) * t).exp(),
                    }
                })
                .collect()
        };
        let g = Grid {
            values,
            range: Some((min, max, count, spacing)),
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), CliError> {
        let v = &self.values;
        if v.is_empty() {
            return Err(CliError::Usage("grid is empty".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Usage("grid values must be finite".into()));
        }
        let up = v.windows(2).all(|w| w[1] > w[0]);
        let down = v.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(CliError::Usage("grid must be strictly monotone".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromStr for Grid {
    type Err = CliError;

    /// `a,b,c` or `min:max:count[:lin|log]`.
    fn from_str(s: &str) -> Result<Self, CliError> {
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').map(str::trim).collect();
            if !(3..=4).contains(&parts.len()) {
                return Err(CliError::Usage(format!("grid `{s}`: expected min:max:count[:lin|log]")));
            }
            let count: usize = parts[2]
                .parse()
                .map_err(|_| CliError::Usage(format!("grid `{s}`: bad count `{}`", parts[2])))?;
            let spacing = match parts.get(3).map(|p| p.to_ascii_lowercase()) {
                None => Spacing::Linear,
                Some(p) if p == "lin" || p == "linear" => Spacing::Linear,
                Some(p) if p == "log" => Spacing::Log,
                Some(p) => return Err(CliError::Usage(format!("grid `{s}`: unknown spacing `{p}`"))),
            };
            Grid::range(parse_number(parts[0])?, parse_number(parts[1])?, count, spacing)
        } else {
            let values = s
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(parse_number)
                .collect::<Result<Vec<_>, _>>()?;
            Grid::explicit(values)
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.range {
            Some((min, max, count, spacing)) => {
                let sp = if spacing == Spacing::Log { "log" } else { "lin" };
                write!(f, "{}:{}:{count}:{sp}", g17(min), g17(max))
            }
            None => {
                let items: Vec<String> = self.values.iter().map(|&x| g17(x)).collect();
                f.write_str(&items.join(","))
            }
        }
    }
}

/// Parameter values held fixed across a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixed {
    pub mass: f64,
    pub nu: f64,
    pub omega0: Freq,
    pub omega: Freq,
    pub phi: f64,
    /// `None` takes η from the geometry.
    pub eta: Option<f64>,
    pub thermal: Thermal,
}

/// One sweep: the cross product of its axes (outermost first), then branch,
/// then `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub label: String,
    pub axes: Vec<(Axis, Grid)>,
    pub fixed: Fixed,
    pub branches: Vec<Branch>,
    pub ms: Vec<u32>,
    pub nmax: Nmax,
    pub tol: f64,
}

/// A fully specified evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub quench: QuenchSpec,
    pub mass: f64,
    pub nu: f64,
    pub omega0: f64,
    pub omega_rabi: f64,
    pub phi: f64,
    pub eta: Option<f64>,
    pub thermal: ThermalSpec,
    pub policy: TruncationPolicy,
}

fn quench_of(branch: Branch, m: u32) -> Result<QuenchSpec, CliError> {
    if branch == Branch::Carrier || m == 0 {
        return Ok(QuenchSpec::carrier());
    }
    QuenchSpec::new(m, branch).map_err(CliError::from)
}

fn as_m(x: f64) -> Result<u32, CliError> {
    if x >= 0.0 && x.fract() == 0.0 && x <= f64::from(u32::MAX) {
        Ok(x as u32)
    } else {
        Err(CliError::Usage(format!("sideband order must be a nonnegative integer, got {x}")))
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.branches.is_empty() || self.ms.is_empty() {
            return Err(CliError::Usage("branch and m sets must be nonempty".into()));
        }
        for (axis, grid) in &self.axes {
            if *axis == Axis::M {
                for &x in grid.values() {
                    as_m(x)?;
                }
            }
        }
        for (i, (a, _)) in self.axes.iter().enumerate() {
            if self.axes[..i].iter().any(|(b, _)| b == a) {
                return Err(CliError::Usage(format!("axis `{a}` appears twice")));
            }
        }
        // catches invalid fixed values before any point is evaluated
        self.points()?;
        Ok(())
    }

    /// Number of grid points, before expansion over branch and `m`.
    pub fn grid_size(&self) -> usize {
        self.axes.iter().map(|(_, g)| g.len()).product()
    }

    /// Evaluation points in output order.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let mut out = Vec::new();
        let sizes: Vec<usize> = self.axes.iter().map(|(_, g)| g.len()).collect();
        for flat in 0..self.grid_size() {
            // row-major index into the cross product
            let mut rem = flat;
            let mut idx = vec![0; sizes.len()];
            for (k, &s) in sizes.iter().enumerate().rev() {
                idx[k] = rem % s;
                rem /= s;
            }
            let mut f = self.fixed.clone();
            let mut ms = self.ms.clone();
            for (k, (axis, grid)) in self.axes.iter().enumerate() {
                let x = grid.values()[idx[k]];
                match axis {
                    Axis::Eta => f.eta = Some(x),
                    Axis::OmegaRabi => f.omega = Freq::Abs(x),
                    Axis::Nbar => f.thermal = Thermal::Nbar(x),
                    Axis::Nu => f.nu = x,
                    Axis::Phi => f.phi = x,
                    Axis::M => ms = vec![as_m(x)?],
                }
            }
            let thermal = match f.thermal {
                Thermal::Nbar(x) => ThermalSpec::nbar(x)?,
                Thermal::Beta(x) => ThermalSpec::beta(x)?,
            };
            let mut seen: Vec<QuenchSpec> = Vec::new();
            for &branch in &self.branches {
                for &m in &ms {
                    let quench = quench_of(branch, m)?;
                    if seen.contains(&quench) {
                        continue;
                    }
                    seen.push(quench);
                    let policy = match self.nmax.for_branch(quench.branch()) {
                        Some(n) => TruncationPolicy::Fixed(n),
                        None => TruncationPolicy::Adaptive {
                            rel_tol: self.tol,
                            patience: ionlag::thermo::DEFAULT_PATIENCE,
                            cap: ionlag::thermo::DEFAULT_CAP,
                        },
                    };
                    let p = Point {
                        quench,
                        mass: f.mass,
                        nu: f.nu,
                        omega0: f.omega0.resolve(f.nu),
                        omega_rabi: f.omega.resolve(f.nu),
                        phi: f.phi,
                        eta: f.eta,
                        thermal,
                        policy,
                    };
                    p.reduced()?;
                    out.push(p);
                }
            }
        }
        Ok(out)
    }
}

impl Point {
    pub fn config(&self) -> Result<TrapIonConfig, CliError> {
        Ok(TrapIonConfig::new(
            self.mass,
            self.nu,
            self.omega0,
            self.omega_rabi,
            self.phi,
        )?)
    }

    pub fn reduced(&self) -> Result<Reduced, CliError> {
        Ok(reduce(&self.config()?, self.quench, self.thermal, self.eta)?)
    }

    fn fixed_n(&self) -> Option<usize> {
        match self.policy {
            TruncationPolicy::Fixed(n) => Some(n),
            TruncationPolicy::Adaptive { .. } => None,
        }
    }

    /// Columns shared by every row kind: quench, then raw and reduced inputs.
    fn leading(&self, rp: &Reduced) -> [Value; 3] {
        [
            Value::F(rp.eta()),
            Value::U(u64::from(self.quench.m())),
            Value::S(self.quench.branch().to_string()),
        ]
    }

    fn trailing(&self, rp: &Reduced) -> [Value; 9] {
        [
            Value::F(self.omega_rabi),
            Value::F(self.omega0),
            Value::F(self.nu),
            Value::F(self.mass),
            Value::F(self.phi),
            Value::F(self.thermal.nbar_at(self.nu)),
            Value::F(self.thermal.beta_at(self.nu)),
            Value::F(rp.b_nu()),
            Value::F(rp.b_w0()),
        ]
    }
}

pub const LAG_HEADER: [&str; 16] = [
    "eta",
    "m",
    "branch",
    "L",
    "N_used",
    "converged",
    "omega_rabi",
    "omega0",
    "nu",
    "mass",
    "phi",
    "nbar",
    "beta",
    "b_nu",
    "b_w0",
    "diverges",
];

pub const MOMENTS_HEADER: [&str; 16] = [
    "eta",
    "m",
    "branch",
    "mean",
    "second",
    "third",
    "skewness",
    "omega_rabi",
    "omega0",
    "nu",
    "mass",
    "phi",
    "nbar",
    "beta",
    "b_nu",
    "b_w0",
];

pub const ORACLE_HEADER: [&str; 7] = [
    "numeric_mean",
    "numeric_second",
    "numeric_third",
    "dev_mean",
    "rel_dev_second",
    "rel_dev_third",
    "cancellation_warning",
];

pub const SPECTRUM_HEADER: [&str; 7] = ["eta", "m", "branch", "n", "kind", "mu", "gamma"];

/// One output row; `converged` is false only for lag rows whose series did
/// not meet the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<Value>,
    pub converged: bool,
}

/// Nonequilibrium lag at one point. A series that hits its cap still yields
/// a row, flagged as not converged.
pub fn eval_lag(p: &Point) -> Result<Row, CliError> {
    let rp = p.reduced()?;
    let (value, report, diverges) = match nonequilibrium_lag(&rp, p.policy) {
        Ok(r) => (r.value, r.truncation, r.regime_flags.divergence_predicted),
        Err(Error::NotConverged { report, partial }) => (
            partial,
            report,
            divergence_predicate(&rp, default_scan(rp.m())).diverges,
        ),
        Err(e) => return Err(e.into()),
    };
    let mut values = p.leading(&rp).to_vec();
    values.extend([
        Value::F(value),
        Value::U(report.n_used as u64),
        Value::B(report.converged),
    ]);
    values.extend(p.trailing(&rp));
    values.push(Value::B(diverges));
    Ok(Row {
        values,
        converged: report.converged,
    })
}

/// Largest `ω₀/ν` at which the dense oracle is meaningful.
pub const DESK_SCALE_MAX: f64 = 1e3;
const ORACLE_DEFAULT_N: usize = 60;

/// Closed-form work moments of the full interaction, in units of `(ħν)^k`,
/// optionally against the dense-matrix evaluation.
pub fn eval_moments(p: &Point, oracle: bool) -> Result<Row, CliError> {
    let rp = p.reduced()?;
    let w = moments_analytic(&rp);
    let mut values = p.leading(&rp).to_vec();
    values.extend([w.mean, w.second, w.third, w.skewness].map(Value::F));
    values.extend(p.trailing(&rp));
    if oracle {
        if rp.w0_over_nu() > DESK_SCALE_MAX {
            return Err(CliError::Usage(format!(
                "numeric oracle needs omega0/nu <= {DESK_SCALE_MAX:e}, got {:e}; pass --desk-scale or smaller --omega0",
                rp.w0_over_nu()
            )));
        }
        let n = p.fixed_n().unwrap_or(ORACLE_DEFAULT_N);
        let num = |order| moments_numeric(&rp, n, order, true);
        let (m1, m2, m3) = (num(1)?, num(2)?, num(3)?);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        values.extend([
            Value::F(m1.value),
            Value::F(m2.value),
            Value::F(m3.value),
            Value::F((m1.value - w.mean).abs()),
            Value::F(rel(m2.value, w.second)),
            Value::F(rel(m3.value, w.third)),
            Value::B(m2.cancellation_warning || m3.cancellation_warning),
        ]);
    }
    Ok(Row {
        values,
        converged: true,
    })
}

const SPECTRUM_DEFAULT_N: usize = 40;

/// Sideband spectrum rows: edge states, then one row per block `(μ_n, γ_n)`,
/// in units of `ħν`.
pub fn eval_spectrum(p: &Point) -> Result<Vec<Row>, CliError> {
    let rp = p.reduced()?;
    let n = p.fixed_n().unwrap_or(SPECTRUM_DEFAULT_N);
    let table = spectrum_table(&rp, n);
    let head = p.leading(&rp);
    let row = |i: usize, kind: &str, mu: f64, gamma: Value| {
        let mut values = head.to_vec();
        values.extend([
            Value::U(i as u64),
            Value::S(kind.to_string()),
            Value::F(mu),
            gamma,
        ]);
        Row {
            values,
            converged: true,
        }
    };
    let mut rows: Vec<Row> = table
        .edge
        .iter()
        .enumerate()
        .map(|(i, &e)| row(i, "edge", e, Value::Empty))
        .collect();
    rows.extend(
        table
            .pairs
            .iter()
            .enumerate()
            .map(|(i, &(mu, gamma))| row(i, "pair", mu, Value::F(gamma))),
    );
    Ok(rows)
}

/// Evaluates `f` on every point in parallel; results keep point order.
pub fn evaluate<R: Send>(
    points: &[Point],
    threads: Option<usize>,
    f: impl Fn(&Point) -> R + Sync + Send,
) -> Result<Vec<R>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().map(&f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g: Grid = "0:3.5:36".parse().unwrap();
        assert_eq!(g.len(), 36);
        assert_eq!(g.values()[35], 3.5);
        assert!((g.values()[1] - 0.1).abs() < 1e-15);
        let g: Grid = "1e-3:10:41:log".parse().unwrap();
        assert_eq!(g.values()[0], 1e-3);
        assert_eq!(g.values()[40], 10.0);
        assert!((g.values()[10] - 1e-2).abs() < 1e-15);
        assert!("1,1,2".parse::<Grid>().is_err());
        assert!("3,2,1".parse::<Grid>().is_ok());
        assert!("0:1:5:log".parse::<Grid>().is_err());
    }

    #[test]
    fn carrier_rows_deduplicated() {
        let spec = SweepSpec {
            label: "t".into(),
            axes: vec![(Axis::Eta, "0.1,0.2".parse().unwrap())],
            fixed: Fixed {
                mass: 7e-26,
                nu: 5e3,
                omega0: Freq::TimesNu(10.0),
                omega: Freq::TimesNu(1.0),
                phi: 0.0,
                eta: None,
                thermal: Thermal::Nbar(0.38),
            },
            branches: vec![Branch::Ajc, Branch::Jc],
            ms: vec![0, 1, 2],
            nmax: Nmax::Fixed(40),
            tol: 1e-16,
        };
        let pts = spec.points().unwrap();
        assert_eq!(pts.len(), 2 * 5);
        assert_eq!(pts[0].quench, QuenchSpec::carrier());
        assert_eq!(pts[1].quench, QuenchSpec::ajc(1).unwrap());
        assert_eq!(pts[3].quench, QuenchSpec::jc(1).unwrap());
        assert_eq!(pts[5].eta, Some(0.2));
    }
}
