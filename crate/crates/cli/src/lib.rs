//! Command-line driver: figure presets, parameter sweeps, spectrum dumps and
//! the self-verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 rows that did not converge (unless `--allow-nonconverged`).

pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;
pub mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Format, Settings};
use output::RowWriter;
use sweep::{eval_lag, eval_moments, eval_spectrum, evaluate, Row, SweepSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ionlag::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed")]
    Verification,
    #[error("{0} row(s) did not converge")]
    NotConverged(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification => 1,
            CliError::Usage(_) | CliError::Core(_) | CliError::Io(_) => 2,
            CliError::NotConverged(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ionlag", version, about = "Work statistics and nonequilibrium lag of a laser-quenched trapped ion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nonequilibrium lag at a point or over a preset grid.
    Lag(CommonArgs),
    /// Work moments of the full interaction quench, in units of (ħν)^k.
    Moments {
        #[command(flatten)]
        common: CommonArgs,
        /// Add dense-matrix moments and their deviation (desk scale only).
        #[arg(long)]
        numeric_oracle: bool,
    },
    /// Lag over an explicit axis; requires --axis/--grid or a preset.
    Sweep(CommonArgs),
    /// Sideband eigenvalues (units of ħν).
    Spectrum(CommonArgs),
    /// Run the self-verification suite; JSON report on stdout or --out.
    Verify {
        #[arg(value_parser = ["fast", "full"], default_value = "fast")]
        level: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags shared by the evaluation commands. Values are kept as text and
/// parsed by [`Settings::set`], exactly like config-file entries.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` file; keys are the flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// fig1 .. fig6
    #[arg(long)]
    pub preset: Option<String>,
    /// Comma list of jc, ajc, carrier.
    #[arg(long)]
    pub branch: Option<String>,
    /// Comma list of sideband orders.
    #[arg(long)]
    pub m: Option<String>,
    /// Lamb-Dicke parameter; overrides the geometric value.
    #[arg(long)]
    pub eta: Option<String>,
    /// Angle between laser and trap axis (rad).
    #[arg(long)]
    pub phi: Option<String>,
    /// Rabi frequency (rad/s, `pi` factor or `nu` multiple allowed).
    #[arg(long)]
    pub omega: Option<String>,
    /// Atomic transition frequency (rad/s).
    #[arg(long)]
    pub omega0: Option<String>,
    /// Trap frequency (rad/s).
    #[arg(long)]
    pub nu: Option<String>,
    /// Ion mass (kg).
    #[arg(long)]
    pub mass: Option<String>,
    /// Mean initial phonon number.
    #[arg(long, conflicts_with = "beta")]
    pub nbar: Option<String>,
    /// Inverse temperature (1/J).
    #[arg(long)]
    pub beta: Option<String>,
    /// Blocks per partition sum, or `auto`.
    #[arg(long)]
    pub nmax: Option<String>,
    /// Relative tolerance of adaptive truncation.
    #[arg(long)]
    pub tol: Option<String>,
    /// Sweep axis: eta, omega_rabi, nbar, nu, phi, m.
    #[arg(long)]
    pub axis: Option<String>,
    /// `a,b,c` or `min:max:count[:lin|log]`.
    #[arg(long)]
    pub grid: Option<String>,
    /// csv or jsonl.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub threads: Option<String>,
    #[arg(long)]
    pub allow_nonconverged: bool,
    /// Replace experimental frequencies by ω₀ = 10ν, Ω = ν, η = 0.5.
    #[arg(long)]
    pub desk_scale: bool,
}

impl CommonArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        let pairs = [
            ("preset", &self.preset),
            ("branch", &self.branch),
            ("m", &self.m),
            ("eta", &self.eta),
            ("phi", &self.phi),
            ("omega", &self.omega),
            ("omega0", &self.omega0),
            ("nu", &self.nu),
            ("mass", &self.mass),
            ("nbar", &self.nbar),
            ("beta", &self.beta),
            ("nmax", &self.nmax),
            ("tol", &self.tol),
            ("axis", &self.axis),
            ("grid", &self.grid),
            ("format", &self.format),
            ("out", &self.out),
            ("threads", &self.threads),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        if self.allow_nonconverged {
            s.set("allow-nonconverged", "true")?;
        }
        if self.desk_scale {
            s.set("desk-scale", "true")?;
        }
        Ok(s)
    }
}

/// Resolved job for one evaluation command.
pub struct Job {
    pub settings: Settings,
    pub specs: Vec<SweepSpec>,
}

impl Job {
    pub fn from_args(args: &CommonArgs) -> Result<Self, CliError> {
        let flags = args.settings()?;
        let file = args.config.as_deref().map(Settings::from_file).transpose()?;
        let (settings, specs) = presets::resolve(&flags, file.as_ref())?;
        Ok(Job { settings, specs })
    }

    fn points(&self) -> Result<Vec<sweep::Point>, CliError> {
        let mut all = Vec::new();
        for s in &self.specs {
            all.extend(s.points()?);
        }
        Ok(all)
    }
}

fn open_sink<'a>(out: Option<&PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::Usage(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(stdout),
    })
}

fn emit(
    command: &str,
    job: &Job,
    header: Vec<&'static str>,
    rows: Vec<Row>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let mut sink = open_sink(job.settings.out.as_ref(), stdout)?;
    let format = job.settings.format.unwrap_or(Format::Csv);
    let echo = presets::echo(command, &job.specs);
    let mut w = RowWriter::new(&mut *sink, format, header, &echo)?;
    let mut stalled = 0;
    for row in &rows {
        w.write(&row.values)?;
        if !row.converged {
            stalled += 1;
        }
    }
    w.finish()?;
    sink.flush()?;
    if stalled > 0 && job.settings.allow_nonconverged != Some(true) {
        return Err(CliError::NotConverged(stalled));
    }
    Ok(())
}

fn collect(results: Vec<Result<Row, CliError>>) -> Result<Vec<Row>, CliError> {
    results.into_iter().collect()
}

pub fn run_command(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Lag(args) | Command::Sweep(args) => {
            let job = Job::from_args(args)?;
            let name = if matches!(command, Command::Sweep(_)) { "sweep" } else { "lag" };
            if name == "sweep" && job.specs.iter().all(|s| s.axes.is_empty()) {
                return Err(CliError::Usage("sweep needs --axis and --grid, or a preset".into()));
            }
            let points = job.points()?;
            let rows = collect(evaluate(&points, job.settings.threads, eval_lag)?)?;
            emit(name, &job, sweep::LAG_HEADER.to_vec(), rows, stdout)
        }
        Command::Moments { common, numeric_oracle } => {
            let job = Job::from_args(common)?;
            let points = job.points()?;
            let oracle = *numeric_oracle;
            let rows = collect(evaluate(&points, job.settings.threads, |p| eval_moments(p, oracle))?)?;
            let mut header = sweep::MOMENTS_HEADER.to_vec();
            if oracle {
                header.extend(sweep::ORACLE_HEADER);
            }
            emit("moments", &job, header, rows, stdout)
        }
        Command::Spectrum(args) => {
            let job = Job::from_args(args)?;
            let points = job.points()?;
            let tables = evaluate(&points, job.settings.threads, eval_spectrum)?;
            let mut rows = Vec::new();
            for t in tables {
                rows.extend(t?);
            }
            emit("spectrum", &job, sweep::SPECTRUM_HEADER.to_vec(), rows, stdout)
        }
        Command::Verify { level, seed, out } => {
            let report = verify::run(level.parse()?, *seed);
            write!(stderr, "{}", report.human())?;
            let mut sink = open_sink(out.as_ref(), stdout)?;
            writeln!(sink, "{}", serde_json::to_string_pretty(&report.json()).expect("json"))?;
            sink.flush()?;
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Verification)
            }
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are not errors and go to stdout
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 2;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    match run_command(&cli.command, stdout, stderr) {
        Ok(()) => 0,
        // a closed downstream pipe is not an error
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(stderr, "ionlag: {e}");
            e.exit_code()
        }
    }
}
