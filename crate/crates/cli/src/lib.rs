//! Command dispatch for the `purcell` binary.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error (bad config,
//! grid, or precondition), 3 numerical failure (no convergence, trace drift,
//! non-exponential fit).

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use purcell_core::lindblad::EvolveError;
use purcell_core::model::ConfigError;
use purcell_core::rates::RateError;
use purcell_core::spectra::SpectraError;
use purcell_core::{
    build_effective_matrix, decay_report, eigenpairs, evolve, run_sweep, run_sweep_sequential,
    slow_mode_rate, step_bound, Observable, ParamPath, RunSettings, SweepSpec, SystemConfig,
};
use serde_json::json;

pub mod config_io;
pub mod output;

pub use config_io::{apply_overrides, emit_config, load_config, parse_config};

/// Dispatch failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EvolveError> for CliError {
    fn from(e: EvolveError) -> Self {
        match e {
            EvolveError::TraceDrift { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::NoConvergence(_) | SpectraError::FitFailure(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<RateError> for CliError {
    fn from(e: RateError) -> Self {
        match e {
            RateError::OscillatoryResidual { .. } | RateError::AmbiguousSlowMode { .. } => {
                CliError::Numerical(e.to_string())
            }
            RateError::Spectra(inner) => inner.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<purcell_core::experiments::SweepError> for CliError {
    fn from(e: purcell_core::experiments::SweepError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Parser, Debug)]
#[command(
    name = "purcell",
    version,
    about = "Single-excitation cavity QED: spectra, exceptional points, master-equation decay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// TOML config file (kappa plus an atoms array)
    #[arg(long)]
    config: PathBuf,
    /// Parameter override, e.g. atoms[1].g=3.0 (repeatable)
    #[arg(long = "override", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<SystemConfig, CliError> {
        apply_overrides(load_config(&self.config)?, &self.overrides)
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write the primary output here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Effective matrix, eigenvalues, eigenvectors, coalescence diagnostics
    Spectrum {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Propagate the master equation and export populations
    Evolve {
        #[command(flatten)]
        config: ConfigArgs,
        /// Run length (defaults to 50 / predicted rate)
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        /// Integrator step (defaults to the stability bound)
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fit the excited atom's decay rate and compare with the closed form
    Rates {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Locate an exceptional point and report its diagnostics
    EpFind {
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Unexcited atom's decay: second-order point
        #[arg(long = "gamma-b", conflicts_with = "gamma_c")]
        gamma_b: Option<f64>,
        /// Second unexcited atom's decay: third-order point
        #[arg(long = "gamma-c")]
        gamma_c: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sweep one parameter and record an observable per grid point
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Swept parameter path, e.g. atoms[1].g
        #[arg(long)]
        param: String,
        /// Grid: comma list (0,3,5) or start:stop:step (0:6:0.1)
        #[arg(long)]
        grid: String,
        /// fitted_rate | slow_mode_rate | closed_form:<tag> | min_gap | max_overlap
        #[arg(long, default_value = "fitted_rate")]
        observable: String,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Worker threads for grid points (1 = sequential)
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Re-run the five reference inhibition checks (closed form + fit)
    Reproduce {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Parses a grid given as `a,b,c` or `start:stop:step` or a single number.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: &str| CliError::Usage(format!("grid `{s}`: {m}"));
    if s.contains(',') {
        return s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("expected numbers")))
            .collect();
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad("bad start"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad("bad stop"))?;
        let step: f64 = parts[2].trim().parse().map_err(|_| bad("bad step"))?;
        if step == 0.0 || (stop - start) * step < 0.0 {
            return Err(bad("step must be nonzero and point from start to stop"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(bad("more than 1e6 points"));
        }
        return Ok((0..count).map(|k| start + step * k as f64).collect());
    }
    Ok(vec![s
        .trim()
        .parse()
        .map_err(|_| bad("expected a number"))?])
}

fn default_run(
    cfg: &SystemConfig,
    t_end: Option<f64>,
    dt: Option<f64>,
) -> Result<(f64, f64), CliError> {
    let dt = dt.unwrap_or_else(|| step_bound(cfg));
    let t_end = match t_end {
        Some(t) => t,
        None => {
            let (_, prediction) = purcell_core::closed_form_prediction(cfg);
            let rate = prediction.filter(|r| *r > 0.0).ok_or_else(|| {
                CliError::Validation(
                    "no closed-form prediction available to derive t_end; pass --t-end".into(),
                )
            })?;
            purcell_core::rates::recommended_t_end(rate)
        }
    };
    Ok((t_end, dt))
}

fn emit(out: &OutputArgs, stdout: &mut impl Write, text: &str) -> Result<(), CliError> {
    match &out.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| {
                CliError::Validation(format!("cannot write {}: {e}", path.display()))
            })?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Validation(format!("stdout: {e}"))),
    }
}

fn dispatch(cli: Cli, stdout: &mut impl Write) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum {
            config,
            format,
            out,
        } => {
            let cfg = config.load()?;
            let m = build_effective_matrix(&cfg)?;
            let spec = eigenpairs(&m)?;
            let text = match format {
                Format::Csv => output::spectrum_csv(&spec),
                _ => output::pretty(&output::spectrum_json(&cfg, &m, &spec)),
            };
            emit(&out, stdout, &text)
        }
        Command::Evolve {
            config,
            t_end,
            dt,
            format,
            out,
        } => {
            let cfg = config.load()?;
            let (t_end, dt) = default_run(&cfg, t_end, dt)?;
            let traj = evolve(&cfg, t_end, dt)?;
            let text = match format {
                Format::Json => {
                    let labels: Vec<String> = purcell_core::basis(&cfg)
                        .iter()
                        .map(|b| b.to_string())
                        .collect();
                    output::pretty(&json!({
                        "kappa": traj.kappa(),
                        "basis": labels,
                        "times": traj.times(),
                        "populations": traj.populations(),
                        "trace_errors": traj.trace_errors(),
                    }))
                }
                _ => {
                    let mut buf = Vec::new();
                    traj.write_csv(&mut buf).expect("in-memory write");
                    String::from_utf8(buf).expect("csv is utf-8")
                }
            };
            emit(&out, stdout, &text)
        }
        Command::Rates {
            config,
            t_end,
            dt,
            format,
            out,
        } => {
            let cfg = config.load()?;
            let (t_end, dt) = default_run(&cfg, t_end, dt)?;
            let traj = evolve(&cfg, t_end, dt)?;
            let report = decay_report(&cfg, &traj)?;
            let m = build_effective_matrix(&cfg)?;
            let slow = slow_mode_rate(&m, cfg.excited_index()).map_err(|e| e.to_string());
            let text = match format {
                Format::Csv => output::rates_csv(&report, &slow),
                _ => output::pretty(&output::rates_json(&report, &slow)),
            };
            emit(&out, stdout, &text)
        }
        Command::EpFind {
            kappa,
            gamma_b,
            gamma_c,
            format,
            out,
        } => {
            let report = match (gamma_b, gamma_c) {
                (Some(gb), None) => purcell_core::ep2_report(kappa, gb)?,
                (None, Some(gc)) => purcell_core::ep3_report(kappa, gc)?,
                _ => {
                    return Err(CliError::Usage(
                        "pass exactly one of --gamma-b (order 2) or --gamma-c (order 3)".into(),
                    ))
                }
            };
            let text = match format {
                Format::Csv => output::ep_csv(&report),
                _ => output::pretty(&serde_json::to_value(&report).expect("ep report json")),
            };
            emit(&out, stdout, &text)
        }
        Command::Sweep {
            config,
            param,
            grid,
            observable,
            t_end,
            dt,
            jobs,
            format,
            out,
        } => {
            let base = config.load()?;
            let spec = SweepSpec {
                base,
                param: ParamPath::parse(&param).map_err(|e| CliError::Usage(e.to_string()))?,
                grid: parse_grid(&grid)?,
                observable: Observable::parse(&observable)
                    .map_err(|e| CliError::Usage(e.to_string()))?,
                run: RunSettings { t_end, dt },
            };
            let result = if jobs <= 1 {
                run_sweep_sequential(&spec)?
            } else {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
                pool.install(|| run_sweep(&spec))?
            };
            let text = match format {
                Format::Json => output::pretty(&serde_json::to_value(&result).expect("sweep json")),
                _ => {
                    let mut buf = Vec::new();
                    result.write_csv(&mut buf).expect("in-memory write");
                    String::from_utf8(buf).expect("csv is utf-8")
                }
            };
            emit(&out, stdout, &text)
        }
        Command::Reproduce { format, out } => {
            let rows = purcell_core::reproduce_reference_numbers();
            let text = match format {
                Format::Json => output::pretty(&serde_json::to_value(&rows).expect("rows json")),
                Format::Csv => output::reproduce_csv(&rows),
                Format::Text => purcell_core::experiments::format_reproduce_table(&rows),
            };
            emit(&out, stdout, &text)
        }
    }
}

/// Parses arguments and runs one command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are not failures
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut stdout = std::io::stdout();
    match dispatch(cli, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
