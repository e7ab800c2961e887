//! Command-line front end.
//!
//! JSON is the machine interface and CSV the plotting interface. Numbers
//! are printed in shortest round-trip form, so identical inputs give
//! byte-identical output whatever the worker count.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::circle_map::{CircleMap, MapId};
use crate::error::Error;
use crate::periodic_points::{check_cap, enumerate_fix_capped, exponent_multiset_capped, DEFAULT_ENUMERATION_CAP};
use crate::spectral::{SpectralModel, VarianceEstimate};
use crate::statistics::{clt_study, CltParameters, CltStudy, DEFAULT_BINS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "lyapchi", version, about = "Periodic Lyapunov exponents of expanding circle maps")]
pub struct Cli {
    /// Worker threads; 0 picks the machine default.
    #[arg(long, global = true, env = "LYAPCHI_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump every periodic point of one period.
    Enumerate(EnumerateArgs),
    /// Mean exponent, asymptotic variance and twisted eigenvalues.
    Spectrum(SpectrumArgs),
    /// Distance of the exponent law to the normal limit over several periods.
    #[command(alias = "clt-check")]
    Clt(CltArgs),
    /// Equal-width histogram of the exponents of one period.
    Histogram(HistogramArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    /// linear:K, trigdoubling:eps or blaschke:a
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub period: u32,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub map: String,
    /// Fourier modes per side; refined automatically when omitted.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Twist parameters; κ is reported at 0 and at ±t for each.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub twist: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[arg(long)]
    pub map: String,
    #[arg(long, alias = "period", value_delimiter = ',', required = true)]
    pub periods: Vec<u32>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub period: u32,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Histogram (χₙ − χ̄)√n/σ instead of the raw exponents.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Validated settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub map_id: MapId,
    pub periods: Vec<u32>,
    pub modes: Option<usize>,
    pub threads: usize,
    pub cap: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Checks periods and the enumeration cap before any heavy work and
    /// builds the map.
    pub fn validate(&self) -> Result<CircleMap<f64>, CliError> {
        let map = self.map_id.build::<f64>().map_err(CliError::Config)?;
        for &n in &self.periods {
            check_cap(map.degree(), n, self.cap).map_err(CliError::Config)?;
        }
        Ok(map)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(Error),
    #[error("{0}")]
    Library(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("report invariants failed: {0}")]
    Invariants(String),
    #[error("unsupported output: {0}")]
    Unsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Unsupported(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_CONFIG,
            CliError::Invariants(_) => EXIT_NUMERIC,
            CliError::Library(e) => match e {
                Error::ParameterOutOfRange(_)
                | Error::NotExpanding { .. }
                | Error::InconsistentMap(_)
                | Error::CapExceeded { .. }
                | Error::InvalidArgument(_) => EXIT_CONFIG,
                Error::ConvergenceFailure { .. }
                | Error::Resolution { .. }
                | Error::EmptyDistribution => EXIT_NUMERIC,
                Error::DegenerateVariance { .. }
                | Error::DegenerateSigma { .. }
                | Error::DegenerateRange => EXIT_DEGENERATE,
            },
        }
    }
}

fn parse_map(id: &str) -> Result<MapId, CliError> {
    id.parse().map_err(CliError::Config)
}

fn build_model(map: &CircleMap<f64>, modes: Option<usize>) -> Result<SpectralModel<f64>, Error> {
    match modes {
        Some(n) => SpectralModel::untwisted(map, n),
        None => SpectralModel::untwisted_auto(map),
    }
}

/// Runs a parsed command line and returns the bytes to emit.
pub fn execute(cli: &Cli) -> Result<Vec<u8>, CliError> {
    let config = RunConfig::from_cli(cli)?;
    let map = config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Unsupported(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Enumerate(_) => cmd_enumerate(&config, &map),
        Command::Spectrum(args) => cmd_spectrum(&config, &map, &args.twist),
        Command::Clt(_) => cmd_clt(&config, &map),
        Command::Histogram(args) => cmd_histogram(&config, &map, args.bins, args.normalized),
    })
}

/// Runs the command and writes its output; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(cli).and_then(|bytes| {
        emit(cli.out.as_ref(), &bytes)?;
        Ok(())
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Invariants(msg)) => {
            eprintln!("lyapchi: report invariants failed: {msg}");
            EXIT_NUMERIC
        }
        Err(e) => {
            eprintln!("lyapchi: {e}");
            e.exit_code()
        }
    }
}

fn emit(path: Option<&PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let (map, periods, modes, cap, format) = match &cli.command {
            Command::Enumerate(a) => (&a.map, vec![a.period], None, a.cap, a.format),
            Command::Spectrum(a) => (&a.map, vec![], a.modes, DEFAULT_ENUMERATION_CAP, Format::Json),
            Command::Clt(a) => (&a.map, a.periods.clone(), a.modes, a.cap, a.format),
            Command::Histogram(a) => (&a.map, vec![a.period], a.modes, a.cap, a.format),
        };
        if !matches!(cli.command, Command::Spectrum(_)) && periods.is_empty() {
            return Err(CliError::Config(Error::InvalidArgument("no periods given".into())));
        }
        if periods.contains(&0) {
            return Err(CliError::Config(Error::InvalidArgument("periods must be at least 1".into())));
        }
        if let Command::Spectrum(a) = &cli.command {
            if let Some(t) = a.twist.iter().find(|t| !(t.abs() <= crate::spectral::MAX_TWIST)) {
                return Err(CliError::Config(Error::InvalidArgument(format!(
                    "twist {t} outside [-0.5, 0.5]"
                ))));
            }
        }
        if let Command::Histogram(a) = &cli.command {
            if a.bins == 0 {
                return Err(CliError::Config(Error::InvalidArgument("bins must be positive".into())));
            }
        }
        Ok(Self {
            map_id: parse_map(map)?,
            periods,
            modes,
            threads: cli.threads,
            cap,
            output: cli.out.clone(),
            format,
        })
    }
}

fn to_json<S: Serialize>(value: &S) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

pub fn cmd_enumerate(config: &RunConfig, map: &CircleMap<f64>) -> Result<Vec<u8>, CliError> {
    let records = enumerate_fix_capped(map, config.periods[0], config.cap)?;
    match config.format {
        Format::Json => Ok(to_json(&records)),
        Format::Csv => {
            let mut s = String::with_capacity(records.len() * 64);
            s.push_str("branch,point,exponent,residual\n");
            for r in &records {
                writeln!(s, "{},{},{},{}", r.branch.m, r.point, r.exponent, r.residual).unwrap();
            }
            Ok(s.into_bytes())
        }
    }
}

#[derive(Serialize)]
struct Kappa {
    t: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct SpectrumOutput {
    map: String,
    chi_bar: f64,
    sigma_squared: f64,
    degenerate_variance: bool,
    truncation: usize,
    tail_bound: f64,
    modes: usize,
    contraction_ratio: f64,
    kappa: Vec<Kappa>,
}

pub fn cmd_spectrum(config: &RunConfig, map: &CircleMap<f64>, twists: &[f64]) -> Result<Vec<u8>, CliError> {
    let model = build_model(map, config.modes)?;
    let variance: VarianceEstimate<f64> = model.variance_estimate()?;
    let mut ts = vec![0.0];
    for &t in twists {
        if t != 0.0 {
            ts.push(t);
            ts.push(-t);
        }
    }
    let kappa = ts
        .iter()
        .map(|&t| {
            let k = model.twisted_eigenvalue(t)?;
            Ok(Kappa { t, re: k.re, im: k.im })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(to_json(&SpectrumOutput {
        map: config.map_id.to_string(),
        chi_bar: model.chi_bar(),
        sigma_squared: variance.sigma_squared,
        degenerate_variance: variance.degenerate,
        truncation: variance.truncation,
        tail_bound: variance.tail_bound,
        modes: model.modes(),
        contraction_ratio: model.contraction_ratio(),
        kappa,
    }))
}

#[derive(Serialize)]
struct CltOutput<'a> {
    map: String,
    modes: usize,
    #[serde(flatten)]
    study: &'a CltStudy<f64>,
}

pub fn cmd_clt(config: &RunConfig, map: &CircleMap<f64>) -> Result<Vec<u8>, CliError> {
    let model = build_model(map, config.modes)?;
    let variance = model.variance_estimate()?;
    let params = CltParameters {
        chi_bar: model.chi_bar(),
        sigma_squared: variance.sigma_squared,
    };
    let study = clt_study(map, &config.periods, &params, config.cap)?;
    let bytes = match config.format {
        Format::Json => to_json(&CltOutput {
            map: config.map_id.to_string(),
            modes: model.modes(),
            study: &study,
        }),
        Format::Csv => {
            let mut s = String::from(
                "period,count,chi_bar,sigma_squared,sample_mean,scaled_variance,mean_error,variance_error,ks_distance\n",
            );
            for r in &study.reports {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    r.period,
                    r.count,
                    r.chi_bar,
                    r.sigma_squared,
                    r.sample_mean,
                    r.scaled_variance,
                    r.mean_error,
                    r.variance_error,
                    r.ks_distance
                )
                .unwrap();
            }
            s.into_bytes()
        }
    };
    let problems: Vec<String> = study
        .reports
        .iter()
        .flat_map(|r| r.invariant_violations())
        .collect();
    if !problems.is_empty() {
        // the report is still written before failing
        emit(config.output.as_ref(), &bytes)?;
        return Err(CliError::Invariants(problems.join("; ")));
    }
    Ok(bytes)
}

pub fn cmd_histogram(
    config: &RunConfig,
    map: &CircleMap<f64>,
    bins: usize,
    normalized: bool,
) -> Result<Vec<u8>, CliError> {
    let period = config.periods[0];
    let mut dist = exponent_multiset_capped(map, period, config.cap)?;
    if normalized {
        let model = build_model(map, config.modes)?;
        let variance = model.variance_estimate()?;
        dist = dist.normalize(model.chi_bar(), variance.sigma_squared.sqrt())?;
    }
    let hist = dist.histogram(bins)?;
    match config.format {
        Format::Json => Ok(to_json(&hist)),
        Format::Csv => {
            let mut s = String::from("bin_left,bin_right,count\n");
            for (edge, count) in hist.bin_edges.windows(2).zip(&hist.counts) {
                writeln!(s, "{},{},{}", edge[0], edge[1], count).unwrap();
            }
            Ok(s.into_bytes())
        }
    }
}
