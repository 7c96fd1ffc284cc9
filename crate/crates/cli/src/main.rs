//! `erhoq`: thermalize with DMQMC, evolve on the simulated backend, and
//! compare against the exact reference.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 population
//! explosion, 3 zero trace, 4 malformed population file, 5 system too large
//! for the dense reference.

mod config;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, RunConfig};
use erhoq::dmqmc::{self, DmqmcError, DmqmcOptions, PsipPopulation};
use erhoq::estimator::{calibrate, evaluate, rescale_by_t0, EstimatorError, EvolutionJob, ObservableSeries, SeriesPoint, TimeGrid};
use erhoq::oracle::{mx_series, OracleError, Reference};
use erhoq::spin::{HamiltonianParams, Schedule};
use erhoq::Execution;

#[derive(Parser)]
#[command(name = "erhoq", version, about = "Thermal DMQMC density matrices evolved on a simulated gate backend")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the thermal density matrix and write the population file.
    Thermalize(Flags),
    /// Evolve a population file and write the results CSV.
    Evolve {
        #[command(flatten)]
        flags: Flags,
        /// Population file; defaults to the config's `population`.
        #[arg(long)]
        population: Option<PathBuf>,
    },
    /// Write the dense exact reference CSV.
    Exact(Flags),
    /// Thermalize, evolve and compute the reference in one go.
    Run(Flags),
}

#[derive(Args, Clone)]
struct Flags {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Switches to shot mode with this many shots per program.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long = "noise-readout")]
    noise_readout: Option<f64>,
    /// Constant angle error added to every rotation.
    #[arg(long = "noise-angle-bias", allow_hyphen_values = true)]
    noise_angle_bias: Option<f64>,
    /// Divide the series by its t = 0 value.
    #[arg(long)]
    rescale: bool,
    /// Attach a systematic error from a run under H' = -mu_z sum sigma_z.
    #[arg(long)]
    calibrate: bool,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Primary output of the subcommand.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Explosion(String),
    ZeroTrace(String),
    PopulationFile(String),
    TooLarge(String),
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Other(_) => 1,
            Self::Explosion(_) => 2,
            Self::ZeroTrace(_) => 3,
            Self::PopulationFile(_) => 4,
            Self::TooLarge(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(e) => write!(f, "{e}"),
            Self::Explosion(m) | Self::ZeroTrace(m) | Self::PopulationFile(m) | Self::TooLarge(m) | Self::Other(m) => {
                write!(f, "{m}")
            }
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<DmqmcError> for CliError {
    fn from(e: DmqmcError) -> Self {
        match e {
            DmqmcError::PopulationExplosion { .. } => Self::Explosion(e.to_string()),
            DmqmcError::ZeroTrace => Self::ZeroTrace(e.to_string()),
            _ => Self::Other(e.to_string()),
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Population(d) => d.into(),
            _ => Self::Other(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::DimensionTooLarge(_) => Self::TooLarge(e.to_string()),
            _ => Self::Other(e.to_string()),
        }
    }
}

fn load_config(flags: &Flags) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&flags.config)
        .map_err(|e| ConfigError::Read(format!("cannot read config {}: {e}", flags.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = flags.seed {
        cfg.dmqmc.seed = seed;
    }
    if let Some(shots) = flags.shots {
        cfg.shots = Some(shots);
    }
    if let Some(p) = flags.noise_readout {
        cfg.noise.readout_flip = p;
    }
    if let Some(c) = flags.noise_angle_bias {
        cfg.noise.angle_bias.offset = c;
    }
    if let Some(svg) = &flags.svg {
        cfg.svg = Some(svg.clone());
    }
    cfg.noise.validate().map_err(|e| CliError::Other(e.to_string()))?;
    Ok(cfg)
}

/// Writes through a sibling temporary file so a failed run leaves nothing behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let name = path.file_name().ok_or_else(|| CliError::Other(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| CliError::Other(format!("cannot write {}: {e}", path.display()));
    if let Err(e) = std::fs::write(&tmp, contents) {
        let _ = std::fs::remove_file(&tmp);
        return Err(io(e));
    }
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

fn grid(cfg: &RunConfig) -> Result<TimeGrid, CliError> {
    Ok(TimeGrid::up_to(cfg.t_max, cfg.grid_spacing)?)
}

fn describe(p: &HamiltonianParams) -> String {
    format!("j_z={} mu_x={} mu_z={}", p.j_z, p.mu_x, p.mu_z)
}

fn thermalize(cfg: &RunConfig) -> Result<PsipPopulation, CliError> {
    let pop = dmqmc::run(&cfg.dmqmc, &cfg.schedule.initial, &cfg.lattice, &DmqmcOptions::default())?;
    let trace = pop.trace_estimate()?;
    println!("total weight {}", pop.total_weight());
    println!("trace {trace}");
    Ok(pop)
}

fn evolve(cfg: &RunConfig, flags: &Flags, pop: PsipPopulation) -> Result<ObservableSeries, CliError> {
    pop.trace_estimate()?;
    let beta = pop.beta();
    let job = EvolutionJob::new(pop, cfg.schedule.clone(), grid(cfg)?, cfg.trotter_dt)?
        .with_noise(cfg.noise)
        .with_mode(cfg.mode());
    let mut series = evaluate(&job)?.bootstrap_series(cfg.resamples, cfg.bootstrap_seed(), Execution::Parallel)?;
    series.push_meta("h0", describe(&cfg.schedule.initial));
    series.push_meta("h1", describe(&cfg.schedule.evolved()));
    if flags.rescale {
        series = rescale_by_t0(&series)?;
    }
    if flags.calibrate {
        let mu_z = cfg.schedule.evolved().mu_z;
        let diag = HamiltonianParams { j_z: 0.0, mu_x: 0.0, mu_z };
        let calib = Schedule::quench(cfg.schedule.initial, diag);
        let times = job.grid.times();
        let reference = mx_series(&calib, &cfg.lattice, beta, &times, Reference::Exact)?;
        let cal = calibrate(&job.calibration(mu_z), &reference, flags.rescale)?;
        series = series.with_systematic(cal.systematic);
        series.push_meta("calibration_mu_z", mu_z);
        series.push_meta("calibration_systematic", cal.systematic);
    }
    Ok(series)
}

fn exact(cfg: &RunConfig, flags: &Flags) -> Result<ObservableSeries, CliError> {
    let times = grid(cfg)?.times();
    let values = mx_series(&cfg.schedule, &cfg.lattice, cfg.dmqmc.beta, &times, Reference::Exact)?;
    let mut series = ObservableSeries {
        points: times
            .iter()
            .zip(values)
            .map(|(&t, value)| SeriesPoint { t, value, stat_err: 0.0, sys_err: 0.0 })
            .collect(),
        metadata: Vec::new(),
    };
    series.push_meta("reference", "exact");
    series.push_meta("N", cfg.lattice.n());
    series.push_meta("beta", cfg.dmqmc.beta);
    series.push_meta("h0", describe(&cfg.schedule.initial));
    series.push_meta("h1", describe(&cfg.schedule.evolved()));
    if flags.rescale {
        series = rescale_by_t0(&series)?;
    }
    Ok(series)
}

fn read_population(path: &Path) -> Result<PsipPopulation, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Other(format!("cannot read population {}: {e}", path.display())))?;
    PsipPopulation::parse_file(&text).map_err(|e| CliError::PopulationFile(format!("{}: {e}", path.display())))
}

fn write_svg(cfg: &RunConfig, results: &ObservableSeries, reference: &ObservableSeries) -> Result<(), CliError> {
    if let Some(path) = &cfg.svg {
        write_atomic(path, &svg::plot(results, reference, "<m_x(t)>"))?;
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Thermalize(flags) => {
            let cfg = load_config(&flags)?;
            let pop = thermalize(&cfg)?;
            write_atomic(flags.out.as_ref().unwrap_or(&cfg.population), &pop.to_file_string())
        }
        Command::Evolve { flags, population } => {
            let cfg = load_config(&flags)?;
            let pop = read_population(population.as_ref().unwrap_or(&cfg.population))?;
            let series = evolve(&cfg, &flags, pop)?;
            write_atomic(flags.out.as_ref().unwrap_or(&cfg.results), &series.to_csv())
        }
        Command::Exact(flags) => {
            let cfg = load_config(&flags)?;
            let series = exact(&cfg, &flags)?;
            write_atomic(flags.out.as_ref().unwrap_or(&cfg.reference), &series.to_csv())
        }
        Command::Run(flags) => {
            let cfg = load_config(&flags)?;
            // Everything is computed before anything is written.
            let pop = thermalize(&cfg)?;
            let reference = exact(&cfg, &flags)?;
            let results = evolve(&cfg, &flags, pop.clone())?;
            write_atomic(&cfg.population, &pop.to_file_string())?;
            write_atomic(flags.out.as_ref().unwrap_or(&cfg.results), &results.to_csv())?;
            write_atomic(&cfg.reference, &reference.to_csv())?;
            write_svg(&cfg, &results, &reference)
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("ERHOQ_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Other(format!("ERHOQ_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|_| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
