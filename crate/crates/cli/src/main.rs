//! `lgsim`: sweep, scan, and reconstruct generalized Leggett-Garg
//! experiments with a semi-weak polarization meter.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod formats;
mod scan;
mod scenario;
mod sweep;
mod tomo;

use clap::{Parser, ValueEnum};
use scenario::{ModeConfig, Scenario, ScenarioConfig};
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }

    pub fn numerical_from(err: impl fmt::Display) -> Self {
        CliError::Numerical(err.to_string())
    }

    pub fn io(err: std::io::Error) -> Self {
        CliError::Numerical(format!("io: {err}"))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Analytic,
    Sampled,
}

#[derive(Parser, Debug)]
#[command(
    name = "lgsim",
    version,
    about = "Two-party Leggett-Garg sweeps, inequality scans, and tomography"
)]
struct Cli {
    /// Scenario JSON file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    scenario: Option<PathBuf>,

    /// Built-in scenario: fig3, fig4, or fig5.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// Override the scenario's evaluation mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,

    /// Expected pairs: per grid angle in sampled sweeps, per setting in
    /// tomography.
    #[arg(long, value_name = "N")]
    pairs: Option<f64>,

    /// Base seed for sampled runs; grid angle k uses seed + k.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,

    /// Scan every enumerated inequality over M detectors (2, 3, or 4)
    /// instead of emitting sweep columns.
    #[arg(long, value_name = "M")]
    scan_m: Option<usize>,

    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Also write the sampled count table of every grid angle (CSV blocks).
    #[arg(long, value_name = "PATH")]
    counts_out: Option<PathBuf>,

    /// Reconstruct a density matrix from a tomography counts CSV
    /// (setting_label,count rows; requires --pairs).
    #[arg(long, value_name = "PATH")]
    tomography: Option<PathBuf>,

    /// Print the scenario's resolved inequalities as JSON (coefficients
    /// plus exact macrorealist bounds) and exit.
    #[arg(long)]
    spec_info: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("lgsim: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut out = open_out(cli.out.as_deref())?;

    if let Some(counts_path) = &cli.tomography {
        if cli.scenario.is_some() || cli.preset.is_some() || cli.scan_m.is_some() {
            return Err(CliError::config(
                "--tomography cannot be combined with sweeps or scans",
            ));
        }
        let pairs = cli
            .pairs
            .ok_or_else(|| CliError::config("--tomography requires --pairs (flux per setting)"))?;
        if !pairs.is_finite() || pairs <= 0.0 {
            return Err(CliError::config("--pairs must be positive"));
        }
        return tomo::run_tomography(counts_path, pairs, &mut out);
    }

    let mut config = load_config(cli)?;
    apply_mode_overrides(cli, &mut config)?;
    let scenario = Scenario::resolve(&config)?;

    if cli.spec_info {
        let chain = scenario.chain_at(0.0);
        let specs = scenario
            .spec_values
            .iter()
            .map(|v| formats::parse_spec_json(v, &chain).map(|s| formats::spec_to_json(&s, &chain)))
            .collect::<Result<Vec<_>, _>>()?;
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&serde_json::Value::Array(specs)).unwrap()
        )
        .map_err(CliError::io)?;
        return Ok(());
    }

    match cli.scan_m {
        Some(m) => scan::scan_all(&scenario, m, &mut out),
        None => {
            let mut counts_out = cli
                .counts_out
                .as_deref()
                .map(|p| open_out(Some(p)))
                .transpose()?;
            sweep::run_sweep(
                &scenario,
                &mut out,
                counts_out.as_mut().map(|w| w as &mut dyn Write),
            )
        }
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    match (&cli.scenario, &cli.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read scenario {path:?}: {e}")))?;
            scenario::parse_config(&text)
        }
        (None, Some(name)) => scenario::preset(name),
        (None, None) => Err(CliError::config(
            "choose a --scenario file, a --preset, or --tomography",
        )),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    }
}

fn apply_mode_overrides(cli: &Cli, config: &mut ScenarioConfig) -> Result<(), CliError> {
    match cli.mode {
        Some(ModeArg::Analytic) => config.mode = ModeConfig::Analytic,
        Some(ModeArg::Sampled) => {
            let pairs = cli
                .pairs
                .or(match config.mode {
                    ModeConfig::Sampled { pairs, .. } => Some(pairs),
                    ModeConfig::Analytic => None,
                })
                .ok_or_else(|| CliError::config("--mode sampled requires --pairs"))?;
            let seed = cli.seed.unwrap_or(match config.mode {
                ModeConfig::Sampled { seed, .. } => seed,
                ModeConfig::Analytic => 42,
            });
            config.mode = ModeConfig::Sampled { pairs, seed };
        }
        None => {
            // Flags still refine a scenario that is already sampled.
            if let ModeConfig::Sampled { pairs, seed } = config.mode {
                config.mode = ModeConfig::Sampled {
                    pairs: cli.pairs.unwrap_or(pairs),
                    seed: cli.seed.unwrap_or(seed),
                };
            }
        }
    }
    Ok(())
}

fn open_out(path: Option<&std::path::Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(path) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(path)
                .map_err(|e| CliError::config(format!("cannot create {path:?}: {e}")))?,
        )),
        None => Box::new(std::io::BufWriter::new(std::io::stdout())),
    })
}
