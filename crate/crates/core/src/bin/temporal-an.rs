use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, LevelFilter};

use temporal_an::config::{self, ResolvedSpec};
use temporal_an::output::{self, RunInfo};
use temporal_an::simulate::{figure_preset, run_experiment, Figure, SweepAxis};
use temporal_an::validation;

#[derive(Parser)]
#[command(name = "temporal-an", version, about = "Monte Carlo secrecy-rate experiments for temporal AN in OFDM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single configuration point.
    Run(Common),
    /// Sweep one parameter.
    Sweep {
        /// alpha, n, n_cp, l_b, l_e or snr_db.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Preset experiment matching one of the reference figures.
    Figure {
        #[arg(long, value_parser = parse_figure)]
        which: Figure,
        #[command(flatten)]
        common: Common,
    },
    /// Invariant self-checks; exits 2 on any failure.
    Validate {
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// TOML config, or a previous run's metadata.json.
    #[arg(long)]
    config: Option<PathBuf>,
    /// key=value, repeatable; wins over the config file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse().map_err(|e: temporal_an::Error| e.to_string())
}

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Validate { quick } => validate(quick),
        Command::Run(common) => execute("run", None, common, |r| {
            r.spec.sweep_axis = None;
            r.spec.sweep_values.clear();
            Ok(())
        }),
        Command::Sweep { axis, values, common } => execute("sweep", None, common, move |r| {
            if let Some(axis) = &axis {
                r.spec.sweep_axis = Some(axis.parse::<SweepAxis>()?);
            }
            if !values.is_empty() {
                r.spec.sweep_values = values.clone();
            }
            if r.spec.sweep_axis.is_none() {
                return Err(temporal_an::Error::InvalidConfig("sweep needs --axis (or sweep_axis in the config)".into()));
            }
            Ok(())
        }),
        Command::Figure { which, common } => execute("figure", Some(which), common, |_| Ok(())),
    }
}

fn validate(quick: bool) -> ExitCode {
    let checks = validation::run_suite(quick);
    for c in &checks {
        println!("{c}");
    }
    if checks.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VALIDATION)
    }
}

fn execute(
    command: &str,
    figure: Option<Figure>,
    common: Common,
    adjust: impl FnOnce(&mut ResolvedSpec) -> temporal_an::Result<()>,
) -> ExitCode {
    match try_execute(command, figure, common, adjust) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn try_execute(
    command: &str,
    figure: Option<Figure>,
    common: Common,
    adjust: impl FnOnce(&mut ResolvedSpec) -> temporal_an::Result<()>,
) -> temporal_an::Result<()> {
    let base = match figure {
        Some(which) => {
            let preset = figure_preset(which);
            ResolvedSpec::new(preset.spec, preset.assumed)
        }
        None => ResolvedSpec::defaults(),
    };
    let mut resolved = match &common.config {
        Some(path) => config::load(path, base)?,
        None => base,
    };
    resolved.apply_overrides(&common.overrides)?;
    if let Some(seed) = common.seed {
        resolved.apply_overrides(&[format!("seed={seed}")])?;
    }
    if let Some(trials) = common.trials {
        resolved.apply_overrides(&[format!("trials={trials}")])?;
    }
    adjust(&mut resolved)?;
    resolved.spec.validate()?;

    fs::create_dir_all(&common.out)?;
    init_logging(&common.out.join("run.log"))?;
    info!("{command}: {:?}", resolved.spec);

    let result = run_experiment(&resolved.spec, common.workers)?;
    for bad in &result.invalid {
        eprintln!("warning: skipped sweep value {}: {}", bad.value, bad.reason);
    }
    let rows = output::table_rows(&resolved.spec, &result);
    let table_path = match common.format {
        Format::Csv => {
            let path = common.out.join("results.csv");
            output::write_csv(BufWriter::new(File::create(&path)?), &rows)?;
            path
        }
        Format::Json => {
            let path = common.out.join("results.json");
            output::write_json(BufWriter::new(File::create(&path)?), &rows)?;
            path
        }
    };
    let info = RunInfo {
        command,
        figure: figure.map(|f| f.to_string()),
        workers: common.workers,
        git_describe: output::git_describe(),
    };
    output::write_metadata(&common.out.join("metadata.json"), &output::metadata(&resolved, &result, &info))?;
    info!("wrote {} rows to {}", rows.len(), table_path.display());
    println!("{}", table_path.display());
    Ok(())
}

fn init_logging(path: &Path) -> temporal_an::Result<()> {
    let file = File::create(path)?;
    let _ = env_logger::Builder::new()
        .filter_level(LevelFilter::Info)
        .parse_env("RUST_LOG")
        .target(env_logger::Target::Pipe(Box::new(file)))
        .try_init();
    Ok(())
}
