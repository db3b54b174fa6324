//! Command-line front end shared by the `qpa` binary.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::{Error, Result};
use crate::export;
use crate::monte_carlo::init_ensemble;
use crate::recurrence::{
    convergence_exponents, find_thresholds, iterate, regime_grid, threshold_grid, ExponentSettings, SubensembleState,
};
use crate::verify::{run_verification, ProtocolTables};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;
pub const EXIT_NO_THRESHOLD: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "qpa",
    version,
    about = "Entanglement purification with lab-demon error flags"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// JSON experiment config.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Named preset: fig1, noiseless, threshold.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Suppress wall-clock metadata so reruns are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact recurrence of the flag-resolved Bell coefficients.
    Iterate,
    /// Monte Carlo simulation of a finite ensemble.
    Mc,
    /// Locate regime boundaries of a noise family.
    Scan,
    /// Check label tables and the round map against the dense reference.
    Verify {
        /// Alternative label tables (JSON) to check instead of the built-in ones.
        #[arg(long, value_name = "PATH")]
        tables: Option<PathBuf>,
    },
}

/// Builds the effective config: preset or file (or defaults), then flag overrides.
pub fn effective_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::from_path(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output.dir = out.clone();
    }
    if let Some(format) = args.format {
        config.output.format = format;
    }
    config.output.deterministic |= args.deterministic;
    config.validate()?;
    Ok(config)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Degenerate { .. } => EXIT_DEGENERATE,
        Error::NoThreshold { .. } => EXIT_NO_THRESHOLD,
        Error::Io(_) => 1,
        _ => EXIT_CONFIG,
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn cmd_iterate(config: &ExperimentConfig) -> Result<u8> {
    let noise = config.noise_model()?;
    let initial = config.initial_state()?;
    let t = iterate(&initial, &noise, config.placement, config.stop_rule())?;
    let exponents = convergence_exponents(&t, &ExponentSettings::default()).ok();
    let last = t.final_record();
    println!(
        "rounds {}  F {:.9}  F_cond {:.9}  converged {}",
        last.round, last.fidelity, last.conditional_fidelity, t.converged
    );
    let summary = json!({
        "converged": t.converged,
        "rounds": t.rounds(),
        "final_F": last.fidelity,
        "final_F_cond": last.conditional_fidelity,
        "exponents": exponents,
    });
    print_written(&export::write_trajectory(config, &t, summary)?);
    Ok(EXIT_OK)
}

fn cmd_mc(config: &ExperimentConfig) -> Result<u8> {
    let noise = config.noise_model()?;
    let mut ensemble = init_ensemble(
        config.initial.bell()?,
        config.pairs,
        config.flags,
        config.seed,
        config.chunks,
    )?;
    let t = ensemble.run_protocol(&noise, config.placement, config.rounds);
    for r in &t.rows {
        println!(
            "round {:>3}  survivors {:>10}  F {:.6}  F_cond {:.6}",
            r.round, r.survivors, r.fidelity, r.conditional_fidelity
        );
    }
    if t.halted {
        println!("halted: fewer than two pairs left");
    }
    print_written(&export::write_mc(config, &t)?);
    Ok(EXIT_OK)
}

fn cmd_scan(config: &ExperimentConfig) -> Result<u8> {
    let family = config.scan.family;
    let build = |x: f64| family.build(x);
    let settings = config.scan_settings();
    let initial = config.initial_state()?;
    let grid = regime_grid(build, &initial, &config.scan.grid(), &settings)?;
    let initials: Vec<(f64, SubensembleState)> = config
        .scan
        .werner_grid
        .iter()
        .map(|&f| Ok((f, SubensembleState::werner(f, config.flags)?)))
        .collect::<Result<_>>()?;
    let sensitivity: Vec<_> = threshold_grid(build, &initials, &settings)
        .into_iter()
        .map(|(f, r)| match r {
            Ok(t) => json!({ "werner_fidelity": f, "thresholds": t }),
            Err(e) => json!({ "werner_fidelity": f, "error": e.to_string() }),
        })
        .collect();
    let main = find_thresholds(build, &initial, &settings);
    let report = json!({
        "family": family,
        "thresholds": main.as_ref().ok(),
        "error": main.as_ref().err().map(|e| e.to_string()),
        "werner_grid": sensitivity,
    });
    print_written(&export::write_scan(config, report, &grid)?);
    let t = main?;
    let show = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.5}"));
    println!(
        "{} f_purify {}  f_secure {}",
        family.name(),
        show(t.f_purify),
        show(t.f_secure)
    );
    Ok(EXIT_OK)
}

fn cmd_verify(config: &ExperimentConfig, tables: Option<&PathBuf>) -> Result<u8> {
    let tables = match tables {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?
        }
        None => ProtocolTables::shipped(),
    };
    let report = run_verification(&tables);
    match config.output.format {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
        OutputFormat::Csv => print!("{report}"),
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

pub fn run(cli: &Cli) -> Result<u8> {
    let config = effective_config(&cli.common)?;
    match &cli.command {
        Command::Iterate => cmd_iterate(&config),
        Command::Mc => cmd_mc(&config),
        Command::Scan => cmd_scan(&config),
        Command::Verify { tables } => cmd_verify(&config, tables.as_ref()),
    }
}

/// Parses the process arguments, runs the command and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
