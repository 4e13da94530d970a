use cfhb::cli::{parse_config, run, Command, RunConfig};
use cfhb::params::SchemeTag;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Switching-interval simulator and analyzer for an isolated current-fed
/// half-bridge AC-DC converter under secondary-side modulation.
#[derive(Parser)]
#[command(name = "cfhb", version, about)]
struct Args {
    /// TOML configuration file (defaults to the hardware prototype values).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Override both boost inductances with 0.1 H to suppress ripple.
    #[arg(long, global = true)]
    zero_ripple: bool,
    /// Skip waveform synthesis; use closed-form metrics only.
    #[arg(long, global = true)]
    analytic_only: bool,
    /// Uniform samples per switching interval in waveform CSVs.
    #[arg(long, global = true)]
    samples_per_interval: Option<usize>,
    #[command(subcommand)]
    command: Cli,
}

fn scheme_arg(s: &str) -> Result<SchemeTag, String> {
    s.parse().map_err(|e: cfhb::CfhbError| e.to_string())
}

#[derive(Subcommand)]
enum Cli {
    /// Synthesize one switching interval at an electrical angle [deg].
    Simulate {
        #[arg(value_parser = scheme_arg)]
        scheme: SchemeTag,
        omega_tau_deg: f64,
    },
    /// Sweep every switching interval of a half grid cycle.
    Sweep {
        #[arg(value_parser = scheme_arg)]
        scheme: SchemeTag,
    },
    /// Compare cycle metrics and modeled losses across schemes.
    Compare {
        #[arg(required = true, value_parser = scheme_arg)]
        schemes: Vec<SchemeTag>,
    },
    /// Check soft-switching feasibility over the half grid cycle.
    Validate {
        #[arg(value_parser = scheme_arg)]
        scheme: SchemeTag,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    match dispatch(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(args: &Args) -> cfhb::Result<u8> {
    let mut cfg = match &args.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if args.zero_ripple {
        cfg.zero_ripple = true;
    }
    if args.analytic_only {
        cfg.analytic_only = true;
    }
    if let Some(n) = args.samples_per_interval {
        cfg.samples_per_interval = n;
    }
    let cmd = match &args.command {
        Cli::Simulate {
            scheme,
            omega_tau_deg,
        } => Command::Simulate {
            scheme: *scheme,
            omega_tau_deg: *omega_tau_deg,
        },
        Cli::Sweep { scheme } => Command::Sweep { scheme: *scheme },
        Cli::Compare { schemes } => Command::Compare {
            schemes: schemes.clone(),
        },
        Cli::Validate { scheme } => Command::Validate { scheme: *scheme },
    };
    let outcome = run(&cfg, &cmd, &args.out)?;
    print!("{}", outcome.summary);
    Ok(outcome.exit_code as u8)
}
