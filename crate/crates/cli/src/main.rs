use std::path::PathBuf;
use std::process::ExitCode;

use anlab_cli::config::key_help;
use anlab_cli::{parse_config_with_overrides, run};
use clap::{CommandFactory, FromArgMatches, Parser};

/// Radial Adkins-Nappi wave-map laboratory.
///
/// Exit status: 0 when the run completes, 2 when blow-up is detected (all
/// output is still written), 1 on any error.
#[derive(Debug, Parser)]
#[command(name = "anlab", version)]
struct Args {
    /// Configuration file of `key = value` lines; defaults apply without it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// evolve, stationary, channels, smallscale, truncated or sweep; takes
    /// precedence over the `command` key.
    #[arg(long, value_name = "NAME")]
    command: Option<String>,
    /// Replaces one configuration key; may be repeated.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, default_value_t = 0, value_name = "N")]
    jobs: usize,
}

fn main() -> ExitCode {
    let matches = Args::command().after_long_help(key_help()).get_matches();
    let args = match Args::from_arg_matches(&matches) {
        Ok(a) => a,
        Err(e) => e.exit(),
    };
    let text = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
        None => String::new(),
    };
    let mut overrides = args.overrides.clone();
    if let Some(c) = &args.command {
        overrides.push(format!("command={c}"));
    }
    let config = match parse_config_with_overrides(&text, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: config: {e}");
            return ExitCode::from(1);
        }
    };
    match run(&config, &args.out, args.jobs) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
