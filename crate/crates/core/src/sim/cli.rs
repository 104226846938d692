//! `risbal` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use super::{run_sweep_with, write_csv, ScenarioConfig, SweepKind, SweepOptions};
use crate::Error;

/// Exit status for unreadable or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numerical failures during the simulation.
pub const EXIT_NUMERICAL: i32 = 3;
const EXIT_OUTPUT: i32 = 1;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepArg {
    Txpower,
    Lambda,
}

/// Monte Carlo sum-rate sweeps of balanced RIS designs.
///
/// Writes one CSV row per (sweep value, scheme, cell). The No-RIS scheme
/// reports a cell-1 sum-rate of 0 because cell 1 has no direct link.
#[derive(Debug, Parser)]
#[command(name = "risbal", version)]
struct Args {
    /// Scenario file (flat TOML); built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Parameter to sweep.
    #[arg(long, value_enum, default_value = "lambda")]
    sweep: SweepArg,

    /// Comma-separated sweep values (dBm for txpower, dB for lambda).
    /// Defaults to the configured value.
    #[arg(long, value_name = "LIST", value_delimiter = ',', allow_hyphen_values = true)]
    values: Option<Vec<f64>>,

    /// Drops per sweep value (overrides the config).
    #[arg(long, value_name = "N")]
    drops: Option<usize>,

    /// Master seed (overrides the config).
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Output CSV path; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Use the same drops at every sweep value.
    #[arg(long)]
    crn: bool,

    /// Print the effective scenario as a config file and exit.
    #[arg(long)]
    print_config: bool,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Io { .. } | Error::Geometry(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `args` (including the program name), runs the sweep and writes the
/// CSV. Returns the process exit status.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };

    let mut cfg = match &args.config {
        Some(path) => match ScenarioConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("risbal: cannot load config: {e}");
                return exit_code(&e);
            }
        },
        None => ScenarioConfig::default(),
    };
    if let Some(d) = args.drops {
        cfg.num_drops = d;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("risbal: {e}");
        return exit_code(&e);
    }
    if args.print_config {
        print!("{}", cfg.to_toml_string());
        return 0;
    }

    let sweep = match args.sweep {
        SweepArg::Txpower => SweepKind::TransmitPowerDbm,
        SweepArg::Lambda => SweepKind::LambdaDb,
    };
    let values = args.values.unwrap_or_else(|| match sweep {
        SweepKind::TransmitPowerDbm => vec![cfg.p_t_dbm],
        SweepKind::LambdaDb => vec![cfg.lambda_db],
    });

    let results = SweepOptions::from_env(args.crn).and_then(|opts| run_sweep_with(&cfg, sweep, &values, opts));
    let results = match results {
        Ok(r) => r,
        Err(e) => {
            eprintln!("risbal: {e}");
            return exit_code(&e);
        }
    };

    let written = match &args.out {
        Some(path) => File::create(path).and_then(|f| write_csv(&results, BufWriter::new(f))),
        None => write_csv(&results, io::stdout().lock()),
    };
    if let Err(e) = written {
        let target = args.out.as_ref().map_or("stdout".to_string(), |p| p.display().to_string());
        eprintln!("risbal: cannot write {target}: {e}");
        let _ = io::stderr().flush();
        return EXIT_OUTPUT;
    }
    0
}
