//! `aoiq` — runs TOML-configured age-of-information experiments and writes
//! CSV reports comparing closed-form results against simulation.
//!
//! Exit codes: 0 when every case ends `ok`, 1 when any case fails its
//! tolerance check or errors, 2 for unusable input (bad path, bad config).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aoiq_core::harness::{self, all_ok, emit_csv, emit_long_csv, emit_summary, parse_config};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aoiq",
    version,
    about = "Discrete-time age-of-information queueing toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every case in an experiment config and report the results.
    Run {
        /// Path to the experiment config (TOML).
        config: PathBuf,
        /// Write the wide CSV here instead of stdout; a long-format CSV is
        /// written next to it as `<stem>_long.<ext>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's run seed (per-case `seed` keys still win).
        #[arg(long)]
        seed: Option<u64>,
        /// Print the resolved case names, one per line, without running.
        #[arg(long)]
        list_cases: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            list_cases,
        } => run(&config, out.as_deref(), seed, list_cases),
    };
    ExitCode::from(code)
}

fn long_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_long.{ext}"))
}

fn run(config_path: &Path, out: Option<&Path>, seed: Option<u64>, list_cases: bool) -> u8 {
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return 2;
        }
    };
    let cfg = match parse_config(&text, seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    if list_cases {
        for case in &cfg.cases {
            println!("{}", case.name);
        }
        return 0;
    }

    let results = harness::run_experiments(&cfg);

    let io_failed = match out {
        Some(path) => write_reports(&results, path).is_err(),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let written = emit_csv(&results, &mut lock).and_then(|_| lock.flush());
            // With the CSV on stdout, the summary goes to stderr so the
            // data stream stays machine-readable.
            eprint!("{}", emit_summary(&results));
            written.is_err()
        }
    };
    if io_failed {
        return 2;
    }
    if out.is_some() {
        print!("{}", emit_summary(&results));
    }
    if all_ok(&results) {
        0
    } else {
        1
    }
}

fn write_reports(results: &[harness::CaseResult], path: &Path) -> std::io::Result<()> {
    let mut wide = Vec::new();
    emit_csv(results, &mut wide)?;
    let mut long = Vec::new();
    emit_long_csv(results, &mut long)?;
    let long_out = long_path(path);
    fs::write(path, wide).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        e
    })?;
    fs::write(&long_out, long).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", long_out.display());
        e
    })
}
