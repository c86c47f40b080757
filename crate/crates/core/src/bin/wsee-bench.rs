use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wsee::bench::{emit_csv, parse_pmax_range, parse_solvers, read_csv, run_sweep_with_progress, summarize, SweepConfig};

/// Power-sweep benchmark for WSEE power control on the multi-way relay channel.
#[derive(Parser)]
#[command(name = "wsee-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo power sweep and print the iteration table.
    Run(RunArgs),
    /// Print the iteration table of a CSV written by `run`.
    Summarize {
        /// CSV file produced by `run --out`.
        csv: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON sweep configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write one CSV row per solve to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma separated subset of sca,global.
    #[arg(long)]
    solvers: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Inclusive dB range start:stop:step, e.g. -30:30:5.
    #[arg(long, allow_hyphen_values = true)]
    pmax_db: Option<String>,
    /// Also record a cold-started SCA solve next to every warm-started one.
    #[arg(long)]
    cold_start_audit: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Write zero wall times so that output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    /// Run the global solver up to this power level (dB).
    #[arg(long, allow_hyphen_values = true)]
    global_max_pmax_db: Option<f64>,
    /// Run the global solver at every power level and user count.
    #[arg(long)]
    global_everywhere: bool,
    /// Wall-clock budget per global solve in seconds.
    #[arg(long)]
    global_time_budget: Option<f64>,
}

fn build_config(args: &RunArgs) -> wsee::Result<SweepConfig> {
    let mut cfg = match &args.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if let Some(s) = &args.solvers {
        cfg.solvers = parse_solvers(s)?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.realizations {
        cfg.realizations = n;
    }
    if let Some(r) = &args.pmax_db {
        cfg.pmax_db = parse_pmax_range(r)?;
    }
    if args.cold_start_audit {
        cfg.cold_start_audit = true;
    }
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    }
    if args.no_timing {
        cfg.timing = false;
    }
    if args.global_everywhere {
        cfg.global.max_pmax_db = None;
        cfg.global.max_users = None;
    }
    if let Some(db) = args.global_max_pmax_db {
        cfg.global.max_pmax_db = Some(db);
    }
    if let Some(b) = args.global_time_budget {
        cfg.global.time_budget_s = Some(b);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> wsee::Result<()> {
    let cfg = build_config(&args)?;
    let out = run_sweep_with_progress(&cfg, |done, total| {
        eprint!("\rrealization {done}/{total}");
        if done == total {
            eprintln!();
        }
    })?;
    if let Some(path) = &args.out {
        emit_csv(&out.records, path)?;
        eprintln!("wrote {} records to {}", out.records.len(), path.display());
    }
    print!("{}", summarize(&out.records));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Summarize { csv } => read_csv(&csv).map(|recs| print!("{}", summarize(&recs))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wsee-bench: {e}");
            ExitCode::FAILURE
        }
    }
}
