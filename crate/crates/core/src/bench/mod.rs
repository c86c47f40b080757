//! Monte-Carlo benchmark harness over relay-channel power sweeps.

mod config;
mod report;
mod sweep;

pub use config::{db_to_linear, parse_pmax_range, parse_solvers, GlobalSettings, ScaSettings, SolverKind, SweepConfig};
pub use report::{emit_csv, fmt_float, read_csv, summarize};
pub use sweep::{
    aggregate, run_realization, run_sweep, run_sweep_with_progress, sort_records, sweep_channel, sweep_problem,
    Aggregate, RunStatus, SolverId, SweepOutput, SweepRecord,
};
