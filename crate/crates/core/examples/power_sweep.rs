//! Monte-Carlo power sweep with warm-started SCA and, at low power, the
//! global solver; writes a CSV and prints the iteration table.

use std::env;
use std::path::PathBuf;

use wsee::bench::{emit_csv, run_sweep, summarize, SolverKind, SweepConfig};

fn main() -> wsee::Result<()> {
    let out = env::args()
        .nth(1)
        .map_or_else(|| env::temp_dir().join("wsee_sweep.csv"), PathBuf::from);
    let mut cfg = SweepConfig {
        users: 2,
        realizations: 8,
        solvers: vec![SolverKind::Sca, SolverKind::Global],
        timing: false,
        ..SweepConfig::default()
    };
    cfg.global.max_pmax_db = Some(-10.0);

    let res = run_sweep(&cfg)?;
    emit_csv(&res.records, &out)?;
    println!("{} records written to {}", res.records.len(), out.display());
    print!("{}", summarize(&res.records));
    Ok(())
}
