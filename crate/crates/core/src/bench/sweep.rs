use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::bench::config::{db_to_linear, SolverKind, SweepConfig};
use crate::error::{Error, Result};
use crate::global::{dinkelbach_solve, GlobalStatus};
use crate::mwrc::{generate_channels, ChannelGenConfig, MwrcChannel, Scenario};
use crate::network::{PowerModel, WseeProblem};
use crate::sca::{sca_solve, ScaStatus};

/// Which solver produced a record. `ScaCold` rows come from the cold-start audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverId {
    Sca,
    ScaCold,
    Global,
}

impl SolverId {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverId::Sca => "sca",
            SolverId::ScaCold => "sca-cold",
            SolverId::Global => "global",
        }
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sca" => Ok(SolverId::Sca),
            "sca-cold" => Ok(SolverId::ScaCold),
            "global" => Ok(SolverId::Global),
            other => Err(Error::Config(format!("unknown solver id {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Converged,
    MaxIters,
    BudgetExhausted,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIters => "max-iters",
            RunStatus::BudgetExhausted => "budget-exhausted",
            RunStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(RunStatus::Converged),
            "max-iters" => Ok(RunStatus::MaxIters),
            "budget-exhausted" => Ok(RunStatus::BudgetExhausted),
            "failed" => Ok(RunStatus::Failed),
            other => Err(Error::Config(format!("unknown status {other:?}"))),
        }
    }
}

/// One solve at one power level on one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub pmax_db: f64,
    pub realization: usize,
    pub solver: SolverId,
    pub wsee: f64,
    pub powers: Vec<f64>,
    /// Outer iterations (SCA iterations for SCA rows).
    pub iters_outer: usize,
    /// Mean polyblock iterations per outer iteration; zero for SCA rows.
    pub iters_inner: f64,
    /// Total inner iterations for global rows, SCA iterations otherwise.
    pub iters_total: usize,
    pub wall_ms: f64,
    pub status: RunStatus,
}

impl SweepRecord {
    fn sort_key(&self, other: &Self) -> std::cmp::Ordering {
        self.pmax_db
            .total_cmp(&other.pmax_db)
            .then(self.realization.cmp(&other.realization))
            .then(self.solver.cmp(&other.solver))
    }
}

/// Sorts by `(pmax_db, realization, solver)`.
pub fn sort_records(records: &mut [SweepRecord]) {
    records.sort_by(SweepRecord::sort_key);
}

/// Means over the converged rows of one `(pmax_db, solver)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub pmax_db: f64,
    pub solver: SolverId,
    pub rows: usize,
    pub converged: usize,
    pub mean_wsee: f64,
    pub mean_iters_outer: f64,
    pub mean_iters_inner: f64,
    pub mean_iters_total: f64,
}

impl Aggregate {
    pub fn converged_fraction(&self) -> f64 {
        self.converged as f64 / self.rows as f64
    }
}

/// Groups records by power level and solver, averaging converged rows.
/// Cells without converged rows report NaN means.
pub fn aggregate(records: &[SweepRecord]) -> Vec<Aggregate> {
    let mut cells: BTreeMap<(u64, SolverId), Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((order_key(r.pmax_db), r.solver)).or_default().push(r);
    }
    cells
        .into_values()
        .map(|rows| {
            let ok: Vec<&&SweepRecord> = rows.iter().filter(|r| r.status == RunStatus::Converged).collect();
            let n = ok.len() as f64;
            let mean = |f: &dyn Fn(&SweepRecord) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / n;
            Aggregate {
                pmax_db: rows[0].pmax_db,
                solver: rows[0].solver,
                rows: rows.len(),
                converged: ok.len(),
                mean_wsee: mean(&|r| r.wsee),
                mean_iters_outer: mean(&|r| r.iters_outer as f64),
                mean_iters_inner: mean(&|r| r.iters_inner),
                mean_iters_total: mean(&|r| r.iters_total as f64),
            }
        })
        .collect()
}

/// Order-preserving map from `f64` to `u64`, for use as a sort key.
fn order_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub summary: Vec<Aggregate>,
}

struct Timer(Option<Instant>);

impl Timer {
    fn start(enabled: bool) -> Self {
        Timer(enabled.then(Instant::now))
    }

    fn ms(&self) -> f64 {
        self.0.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3)
    }
}

fn failed(pmax_db: f64, realization: usize, solver: SolverId, users: usize, wall_ms: f64) -> SweepRecord {
    SweepRecord {
        pmax_db,
        realization,
        solver,
        wsee: f64::NAN,
        powers: vec![f64::NAN; users],
        iters_outer: 0,
        iters_inner: 0.0,
        iters_total: 0,
        wall_ms,
        status: RunStatus::Failed,
    }
}

fn run_sca(prob: &WseeProblem, cfg: &SweepConfig, start: Option<Vec<f64>>, id: SolverId, pmax_db: f64, r: usize) -> SweepRecord {
    let timer = Timer::start(cfg.timing);
    match sca_solve(prob, &cfg.sca.to_config(start)) {
        Ok(res) => SweepRecord {
            pmax_db,
            realization: r,
            solver: id,
            wsee: res.f_star,
            powers: res.p_star,
            iters_outer: res.iters,
            iters_inner: 0.0,
            iters_total: res.iters,
            wall_ms: timer.ms(),
            status: match res.status {
                ScaStatus::Converged => RunStatus::Converged,
                ScaStatus::MaxIters => RunStatus::MaxIters,
            },
        },
        Err(_) => failed(pmax_db, r, id, prob.users(), timer.ms()),
    }
}

fn run_global(prob: &WseeProblem, cfg: &SweepConfig, pmax_db: f64, r: usize) -> SweepRecord {
    let timer = Timer::start(cfg.timing);
    match dinkelbach_solve(prob, &cfg.global.to_config()) {
        Ok(res) => SweepRecord {
            pmax_db,
            realization: r,
            solver: SolverId::Global,
            wsee: res.f_star,
            powers: res.p_star,
            iters_outer: res.outer_iters,
            iters_inner: res.inner_iters_total as f64 / res.outer_iters.max(1) as f64,
            iters_total: res.inner_iters_total,
            wall_ms: timer.ms(),
            status: match res.status {
                GlobalStatus::Converged => RunStatus::Converged,
                GlobalStatus::BudgetExhausted => RunStatus::BudgetExhausted,
            },
        },
        Err(_) => failed(pmax_db, r, SolverId::Global, prob.users(), timer.ms()),
    }
}

/// Builds the WSEE instance of one realization at one power level.
pub fn sweep_problem(cfg: &SweepConfig, base: &MwrcChannel, pmax_db: f64) -> Result<WseeProblem> {
    let pmax = db_to_linear(pmax_db);
    let chan = MwrcChannel { p0: pmax, ..base.clone() };
    chan.to_problem(
        PowerModel::uniform(cfg.users, cfg.phi, cfg.pc)?,
        cfg.weights(),
        vec![pmax; cfg.users],
    )
}

/// The channel draw of realization `r`; its relay power is replaced per power level.
pub fn sweep_channel(cfg: &SweepConfig, r: usize) -> Result<MwrcChannel> {
    let gen = ChannelGenConfig {
        seed: cfg.seed,
        users: cfg.users,
        reciprocal: cfg.reciprocal,
    };
    let scenario = Scenario {
        p0: 1.0,
        n0: cfg.noise,
        nk: cfg.noise,
    };
    generate_channels(&gen, &scenario, r as u64)
}

/// All solves of one realization, in sweep order.
pub fn run_realization(cfg: &SweepConfig, r: usize) -> Vec<SweepRecord> {
    let base = match sweep_channel(cfg, r) {
        Ok(c) => c,
        Err(_) => {
            return cfg
                .pmax_db
                .iter()
                .flat_map(|&db| cfg.solvers.iter().map(move |s| (db, *s)))
                .map(|(db, s)| {
                    let id = if s == SolverKind::Sca { SolverId::Sca } else { SolverId::Global };
                    failed(db, r, id, cfg.users, 0.0)
                })
                .collect()
        }
    };
    let run_sca_here = cfg.solvers.contains(&SolverKind::Sca);
    let run_global_here = cfg.solvers.contains(&SolverKind::Global);
    let mut warm: Option<Vec<f64>> = None;
    let mut out = Vec::new();

    for &db in &cfg.pmax_db {
        let prob = match sweep_problem(cfg, &base, db) {
            Ok(p) => p,
            Err(_) => {
                for s in &cfg.solvers {
                    let id = if *s == SolverKind::Sca { SolverId::Sca } else { SolverId::Global };
                    out.push(failed(db, r, id, cfg.users, 0.0));
                }
                continue;
            }
        };
        if run_sca_here {
            let start = if cfg.warm_start {
                warm.as_ref().map(|p| prob.project(p))
            } else {
                None
            };
            let rec = run_sca(&prob, cfg, start, SolverId::Sca, db, r);
            if rec.status != RunStatus::Failed {
                warm = Some(rec.powers.clone());
            }
            out.push(rec);
            if cfg.cold_start_audit {
                out.push(run_sca(&prob, cfg, None, SolverId::ScaCold, db, r));
            }
        }
        if run_global_here && cfg.global.enabled_for(db, cfg.users) {
            out.push(run_global(&prob, cfg, db, r));
        }
    }
    out
}

/// Runs every realization, fanned out over a worker pool, and returns the
/// records sorted by `(pmax_db, realization, solver)` with their summary.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    run_sweep_with_progress(cfg, |_, _| {})
}

/// As [`run_sweep`], calling `progress(done, total)` after each realization.
pub fn run_sweep_with_progress<P>(cfg: &SweepConfig, progress: P) -> Result<SweepOutput>
where
    P: Fn(usize, usize) + Sync,
{
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let done = std::sync::atomic::AtomicUsize::new(0);
    let total = cfg.realizations;
    let mut records: Vec<SweepRecord> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .flat_map_iter(|r| {
                let recs = run_realization(cfg, r);
                let d = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                progress(d, total);
                recs
            })
            .collect()
    });
    sort_records(&mut records);
    let summary = aggregate(&records);
    Ok(SweepOutput { records, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(db: f64, r: usize, solver: SolverId, wsee: f64, outer: usize, status: RunStatus) -> SweepRecord {
        SweepRecord {
            pmax_db: db,
            realization: r,
            solver,
            wsee,
            powers: vec![0.1, 0.2],
            iters_outer: outer,
            iters_inner: 0.0,
            iters_total: outer,
            wall_ms: 0.0,
            status,
        }
    }

    #[test]
    fn aggregates_skip_unconverged_rows() {
        let recs = vec![
            rec(-10.0, 0, SolverId::Sca, 1.0, 2, RunStatus::Converged),
            rec(-10.0, 1, SolverId::Sca, 3.0, 4, RunStatus::Converged),
            rec(-10.0, 2, SolverId::Sca, 100.0, 1000, RunStatus::MaxIters),
            rec(-20.0, 0, SolverId::Sca, 0.5, 7, RunStatus::Converged),
        ];
        let agg = aggregate(&recs);
        assert_eq!(agg.len(), 2);
        assert_eq!(agg[0].pmax_db, -20.0);
        let cell = &agg[1];
        assert_eq!((cell.rows, cell.converged), (3, 2));
        assert_eq!(cell.mean_wsee, 2.0);
        assert_eq!(cell.mean_iters_outer, 3.0);
        assert!((cell.converged_fraction() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sorting_is_total() {
        let mut recs = vec![
            rec(0.0, 1, SolverId::Global, 0.0, 1, RunStatus::Converged),
            rec(-5.0, 0, SolverId::Sca, 0.0, 1, RunStatus::Converged),
            rec(0.0, 1, SolverId::Sca, 0.0, 1, RunStatus::Converged),
            rec(0.0, 0, SolverId::Sca, 0.0, 1, RunStatus::Converged),
        ];
        sort_records(&mut recs);
        let keys: Vec<_> = recs.iter().map(|r| (r.pmax_db, r.realization, r.solver)).collect();
        assert_eq!(
            keys,
            vec![
                (-5.0, 0, SolverId::Sca),
                (0.0, 0, SolverId::Sca),
                (0.0, 1, SolverId::Sca),
                (0.0, 1, SolverId::Global)
            ]
        );
    }

    #[test]
    fn order_key_is_monotone() {
        let xs = [-30.0, -2.5, -0.0, 0.0, 1e-9, 5.0, 30.0];
        for w in xs.windows(2) {
            assert!(order_key(w[0]) <= order_key(w[1]));
        }
    }

    #[test]
    fn name_round_trips() {
        for s in [SolverId::Sca, SolverId::ScaCold, SolverId::Global] {
            assert_eq!(s.as_str().parse::<SolverId>().unwrap(), s);
        }
        for s in [RunStatus::Converged, RunStatus::MaxIters, RunStatus::BudgetExhausted, RunStatus::Failed] {
            assert_eq!(s.as_str().parse::<RunStatus>().unwrap(), s);
        }
    }
}
