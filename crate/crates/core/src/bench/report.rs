use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use crate::bench::sweep::{aggregate, Aggregate, RunStatus, SolverId, SweepRecord};
use crate::error::{Error, Result};

const ABSENT: &str = "\u{2014}";

/// Formats with 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

fn header(users: usize) -> Vec<String> {
    let mut h: Vec<String> = ["pmax_db", "realization", "solver", "wsee_nats_per_joule"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((1..=users).map(|k| format!("p_{k}")));
    h.extend(
        ["iters_outer", "iters_inner", "iters_total", "wall_ms", "status"]
            .iter()
            .map(|s| s.to_string()),
    );
    h
}

/// Writes one header line and one line per record. Refuses to create a file
/// for an empty record set.
pub fn emit_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let Some(first) = records.first() else {
        return Err(Error::Config("no records to write".into()));
    };
    let users = first.powers.len();
    if records.iter().any(|r| r.powers.len() != users) {
        return Err(Error::Config("records mix different user counts".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let wrap = |e| Error::csv(path, e);
    w.write_record(header(users)).map_err(wrap)?;
    for r in records {
        let mut row = vec![
            fmt_float(r.pmax_db),
            r.realization.to_string(),
            r.solver.to_string(),
            fmt_float(r.wsee),
        ];
        row.extend(r.powers.iter().map(|p| fmt_float(*p)));
        row.push(r.iters_outer.to_string());
        row.push(fmt_float(r.iters_inner));
        row.push(r.iters_total.to_string());
        row.push(fmt_float(r.wall_ms));
        row.push(r.status.to_string());
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parses a file written by [`emit_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = rd.headers().map_err(|e| Error::csv(path, e))?.clone();
    let users = headers.iter().filter(|h| h.starts_with("p_")).count();
    if headers.iter().collect::<Vec<_>>() != header(users) {
        return Err(Error::Config(format!("{}: unexpected CSV header", path.display())));
    }
    let bad = |line: usize, what: &str| Error::Config(format!("{}: line {line}: bad {what}", path.display()));
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = i + 2;
        let f = |j: usize, what: &str| row[j].parse::<f64>().map_err(|_| bad(line, what));
        let u = |j: usize, what: &str| row[j].parse::<usize>().map_err(|_| bad(line, what));
        let base = 4 + users;
        out.push(SweepRecord {
            pmax_db: f(0, "pmax_db")?,
            realization: u(1, "realization")?,
            solver: row[2].parse::<SolverId>()?,
            wsee: f(3, "wsee")?,
            powers: (0..users).map(|k| f(4 + k, "power")).collect::<Result<_>>()?,
            iters_outer: u(base, "iters_outer")?,
            iters_inner: f(base + 1, "iters_inner")?,
            iters_total: u(base + 2, "iters_total")?,
            wall_ms: f(base + 3, "wall_ms")?,
            status: row[base + 4].parse::<RunStatus>()?,
        });
    }
    Ok(out)
}

fn cell(agg: Option<&Aggregate>, f: impl Fn(&Aggregate) -> f64, precision: usize) -> String {
    match agg {
        Some(a) if a.converged > 0 => format!("{:.*}", precision, f(a)),
        _ => ABSENT.to_string(),
    }
}

/// Iteration table per power level: mean SCA iterations and mean global
/// outer, inner-per-outer and total inner iterations, then mean WSEE and the
/// converged counts. Means use converged rows only; a dash marks solvers
/// that did not run or never converged at that level.
pub fn summarize(records: &[SweepRecord]) -> String {
    let aggs = aggregate(records);
    let mut levels: Vec<f64> = aggs.iter().map(|a| a.pmax_db).collect();
    levels.dedup();
    let find = |db: f64, s: SolverId| aggs.iter().find(|a| a.pmax_db == db && a.solver == s);
    let count = |a: Option<&Aggregate>| a.map_or(ABSENT.to_string(), |a| format!("{}/{}", a.converged, a.rows));

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>10} {:>10} {:>8} {:>12} {:>12} {:>14} {:>14} {:>9} {:>9}",
        "Pmax [dB]", "SCA", "Outer", "Inner", "Total", "WSEE SCA", "WSEE global", "SCA ok", "glob ok"
    );
    for db in levels {
        let sca = find(db, SolverId::Sca);
        let glob = find(db, SolverId::Global);
        let _ = writeln!(
            out,
            "{:>10} {:>10} {:>8} {:>12} {:>12} {:>14} {:>14} {:>9} {:>9}",
            db,
            cell(sca, |a| a.mean_iters_outer, 2),
            cell(glob, |a| a.mean_iters_outer, 2),
            cell(glob, |a| a.mean_iters_inner, 0),
            cell(glob, |a| a.mean_iters_total, 0),
            cell(sca, |a| a.mean_wsee, 6),
            cell(glob, |a| a.mean_wsee, 6),
            count(sca),
            count(glob),
        );
    }
    out
}
