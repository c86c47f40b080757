use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::global::polyblock::{polyblock_maximize_set, PolyblockConfig, PolyblockStatus};
use crate::global::ratio::{dc_split_f, ratio_parts_unchecked};
use crate::network::WseeProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct DinkelbachConfig {
    /// Stop once `F(p^t; lambda^t) <= eps`.
    pub eps: f64,
    pub max_outer: usize,
    pub inner: PolyblockConfig,
    /// Starting point; `None` starts at full power.
    pub p0: Option<Vec<f64>>,
    /// Wall-clock budget for the whole solve.
    pub time_budget: Option<Duration>,
}

impl Default for DinkelbachConfig {
    fn default() -> Self {
        Self {
            eps: 1e-5,
            max_outer: 100,
            inner: PolyblockConfig::default(),
            p0: None,
            time_budget: None,
        }
    }
}

impl DinkelbachConfig {
    pub fn validate(&self, prob: &WseeProblem) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter("max_outer must be at least 1".into()));
        }
        self.inner.validate()?;
        if let Some(p0) = &self.p0 {
            prob.check_feasible(p0)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterRecord {
    pub lambda: f64,
    /// `F(p^t; lambda^t)` at the inner solution.
    pub f_value: f64,
    pub inner_iters: usize,
    /// Lifted incumbent and upper bound reported by the inner solve.
    pub incumbent: f64,
    pub upper_bound: f64,
    pub inner_status: PolyblockStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalStatus {
    Converged,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalResult {
    pub p_star: Vec<f64>,
    pub f_star: f64,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    pub trace: Vec<OuterRecord>,
    pub status: GlobalStatus,
}

impl GlobalResult {
    /// Writes one CSV line per outer iteration.
    pub fn write_trace_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            writeln!(out, "outer,lambda,f_value,inner_iters,incumbent,upper_bound,inner_status")?;
            for (i, r) in self.trace.iter().enumerate() {
                writeln!(
                    out,
                    "{},{:.11e},{:.11e},{},{:.11e},{:.11e},{:?}",
                    i + 1,
                    r.lambda,
                    r.f_value,
                    r.inner_iters,
                    r.incumbent,
                    r.upper_bound,
                    r.inner_status
                )?;
            }
            out.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }
}

/// Dinkelbach's method on `N(p) / D(p)`, each parametric problem solved
/// globally by the polyblock method on its monotonic lift.
pub fn dinkelbach_solve(prob: &WseeProblem, cfg: &DinkelbachConfig) -> Result<GlobalResult> {
    cfg.validate(prob)?;
    let deadline = cfg.time_budget.map(|b| Instant::now() + b);
    let mut prev = cfg.p0.clone().unwrap_or_else(|| prob.pmax().to_vec());
    let mut trace = Vec::new();
    let mut inner_total = 0;

    for _ in 0..cfg.max_outer {
        let lambda = prob.wsee_unchecked(&prev);
        let split = dc_split_f(prob, lambda)?;
        let lift = split.lift();

        let mut inner_cfg = cfg.inner.clone();
        if let Some(d) = deadline {
            let left = d.saturating_duration_since(Instant::now());
            inner_cfg.time_budget = Some(inner_cfg.time_budget.map_or(left, |b| b.min(left)));
        }
        // The previous iterate has F = 0 and seeds the incumbent, so F stays >= 0.
        let start = lift.boundary_point(&prev);
        let inner = polyblock_maximize_set(
            |z| lift.objective(z),
            &lift,
            &lift.upper_corner(),
            Some(&start),
            &inner_cfg,
        )?;
        inner_total += inner.iters;

        let (_, p_new) = inner.point.split_last().expect("lifted point has a t coordinate");
        let p_new = p_new.to_vec();
        let f_value = if p_new == prev {
            // F(p; f(p)) vanishes; skip the rounding residue
            0.0
        } else {
            let parts = ratio_parts_unchecked(prob, &p_new);
            parts.numerator - lambda * parts.denominator
        };
        trace.push(OuterRecord {
            lambda,
            f_value,
            inner_iters: inner.iters,
            incumbent: inner.value,
            upper_bound: inner.upper_bound,
            inner_status: inner.status,
        });

        if !inner.status.is_converged() {
            let best = if prob.wsee_unchecked(&p_new) > lambda { p_new } else { prev };
            return Ok(finish(prob, best, trace, inner_total, GlobalStatus::BudgetExhausted));
        }
        if f_value <= cfg.eps {
            return Ok(finish(prob, p_new, trace, inner_total, GlobalStatus::Converged));
        }
        prev = p_new;
    }
    Ok(finish(prob, prev, trace, inner_total, GlobalStatus::BudgetExhausted))
}

fn finish(prob: &WseeProblem, p: Vec<f64>, trace: Vec<OuterRecord>, inner_total: usize, status: GlobalStatus) -> GlobalResult {
    GlobalResult {
        f_star: prob.wsee_unchecked(&p),
        p_star: p,
        outer_iters: trace.len(),
        inner_iters_total: inner_total,
        trace,
        status,
    }
}
