use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::global::{DinkelbachConfig, PolyblockConfig};
use crate::sca::ScaConfig;

/// `10^(db / 10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Sca,
    Global,
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sca" => Ok(SolverKind::Sca),
            "global" => Ok(SolverKind::Global),
            other => Err(Error::Config(format!("unknown solver {other:?}, expected sca or global"))),
        }
    }
}

/// Parses a comma separated solver list such as `sca,global`.
pub fn parse_solvers(s: &str) -> Result<Vec<SolverKind>> {
    let mut out: Vec<SolverKind> = s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::Config("solver list is empty".into()));
    }
    Ok(out)
}

/// Parses an inclusive `start:stop:step` dB range.
pub fn parse_pmax_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("invalid dB range {s:?}, expected start:stop:step"));
    let [a, b, step] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let step: f64 = step.trim().parse().map_err(|_| bad())?;
    if !(step > 0.0) || b < a {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| a + i as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaSettings {
    pub alpha: f64,
    pub beta: f64,
    pub max_iters: usize,
    pub tol_obj: f64,
    pub tol_step: f64,
    pub tol_stationarity: f64,
}

impl Default for ScaSettings {
    fn default() -> Self {
        let d = ScaConfig::default();
        Self {
            alpha: d.alpha,
            beta: d.beta,
            max_iters: d.max_iters,
            tol_obj: d.tol_obj,
            tol_step: d.tol_step,
            tol_stationarity: d.tol_stationarity,
        }
    }
}

impl ScaSettings {
    pub fn to_config(&self, p0: Option<Vec<f64>>) -> ScaConfig {
        ScaConfig {
            alpha: self.alpha,
            beta: self.beta,
            max_iters: self.max_iters,
            tol_obj: self.tol_obj,
            tol_step: self.tol_step,
            tol_stationarity: self.tol_stationarity,
            p0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalSettings {
    pub eps: f64,
    pub max_outer: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub max_vertices: usize,
    /// Wall-clock budget per solve in seconds; `None` disables it.
    pub time_budget_s: Option<f64>,
    /// The global solver only runs for `pmax_db` at or below this; `None` lifts the limit.
    pub max_pmax_db: Option<f64>,
    /// The global solver only runs for at most this many users; `None` lifts the limit.
    pub max_users: Option<usize>,
}

impl Default for GlobalSettings {
    fn default() -> Self {
        let d = DinkelbachConfig::default();
        Self {
            eps: d.eps,
            max_outer: d.max_outer,
            tol: d.inner.tol,
            max_iters: d.inner.max_iters,
            max_vertices: d.inner.max_vertices,
            time_budget_s: Some(300.0),
            max_pmax_db: Some(0.0),
            max_users: Some(3),
        }
    }
}

impl GlobalSettings {
    pub fn to_config(&self) -> DinkelbachConfig {
        DinkelbachConfig {
            eps: self.eps,
            max_outer: self.max_outer,
            inner: PolyblockConfig {
                tol: self.tol,
                max_iters: self.max_iters,
                max_vertices: self.max_vertices,
                ..PolyblockConfig::default()
            },
            p0: None,
            time_budget: self.time_budget_s.map(Duration::from_secs_f64),
        }
    }

    pub fn enabled_for(&self, pmax_db: f64, users: usize) -> bool {
        self.max_pmax_db.map_or(true, |m| pmax_db <= m) && self.max_users.map_or(true, |m| users <= m)
    }
}

/// Monte-Carlo power sweep over relay-channel realizations.
///
/// Every node shares the budget: relay power and per-user budget both equal
/// `10^(pmax_db / 10)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub pmax_db: Vec<f64>,
    #[serde(rename = "K")]
    pub users: usize,
    pub realizations: usize,
    pub seed: u64,
    pub pc: f64,
    pub phi: f64,
    /// Relay and user noise power.
    pub noise: f64,
    /// Per-user weights; `None` means all ones.
    pub weights: Option<Vec<f64>>,
    pub solvers: Vec<SolverKind>,
    pub warm_start: bool,
    pub cold_start_audit: bool,
    pub reciprocal: bool,
    /// Worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
    /// Record wall-clock times. Disable for byte-reproducible output.
    pub timing: bool,
    pub sca: ScaSettings,
    pub global: GlobalSettings,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            pmax_db: (-30..=30).step_by(5).map(f64::from).collect(),
            users: 3,
            realizations: 100,
            seed: 0,
            pc: 1.0,
            phi: 2.5,
            noise: 1e-2,
            weights: None,
            solvers: vec![SolverKind::Sca],
            warm_start: true,
            cold_start_audit: false,
            reciprocal: true,
            workers: None,
            timing: true,
            sca: ScaSettings::default(),
            global: GlobalSettings::default(),
        }
    }
}

impl SweepConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.weights.clone().unwrap_or_else(|| vec![1.0; self.users])
    }

    pub fn validate(&self) -> Result<()> {
        if self.pmax_db.is_empty() {
            return Err(Error::Config("the power sweep is empty".into()));
        }
        if self.pmax_db.iter().any(|d| !d.is_finite()) {
            return Err(Error::Config("power levels must be finite".into()));
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if self.users < 2 {
            return Err(Error::Config("the relay channel needs at least two users".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::Config("no solver selected".into()));
        }
        if !(self.pc > 0.0 && self.phi > 0.0 && self.noise > 0.0) {
            return Err(Error::Config("pc, phi and noise must be positive".into()));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.users || w.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Config(format!("weights must be {} positive numbers", self.users)));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if let Some(b) = self.global.time_budget_s {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Config("global time budget must be positive".into()));
            }
        }
        Ok(())
    }
}
