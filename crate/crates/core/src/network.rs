//! SINR interference-network model and the weighted sum energy efficiency
//! objective.
//!
//! User `k` achieves
//!
//! ```text
//! r_k(p) = ln(1 + theta_k p_k / (sigma2_k + sum_j eta_kj p_j))
//! ```
//!
//! nats per channel use, and the objective is
//!
//! ```text
//! f(p) = sum_k w_k r_k(p) / (phi_k p_k + pc_k)
//! ```
//!
//! over the box `0 <= p <= pmax`. All logarithms are natural.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Coefficients of the SINR rate model.
///
/// `eta` is stored row-major: row `k` belongs to the receiver of user `k`'s
/// stream, and the diagonal `eta[k][k]` is self-interference.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceNetwork {
    theta: Vec<f64>,
    eta: Vec<f64>,
    sigma2: Vec<f64>,
}

/// The two nondecreasing parts of a rate, `rate = plus - minus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcSplit {
    pub plus: f64,
    pub minus: f64,
}

impl DcSplit {
    pub fn difference(&self) -> f64 {
        self.plus - self.minus
    }
}

impl InterferenceNetwork {
    pub fn new(theta: Vec<f64>, eta: Vec<Vec<f64>>, sigma2: Vec<f64>) -> Result<Self> {
        let k = theta.len();
        if k == 0 {
            return Err(Error::InvalidParameter("network needs at least one user".into()));
        }
        check_len("sigma2", k, sigma2.len())?;
        check_len("eta rows", k, eta.len())?;
        for row in &eta {
            check_len("eta columns", k, row.len())?;
        }
        if let Some(t) = theta.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {t}")));
        }
        if let Some(s) = sigma2.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidParameter(format!("sigma2 must be positive, got {s}")));
        }
        let eta: Vec<f64> = eta.into_iter().flatten().collect();
        if let Some(e) = eta.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::InvalidParameter(format!("eta must be nonnegative, got {e}")));
        }
        Ok(Self { theta, eta, sigma2 })
    }

    pub fn users(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn sigma2(&self) -> &[f64] {
        &self.sigma2
    }

    pub fn eta(&self, k: usize, j: usize) -> f64 {
        self.eta[k * self.users() + j]
    }

    pub fn eta_row(&self, k: usize) -> &[f64] {
        let n = self.users();
        &self.eta[k * n..(k + 1) * n]
    }

    pub fn eta_rows(&self) -> Vec<Vec<f64>> {
        self.eta.chunks(self.users()).map(<[f64]>::to_vec).collect()
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        check_len("power vector", self.users(), p.len())
    }

    fn check_user(&self, k: usize) -> Result<()> {
        if k >= self.users() {
            return Err(Error::InvalidParameter(format!(
                "user index {k} out of range for {} users",
                self.users()
            )));
        }
        Ok(())
    }

    /// Noise plus interference seen by user `k`: `sigma2_k + sum_j eta_kj p_j`.
    /// Rate, gradient and DC split all share this one quantity.
    pub(crate) fn interference(&self, p: &[f64], k: usize) -> f64 {
        self.sigma2[k] + self.weighted_sum(p, k, None)
    }

    fn weighted_sum(&self, p: &[f64], k: usize, skip: Option<usize>) -> f64 {
        self.eta_row(k)
            .iter()
            .zip(p)
            .enumerate()
            .filter(|(j, _)| Some(*j) != skip)
            .map(|(_, (e, pj))| e * pj)
            .sum()
    }

    pub(crate) fn rate_with(&self, p: &[f64], k: usize, interference: f64) -> f64 {
        (self.theta[k] * p[k] / interference).ln_1p()
    }

    pub(crate) fn rate_unchecked(&self, p: &[f64], k: usize) -> f64 {
        self.rate_with(p, k, self.interference(p, k))
    }

    /// Writes the gradient of `r_k` into `out`.
    pub(crate) fn grad_rate_into(&self, p: &[f64], k: usize, interference: f64, out: &mut [f64]) {
        let scale = self.theta[k] / (self.theta[k] * p[k] + interference);
        let cross = p[k] / interference;
        for (i, (o, e)) in out.iter_mut().zip(self.eta_row(k)).enumerate() {
            let unit = if i == k { 1.0 } else { 0.0 };
            *o = scale * (unit - e * cross);
        }
    }

    /// Rate of user `k` in nats.
    pub fn rate(&self, p: &[f64], k: usize) -> Result<f64> {
        self.check_point(p)?;
        self.check_user(k)?;
        Ok(self.rate_unchecked(p, k))
    }

    pub fn rates(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_point(p)?;
        Ok((0..self.users()).map(|k| self.rate_unchecked(p, k)).collect())
    }

    /// Gradient of `r_k` with respect to the full power vector.
    pub fn grad_rate(&self, p: &[f64], k: usize) -> Result<Vec<f64>> {
        self.check_point(p)?;
        self.check_user(k)?;
        let mut out = vec![0.0; self.users()];
        self.grad_rate_into(p, k, self.interference(p, k), &mut out);
        Ok(out)
    }

    /// `r_k = ln(sigma2 + theta p_k + sum eta p) - ln(sigma2 + sum eta p)`.
    pub fn rate_dc_split(&self, p: &[f64], k: usize) -> Result<DcSplit> {
        self.check_point(p)?;
        self.check_user(k)?;
        let i = self.interference(p, k);
        Ok(DcSplit {
            plus: (i + self.theta[k] * p[k]).ln(),
            minus: i.ln(),
        })
    }

    /// The split with `ln sigma2_k` removed from both parts, so that both
    /// vanish at `p = 0` and are nonnegative on the orthant.
    pub fn rate_dc_split_normalized(&self, p: &[f64], k: usize) -> Result<DcSplit> {
        self.check_point(p)?;
        self.check_user(k)?;
        Ok(self.normalized_split_unchecked(p, k))
    }

    /// Normalized split with the self-interference term kept on the
    /// increasing side: `minus = ln(1 + sum_{j != k} eta_kj p_j / sigma2_k)`
    /// and `plus = r_k + minus`. The rate grows with `p_k` and `r_k + minus`
    /// grows with every other power, so both parts stay nondecreasing, while
    /// `minus` is never larger than in [`Self::rate_dc_split_normalized`].
    pub fn rate_dc_split_cross(&self, p: &[f64], k: usize) -> Result<DcSplit> {
        self.check_point(p)?;
        self.check_user(k)?;
        Ok(self.cross_split_unchecked(p, k))
    }

    pub(crate) fn cross_split_unchecked(&self, p: &[f64], k: usize) -> DcSplit {
        let s = self.sigma2[k];
        let i = self.interference(p, k);
        let cross = self.weighted_sum(p, k, Some(k));
        let minus = (cross / s).ln_1p();
        DcSplit {
            plus: self.rate_with(p, k, i) + minus,
            minus,
        }
    }

    pub(crate) fn normalized_split_unchecked(&self, p: &[f64], k: usize) -> DcSplit {
        let s = self.sigma2[k];
        let extra = self.weighted_sum(p, k, None);
        DcSplit {
            plus: ((extra + self.theta[k] * p[k]) / s).ln_1p(),
            minus: (extra / s).ln_1p(),
        }
    }
}

/// Amplifier inefficiencies and static circuit powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerModel {
    phi: Vec<f64>,
    pc: Vec<f64>,
}

impl PowerModel {
    pub fn new(phi: Vec<f64>, pc: Vec<f64>) -> Result<Self> {
        check_len("pc", phi.len(), pc.len())?;
        if phi.iter().chain(&pc).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter("phi and pc must be positive".into()));
        }
        Ok(Self { phi, pc })
    }

    pub fn uniform(k: usize, phi: f64, pc: f64) -> Result<Self> {
        Self::new(vec![phi; k], vec![pc; k])
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn pc(&self) -> &[f64] {
        &self.pc
    }

    /// Consumed power `phi_k p_k + pc_k` of user `k`.
    pub fn consumed(&self, p: &[f64], k: usize) -> f64 {
        self.phi[k] * p[k] + self.pc[k]
    }
}

/// Everything that defines one WSEE power control instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemFile", into = "ProblemFile")]
pub struct WseeProblem {
    net: InterferenceNetwork,
    pm: PowerModel,
    w: Vec<f64>,
    pmax: Vec<f64>,
}

impl WseeProblem {
    pub fn new(net: InterferenceNetwork, pm: PowerModel, w: Vec<f64>, pmax: Vec<f64>) -> Result<Self> {
        let k = net.users();
        check_len("phi", k, pm.phi.len())?;
        check_len("weights", k, w.len())?;
        check_len("pmax", k, pmax.len())?;
        if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter("weights must be positive".into()));
        }
        if pmax.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter("power budgets must be positive".into()));
        }
        Ok(Self { net, pm, w, pmax })
    }

    pub fn users(&self) -> usize {
        self.net.users()
    }

    pub fn network(&self) -> &InterferenceNetwork {
        &self.net
    }

    pub fn power_model(&self) -> &PowerModel {
        &self.pm
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn pmax(&self) -> &[f64] {
        &self.pmax
    }

    /// Returns a copy with every weight multiplied by `factor`.
    pub fn with_scaled_weights(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.net.clone(),
            self.pm.clone(),
            self.w.iter().map(|w| w * factor).collect(),
            self.pmax.clone(),
        )
    }

    pub fn check_dims(&self, p: &[f64]) -> Result<()> {
        check_len("power vector", self.users(), p.len())
    }

    pub fn is_feasible(&self, p: &[f64]) -> bool {
        p.len() == self.users() && p.iter().zip(&self.pmax).all(|(x, m)| *x >= 0.0 && x <= m)
    }

    pub fn check_feasible(&self, p: &[f64]) -> Result<()> {
        self.check_dims(p)?;
        if !self.is_feasible(p) {
            return Err(Error::Infeasible(format!("{p:?} not in [0, {:?}]", self.pmax)));
        }
        Ok(())
    }

    /// Euclidean projection onto the box `[0, pmax]`.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(&self.pmax).map(|(x, m)| x.clamp(0.0, *m)).collect()
    }

    pub(crate) fn wsee_unchecked(&self, p: &[f64]) -> f64 {
        (0..self.users())
            .map(|k| self.w[k] * self.net.rate_unchecked(p, k) / self.pm.consumed(p, k))
            .sum()
    }

    /// Weighted sum energy efficiency in nats per Joule.
    pub fn wsee(&self, p: &[f64]) -> Result<f64> {
        self.check_dims(p)?;
        Ok(self.wsee_unchecked(p))
    }

    pub(crate) fn grad_wsee_unchecked(&self, p: &[f64]) -> Vec<f64> {
        let n = self.users();
        let mut grad = vec![0.0; n];
        let mut gr = vec![0.0; n];
        for k in 0..n {
            let interference = self.net.interference(p, k);
            let r = self.net.rate_with(p, k, interference);
            let den = self.pm.consumed(p, k);
            self.net.grad_rate_into(p, k, interference, &mut gr);
            let scale = self.w[k] / den;
            for (g, d) in grad.iter_mut().zip(&gr) {
                *g += scale * d;
            }
            grad[k] -= self.w[k] * self.pm.phi[k] * r / (den * den);
        }
        grad
    }

    pub fn grad_wsee(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(p)?;
        Ok(self.grad_wsee_unchecked(p))
    }

    /// Projected-gradient residual `||p - proj(p + grad f(p))||_inf`; zero
    /// exactly at stationary points of the box-constrained problem.
    pub fn stationarity_residual(&self, p: &[f64]) -> Result<f64> {
        self.check_dims(p)?;
        let g = self.grad_wsee_unchecked(p);
        Ok(p.iter()
            .zip(&g)
            .zip(&self.pmax)
            .map(|((x, gi), m)| (x - (x + gi).clamp(0.0, *m)).abs())
            .fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// On-disk layout of a problem instance. All values are linear scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(rename = "K")]
    pub k: usize,
    pub theta: Vec<f64>,
    pub eta: Vec<Vec<f64>>,
    pub sigma2: Vec<f64>,
    pub w: Vec<f64>,
    pub phi: Vec<f64>,
    pub pc: Vec<f64>,
    pub pmax: Vec<f64>,
}

impl TryFrom<ProblemFile> for WseeProblem {
    type Error = Error;

    fn try_from(f: ProblemFile) -> Result<Self> {
        check_len("theta", f.k, f.theta.len())?;
        let net = InterferenceNetwork::new(f.theta, f.eta, f.sigma2)?;
        let pm = PowerModel::new(f.phi, f.pc)?;
        WseeProblem::new(net, pm, f.w, f.pmax)
    }
}

impl From<WseeProblem> for ProblemFile {
    fn from(p: WseeProblem) -> Self {
        ProblemFile {
            k: p.users(),
            eta: p.net.eta_rows(),
            theta: p.net.theta,
            sigma2: p.net.sigma2,
            w: p.w,
            phi: p.pm.phi,
            pc: p.pm.pc,
            pmax: p.pmax,
        }
    }
}
