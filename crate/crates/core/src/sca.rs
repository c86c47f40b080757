//! Successive convex approximation for WSEE maximization.
//!
//! Each iteration maximizes a separable concave surrogate that keeps user
//! `k`'s own rate term concave in `p_k`, freezes its denominator at the
//! current iterate and linearizes every other term. The surrogate maximizer
//! (the best response) gives an ascent direction, and an Armijo backtracking
//! search picks the step along it.

use crate::error::{Error, Result};
use crate::network::WseeProblem;

/// Largest backtracking exponent tried by [`armijo_step`].
pub const MAX_BACKTRACKS: u32 = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaConfig {
    /// Sufficient-ascent constant, in (0, 1).
    pub alpha: f64,
    /// Backtracking factor, in (0, 1).
    pub beta: f64,
    pub max_iters: usize,
    /// Bound on the objective gain of the last step.
    pub tol_obj: f64,
    /// Bound on the sup-norm of the last move `gamma (B p - p)`.
    pub tol_step: f64,
    /// Bound on the projected-gradient residual at the final iterate.
    pub tol_stationarity: f64,
    /// Starting point; `None` starts at full power.
    pub p0: Option<Vec<f64>>,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            beta: 0.5,
            max_iters: 1000,
            tol_obj: 1e-8,
            tol_step: 1e-7,
            tol_stationarity: 1e-6,
            p0: None,
        }
    }
}

impl ScaConfig {
    pub fn with_start(mut self, p0: Vec<f64>) -> Self {
        self.p0 = Some(p0);
        self
    }

    pub fn validate(&self, prob: &WseeProblem) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.tol_obj >= 0.0 && self.tol_step >= 0.0 && self.tol_stationarity >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be nonnegative".into()));
        }
        if let Some(p0) = &self.p0 {
            prob.check_feasible(p0)?;
        }
        Ok(())
    }
}

/// Coefficients of user `k`'s surrogate
/// `a ln(1 + theta p / (eta_self p + d)) + b p + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub theta: f64,
    pub eta_self: f64,
}

impl SurrogateCoeffs {
    pub fn value(&self, p: f64) -> f64 {
        self.a * (self.theta * p / (self.eta_self * p + self.d)).ln_1p() + self.b * p + self.c
    }

    pub fn derivative(&self, p: f64) -> f64 {
        let lo = self.eta_self * p + self.d;
        let hi = (self.theta + self.eta_self) * p + self.d;
        self.a * self.theta * self.d / (lo * hi) + self.b
    }
}

/// Builds the surrogate of user `k` around `p_t`.
pub fn surrogate_coeffs(prob: &WseeProblem, p_t: &[f64], k: usize) -> Result<SurrogateCoeffs> {
    prob.check_dims(p_t)?;
    if k >= prob.users() {
        return Err(Error::InvalidParameter(format!("user index {k} out of range")));
    }
    Ok(Linearization::at(prob, p_t).coeffs(prob, p_t, k))
}

/// Per-iterate quantities shared by all users' surrogates.
struct Linearization {
    interference: Vec<f64>,
    rates: Vec<f64>,
    consumed: Vec<f64>,
}

impl Linearization {
    fn at(prob: &WseeProblem, p: &[f64]) -> Self {
        let net = prob.network();
        let interference: Vec<f64> = (0..prob.users()).map(|k| net.interference(p, k)).collect();
        let rates = interference.iter().enumerate().map(|(k, i)| net.rate_with(p, k, *i)).collect();
        let consumed = (0..prob.users()).map(|k| prob.power_model().consumed(p, k)).collect();
        Self {
            interference,
            rates,
            consumed,
        }
    }

    fn coeffs(&self, prob: &WseeProblem, p: &[f64], k: usize) -> SurrogateCoeffs {
        let net = prob.network();
        let w = prob.weights();
        let phi = prob.power_model().phi();
        let den = self.consumed[k];

        let mut b = -w[k] * phi[k] * self.rates[k] / (den * den);
        for i in (0..prob.users()).filter(|&i| i != k) {
            // d r_i / d p_k for i != k
            let ii = self.interference[i];
            let th = net.theta()[i];
            let dri = -th / (th * p[i] + ii) * net.eta(i, k) * p[i] / ii;
            b += w[i] * dri / self.consumed[i];
        }

        let eta_self = net.eta(k, k);
        let d = net.sigma2()[k]
            + (0..prob.users())
                .filter(|&j| j != k)
                .map(|j| net.eta(k, j) * p[j])
                .sum::<f64>();
        SurrogateCoeffs {
            a: w[k] / den,
            b,
            c: -b * p[k],
            d,
            theta: net.theta()[k],
            eta_self,
        }
    }
}

/// Maximizes a surrogate over `[0, pmax]` in closed form.
///
/// The surrogate derivative is `a theta d / ((eta p + d)((theta + eta) p + d)) + b`,
/// strictly decreasing in `p`. For `b < 0` its zero solves a quadratic; the
/// candidates are the root when it lies in the box plus both endpoints, and
/// the best value wins with ties going to the smaller power.
pub fn solve_scalar_subproblem(sc: &SurrogateCoeffs, pmax: f64) -> f64 {
    if sc.b >= 0.0 {
        return pmax;
    }
    let eta = sc.eta_self;
    let th = sc.theta;
    let d = sc.d;
    // (eta p + d)((theta + eta) p + d) = a theta d / (-b)
    let qa = eta * (th + eta);
    let qb = d * (2.0 * eta + th);
    let qc = d * d - sc.a * th * d / (-sc.b);
    let disc = qb * qb - 4.0 * qa * qc;

    let mut candidates = [0.0, f64::NAN, pmax];
    if disc >= 0.0 {
        // qb > 0, so the larger root in cancellation-free form is
        // -2 qc / (qb + sqrt(disc)); this also covers qa == 0.
        let root = -2.0 * qc / (qb + disc.sqrt());
        if root > 0.0 && root < pmax {
            candidates[1] = root;
        }
    }

    let mut best = 0.0;
    let mut best_val = sc.value(0.0);
    for &p in candidates.iter().skip(1).filter(|p| !p.is_nan()) {
        let v = sc.value(p);
        if v > best_val {
            best = p;
            best_val = v;
        }
    }
    best
}

/// Best response: the componentwise surrogate maximizer around `p_t`.
pub fn best_response(prob: &WseeProblem, p_t: &[f64]) -> Result<Vec<f64>> {
    prob.check_dims(p_t)?;
    Ok(best_response_unchecked(prob, p_t))
}

fn best_response_unchecked(prob: &WseeProblem, p_t: &[f64]) -> Vec<f64> {
    let lin = Linearization::at(prob, p_t);
    (0..prob.users())
        .map(|k| solve_scalar_subproblem(&lin.coeffs(prob, p_t, k), prob.pmax()[k]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchStatus {
    Accepted,
    /// No step up to `beta^MAX_BACKTRACKS` passed; the last tried step is returned.
    CapReached,
    /// The directional derivative is negative; the returned step is zero.
    NotAscent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoStep {
    pub gamma: f64,
    pub backtracks: u32,
    pub status: LineSearchStatus,
}

fn step_point(prob: &WseeProblem, p: &[f64], direction: &[f64], gamma: f64) -> Vec<f64> {
    p.iter()
        .zip(direction)
        .zip(prob.pmax())
        .map(|((x, d), m)| (x + gamma * d).clamp(0.0, *m))
        .collect()
}

/// Armijo backtracking: the largest `beta^m` with
/// `f(p + beta^m dir) >= f(p) + alpha beta^m grad f(p)^T dir`.
pub fn armijo_step(prob: &WseeProblem, p_t: &[f64], direction: &[f64], alpha: f64, beta: f64) -> Result<ArmijoStep> {
    prob.check_dims(p_t)?;
    prob.check_dims(direction)?;
    let f0 = prob.wsee_unchecked(p_t);
    let grad = prob.grad_wsee_unchecked(p_t);
    Ok(armijo_inner(prob, p_t, direction, f0, &grad, alpha, beta))
}

fn armijo_inner(
    prob: &WseeProblem,
    p: &[f64],
    direction: &[f64],
    f0: f64,
    grad: &[f64],
    alpha: f64,
    beta: f64,
) -> ArmijoStep {
    let slope: f64 = grad.iter().zip(direction).map(|(g, d)| g * d).sum();
    if slope < 0.0 {
        return ArmijoStep {
            gamma: 0.0,
            backtracks: 0,
            status: LineSearchStatus::NotAscent,
        };
    }
    let mut gamma = 1.0;
    for m in 0..=MAX_BACKTRACKS {
        let trial = prob.wsee_unchecked(&step_point(prob, p, direction, gamma));
        if trial >= f0 + alpha * gamma * slope {
            return ArmijoStep {
                gamma,
                backtracks: m,
                status: LineSearchStatus::Accepted,
            };
        }
        if m < MAX_BACKTRACKS {
            gamma *= beta;
        }
    }
    ArmijoStep {
        gamma,
        backtracks: MAX_BACKTRACKS,
        status: LineSearchStatus::CapReached,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    /// Objective after the update.
    pub objective: f64,
    pub step_size: f64,
    /// `||Bp - p||_inf` of the best-response direction.
    pub step_norm: f64,
    pub line_search: LineSearchStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaStatus {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaResult {
    pub p_star: Vec<f64>,
    pub f_star: f64,
    pub f_initial: f64,
    /// Number of best responses computed.
    pub iters: usize,
    pub trace: Vec<IterRecord>,
    pub status: ScaStatus,
    /// Projected-gradient residual at `p_star`.
    pub stationarity: f64,
}

/// Runs the SCA method until both the objective change and the best-response
/// step fall below their tolerances, or `max_iters` best responses were computed.
pub fn sca_solve(prob: &WseeProblem, cfg: &ScaConfig) -> Result<ScaResult> {
    cfg.validate(prob)?;
    let mut p = cfg.p0.clone().unwrap_or_else(|| prob.pmax().to_vec());
    let mut f = prob.wsee_unchecked(&p);
    let f_initial = f;
    let mut trace = Vec::new();
    let mut status = ScaStatus::MaxIters;
    let mut iters = 0;
    let mut last: Option<(f64, f64)> = None;

    loop {
        let grad = prob.grad_wsee_unchecked(&p);
        if let Some((delta, moved)) = last {
            if delta <= cfg.tol_obj
                && moved <= cfg.tol_step
                && projected_residual(prob, &p, &grad) <= cfg.tol_stationarity
            {
                status = ScaStatus::Converged;
                break;
            }
        }
        if iters == cfg.max_iters {
            break;
        }
        iters += 1;

        let br = best_response_unchecked(prob, &p);
        let dir: Vec<f64> = br.iter().zip(&p).map(|(b, x)| b - x).collect();
        let step_norm = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if step_norm == 0.0 {
            status = ScaStatus::Converged;
            break;
        }

        let ls = armijo_inner(prob, &p, &dir, f, &grad, cfg.alpha, cfg.beta);
        if ls.status == LineSearchStatus::NotAscent {
            // Only reachable through rounding at a stationary point.
            status = ScaStatus::Converged;
            break;
        }
        let next = step_point(prob, &p, &dir, ls.gamma);
        let f_next = prob.wsee_unchecked(&next);
        if f_next < f {
            status = ScaStatus::Converged;
            break;
        }
        let moved = next.iter().zip(&p).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        last = Some((f_next - f, moved));
        p = next;
        f = f_next;
        trace.push(IterRecord {
            objective: f,
            step_size: ls.gamma,
            step_norm,
            line_search: ls.status,
        });
    }

    let stationarity = prob.stationarity_residual(&p)?;
    Ok(ScaResult {
        p_star: p,
        f_star: f,
        f_initial,
        iters,
        trace,
        status,
        stationarity,
    })
}

fn projected_residual(prob: &WseeProblem, p: &[f64], grad: &[f64]) -> f64 {
    p.iter()
        .zip(grad)
        .zip(prob.pmax())
        .map(|((x, g), m)| (x - (x + g).clamp(0.0, *m)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{InterferenceNetwork, PowerModel};

    fn coeffs(a: f64, b: f64, theta: f64, eta: f64, d: f64) -> SurrogateCoeffs {
        SurrogateCoeffs {
            a,
            b,
            c: 0.0,
            d,
            theta,
            eta_self: eta,
        }
    }

    #[test]
    fn scalar_linear_root() {
        assert!((solve_scalar_subproblem(&coeffs(2.0, -1.0, 1.0, 0.0, 1.0), 10.0) - 1.0).abs() < 1e-15);
        assert_eq!(solve_scalar_subproblem(&coeffs(1.0, -1.0, 1.0, 0.0, 1.0), 10.0), 0.0);
    }

    #[test]
    fn scalar_nonnegative_slope_goes_to_budget() {
        assert_eq!(solve_scalar_subproblem(&coeffs(1.0, 0.0, 1.0, 0.5, 1.0), 3.0), 3.0);
        assert_eq!(solve_scalar_subproblem(&coeffs(1.0, 0.2, 1.0, 0.5, 1.0), 3.0), 3.0);
    }

    #[test]
    fn scalar_root_beyond_budget_clamps() {
        // root at 1.0, budget 0.5
        assert_eq!(solve_scalar_subproblem(&coeffs(2.0, -1.0, 1.0, 0.0, 1.0), 0.5), 0.5);
    }

    #[test]
    fn scalar_root_is_stationary() {
        let sc = coeffs(3.0, -0.4, 2.0, 0.7, 0.3);
        let p = solve_scalar_subproblem(&sc, 100.0);
        assert!(p > 0.0 && p < 100.0);
        assert!(sc.derivative(p).abs() < 1e-12);
    }

    fn one_user() -> WseeProblem {
        let net = InterferenceNetwork::new(vec![1.5], vec![vec![0.2]], vec![0.5]).unwrap();
        WseeProblem::new(net, PowerModel::uniform(1, 2.5, 1.0).unwrap(), vec![1.0], vec![4.0]).unwrap()
    }

    #[test]
    fn single_user_coefficients() {
        let prob = one_user();
        let pt = [1.3];
        let sc = surrogate_coeffs(&prob, &pt, 0).unwrap();
        let den = 2.5 * 1.3 + 1.0;
        let r = prob.network().rate(&pt, 0).unwrap();
        assert!((sc.a - 1.0 / den).abs() < 1e-15);
        assert!((sc.b + 2.5 * r / (den * den)).abs() < 1e-15);
        assert!((sc.d - 0.5).abs() < 1e-15);
        assert_eq!(sc.eta_self, 0.2);
    }

    #[test]
    fn coefficients_at_origin() {
        let net = InterferenceNetwork::new(
            vec![1.0, 2.0, 0.5],
            vec![vec![0.1, 0.3, 0.2], vec![0.4, 0.0, 0.6], vec![0.9, 0.8, 0.1]],
            vec![0.2, 0.3, 0.4],
        )
        .unwrap();
        let pm = PowerModel::new(vec![2.0, 3.0, 1.0], vec![1.0, 0.5, 2.0]).unwrap();
        let prob = WseeProblem::new(net, pm, vec![1.0, 2.0, 0.5], vec![1.0; 3]).unwrap();
        for k in 0..3 {
            let sc = surrogate_coeffs(&prob, &[0.0; 3], k).unwrap();
            assert_eq!(sc.a, prob.weights()[k] / prob.power_model().pc()[k]);
            assert_eq!(sc.b, 0.0);
            assert_eq!(sc.d, prob.network().sigma2()[k]);
        }
    }

    #[test]
    fn single_user_best_response_is_scalar_solution() {
        let prob = one_user();
        let pt = [2.0];
        let sc = surrogate_coeffs(&prob, &pt, 0).unwrap();
        assert_eq!(best_response(&prob, &pt).unwrap(), vec![solve_scalar_subproblem(&sc, 4.0)]);
    }

    #[test]
    fn armijo_zero_direction() {
        let prob = one_user();
        let s = armijo_step(&prob, &[1.0], &[0.0], 0.3, 0.5).unwrap();
        assert_eq!(s.gamma, 1.0);
        assert_eq!(s.backtracks, 0);
        assert_eq!(s.status, LineSearchStatus::Accepted);
    }

    #[test]
    fn armijo_rejects_descent_direction() {
        let prob = one_user();
        // at the origin the gradient is positive, so a negative direction descends
        let s = armijo_step(&prob, &[1e-3], &[-1e-3], 0.3, 0.5).unwrap();
        assert_eq!(s.status, LineSearchStatus::NotAscent);
        assert_eq!(s.gamma, 0.0);
    }

    #[test]
    fn invalid_config() {
        let prob = one_user();
        let mut cfg = ScaConfig::default();
        cfg.alpha = 1.0;
        assert!(sca_solve(&prob, &cfg).is_err());
        let cfg = ScaConfig::default().with_start(vec![5.0]);
        assert!(sca_solve(&prob, &cfg).is_err());
    }
}
