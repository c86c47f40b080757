//! Shared instance generators and independent reference formulas.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wsee::bench::{sweep_channel, sweep_problem, SweepConfig};
use wsee::{InterferenceNetwork, PowerModel, WseeProblem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Raw coefficients of a random instance, kept so that tests can evaluate
/// the model without going through the crate.
#[derive(Debug, Clone)]
pub struct Coeffs {
    pub theta: Vec<f64>,
    pub eta: Vec<Vec<f64>>,
    pub sigma2: Vec<f64>,
    pub phi: Vec<f64>,
    pub pc: Vec<f64>,
    pub w: Vec<f64>,
    pub pmax: Vec<f64>,
}

impl Coeffs {
    pub fn random(rng: &mut impl Rng, k: usize) -> Self {
        let theta = (0..k).map(|_| log_uniform(rng, 0.05, 5.0)).collect();
        let eta = (0..k)
            .map(|_| {
                (0..k)
                    .map(|_| if rng.gen_bool(0.2) { 0.0 } else { log_uniform(rng, 1e-3, 1.0) })
                    .collect()
            })
            .collect();
        let sigma2 = (0..k).map(|_| log_uniform(rng, 1e-2, 1.0)).collect();
        let phi = (0..k).map(|_| rng.gen_range(1.0..4.0)).collect();
        let pc = (0..k).map(|_| rng.gen_range(0.5..2.0)).collect();
        let w = (0..k).map(|_| rng.gen_range(0.5..2.0)).collect();
        let pmax = (0..k).map(|_| log_uniform(rng, 0.1, 5.0)).collect();
        Self {
            theta,
            eta,
            sigma2,
            phi,
            pc,
            w,
            pmax,
        }
    }

    pub fn users(&self) -> usize {
        self.theta.len()
    }

    pub fn network(&self) -> InterferenceNetwork {
        InterferenceNetwork::new(self.theta.clone(), self.eta.clone(), self.sigma2.clone()).unwrap()
    }

    pub fn problem(&self) -> WseeProblem {
        WseeProblem::new(
            self.network(),
            PowerModel::new(self.phi.clone(), self.pc.clone()).unwrap(),
            self.w.clone(),
            self.pmax.clone(),
        )
        .unwrap()
    }

    /// SINR of user `k`, written out term by term.
    pub fn sinr(&self, p: &[f64], k: usize) -> f64 {
        let mut denom = self.sigma2[k];
        for j in 0..self.users() {
            denom += self.eta[k][j] * p[j];
        }
        self.theta[k] * p[k] / denom
    }

    pub fn rate(&self, p: &[f64], k: usize) -> f64 {
        (1.0 + self.sinr(p, k)).ln()
    }

    pub fn wsee(&self, p: &[f64]) -> f64 {
        (0..self.users())
            .map(|k| self.w[k] * self.rate(p, k) / (self.phi[k] * p[k] + self.pc[k]))
            .sum()
    }

    pub fn interior_point(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.pmax.iter().map(|m| m * rng.gen_range(0.05..0.95)).collect()
    }
}

/// Central difference of `f` along coordinate `i` with step `1e-6 (1 + |p_i|)`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, p: &[f64], i: usize) -> f64 {
    let h = 1e-6 * (1.0 + p[i].abs());
    let mut hi = p.to_vec();
    let mut lo = p.to_vec();
    hi[i] += h;
    lo[i] -= h;
    (f(&hi) - f(&lo)) / (hi[i] - lo[i])
}

pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, p: &[f64]) -> Vec<f64> {
    (0..p.len()).map(|i| central_difference(&f, p, i)).collect()
}

/// `max_i |a_i - b_i| / max(max_i |b_i|, floor)`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let scale = b.iter().fold(floor, |m, x| m.max(x.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Relay-channel instance of the default sweep scenario.
pub fn relay_problem(users: usize, realization: usize, pmax_db: f64) -> WseeProblem {
    let cfg = SweepConfig {
        users,
        ..SweepConfig::default()
    };
    let ch = sweep_channel(&cfg, realization).unwrap();
    sweep_problem(&cfg, &ch, pmax_db).unwrap()
}

/// Exhaustive search of `f` over an `n x n` grid of `[0, pmax]`, returning
/// the best point, its value and a bound on how far the true maximum can
/// exceed it.
pub fn grid_search_2d(prob: &WseeProblem, n: usize) -> (Vec<f64>, f64, f64) {
    assert_eq!(prob.users(), 2);
    let pm = prob.pmax();
    let h = [pm[0] / (n - 1) as f64, pm[1] / (n - 1) as f64];
    let mut best = (vec![0.0, 0.0], f64::NEG_INFINITY);
    let mut slope = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let p = [i as f64 * h[0], j as f64 * h[1]];
            let v = prob.wsee(&p).unwrap();
            if v > best.1 {
                best = (p.to_vec(), v);
            }
            if i % 10 == 0 && j % 10 == 0 {
                let g = prob.grad_wsee(&p).unwrap();
                slope = slope.max(g[0].abs() * h[0] + g[1].abs() * h[1]);
            }
        }
    }
    // The maximizer is within half a cell of a grid point in each
    // coordinate; the sampled slope is doubled to cover unsampled cells.
    (best.0, best.1, slope)
}
