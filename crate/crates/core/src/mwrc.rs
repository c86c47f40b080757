//! Amplify-and-forward multi-way relay channel.
//!
//! `K` single-antenna users exchange messages circularly through one relay:
//! user `k` sends to user `k + 1` and the last user sends to the first. With
//! the relay at full power `P0` and interference treated as noise, the rate
//! of stream `k`, decoded by user `k + 1`, is
//!
//! ```text
//! ln(1 + |h_k|^2 p_k / (N0 + sum_{i != k, k+1} |h_i|^2 p_i + G^-1 (N0 + sum_i |h_i|^2 p_i)))
//! ```
//!
//! with `G = |g_{k+1}|^2 P0 / N_{k+1}`. That is an SINR rate of the generic
//! interference-network form, which [`MwrcChannel::to_interference_network`]
//! makes explicit.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::network::{InterferenceNetwork, PowerModel, WseeProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct MwrcChannel {
    /// Uplink channels, user `k` to relay.
    pub h: Vec<Complex64>,
    /// Downlink channels, relay to user `k`.
    pub g: Vec<Complex64>,
    pub n0: f64,
    pub nk: Vec<f64>,
    pub p0: f64,
}

/// Relay power and noise levels of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub p0: f64,
    pub n0: f64,
    /// Noise power at every user.
    pub nk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelGenConfig {
    pub seed: u64,
    pub users: usize,
    /// Downlink is the conjugate of the uplink.
    pub reciprocal: bool,
}

impl ChannelGenConfig {
    pub fn new(seed: u64, users: usize) -> Self {
        Self {
            seed,
            users,
            reciprocal: true,
        }
    }
}

impl MwrcChannel {
    pub fn new(h: Vec<Complex64>, g: Vec<Complex64>, n0: f64, nk: Vec<f64>, p0: f64) -> Result<Self> {
        let k = h.len();
        if k < 2 {
            return Err(Error::InvalidParameter("a multi-way relay channel needs at least two users".into()));
        }
        check_len("downlink channels", k, g.len())?;
        check_len("user noise powers", k, nk.len())?;
        if !(n0 > 0.0 && p0 > 0.0) || nk.iter().any(|n| !(*n > 0.0)) {
            return Err(Error::InvalidParameter("noise and relay powers must be positive".into()));
        }
        Ok(Self { h, g, n0, nk, p0 })
    }

    pub fn users(&self) -> usize {
        self.h.len()
    }

    /// Index of the user that decodes stream `k`.
    pub fn receiver(&self, k: usize) -> usize {
        (k + 1) % self.users()
    }

    /// `|g_k|^2 P0 / N_k`.
    pub fn effective_gain(&self, k: usize) -> f64 {
        self.g[k].norm_sqr() * self.p0 / self.nk[k]
    }

    /// Maps the channel onto SINR coefficients with the relay at full power.
    pub fn to_interference_network(&self) -> Result<InterferenceNetwork> {
        let n = self.users();
        let gain: Vec<f64> = self.h.iter().map(|h| h.norm_sqr()).collect();
        let mut eta = vec![vec![0.0; n]; n];
        let mut sigma2 = vec![0.0; n];
        for k in 0..n {
            let rx = self.receiver(k);
            let inv = 1.0 / self.effective_gain(rx);
            sigma2[k] = self.n0 * (1.0 + inv);
            for i in 0..n {
                eta[k][i] = if i == k || i == rx {
                    gain[i] * inv
                } else {
                    gain[i] * (1.0 + inv)
                };
            }
        }
        InterferenceNetwork::new(gain, eta, sigma2)
    }

    /// Rate of stream `k` evaluated straight from the relay-channel expression.
    pub fn direct_rate(&self, p: &[f64], k: usize) -> Result<f64> {
        check_len("power vector", self.users(), p.len())?;
        let rx = self.receiver(k);
        let gain = |i: usize| self.h[i].norm_sqr();
        let others: f64 = (0..self.users()).filter(|&i| i != k && i != rx).map(|i| gain(i) * p[i]).sum();
        let total: f64 = (0..self.users()).map(|i| gain(i) * p[i]).sum();
        let noise = self.n0 + others + (self.n0 + total) / self.effective_gain(rx);
        Ok((gain(k) * p[k] / noise).ln_1p())
    }

    /// Builds a WSEE instance on this channel.
    pub fn to_problem(&self, pm: PowerModel, w: Vec<f64>, pmax: Vec<f64>) -> Result<WseeProblem> {
        WseeProblem::new(self.to_interference_network()?, pm, w, pmax)
    }

    pub fn to_dump(&self) -> ChannelDump {
        ChannelDump {
            k: self.users(),
            h_re: self.h.iter().map(|c| c.re).collect(),
            h_im: self.h.iter().map(|c| c.im).collect(),
            g_re: self.g.iter().map(|c| c.re).collect(),
            g_im: self.g.iter().map(|c| c.im).collect(),
            n0: self.n0,
            nk: self.nk.clone(),
            p0: self.p0,
        }
    }

    pub fn from_dump(d: &ChannelDump) -> Result<Self> {
        for (what, v) in [("h_re", &d.h_re), ("h_im", &d.h_im), ("g_re", &d.g_re), ("g_im", &d.g_im)] {
            check_len(what, d.k, v.len())?;
        }
        let h = d.h_re.iter().zip(&d.h_im).map(|(r, i)| Complex64::new(*r, *i)).collect();
        let g = d.g_re.iter().zip(&d.g_im).map(|(r, i)| Complex64::new(*r, *i)).collect();
        Self::new(h, g, d.n0, d.nk.clone(), d.p0)
    }

    /// Writes the raw channel coefficients as JSON.
    pub fn save_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_dump())?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Raw `(h, g)` audit record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDump {
    #[serde(rename = "K")]
    pub k: usize,
    pub h_re: Vec<f64>,
    pub h_im: Vec<f64>,
    pub g_re: Vec<f64>,
    pub g_im: Vec<f64>,
    pub n0: f64,
    pub nk: Vec<f64>,
    pub p0: f64,
}

/// One draw from the unit-variance circularly symmetric complex Gaussian.
fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Deterministic per-realization generator: ChaCha8 keyed by `seed`, with
/// the realization index selecting the stream. Realizations are therefore
/// independent of the order in which they are generated.
pub fn realization_rng(seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    rng
}

/// Draws i.i.d. `CN(0, 1)` uplink channels for realization `realization`.
pub fn generate_channels(cfg: &ChannelGenConfig, scenario: &Scenario, realization: u64) -> Result<MwrcChannel> {
    let mut rng = realization_rng(cfg.seed, realization);
    let h: Vec<Complex64> = (0..cfg.users).map(|_| complex_gaussian(&mut rng)).collect();
    let g = if cfg.reciprocal {
        h.iter().map(Complex64::conj).collect()
    } else {
        (0..cfg.users).map(|_| complex_gaussian(&mut rng)).collect()
    };
    MwrcChannel::new(h, g, scenario.n0, vec![scenario.nk; cfg.users], scenario.p0)
}
