//! Single-ratio form of the WSEE and its monotonic lift.
//!
//! Over a common denominator the objective is `N(p) / D(p)` with
//!
//! ```text
//! N(p) = sum_k w_k r_k(p) prod_{i != k} (phi_i p_i + pc_i)
//! D(p) = prod_k (phi_k p_k + pc_k)
//! ```
//!
//! and the parametric function `F(p; lambda) = N(p) - lambda D(p)` splits
//! into a difference `A(p) - B(p)` of nondecreasing functions. Maximizing
//! `A(p) + t` over `{(p, t) : p <= pmax, 0 <= t <= B(pmax) - B(p)}` is then a
//! monotonic problem over a normal set whose maximum equals
//! `max F + B(pmax)`.

use crate::error::{Error, Result};
use crate::network::WseeProblem;
use crate::global::polyblock::NormalSet;

/// Numerator and denominator of the single-ratio form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioParts {
    pub numerator: f64,
    pub denominator: f64,
}

impl RatioParts {
    pub fn ratio(&self) -> f64 {
        self.numerator / self.denominator
    }
}

fn consumed(prob: &WseeProblem, p: &[f64]) -> Vec<f64> {
    (0..prob.users()).map(|k| prob.power_model().consumed(p, k)).collect()
}

fn product_except(values: &[f64], k: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, v)| v)
        .product()
}

pub(crate) fn ratio_parts_unchecked(prob: &WseeProblem, p: &[f64]) -> RatioParts {
    let den = consumed(prob, p);
    let net = prob.network();
    let numerator = (0..prob.users())
        .map(|k| prob.weights()[k] * net.rate_unchecked(p, k) * product_except(&den, k))
        .sum();
    RatioParts {
        numerator,
        denominator: den.iter().product(),
    }
}

pub fn ratio_parts(prob: &WseeProblem, p: &[f64]) -> Result<RatioParts> {
    prob.check_dims(p)?;
    Ok(ratio_parts_unchecked(prob, p))
}

/// `F(p; lambda) = N(p) - lambda D(p)`.
pub fn parametric_f(prob: &WseeProblem, p: &[f64], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let parts = ratio_parts(prob, p)?;
    Ok(parts.numerator - lambda * parts.denominator)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    Ok(())
}

/// The increasing parts of `F(.; lambda)`, built on the noise-normalized
/// cross-interference rate split so that both vanish at the origin.
#[derive(Debug, Clone)]
pub struct ParametricSplit<'a> {
    prob: &'a WseeProblem,
    lambda: f64,
}

/// Values of `A(p)` and `B(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitValue {
    pub increasing: f64,
    pub decreasing: f64,
}

impl SplitValue {
    pub fn difference(&self) -> f64 {
        self.increasing - self.decreasing
    }
}

pub fn dc_split_f(prob: &WseeProblem, lambda: f64) -> Result<ParametricSplit<'_>> {
    check_lambda(lambda)?;
    Ok(ParametricSplit { prob, lambda })
}

impl<'a> ParametricSplit<'a> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn problem(&self) -> &'a WseeProblem {
        self.prob
    }

    pub(crate) fn eval_unchecked(&self, p: &[f64]) -> SplitValue {
        let prob = self.prob;
        let den = consumed(prob, p);
        let net = prob.network();
        let mut a = 0.0;
        let mut b = self.lambda * den.iter().product::<f64>();
        for k in 0..prob.users() {
            let s = net.cross_split_unchecked(p, k);
            let weight = prob.weights()[k] * product_except(&den, k);
            a += weight * s.plus;
            b += weight * s.minus;
        }
        SplitValue {
            increasing: a,
            decreasing: b,
        }
    }

    pub fn eval(&self, p: &[f64]) -> Result<SplitValue> {
        self.prob.check_dims(p)?;
        Ok(self.eval_unchecked(p))
    }

    /// The lifted problem `max A(p) + t` over the normal set
    /// `{(p, t) : 0 <= p <= pmax, 0 <= t <= B(pmax) - B(p)}`.
    pub fn lift(&self) -> LiftedProblem<'a> {
        let top = self.eval_unchecked(self.prob.pmax()).decreasing;
        LiftedProblem {
            split: self.clone(),
            b_top: top,
        }
    }
}

/// A point `(p, t)` of the lifted space.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    pub p: Vec<f64>,
    pub t: f64,
}

impl LiftedPoint {
    /// Flattens to `[p_1, .., p_K, t]`.
    pub fn to_coords(&self) -> Vec<f64> {
        let mut z = self.p.clone();
        z.push(self.t);
        z
    }

    pub fn from_coords(z: &[f64]) -> Self {
        let (t, p) = z.split_last().expect("lifted coordinates are never empty");
        Self { p: p.to_vec(), t: *t }
    }
}

#[derive(Debug, Clone)]
pub struct LiftedProblem<'a> {
    split: ParametricSplit<'a>,
    b_top: f64,
}

impl LiftedProblem<'_> {
    pub fn dim(&self) -> usize {
        self.split.prob.users() + 1
    }

    /// `B(pmax)`; the lifted maximum minus this is `max F`.
    pub fn offset(&self) -> f64 {
        self.b_top
    }

    /// `(pmax, B(pmax) - B(0))`.
    pub fn upper_corner(&self) -> Vec<f64> {
        let origin = vec![0.0; self.split.prob.users()];
        let slack = self.b_top - self.split.eval_unchecked(&origin).decreasing;
        let mut z = self.split.prob.pmax().to_vec();
        z.push(slack.max(0.0));
        z
    }

    /// Objective `A(p) + t` on flattened coordinates.
    pub fn objective(&self, z: &[f64]) -> f64 {
        let (t, p) = z.split_last().expect("lifted coordinates are never empty");
        self.split.eval_unchecked(p).increasing + t
    }

    /// Membership test on flattened coordinates.
    pub fn contains(&self, z: &[f64]) -> bool {
        let (t, p) = z.split_last().expect("lifted coordinates are never empty");
        *t >= 0.0 && self.split.prob.is_feasible(p) && self.boundary_level(z) <= 0.0
    }

    /// `t + B(p) - B(pmax)`, nonpositive exactly on the feasible part of the box.
    fn boundary_level(&self, z: &[f64]) -> f64 {
        let (t, p) = z.split_last().expect("lifted coordinates are never empty");
        t + self.split.eval_unchecked(p).decreasing - self.b_top
    }

    /// The feasible point `(p, B(pmax) - B(p))` on the upper boundary above `p`.
    pub fn boundary_point(&self, p: &[f64]) -> Vec<f64> {
        let mut z = p.to_vec();
        z.push((self.b_top - self.split.eval_unchecked(p).decreasing).max(0.0));
        // Rounding can leave the point a hair outside; pull t back in.
        let last = z.len() - 1;
        for _ in 0..8 {
            let over = self.boundary_level(&z);
            if over <= 0.0 || z[last] == 0.0 {
                break;
            }
            z[last] = (z[last] - 2.0 * over.max(f64::EPSILON * self.b_top.abs())).max(0.0);
        }
        z
    }
}

/// Whether `z` lies in the lifted feasible set for `F(.; lambda)`.
impl NormalSet for LiftedProblem<'_> {
    fn contains(&self, z: &[f64]) -> bool {
        LiftedProblem::contains(self, z)
    }

    fn level(&self, z: &[f64]) -> Option<f64> {
        let (t, p) = z.split_last()?;
        (*t >= 0.0 && self.split.prob.is_feasible(p)).then(|| self.boundary_level(z))
    }
}

pub fn lifted_feasible(prob: &WseeProblem, lambda: f64, z: &LiftedPoint) -> Result<bool> {
    prob.check_dims(&z.p)?;
    Ok(dc_split_f(prob, lambda)?.lift().contains(&z.to_coords()))
}
