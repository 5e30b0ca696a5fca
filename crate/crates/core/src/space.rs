//! Finite probability spaces and the random-variable algebra built on them.
//!
//! Every atom carries strictly positive mass, so essential bounds are plain
//! minima and maxima over atom values and all functionals are exactly
//! computable.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Additive tolerance on the total mass of a space.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Tolerance for value comparisons in distribution algebra and cumulative probabilities.
pub const VALUE_TOL: f64 = 1e-12;
/// Tolerance for stop-loss and mean comparisons in order tests.
pub const ORDER_TOL: f64 = 1e-10;
/// Relative range below which a variable is treated as constant.
pub const CONSTANT_TOL: f64 = 1e-12;

/// Compensated (Neumaier) summation.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            carry += (sum - s) + t;
        } else {
            carry += (t - s) + sum;
        }
        sum = s;
    }
    sum + carry
}

/// A finite probability space: atoms `0..n` with strictly positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbSpace {
    probs: Vec<f64>,
}

impl ProbSpace {
    pub fn new(probs: Vec<f64>) -> Result<Arc<Self>> {
        if probs.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (index, &weight) in probs.iter().enumerate() {
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::NonPositiveWeight { index, weight });
            }
        }
        let sum = compensated_sum(probs.iter().copied());
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSumMismatch { sum });
        }
        Ok(Arc::new(Self { probs }))
    }

    /// Equal-weight space with `n` atoms.
    pub fn uniform(n: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_uniform(&self) -> bool {
        let first = self.probs[0];
        self.probs.iter().all(|&p| p == first)
    }
}

/// Validates `probs` and returns the space.
pub fn make_space(probs: &[f64]) -> Result<Arc<ProbSpace>> {
    ProbSpace::new(probs.to_vec())
}

/// A real value per atom of a [`ProbSpace`].
#[derive(Clone)]
pub struct RandomVariable {
    space: Arc<ProbSpace>,
    values: Vec<f64>,
    dist: OnceLock<Distribution>,
}

impl fmt::Debug for RandomVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandomVariable")
            .field("probs", &self.space.probs)
            .field("values", &self.values)
            .finish()
    }
}

impl RandomVariable {
    pub fn new(space: Arc<ProbSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self::from_parts(space, values))
    }

    fn from_parts(space: Arc<ProbSpace>, values: Vec<f64>) -> Self {
        Self {
            space,
            values,
            dist: OnceLock::new(),
        }
    }

    pub fn constant(space: Arc<ProbSpace>, c: f64) -> Self {
        let n = space.len();
        Self::from_parts(space, vec![c; n])
    }

    /// Variable on an equal-weight space.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let space = ProbSpace::uniform(values.len())?;
        Self::new(space, values)
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        self.space.probs()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_space(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space.probs == other.space.probs
    }

    /// `E[X]`.
    /// Clamped to the value range, so constants have exact means.
    pub fn expectation(&self) -> f64 {
        compensated_sum(self.values.iter().zip(self.probs()).map(|(x, p)| x * p))
            .clamp(self.ess_inf(), self.ess_sup())
    }

    pub fn ess_inf(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn ess_sup(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_constant(&self) -> bool {
        let range = self.ess_sup() - self.ess_inf();
        range <= CONSTANT_TOL * self.sup_norm().max(1.0)
    }

    /// `F_X`, aggregated and sorted. Computed once per variable.
    pub fn distribution(&self) -> &Distribution {
        self.dist
            .get_or_init(|| Distribution::from_atoms(&self.values, self.probs()))
    }

    /// `F_X^{-1}(p) = inf{x : F_X(x) >= p}` for `p` in `(0, 1]`.
    pub fn left_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(self.distribution().quantile(p))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(self.space.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, lambda: f64) -> Self {
        self.map(|v| lambda * v)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn negate(&self) -> Self {
        self.map(|v| -v)
    }

    /// `X - E[X]`.
    pub fn center(&self) -> Self {
        let mean = self.expectation();
        self.map(|v| v - mean)
    }

    /// Signed negative part `min(X, 0)`.
    pub fn negative_part(&self) -> Self {
        self.map(|v| v.min(0.0))
    }

    /// Positive part `max(X, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_space(other) {
            return Err(Error::SpaceMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_parts(self.space.clone(), values))
    }

    /// `lambda X + (1 - lambda) Y`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        self.zip_with(other, |a, b| lambda * a + (1.0 - lambda) * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Reorders atom values; only distribution-preserving on equal-weight spaces.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let values = perm.iter().map(|&i| self.values[i]).collect();
        Self::from_parts(self.space.clone(), values)
    }

    /// Identically distributed copy on a space where each atom is split into `k` equal parts.
    pub fn refine(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("refinement factor must be positive".into()));
        }
        let kf = k as f64;
        let probs = self
            .probs()
            .iter()
            .flat_map(|&p| std::iter::repeat_n(p / kf, k))
            .collect();
        let values = self
            .values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, k))
            .collect();
        Self::new(ProbSpace::new(probs)?, values)
    }
}

pub fn expectation(x: &RandomVariable) -> f64 {
    x.expectation()
}

pub fn distribution_of(x: &RandomVariable) -> Distribution {
    x.distribution().clone()
}

pub fn left_quantile(x: &RandomVariable, p: f64) -> Result<f64> {
    x.left_quantile(p)
}

pub fn ess_inf(x: &RandomVariable) -> f64 {
    x.ess_inf()
}

pub fn ess_sup(x: &RandomVariable) -> f64 {
    x.ess_sup()
}

pub fn scale(x: &RandomVariable, lambda: f64) -> RandomVariable {
    x.scale(lambda)
}

pub fn shift(x: &RandomVariable, c: f64) -> RandomVariable {
    x.shift(c)
}

pub fn mix(x: &RandomVariable, y: &RandomVariable, lambda: f64) -> Result<RandomVariable> {
    x.mix(y, lambda)
}

pub fn center(x: &RandomVariable) -> RandomVariable {
    x.center()
}

/// Equal-weight space over the samples, with the samples as values.
pub fn empirical_from_samples(samples: &[f64]) -> Result<(Arc<ProbSpace>, RandomVariable)> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let space = ProbSpace::uniform(samples.len())?;
    let x = RandomVariable::new(space.clone(), samples.to_vec())?;
    Ok((space, x))
}

/// Aggregated, strictly increasing support points with their masses.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Distribution {
    pub fn from_atoms(values: &[f64], probs: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut vs: Vec<f64> = Vec::with_capacity(values.len());
        let mut ps: Vec<f64> = Vec::with_capacity(values.len());
        for i in order {
            match vs.last() {
                Some(&last) if last == values[i] => *ps.last_mut().unwrap() += probs[i],
                _ => {
                    vs.push(values[i]);
                    ps.push(probs[i]);
                }
            }
        }
        let mut acc = 0.0;
        let cumulative = ps
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            values: vs,
            probs: ps,
            cumulative,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn quantile_index(&self, p: f64) -> usize {
        let idx = self.cumulative.partition_point(|&c| c < p - VALUE_TOL);
        idx.min(self.values.len() - 1)
    }

    /// Left quantile; `p` is assumed to lie in `(0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        self.values[self.quantile_index(p)]
    }

    /// `\int_0^p F^{-1}(s) ds`, exact over the cumulative breakpoints.
    pub fn lower_tail_integral(&self, p: f64) -> f64 {
        let stop = self.quantile_index(p);
        let mut prev = 0.0;
        let mut terms = Vec::with_capacity(stop + 1);
        for k in 0..stop {
            terms.push(self.values[k] * (self.cumulative[k] - prev));
            prev = self.cumulative[k];
        }
        terms.push(self.values[stop] * (p - prev));
        compensated_sum(terms)
    }
}

/// Stop-loss transform `k -> E[(X - k)^+]` via suffix sums over the support.
struct StopLoss<'a> {
    values: &'a [f64],
    tail_mass: Vec<f64>,
    tail_moment: Vec<f64>,
}

impl<'a> StopLoss<'a> {
    fn new(dist: &'a Distribution) -> Self {
        let n = dist.len();
        let mut tail_mass = vec![0.0; n + 1];
        let mut tail_moment = vec![0.0; n + 1];
        for i in (0..n).rev() {
            tail_mass[i] = tail_mass[i + 1] + dist.probs[i];
            tail_moment[i] = tail_moment[i + 1] + dist.probs[i] * dist.values[i];
        }
        Self {
            values: &dist.values,
            tail_mass,
            tail_moment,
        }
    }

    fn eval(&self, k: f64) -> f64 {
        let j = self.values.partition_point(|&v| v <= k);
        self.tail_moment[j] - k * self.tail_mass[j]
    }
}

fn values_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= VALUE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// True iff `X` and `Y` have the same law; values are matched within [`VALUE_TOL`].
pub fn same_distribution(x: &RandomVariable, y: &RandomVariable) -> bool {
    let dx = x.distribution();
    let dy = y.distribution();
    let mut merged: Vec<(f64, f64, f64)> = dx
        .points()
        .map(|(v, p)| (v, p, 0.0))
        .chain(dy.points().map(|(v, p)| (v, 0.0, p)))
        .collect();
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (mut cx, mut cy) = (0.0, 0.0);
    let mut i = 0;
    while i < merged.len() {
        let anchor = merged[i].0;
        while i < merged.len() && values_close(anchor, merged[i].0) {
            cx += merged[i].1;
            cy += merged[i].2;
            i += 1;
        }
        if (cx - cy).abs() > VALUE_TOL {
            return false;
        }
    }
    true
}

fn stop_loss_dominated(x: &RandomVariable, y: &RandomVariable) -> bool {
    let dx = x.distribution();
    let dy = y.distribution();
    let slx = StopLoss::new(dx);
    let sly = StopLoss::new(dy);
    dx.values
        .iter()
        .chain(&dy.values)
        .all(|&k| slx.eval(k) <= sly.eval(k) + ORDER_TOL)
}

/// `X <=_cx Y`: equal means and pointwise-dominated stop-loss transforms.
pub fn convex_order_leq(x: &RandomVariable, y: &RandomVariable) -> bool {
    (x.expectation() - y.expectation()).abs() <= ORDER_TOL && stop_loss_dominated(x, y)
}

/// `X <=_icx Y`: stop-loss domination at every support point, no mean condition.
pub fn increasing_convex_order_leq(x: &RandomVariable, y: &RandomVariable) -> bool {
    stop_loss_dominated(x, y)
}

/// Serializable form of a random variable: its space weights and values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableRecord {
    pub probs: Vec<f64>,
    pub values: Vec<f64>,
}

impl From<&RandomVariable> for VariableRecord {
    fn from(x: &RandomVariable) -> Self {
        Self {
            probs: x.probs().to_vec(),
            values: x.values().to_vec(),
        }
    }
}

impl VariableRecord {
    pub fn to_variable(&self) -> Result<RandomVariable> {
        RandomVariable::new(ProbSpace::new(self.probs.clone())?, self.values.clone())
    }
}
