//! Distribution functions, decreasing rearrangements and the maximal profile
//! `f**(t) = (1/t) ∫_0^t f*(s) ds`, all held exactly as step or
//! piecewise-linear data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::MetricMeasureSpace;

/// One real value per atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionOnSpace {
    pub values: Vec<f64>,
}

impl FunctionOnSpace {
    pub fn new(values: Vec<f64>) -> Self {
        FunctionOnSpace { values }
    }

    pub fn zeros(n: usize) -> Self {
        FunctionOnSpace { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        FunctionOnSpace { values: vec![c; n] }
    }

    /// `χ_A` for a set of atoms `A`.
    pub fn indicator(n: usize, atoms: &[usize]) -> Self {
        let mut values = vec![0.0; n];
        for &a in atoms {
            values[a] = 1.0;
        }
        FunctionOnSpace { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        FunctionOnSpace {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self - other`, atom by atom.
    pub fn sub(&self, other: &Self) -> Self {
        FunctionOnSpace {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self · χ_A`.
    pub fn restrict(&self, atoms: &[usize]) -> Self {
        let mut out = vec![0.0; self.len()];
        for &a in atoms {
            out[a] = self.values[a];
        }
        FunctionOnSpace { values: out }
    }

    /// Checks that the function fits `space` and has finite values.
    pub fn check_on(&self, space: &MetricMeasureSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: self.len(),
            });
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("value at atom {i} is not finite")));
        }
        Ok(())
    }
}

/// A nonincreasing right-continuous step function on `[0, ∞)`.
///
/// Takes the value `levels[i]` on `[breakpoints[i], breakpoints[i+1])` and `0`
/// from the last breakpoint on. `breakpoints[0] == 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        StepFunction::new(raw.breakpoints, raw.levels)
    }
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != levels.len() + 1 {
            return Err(Error::Parse(format!(
                "{} breakpoints need {} levels, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                levels.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::Parse("first breakpoint must be 0".into()));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        if levels.iter().any(|v| !(v.is_finite() && *v > 0.0)) || levels.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Parse(
                "levels must be finite, positive and strictly decreasing".into(),
            ));
        }
        Ok(StepFunction { breakpoints, levels })
    }

    pub fn zero() -> Self {
        StepFunction {
            breakpoints: vec![0.0],
            levels: Vec::new(),
        }
    }

    /// Multiplies every level by `c > 0`. Rounding may merge neighbouring
    /// levels; evaluation and integration remain valid.
    pub(crate) fn scaled(&self, c: f64) -> Self {
        StepFunction {
            breakpoints: self.breakpoints.clone(),
            levels: self.levels.iter().map(|v| v * c).collect(),
        }
    }

    /// `t ↦ self(s t)`: breakpoints divided by `s > 0`. Pieces whose
    /// breakpoints collapse in floating point are dropped.
    pub(crate) fn dilated(&self, s: f64) -> Self {
        let mut breakpoints = vec![0.0];
        let mut levels = Vec::new();
        for (_, b, v) in self.pieces() {
            let b = b / s;
            if b > *breakpoints.last().unwrap() {
                breakpoints.push(b);
                levels.push(v);
            }
        }
        StepFunction { breakpoints, levels }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn is_zero(&self) -> bool {
        self.levels.is_empty()
    }

    /// Right end of the support, `t_k`.
    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().expect("at least one breakpoint")
    }

    /// `(start, end, level)` for each nonzero piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.levels
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    pub fn eval(&self, t: f64) -> f64 {
        // number of breakpoints <= t; the piece index is one less
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        match idx.checked_sub(1) {
            Some(i) if i < self.levels.len() => self.levels[i],
            _ => 0.0,
        }
    }

    /// Lebesgue measure of `{s >= 0 : self(s) > t}`.
    pub fn measure_above(&self, t: f64) -> f64 {
        let above = self.levels.partition_point(|&v| v > t);
        self.breakpoints[above]
    }

    /// `∫_0^∞` of the step function.
    pub fn integral(&self) -> f64 {
        self.pieces().map(|(a, b, v)| v * (b - a)).sum()
    }

    pub fn maximal_profile(&self) -> MaximalProfile {
        let mut nodes = Vec::with_capacity(self.breakpoints.len());
        let mut acc = 0.0;
        nodes.push(0.0);
        for (a, b, v) in self.pieces() {
            acc += v * (b - a);
            nodes.push(acc);
        }
        MaximalProfile {
            breakpoints: self.breakpoints.clone(),
            node_values: nodes,
            slopes: self.levels.clone(),
        }
    }
}

/// `∫_0^∞ a(t) b(t) dt` over the common refinement of two step functions.
pub fn product_integral(a: &StepFunction, b: &StepFunction) -> f64 {
    let end = a.support_end().min(b.support_end());
    let mut cuts: Vec<f64> = a
        .breakpoints()
        .iter()
        .chain(b.breakpoints())
        .copied()
        .filter(|&t| t <= end)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| a.eval(w[0]) * b.eval(w[0]) * (w[1] - w[0]))
        .sum()
}

/// The primitive `F(t) = ∫_0^t f*(s) ds` of a rearrangement, stored by its
/// breakpoints, node values `F(t_i)` and slopes (the levels of `f*`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaximalProfile {
    breakpoints: Vec<f64>,
    node_values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MaximalProfile {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// `F(∞) = ∫_0^∞ f*`.
    pub fn total(&self) -> f64 {
        *self.node_values.last().expect("at least one node")
    }

    /// `F(t)` for `t >= 0`.
    pub fn primitive(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        match idx.checked_sub(1) {
            Some(i) if i < self.slopes.len() => self.node_values[i] + self.slopes[i] * (t - self.breakpoints[i]),
            Some(_) => self.total(),
            None => 0.0,
        }
    }

    /// `f**(t) = F(t)/t`, defined for `t > 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::Domain(format!("f** is defined for t > 0, got {t}")));
        }
        if t.is_infinite() {
            return Ok(0.0);
        }
        Ok(self.primitive(t) / t)
    }

    /// Intercepts `a_i` with `F(t) = a_i + v_i t` on piece `i`. Concavity of
    /// `F` makes them nonnegative; rounding is clamped away.
    pub fn intercepts(&self) -> Vec<f64> {
        self.slopes
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.node_values[i] - v * self.breakpoints[i]).max(0.0))
            .collect()
    }
}

/// Distinct nonzero `|f|` values in decreasing order with their cumulative
/// measure `μ{|f| >= value}`.
fn sorted_levels(space: &MetricMeasureSpace, f: &FunctionOnSpace) -> Result<(Vec<f64>, Vec<f64>)> {
    f.check_on(space)?;
    let mut pairs: Vec<(f64, f64)> = f
        .values
        .iter()
        .zip(space.weights())
        .map(|(v, w)| (v.abs(), *w))
        .filter(|(v, _)| *v > 0.0)
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut values: Vec<f64> = Vec::new();
    let mut cumulative: Vec<f64> = Vec::new();
    let mut acc = 0.0;
    for (v, w) in pairs {
        acc += w;
        if values.last() == Some(&v) {
            *cumulative.last_mut().unwrap() = acc;
        } else {
            values.push(v);
            cumulative.push(acc);
        }
    }
    Ok((values, cumulative))
}

/// `μ_f(t) = μ{x : |f(x)| > t}`.
pub fn distribution_function(space: &MetricMeasureSpace, f: &FunctionOnSpace) -> Result<StepFunction> {
    let (values, cumulative) = sorted_levels(space, f)?;
    // ascending thresholds: on [values[j], values[j-1]) the mass strictly above is cumulative[j-1]
    let mut breakpoints = vec![0.0];
    breakpoints.extend(values.iter().rev());
    let levels = cumulative.iter().rev().copied().collect();
    StepFunction::new(breakpoints, levels)
}

/// `f*(t) = inf{s >= 0 : μ_f(s) <= t}`.
pub fn rearrangement(space: &MetricMeasureSpace, f: &FunctionOnSpace) -> Result<StepFunction> {
    let (values, cumulative) = sorted_levels(space, f)?;
    let mut breakpoints = vec![0.0];
    breakpoints.extend(cumulative);
    StepFunction::new(breakpoints, values)
}

pub fn maximal_profile(space: &MetricMeasureSpace, f: &FunctionOnSpace) -> Result<MaximalProfile> {
    Ok(rearrangement(space, f)?.maximal_profile())
}

/// Both sides of `∫ |f g| dμ <= ∫_0^∞ f*(t) g*(t) dt`.
pub fn hardy_littlewood_check(
    space: &MetricMeasureSpace,
    f: &FunctionOnSpace,
    g: &FunctionOnSpace,
) -> Result<(f64, f64)> {
    g.check_on(space)?;
    let fs = rearrangement(space, f)?;
    let gs = rearrangement(space, g)?;
    let lhs = f
        .values
        .iter()
        .zip(&g.values)
        .zip(space.weights())
        .map(|((a, b), w)| w * (a * b).abs())
        .sum();
    Ok((lhs, product_integral(&fs, &gs)))
}
