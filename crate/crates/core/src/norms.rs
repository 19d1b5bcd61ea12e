//! Lorentz norms `‖f‖_{p,q}` (built on `f*`) and `‖f‖_{(p,q)}` (built on
//! `f**`), Lebesgue norms, closed forms for indicators and the Hölder
//! constant `α(A) = λ μ(A)^{1-1/p}`.
//!
//! Integrals are evaluated piece by piece over the breakpoints of `f*`. On
//! each piece the integrand is a power of `t` times a constant (plain) or
//! times a power of an affine function (double-star), so everything except
//! the double-star norm with non-integer `q` has a closed form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::rearrange::{rearrangement, FunctionOnSpace, MaximalProfile, StepFunction};
use crate::space::MetricMeasureSpace;

/// Exponents within this distance of `-1` integrate to a logarithm.
const LOG_CASE_TOL: f64 = 1e-14;
/// Largest integer `q` expanded binomially; beyond it quadrature is used.
const MAX_BINOMIAL_Q: f64 = 64.0;
const QUAD_REL_TOL: f64 = 1e-10;
/// Supports outside `[1/R, R]` are rescaled before integrating.
const DILATION_RANGE: f64 = 1.8446744073709552e19; // 2^64

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// `‖f‖_{p,q}`, from `f*`.
    #[serde(rename = "plain")]
    Plain,
    /// `‖f‖_{(p,q)}`, from `f**`.
    #[serde(rename = "double-star")]
    DoubleStar,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Plain => "plain",
            Variant::DoubleStar => "double-star",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Variant::Plain),
            "double-star" | "doublestar" => Ok(Variant::DoubleStar),
            other => Err(Error::Parse(format!("unknown norm variant `{other}`"))),
        }
    }
}

/// Exponents and variant of a Lorentz norm. `f64::INFINITY` stands for `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormSpec {
    pub p: f64,
    pub q: f64,
    pub variant: Variant,
}

impl NormSpec {
    pub fn new(p: f64, q: f64, variant: Variant) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Domain(format!("p must lie in [1, ∞], got {p}")));
        }
        if q.is_nan() || q < 1.0 {
            return Err(Error::Domain(format!("q must lie in [1, ∞], got {q}")));
        }
        if variant == Variant::DoubleStar && p <= 1.0 {
            return Err(Error::Domain("the double-star norm needs p > 1".into()));
        }
        Ok(NormSpec { p, q, variant })
    }

    pub fn plain(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, Variant::Plain)
    }

    pub fn double_star(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, Variant::DoubleStar)
    }

    /// Lebesgue `L^p`, i.e. the plain norm with `q = p`.
    pub fn lebesgue(p: f64) -> Result<Self> {
        Self::plain(p, p)
    }

    pub fn with_variant(self, variant: Variant) -> Result<Self> {
        Self::new(self.p, self.q, variant)
    }

    /// `false` when the plain functional is only a quasi-norm (`q > p`).
    pub fn is_normable(&self) -> bool {
        match self.variant {
            Variant::Plain => self.q <= self.p,
            Variant::DoubleStar => true,
        }
    }

    /// `L^{∞,q}` with `q < ∞` contains only the zero function.
    pub fn is_trivial_space(&self) -> bool {
        self.p.is_infinite() && self.q.is_finite()
    }
}

/// `λ` and `α(A) = λ μ(A)^{1-1/p}` bounding `∫_A |f| <= α(A) ‖f‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderConstants {
    pub lambda: f64,
    pub alpha: f64,
}

/// `∫_a^b t^e dt` for `0 <= a < b <= ∞`; the caller guarantees convergence.
pub(crate) fn power_integral(a: f64, b: f64, e: f64) -> f64 {
    let s = e + 1.0;
    if b.is_infinite() {
        return -a.powf(s) / s;
    }
    if s.abs() <= LOG_CASE_TOL {
        return (b / a).ln();
    }
    if a == 0.0 {
        return b.powf(s) / s;
    }
    a.powf(s) * (s * (b / a).ln()).exp_m1() / s
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `‖f‖` under `spec`.
pub fn lorentz_norm(space: &MetricMeasureSpace, f: &FunctionOnSpace, spec: &NormSpec) -> Result<f64> {
    let fs = rearrangement(space, f)?;
    norm_of_rearrangement(&fs, spec)
}

/// The norm computed directly from `f*`.
pub fn norm_of_rearrangement(fs: &StepFunction, spec: &NormSpec) -> Result<f64> {
    if fs.is_zero() {
        return Ok(0.0);
    }
    if spec.is_trivial_space() {
        return Err(Error::NotInSpace { q: spec.q });
    }
    // Homogeneity: work with f*/v0 so that powers stay in range.
    let top = fs.levels()[0];
    let mut unit = fs.scaled(1.0 / top);
    // Dilation: ‖f*(·/s)‖ = s^{1/p} ‖f*‖. Supports far from 1 are moved near 1
    // by a power of two, which is exact unless tiny breakpoints underflow.
    let end = unit.support_end();
    let mut stretch = 1.0;
    if !(DILATION_RANGE.recip()..=DILATION_RANGE).contains(&end) {
        let k = end.log2().round().clamp(-1022.0, 1023.0) as i32;
        unit = unit.dilated(2f64.powi(k));
        stretch = if spec.p.is_infinite() {
            1.0
        } else {
            2f64.powf(f64::from(k) / spec.p)
        };
    }
    let value = match (spec.variant, spec.q.is_finite()) {
        (Variant::Plain, true) => plain_finite(&unit, spec.p, spec.q),
        (Variant::Plain, false) => plain_sup(&unit, spec.p),
        (Variant::DoubleStar, true) => double_star_finite(&unit.maximal_profile(), spec.p, spec.q),
        (Variant::DoubleStar, false) => double_star_sup(&unit.maximal_profile(), spec.p),
    };
    let norm = top * stretch * value;
    if !norm.is_finite() {
        return Err(Error::Domain(format!(
            "norm is not representable as a double (got {norm})"
        )));
    }
    Ok(norm)
}

fn plain_finite(fs: &StepFunction, p: f64, q: f64) -> f64 {
    let e = q / p - 1.0;
    let sum: f64 = fs.pieces().map(|(a, b, v)| v.powf(q) * power_integral(a, b, e)).sum();
    sum.powf(1.0 / q)
}

/// `sup_t t^{1/p} f*(t)`; on each piece the supremum is approached at the right end.
fn plain_sup(fs: &StepFunction, p: f64) -> f64 {
    if p.is_infinite() {
        return fs.levels()[0];
    }
    fs.pieces().map(|(_, b, v)| v * b.powf(1.0 / p)).fold(0.0, f64::max)
}

fn double_star_finite(prof: &MaximalProfile, p: f64, q: f64) -> f64 {
    let t = prof.breakpoints();
    let slopes = prof.slopes();
    let intercepts = prof.intercepts();
    let base = q / p - 1.0 - q;
    let integer_q = q.fract() == 0.0 && q <= MAX_BINOMIAL_Q;

    let mut sum = 0.0;
    for (i, (&v, &a)) in slopes.iter().zip(&intercepts).enumerate() {
        let (lo, hi) = (t[i], t[i + 1]);
        sum += if i == 0 || a == 0.0 {
            // F(t) = v t on the first piece
            v.powf(q) * power_integral(lo, hi, q / p - 1.0)
        } else {
            let closed = if integer_q {
                let n = q as u32;
                (0..=n)
                    .map(|j| {
                        binomial(n, j)
                            * a.powi((n - j) as i32)
                            * v.powi(j as i32)
                            * power_integral(lo, hi, base + f64::from(j))
                    })
                    .sum()
            } else {
                f64::NAN
            };
            if closed.is_finite() {
                closed
            } else {
                // (a + v s)/s = f**(s) <= 1 keeps the integrand in range
                quadrature::integrate(|s| s.powf(q / p - 1.0) * (a / s + v).powf(q), lo, hi, QUAD_REL_TOL)
            }
        };
    }
    // F is constant past the last breakpoint
    let end = prof.breakpoints().last().copied().unwrap_or(0.0);
    sum += prof.total().powf(q) * power_integral(end, f64::INFINITY, base);
    sum.powf(1.0 / q)
}

/// `sup_t t^{1/p - 1} F(t)`: piece endpoints plus the critical point
/// `t* = a (p - 1) / v` of `t^{1/p-1}(a + v t)` where it falls inside.
fn double_star_sup(prof: &MaximalProfile, p: f64) -> f64 {
    if p.is_infinite() {
        // f** is nonincreasing with limit f*(0) at 0
        return prof.slopes()[0];
    }
    // F(s)/s = f**(s) <= 1 keeps the product in range
    let g = |s: f64| prof.primitive(s) / s * s.powf(1.0 / p);
    let t = prof.breakpoints();
    let mut best = t[1..].iter().map(|&s| g(s)).fold(0.0, f64::max);
    for (i, (&v, a)) in prof.slopes().iter().zip(prof.intercepts()).enumerate().skip(1) {
        let crit = a * (p - 1.0) / v;
        if crit > t[i] && crit < t[i + 1] {
            best = best.max(g(crit));
        }
    }
    best
}

/// `(Σ w_i |f_i|^p)^{1/p}`, or `max |f_i|` for `p = ∞`.
pub fn lebesgue_norm(space: &MetricMeasureSpace, f: &FunctionOnSpace, p: f64) -> Result<f64> {
    f.check_on(space)?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("p must lie in [1, ∞], got {p}")));
    }
    let top = f.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || top == 0.0 {
        return Ok(top);
    }
    let sum: f64 = f
        .values
        .iter()
        .zip(space.weights())
        .map(|(v, w)| w * (v.abs() / top).powf(p))
        .sum();
    Ok(top * sum.powf(1.0 / p))
}

/// `‖χ_A‖` in closed form from `μ(A)`.
pub fn chi_norm_closed_form(measure: f64, spec: &NormSpec) -> Result<f64> {
    if !(measure > 0.0 && measure.is_finite()) {
        return Err(Error::Domain(format!(
            "μ(A) must be positive and finite, got {measure}"
        )));
    }
    let (p, q) = (spec.p, spec.q);
    if spec.variant == Variant::DoubleStar && p <= 1.0 {
        return Err(Error::Domain("the double-star closed form needs p > 1".into()));
    }
    if spec.is_trivial_space() {
        return Err(Error::NotInSpace { q });
    }
    let root = measure.powf(1.0 / p);
    if q.is_infinite() {
        return Ok(root);
    }
    let prefactor = match spec.variant {
        Variant::Plain => p / q,
        Variant::DoubleStar => p * p / (q * (p - 1.0)),
    };
    Ok(prefactor.powf(1.0 / q) * root)
}

/// `λ = (p(q-1) / (q(p-1)))^{1-1/q}`, with `λ = 1` at `q = 1` and
/// `λ = p/(p-1)` at `q = ∞`.
pub fn holder_constants(spec: &NormSpec, measure: f64) -> Result<HolderConstants> {
    let (p, q) = (spec.p, spec.q);
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("Hölder constants need 1 < p < ∞, got p = {p}")));
    }
    if measure.is_nan() || measure < 0.0 {
        return Err(Error::Domain(format!("μ(A) must be nonnegative, got {measure}")));
    }
    let lambda = if q == 1.0 {
        1.0
    } else if q.is_infinite() {
        p / (p - 1.0)
    } else {
        (p * (q - 1.0) / (q * (p - 1.0))).powf(1.0 - 1.0 / q)
    };
    Ok(HolderConstants {
        lambda,
        alpha: lambda * measure.powf(1.0 - 1.0 / p),
    })
}

/// `α(A)` for a set of atoms.
pub fn alpha(space: &MetricMeasureSpace, atoms: &[usize], spec: &NormSpec) -> Result<f64> {
    Ok(holder_constants(spec, space.measure_of(atoms)?)?.alpha)
}

/// Both sides of `∫_A |f| <= α(A) ‖f‖_{p,q}` (plain norm).
pub fn holder_check(
    space: &MetricMeasureSpace,
    f: &FunctionOnSpace,
    atoms: &[usize],
    spec: &NormSpec,
) -> Result<(f64, f64)> {
    f.check_on(space)?;
    let measure = space.measure_of(atoms)?;
    let constants = holder_constants(spec, measure)?;
    let mut seen = vec![false; space.len()];
    let mut lhs = 0.0;
    for &a in atoms {
        if !std::mem::replace(&mut seen[a], true) {
            lhs += space.weight(a) * f.values[a].abs();
        }
    }
    let norm = lorentz_norm(space, f, &spec.with_variant(Variant::Plain)?)?;
    Ok((lhs, constants.alpha * norm))
}

/// `(‖f‖_{p,q}, ‖f‖_{(p,q)})`, which satisfy
/// `‖f‖_{p,q} <= ‖f‖_{(p,q)} <= p/(p-1) ‖f‖_{p,q}`.
pub fn norm_equivalence_check(space: &MetricMeasureSpace, f: &FunctionOnSpace, p: f64, q: f64) -> Result<(f64, f64)> {
    let fs = rearrangement(space, f)?;
    let plain = norm_of_rearrangement(&fs, &NormSpec::plain(p, q)?)?;
    let double = norm_of_rearrangement(&fs, &NormSpec::double_star(p, q)?)?;
    Ok((plain, double))
}
