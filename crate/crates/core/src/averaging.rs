//! The averaging operator `A_r f(x) = μ(B(x,r))⁻¹ Σ_{y ∈ B(x,r)} w_y f(y)`
//! and checkers for the quantitative bounds it satisfies.
//!
//! The maximal-type constant `c = γ₁γ₂γ₃ + 1` is built from the tight
//! doubling constants of the space at scales `r`, `2r` and `4r`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{holder_constants, lorentz_norm, NormSpec, Variant};
use crate::rearrange::{maximal_profile, rearrangement, FunctionOnSpace};
use crate::space::MetricMeasureSpace;

/// Relative slack granted to every inequality contract.
pub const CONTRACT_SLACK: f64 = 1e-12;

pub(crate) fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + CONTRACT_SLACK * rhs.abs().max(lhs.abs()) + f64::MIN_POSITIVE
}

/// Row `x` of the averaging kernel: the atoms of `B(x, r)` and its measure.
/// The kernel entry for `y` in the row is `w_y / measure`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelRow {
    pub atoms: Vec<usize>,
    pub measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AveragingKernel {
    radius: f64,
    rows: Vec<KernelRow>,
}

impl AveragingKernel {
    pub fn new(space: &MetricMeasureSpace, r: f64) -> Result<Self> {
        check_positive_radius(r)?;
        let rows = (0..space.len())
            .into_par_iter()
            .map(|x| {
                let atoms: Vec<usize> = (0..space.len()).filter(|&y| space.in_ball(x, r, y)).collect();
                let measure = atoms.iter().map(|&y| space.weight(y)).sum();
                KernelRow { atoms, measure }
            })
            .collect();
        Ok(AveragingKernel { radius: r, rows })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn rows(&self) -> &[KernelRow] {
        &self.rows
    }

    /// Nonzero entries `(y, w_y / μ(B(x,r)))` of row `x`.
    pub fn row_entries(&self, space: &MetricMeasureSpace, x: usize) -> Vec<(usize, f64)> {
        let row = &self.rows[x];
        row.atoms.iter().map(|&y| (y, space.weight(y) / row.measure)).collect()
    }

    pub fn apply(&self, space: &MetricMeasureSpace, f: &FunctionOnSpace) -> Result<FunctionOnSpace> {
        f.check_on(space)?;
        let values = self
            .rows
            .iter()
            .map(|row| row.atoms.iter().map(|&y| space.weight(y) * f.values[y]).sum::<f64>() / row.measure)
            .collect();
        Ok(FunctionOnSpace::new(values))
    }
}

/// `A_r f`.
pub fn average(space: &MetricMeasureSpace, f: &FunctionOnSpace, r: f64) -> Result<FunctionOnSpace> {
    AveragingKernel::new(space, r)?.apply(space, f)
}

fn check_positive_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!(
            "averaging radius must be positive and finite, got {r}"
        )));
    }
    Ok(())
}

/// `c = γ₁γ₂γ₃ + 1` from the tight doubling constants at `r`, `2r`, `4r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaximalConstant {
    pub radius: f64,
    pub gammas: [f64; 3],
    pub c: f64,
}

impl MaximalConstant {
    pub fn new(space: &MetricMeasureSpace, r: f64) -> Result<Self> {
        check_positive_radius(r)?;
        let reports = [
            space.doubling_constant(r)?,
            space.doubling_constant(2.0 * r)?,
            space.doubling_constant(4.0 * r)?,
        ];
        // One division at the end keeps c exact for integer weights.
        let outer: f64 = reports.iter().map(|d| d.outer_measure).product();
        let inner: f64 = reports.iter().map(|d| d.inner_measure).product();
        Ok(MaximalConstant {
            radius: r,
            gammas: [reports[0].gamma, reports[1].gamma, reports[2].gamma],
            c: (outer + inner) / inner,
        })
    }
}

/// `α(B(x,r)) / μ(B(x,r))`, a bound on `|A_r f(x)|` over the unit ball.
pub fn pointwise_bound(space: &MetricMeasureSpace, x: usize, r: f64, spec: &NormSpec) -> Result<f64> {
    check_positive_radius(r)?;
    let ball = space.ball(x, r)?;
    Ok(holder_constants(spec, ball.measure)?.alpha / ball.measure)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquicontinuityModulus {
    /// `|1/μ(B_x) - 1/μ(B_y)| α(B_x) + α(B_x △ B_y) / μ(B_y)`.
    pub bound: f64,
    /// `sup_{‖f‖_p <= 1} |A_r f(x) - A_r f(y)|`, only on the Lebesgue diagonal.
    pub exact: Option<f64>,
}

/// Density `g = χ_{B_x}/μ(B_x) - χ_{B_y}/μ(B_y)` with
/// `A_r f(x) - A_r f(y) = Σ_z w_z g(z) f(z)`.
pub fn difference_density(space: &MetricMeasureSpace, x: usize, y: usize, r: f64) -> Result<Vec<f64>> {
    check_positive_radius(r)?;
    space.check_atom(x)?;
    space.check_atom(y)?;
    let mx = space.ball_measure(x, r);
    let my = space.ball_measure(y, r);
    Ok((0..space.len())
        .map(|z| {
            let a = if space.in_ball(x, r, z) { 1.0 / mx } else { 0.0 };
            let b = if space.in_ball(y, r, z) { 1.0 / my } else { 0.0 };
            a - b
        })
        .collect())
}

fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn weighted_norm(space: &MetricMeasureSpace, g: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    }
    g.iter()
        .zip(space.weights())
        .map(|(v, w)| w * v.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

pub fn equicontinuity_modulus(
    space: &MetricMeasureSpace,
    x: usize,
    y: usize,
    r: f64,
    spec: &NormSpec,
) -> Result<EquicontinuityModulus> {
    check_positive_radius(r)?;
    let bx = space.ball(x, r)?;
    let by = space.ball(y, r)?;
    let alpha_x = holder_constants(spec, bx.measure)?.alpha;
    let alpha_diff = holder_constants(spec, space.symm_diff_measure(x, y, r)?)?.alpha;
    let bound = (1.0 / bx.measure - 1.0 / by.measure).abs() * alpha_x + alpha_diff / by.measure;
    let exact = if spec.variant == Variant::Plain && spec.p == spec.q {
        let g = difference_density(space, x, y, r)?;
        Some(weighted_norm(space, &g, conjugate(spec.p)))
    } else {
        None
    };
    Ok(EquicontinuityModulus { bound, exact })
}

/// The unit-`L^p` function attaining `|A_r f(x) - A_r f(y)| = ‖g‖_{p'}`:
/// `sign(g)|g|^{p'-1} / ‖g‖_{p'}^{p'-1}`. `None` when the two balls agree.
pub fn extremal_function(
    space: &MetricMeasureSpace,
    x: usize,
    y: usize,
    r: f64,
    p: f64,
) -> Result<Option<FunctionOnSpace>> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("extremal functions need 1 < p < ∞, got {p}")));
    }
    let g = difference_density(space, x, y, r)?;
    let pc = conjugate(p);
    let norm = weighted_norm(space, &g, pc);
    if norm == 0.0 {
        return Ok(None);
    }
    let scale = norm.powf(pc - 1.0);
    Ok(Some(FunctionOnSpace::new(
        g.iter().map(|v| v.signum() * v.abs().powf(pc - 1.0) / scale).collect(),
    )))
}

/// One evaluation of `μ_{A_r f}(ct) <= (1/t) ∫_{|f|>t} |f| dμ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistributionCheck {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionSweep {
    pub constant: MaximalConstant,
    pub checks: Vec<DistributionCheck>,
    /// Largest `lhs / rhs` over the checks with `rhs > 0`.
    pub worst_ratio: f64,
    pub pass: bool,
}

fn distribution_at(
    space: &MetricMeasureSpace,
    f: &FunctionOnSpace,
    avg: &FunctionOnSpace,
    c: f64,
    t: f64,
) -> DistributionCheck {
    let lhs = avg
        .values
        .iter()
        .zip(space.weights())
        .filter(|(v, _)| v.abs() > c * t)
        .map(|(_, w)| w)
        .sum();
    let rhs = f
        .values
        .iter()
        .zip(space.weights())
        .filter(|(v, _)| v.abs() > t)
        .map(|(v, w)| w * v.abs())
        .sum::<f64>()
        / t;
    DistributionCheck {
        t,
        lhs,
        rhs,
        pass: holds(lhs, rhs),
    }
}

/// Single-`t` check of the maximal-type distribution inequality.
pub fn verify_distribution_inequality(
    space: &MetricMeasureSpace,
    f: &FunctionOnSpace,
    r: f64,
    t: f64,
) -> Result<(MaximalConstant, DistributionCheck)> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be positive and finite, got {t}")));
    }
    let constant = MaximalConstant::new(space, r)?;
    let avg = average(space, f, r)?;
    Ok((constant, distribution_at(space, f, &avg, constant.c, t)))
}

/// Thresholds where either side of the distribution inequality can jump:
/// the distinct values of `|f|`, geometric midpoints between them, half the
/// smallest one, and points just below each `|A_r f(x)| / c`.
fn sweep_grid(f: &FunctionOnSpace, avg: &FunctionOnSpace, c: f64) -> Vec<f64> {
    let mut levels: Vec<f64> = f.values.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut grid = levels.clone();
    grid.extend(levels.windows(2).map(|w| (w[0] * w[1]).sqrt()));
    if let Some(&lowest) = levels.first() {
        grid.push(lowest / 2.0);
    }
    grid.extend(
        avg.values
            .iter()
            .map(|v| v.abs() / c * (1.0 - 1e-9))
            .filter(|t| *t > 0.0),
    );
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// The distribution inequality at every threshold of [`sweep_grid`].
pub fn distribution_sweep(space: &MetricMeasureSpace, f: &FunctionOnSpace, r: f64) -> Result<DistributionSweep> {
    let constant = MaximalConstant::new(space, r)?;
    let avg = average(space, f, r)?;
    let checks: Vec<DistributionCheck> = sweep_grid(f, &avg, constant.c)
        .into_iter()
        .map(|t| distribution_at(space, f, &avg, constant.c, t))
        .collect();
    let worst_ratio = checks
        .iter()
        .filter(|c| c.rhs > 0.0)
        .map(|c| c.lhs / c.rhs)
        .fold(0.0, f64::max);
    let pass = checks.iter().all(|c| c.pass);
    Ok(DistributionSweep {
        constant,
        checks,
        worst_ratio,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RearrangementCheck {
    pub constant: MaximalConstant,
    /// `sup_{t>0} (A_r f)*(t) / f**(t)`, including left limits at breakpoints.
    pub max_ratio: f64,
    /// Where the supremum was found.
    pub argmax_t: f64,
    pub points_checked: usize,
    pub pass: bool,
}

/// Checks `(A_r f)*(t) <= c f**(t)` for all `t > 0`.
///
/// `f**` is continuous and nonincreasing while `(A_r f)*` is a step
/// function, so on each step the ratio is largest at the step's right end.
/// Both one-sided values at every breakpoint of either function are checked,
/// plus the midpoints between them.
pub fn verify_rearrangement_bound(
    space: &MetricMeasureSpace,
    f: &FunctionOnSpace,
    r: f64,
) -> Result<RearrangementCheck> {
    let constant = MaximalConstant::new(space, r)?;
    let avg = average(space, f, r)?;
    let avg_star = rearrangement(space, &avg)?;
    let f_star = rearrangement(space, f)?;
    let profile = maximal_profile(space, f)?;
    if f_star.is_zero() {
        return Ok(RearrangementCheck {
            constant,
            max_ratio: 0.0,
            argmax_t: 0.0,
            points_checked: 0,
            pass: avg_star.is_zero(),
        });
    }

    let mut cuts: Vec<f64> = avg_star
        .breakpoints()
        .iter()
        .chain(f_star.breakpoints())
        .copied()
        .filter(|t| *t > 0.0)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut prev = 0.0;
    for &t in &cuts {
        // left limit of (A_r f)* at t
        let left = avg_star.eval((prev + t) / 2.0);
        points.push((t, left));
        points.push((t, avg_star.eval(t)));
        points.push(((prev + t) / 2.0, left));
        prev = t;
    }
    points.push((2.0 * prev, avg_star.eval(2.0 * prev)));

    let (mut max_ratio, mut argmax_t) = (0.0_f64, 0.0);
    let mut pass = true;
    for &(t, value) in &points {
        let bound = profile.eval(t)?;
        pass &= holds(value, constant.c * bound);
        let ratio = value / bound;
        if ratio > max_ratio {
            (max_ratio, argmax_t) = (ratio, t);
        }
    }
    Ok(RearrangementCheck {
        constant,
        max_ratio,
        argmax_t,
        points_checked: points.len(),
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorBoundCheck {
    pub constant: MaximalConstant,
    /// `c p / (p - 1)`.
    pub factor: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Both sides of `‖A_r f‖ <= (c p / (p - 1)) ‖f‖`.
pub fn verify_operator_bound(
    space: &MetricMeasureSpace,
    f: &FunctionOnSpace,
    r: f64,
    spec: &NormSpec,
) -> Result<OperatorBoundCheck> {
    if spec.p <= 1.0 {
        return Err(Error::Domain("the operator bound needs p > 1".into()));
    }
    let constant = MaximalConstant::new(space, r)?;
    let factor = if spec.p.is_infinite() {
        constant.c
    } else {
        constant.c * spec.p / (spec.p - 1.0)
    };
    let lhs = lorentz_norm(space, &average(space, f, r)?, spec)?;
    let rhs = factor * lorentz_norm(space, f, spec)?;
    Ok(OperatorBoundCheck {
        constant,
        factor,
        lhs,
        rhs,
        pass: holds(lhs, rhs),
    })
}
