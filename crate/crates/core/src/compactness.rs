//! Desk-scale diagnostics for compactness of `A_r`.
//!
//! On a finite space every operator is compact, so nothing here proves or
//! refutes compactness. What can be measured is how the quantities behind
//! the two directions of the argument behave:
//!
//! - greedy `ε`-nets of sampled images `A_r f`, `‖f‖ = 1` (total boundedness);
//! - the witness sequence `f_n = α(B(x_n,r)) χ_{B(x_n,2r)} / μ(B(x_n,r))` at
//!   `4r`-separated centers, whose images stay `c`-separated with
//!   `c = inf_x μ(B(x,r)) / μ(B(x,2r))` however many centers the space holds;
//! - the simple-function approximation `Σ a_i χ_{B(x_i, r_i)}` of `A_r f`.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::averaging::AveragingKernel;
use crate::error::{Error, Result};
use crate::norms::{chi_norm_closed_form, holder_constants, lorentz_norm, NormSpec};
use crate::rearrange::FunctionOnSpace;
use crate::space::MetricMeasureSpace;

const MAX_LEVELS: usize = 4;
/// Upper bound on the number of members a family string may describe.
pub const MAX_FAMILY_MEMBERS: usize = 10_000;

/// `n` random signed simple functions with `‖f‖ = 1`.
///
/// Each sample picks a random support (every atom with probability 1/2, at
/// least one atom), between one and four levels drawn from `[-1, 1]`, and a
/// random level per support atom, then normalizes. The stream depends only
/// on `seed`.
pub fn sample_unit_sphere(
    space: &MetricMeasureSpace,
    spec: &NormSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<FunctionOnSpace>> {
    if spec.is_trivial_space() {
        return Err(Error::NotInSpace { q: spec.q });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = space.len();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut support: Vec<usize> = (0..atoms).filter(|_| rng.random_bool(0.5)).collect();
        if support.is_empty() {
            support.push(rng.random_range(0..atoms));
        }
        let count = rng.random_range(1..=MAX_LEVELS.min(support.len()));
        let levels: Vec<f64> = (0..count).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let mut values = vec![0.0; atoms];
        for &a in &support {
            values[a] = levels[rng.random_range(0..count)];
        }
        let f = FunctionOnSpace::new(values);
        let norm = lorentz_norm(space, &f, spec)?;
        if norm > 0.0 {
            out.push(f.scale(1.0 / norm));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    pub epsilon: f64,
    pub sample_size: usize,
    /// Size of the greedy net.
    pub k: usize,
    pub net_indices: Vec<usize>,
    /// Largest distance from a sample to its nearest net member.
    pub max_residual: f64,
}

/// Greedy sequential `ε`-net: a point joins the net when it is farther than
/// `ε` from every current member.
pub fn covering_number(
    space: &MetricMeasureSpace,
    points: &[FunctionOnSpace],
    epsilon: f64,
    spec: &NormSpec,
) -> Result<CoveringReport> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut net: Vec<usize> = Vec::new();
    let mut max_residual = 0.0_f64;
    for (i, point) in points.iter().enumerate() {
        let mut nearest = f64::INFINITY;
        for &j in &net {
            nearest = nearest.min(lorentz_norm(space, &point.sub(&points[j]), spec)?);
            if nearest <= epsilon {
                break;
            }
        }
        if nearest > epsilon {
            net.push(i);
        } else {
            max_residual = max_residual.max(nearest);
        }
    }
    Ok(CoveringReport {
        epsilon,
        sample_size: points.len(),
        k: net.len(),
        net_indices: net,
        max_residual,
    })
}

/// `inf_x μ(B(x, r)) / μ(B(x, 2r))`.
pub fn separation_constant(space: &MetricMeasureSpace, r: f64) -> f64 {
    (0..space.len())
        .map(|x| space.ball_measure(x, r) / space.ball_measure(x, 2.0 * r))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub centers: Vec<usize>,
    pub c_lower: f64,
    /// Tight doubling constant at scale `r`.
    pub gamma: f64,
    /// `‖A_r f_n - A_r f_m‖`.
    pub distances: Vec<Vec<f64>>,
    pub min_distance: f64,
    /// `‖f_n‖`.
    pub witness_norms: Vec<f64>,
    /// `λ · ‖χ_A‖/μ(A)^{1/p} · γ^{1/p}`, bounding every `‖f_n‖`.
    pub norm_cap: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "kebab-case")]
pub enum WitnessOutcome {
    /// Fewer than two `4r`-separated centers: no witness exists.
    Bounded {
        centers: Vec<usize>,
        c_lower: f64,
    },
    Separated(WitnessReport),
}

/// `f_n = α(B(x_n,r)) χ_{B(x_n,2r)} / μ(B(x_n,r))`.
pub fn witness_function(space: &MetricMeasureSpace, center: usize, r: f64, spec: &NormSpec) -> Result<FunctionOnSpace> {
    let inner = space.ball(center, r)?;
    let outer = space.ball(center, 2.0 * r)?;
    let height = holder_constants(spec, inner.measure)?.alpha / inner.measure;
    Ok(FunctionOnSpace::indicator(space.len(), &outer.atoms).scale(height))
}

/// Witness functions at up to `k` centers with pairwise distance `> 4r`, and
/// the pairwise distances of their images under `A_r`.
pub fn witness_sequence(space: &MetricMeasureSpace, r: f64, k: usize, spec: &NormSpec) -> Result<WitnessOutcome> {
    let kernel = AveragingKernel::new(space, r)?;
    let c_lower = separation_constant(space, r);
    let centers = space.separated_points(4.0 * r, k);
    if centers.len() < 2 {
        return Ok(WitnessOutcome::Bounded { centers, c_lower });
    }
    let witnesses = centers
        .iter()
        .map(|&x| witness_function(space, x, r, spec))
        .collect::<Result<Vec<_>>>()?;
    let images = witnesses
        .iter()
        .map(|f| kernel.apply(space, f))
        .collect::<Result<Vec<_>>>()?;

    let m = centers.len();
    let mut distances = vec![vec![0.0; m]; m];
    let mut min_distance = f64::INFINITY;
    for i in 0..m {
        for j in (i + 1)..m {
            let d = lorentz_norm(space, &images[i].sub(&images[j]), spec)?;
            distances[i][j] = d;
            distances[j][i] = d;
            min_distance = min_distance.min(d);
        }
    }
    let witness_norms = witnesses
        .iter()
        .map(|f| lorentz_norm(space, f, spec))
        .collect::<Result<Vec<_>>>()?;
    let gamma = space.doubling_constant(r)?.gamma;
    let lambda = holder_constants(spec, 1.0)?.lambda;
    let norm_cap = lambda * chi_norm_closed_form(1.0, spec)? * gamma.powf(1.0 / spec.p);
    let slack = 1.0 + 1e-12;
    let pass = min_distance >= c_lower / slack && witness_norms.iter().all(|&v| v <= norm_cap * slack);
    Ok(WitnessOutcome::Separated(WitnessReport {
        centers,
        c_lower,
        gamma,
        distances,
        min_distance,
        witness_norms,
        norm_cap,
        pass,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimpleBall {
    pub center: usize,
    pub radius: f64,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimpleApproximation {
    pub balls: Vec<SimpleBall>,
    pub approximant: FunctionOnSpace,
    /// `‖g - Σ a_i χ_{B(x_i, r_i)}‖`.
    pub error: f64,
    /// `‖g χ_{X \ ⋃ B(x_i, r_i)}‖`.
    pub remainder_norm: f64,
    /// Allowed oscillation `ε / (2‖χ_X‖)` of `g` on each chosen ball.
    pub oscillation_tolerance: f64,
}

/// Greedy `Σ a_i χ_{B(x_i, r_i)}` approximation of `g` with `a_i = g(x_i)`.
///
/// Candidate balls have radius at most `r` and oscillation
/// `max_{B} |g - g(x_i)| <= ε / (2‖χ_X‖)`. They are taken by decreasing
/// measure (ties: lower center, then smaller radius) while disjoint from the
/// balls already chosen, until `‖g χ_remainder‖ <= ε/2`.
pub fn simple_approximation(
    space: &MetricMeasureSpace,
    g: &FunctionOnSpace,
    r: f64,
    epsilon: f64,
    spec: &NormSpec,
) -> Result<SimpleApproximation> {
    g.check_on(space)?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if r.is_nan() || r < 0.0 {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    let n = space.len();
    let chi_x = lorentz_norm(space, &FunctionOnSpace::constant(n, 1.0), spec)?;
    let tolerance = epsilon / (2.0 * chi_x);

    // (measure, center, radius)
    let mut candidates: Vec<(f64, usize, f64)> = Vec::new();
    for x in 0..n {
        let mut radii: Vec<f64> = (0..n).map(|y| space.dist(x, y)).filter(|&d| d <= r).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        for rho in radii {
            let oscillation = (0..n)
                .filter(|&y| space.in_ball(x, rho, y))
                .map(|y| (g.values[y] - g.values[x]).abs())
                .fold(0.0, f64::max);
            if oscillation > tolerance {
                break;
            }
            candidates.push((space.ball_measure(x, rho), x, rho));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));

    let mut covered = vec![false; n];
    let mut balls = Vec::new();
    let remainder = |covered: &[bool]| -> Result<f64> {
        let rest = FunctionOnSpace::new(
            g.values
                .iter()
                .zip(covered)
                .map(|(v, c)| if *c { 0.0 } else { *v })
                .collect(),
        );
        lorentz_norm(space, &rest, spec)
    };
    let mut remainder_norm = remainder(&covered)?;
    for (_, x, rho) in candidates {
        if remainder_norm <= epsilon / 2.0 {
            break;
        }
        let atoms: Vec<usize> = (0..n).filter(|&y| space.in_ball(x, rho, y)).collect();
        if atoms.iter().any(|&y| covered[y]) {
            continue;
        }
        for &y in &atoms {
            covered[y] = true;
        }
        balls.push(SimpleBall {
            center: x,
            radius: rho,
            coefficient: g.values[x],
        });
        remainder_norm = remainder(&covered)?;
    }

    let mut approx = vec![0.0; n];
    for b in &balls {
        for (y, a) in approx.iter_mut().enumerate() {
            if space.in_ball(b.center, b.radius, y) {
                *a = b.coefficient;
            }
        }
    }
    let approximant = FunctionOnSpace::new(approx);
    let error = lorentz_norm(space, &g.sub(&approximant), spec)?;
    Ok(SimpleApproximation {
        balls,
        approximant,
        error,
        remainder_norm,
        oscillation_tolerance: tolerance,
    })
}

/// `lattice:START:END:STEP` (inclusive) or `lattice:L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub start: usize,
    pub end: usize,
    pub step: usize,
}

impl FamilySpec {
    pub fn lengths(&self) -> impl Iterator<Item = usize> {
        (self.start..=self.end).step_by(self.step)
    }

    pub fn spaces(&self) -> Vec<(usize, MetricMeasureSpace)> {
        self.lengths().map(|l| (l, MetricMeasureSpace::lattice(l))).collect()
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::Parse(format!("`{p}` in family `{s}` is not a nonnegative integer")))
        };
        let spec = match parts.as_slice() {
            ["lattice", l] => {
                let l = num(l)?;
                FamilySpec {
                    start: l,
                    end: l,
                    step: 1,
                }
            }
            ["lattice", a, b, c] => FamilySpec {
                start: num(a)?,
                end: num(b)?,
                step: num(c)?,
            },
            _ => {
                return Err(Error::Parse(format!(
                    "family `{s}` must look like lattice:L or lattice:START:END:STEP"
                )))
            }
        };
        if spec.step == 0 || spec.start > spec.end {
            return Err(Error::Parse(format!("family `{s}` needs STEP > 0 and START <= END")));
        }
        if (spec.end - spec.start) / spec.step >= MAX_FAMILY_MEMBERS {
            return Err(Error::Parse(format!(
                "family `{s}` has more than {MAX_FAMILY_MEMBERS} members"
            )));
        }
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    /// Lattice length `L` (the space has `L + 1` atoms).
    pub label: usize,
    /// Greedy covering number of the sampled images at `ε`.
    pub k: usize,
    /// Smallest pairwise distance between witness images, when witnesses exist.
    pub witness_min: Option<f64>,
    pub c_lower: f64,
    /// Size of a greedy `ε`-net of the witness images, i.e. how many of them
    /// are pairwise more than `ε` apart.
    pub witness_count: usize,
}

/// Covering numbers and witness separation across a family of spaces.
///
/// Member `i` samples with seed `seed + i`, so serial and parallel runs agree.
pub fn compactness_probe(
    family: &[(usize, MetricMeasureSpace)],
    r: f64,
    spec: &NormSpec,
    epsilon: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    family
        .par_iter()
        .enumerate()
        .map(|(i, (label, space))| {
            let kernel = AveragingKernel::new(space, r)?;
            let samples = sample_unit_sphere(space, spec, n, seed.wrapping_add(i as u64))?;
            let images = samples
                .iter()
                .map(|f| kernel.apply(space, f))
                .collect::<Result<Vec<_>>>()?;
            let k = covering_number(space, &images, epsilon, spec)?.k;
            let (witness_min, witness_count, c_lower) = match witness_sequence(space, r, usize::MAX, spec)? {
                WitnessOutcome::Bounded { centers, c_lower } => (None, centers.len(), c_lower),
                WitnessOutcome::Separated(w) => {
                    let images = w
                        .centers
                        .iter()
                        .map(|&x| kernel.apply(space, &witness_function(space, x, r, spec)?))
                        .collect::<Result<Vec<_>>>()?;
                    let count = covering_number(space, &images, epsilon, spec)?.k;
                    (Some(w.min_distance), count, w.c_lower)
                }
            };
            Ok(ProbeRow {
                label: *label,
                k,
                witness_min,
                c_lower,
                witness_count,
            })
        })
        .collect()
}

/// `L,k,witness_min,c_lower,witness_count` with one row per space.
pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut out = String::from("L,k,witness_min,c_lower,witness_count\n");
    for row in rows {
        let wmin = row.witness_min.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.label, row.k, wmin, row.c_lower, row.witness_count
        ));
    }
    out
}
