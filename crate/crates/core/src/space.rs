//! Finite atomic metric measure spaces.
//!
//! A space is a finite set of atoms `0..n` with a metric `d` and strictly
//! positive atom weights. Every closed ball `B(x, r) = {y : d(x, y) <= r}`
//! contains its center, so its measure lies in `(0, μ(X)]`.

use petgraph::algo::floyd_warshall;
use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of atoms accepted when building a space.
pub const DEFAULT_MAX_ATOMS: usize = 5000;

/// Environment variable overriding [`DEFAULT_MAX_ATOMS`].
pub const MAX_ATOMS_ENV: &str = "LORAVG_MAX_ATOMS";

/// Relative slack for the triangle-inequality check on explicit matrices.
const TRIANGLE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Matrix,
    Cloud,
    Lattice,
    Graph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudMetric {
    Euclidean,
    L1,
    Linf,
}

impl CloudMetric {
    fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            CloudMetric::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            CloudMetric::L1 => diffs.sum(),
            CloudMetric::Linf => diffs.fold(0.0, f64::max),
        }
    }
}

/// The JSON description a space is built from.
///
/// `weights` defaults to all ones. `matrix` needs `dist`, `cloud` needs
/// `coords` and `metric`, `lattice` needs `L`, and `graph` needs `n` and
/// `edges` as `[u, v, length]` triples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDescription {
    pub kind: SpaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<CloudMetric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub lattice_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize, f64)>>,
}

impl SpaceDescription {
    fn empty(kind: SpaceKind) -> Self {
        SpaceDescription {
            kind,
            dist: None,
            coords: None,
            metric: None,
            weights: None,
            lattice_len: None,
            n: None,
            edges: None,
        }
    }

    pub fn lattice(len: usize) -> Self {
        SpaceDescription {
            lattice_len: Some(len),
            ..Self::empty(SpaceKind::Lattice)
        }
    }

    pub fn matrix(dist: Vec<Vec<f64>>, weights: Vec<f64>) -> Self {
        SpaceDescription {
            dist: Some(dist),
            weights: Some(weights),
            ..Self::empty(SpaceKind::Matrix)
        }
    }

    pub fn cloud(coords: Vec<Vec<f64>>, metric: CloudMetric, weights: Option<Vec<f64>>) -> Self {
        SpaceDescription {
            coords: Some(coords),
            metric: Some(metric),
            weights,
            ..Self::empty(SpaceKind::Cloud)
        }
    }

    pub fn graph(n: usize, edges: Vec<(usize, usize, f64)>, weights: Option<Vec<f64>>) -> Self {
        SpaceDescription {
            n: Some(n),
            edges: Some(edges),
            weights,
            ..Self::empty(SpaceKind::Graph)
        }
    }
}

/// Limits applied while building a space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    /// Spaces with more atoms than this are rejected.
    pub max_atoms: usize,
    /// Trust an explicit matrix to satisfy the triangle inequality and skip
    /// the `O(n³)` check. Generated metrics are never checked.
    pub skip_triangle_check: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_atoms: DEFAULT_MAX_ATOMS,
            skip_triangle_check: false,
        }
    }
}

impl BuildOptions {
    /// Defaults, with the atom cap taken from `LORAVG_MAX_ATOMS` when set.
    pub fn from_env() -> Self {
        let max_atoms = std::env::var(MAX_ATOMS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_ATOMS);
        BuildOptions {
            max_atoms,
            ..Default::default()
        }
    }
}

/// A closed ball together with its atoms (ascending) and measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub atoms: Vec<usize>,
    pub measure: f64,
}

/// Center and radius of a closed ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: usize,
    pub radius: f64,
}

/// Tight `s`-doubling constant of a space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingReport {
    pub scale: f64,
    /// `max_x μ(B(x,2s)) / μ(B(x,s))`.
    pub gamma: f64,
    pub ratios: Vec<f64>,
    pub argmax: usize,
    /// `μ(B(argmax, 2s))`.
    pub outer_measure: f64,
    /// `μ(B(argmax, s))`.
    pub inner_measure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub radius: f64,
    pub diameter: f64,
    pub total_measure: f64,
    /// `inf_x μ(B(x, r))`.
    pub min_ball_measure: f64,
    /// `inf_x μ(B(x, r)) / μ(B(x, 2r))`.
    pub min_ball_ratio: f64,
    /// Doubling constants at scales `r`, `2r`, `4r`.
    pub doubling: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricMeasureSpace {
    n: usize,
    dist: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl MetricMeasureSpace {
    /// Builds a space from its description with [`BuildOptions::from_env`].
    pub fn build(desc: &SpaceDescription) -> Result<Self> {
        Self::build_with(desc, BuildOptions::from_env())
    }

    pub fn build_with(desc: &SpaceDescription, opts: BuildOptions) -> Result<Self> {
        let n = match desc.kind {
            SpaceKind::Matrix => required(&desc.dist, "dist")?.len(),
            SpaceKind::Cloud => required(&desc.coords, "coords")?.len(),
            SpaceKind::Lattice => required(&desc.lattice_len, "L")?.saturating_add(1),
            SpaceKind::Graph => *required(&desc.n, "n")?,
        };
        if n == 0 {
            return Err(Error::Domain("a space needs at least one atom".into()));
        }
        if n > opts.max_atoms {
            return Err(Error::Domain(format!(
                "{n} atoms exceeds the limit of {}; raise {MAX_ATOMS_ENV} to allow it",
                opts.max_atoms
            )));
        }
        let weights = match &desc.weights {
            Some(w) => w.clone(),
            None => vec![1.0; n],
        };
        let dist = match desc.kind {
            SpaceKind::Matrix => flatten_matrix(required(&desc.dist, "dist")?)?,
            SpaceKind::Cloud => {
                let coords = required(&desc.coords, "coords")?;
                let metric = *required(&desc.metric, "metric")?;
                cloud_distances(coords, metric)?
            }
            SpaceKind::Lattice => (0..n).flat_map(|i| (0..n).map(move |j| i.abs_diff(j) as f64)).collect(),
            SpaceKind::Graph => graph_distances(n, required(&desc.edges, "edges")?)?,
        };
        let check_triangle = desc.kind == SpaceKind::Matrix && !opts.skip_triangle_check;
        Self::from_parts(n, dist, weights, check_triangle)
    }

    /// Lattice `{0, 1, ..., len}` on the line with `|x - y|` and unit weights.
    pub fn lattice(len: usize) -> Self {
        let n = len + 1;
        let dist = (0..n).flat_map(|i| (0..n).map(move |j| i.abs_diff(j) as f64)).collect();
        MetricMeasureSpace {
            n,
            dist,
            weights: vec![1.0; n],
            total: n as f64,
        }
    }

    /// Builds from a full distance matrix, validating every metric axiom.
    pub fn from_matrix(dist: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let n = dist.len();
        let flat = flatten_matrix(&dist)?;
        Self::from_parts(n, flat, weights, true)
    }

    fn from_parts(n: usize, dist: Vec<f64>, weights: Vec<f64>, check_triangle: bool) -> Result<Self> {
        if weights.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: weights.len(),
            });
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Domain(format!(
                "weight of atom {i} is {w}; weights must be positive and finite"
            )));
        }
        check_basic_axioms(n, &dist)?;
        if check_triangle {
            check_triangle_inequality(n, &dist)?;
        }
        let total = weights.iter().sum();
        Ok(MetricMeasureSpace {
            n,
            dist,
            weights,
            total,
        })
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `μ(X)`.
    pub fn total_measure(&self) -> f64 {
        self.total
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn check_atom(&self, x: usize) -> Result<()> {
        if x < self.n {
            Ok(())
        } else {
            Err(Error::InvalidAtom {
                index: x,
                atoms: self.n,
            })
        }
    }

    /// Sum of weights over a set of atoms. Duplicates are counted once.
    pub fn measure_of(&self, atoms: &[usize]) -> Result<f64> {
        let mut seen = vec![false; self.n];
        let mut m = 0.0;
        for &a in atoms {
            self.check_atom(a)?;
            if !std::mem::replace(&mut seen[a], true) {
                m += self.weights[a];
            }
        }
        Ok(m)
    }

    /// Whether `y ∈ B(x, r)`.
    #[inline]
    pub fn in_ball(&self, x: usize, r: f64, y: usize) -> bool {
        self.dist(x, y) <= r
    }

    /// The closed ball `B(x, r)`.
    pub fn ball(&self, x: usize, r: f64) -> Result<Ball> {
        self.check_atom(x)?;
        check_radius(r)?;
        let atoms: Vec<usize> = (0..self.n).filter(|&y| self.in_ball(x, r, y)).collect();
        let measure = atoms.iter().map(|&y| self.weights[y]).sum();
        Ok(Ball {
            center: x,
            radius: r,
            atoms,
            measure,
        })
    }

    /// `μ(B(x, r))` without materializing the atom list.
    pub fn ball_measure(&self, x: usize, r: f64) -> f64 {
        let row = &self.dist[x * self.n..(x + 1) * self.n];
        row.iter()
            .zip(&self.weights)
            .filter(|(d, _)| **d <= r)
            .map(|(_, w)| w)
            .sum()
    }

    /// Ball measures `μ(B(x, r))` for every atom.
    pub fn ball_measures(&self, r: f64) -> Vec<f64> {
        (0..self.n).map(|x| self.ball_measure(x, r)).collect()
    }

    /// Tight doubling constant `sup_x μ(B(x,2s)) / μ(B(x,s))`.
    pub fn doubling_constant(&self, s: f64) -> Result<DoublingReport> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Domain(format!(
                "doubling scale must be positive and finite, got {s}"
            )));
        }
        let mut ratios = Vec::with_capacity(self.n);
        let (mut argmax, mut best, mut outer, mut inner) = (0, f64::NEG_INFINITY, 0.0, 0.0);
        for x in 0..self.n {
            let small = self.ball_measure(x, s);
            let big = self.ball_measure(x, 2.0 * s);
            let ratio = big / small;
            if ratio > best {
                (argmax, best, outer, inner) = (x, ratio, big, small);
            }
            ratios.push(ratio);
        }
        Ok(DoublingReport {
            scale: s,
            gamma: best,
            ratios,
            argmax,
            outer_measure: outer,
            inner_measure: inner,
        })
    }

    /// Up to `k` atoms with pairwise distances strictly greater than `delta`.
    ///
    /// Atoms are scanned in index order and kept when they are farther than
    /// `delta` from every atom kept so far.
    pub fn separated_points(&self, delta: f64, k: usize) -> Vec<usize> {
        let mut kept: Vec<usize> = Vec::new();
        for x in 0..self.n {
            if kept.len() >= k {
                break;
            }
            if kept.iter().all(|&y| self.dist(x, y) > delta) {
                kept.push(x);
            }
        }
        kept
    }

    /// Greedy disjoint subfamily whose 5× enlargements cover the family.
    ///
    /// Balls are visited by decreasing radius, ties by lower center index,
    /// and kept when they share no atom with an already kept ball.
    pub fn vitali_subfamily(&self, family: &[BallSpec]) -> Result<Vec<BallSpec>> {
        for b in family {
            self.check_atom(b.center)?;
            check_radius(b.radius)?;
        }
        let mut order: Vec<&BallSpec> = family.iter().collect();
        order.sort_by(|a, b| b.radius.total_cmp(&a.radius).then(a.center.cmp(&b.center)));

        let mut covered = vec![false; self.n];
        let mut kept = Vec::new();
        for b in order {
            let meets = (0..self.n).any(|y| covered[y] && self.in_ball(b.center, b.radius, y));
            if meets {
                continue;
            }
            for (y, c) in covered.iter_mut().enumerate() {
                if self.in_ball(b.center, b.radius, y) {
                    *c = true;
                }
            }
            kept.push(*b);
        }

        assert!(
            self.pairwise_disjoint(&kept),
            "Vitali selection produced overlapping balls"
        );
        assert!(
            self.enlargement_covers(&kept, 5.0, family),
            "5x enlargement of the Vitali subfamily misses part of the family"
        );
        Ok(kept)
    }

    /// Whether no atom lies in two of the given balls.
    pub fn pairwise_disjoint(&self, balls: &[BallSpec]) -> bool {
        let mut seen = vec![false; self.n];
        for b in balls {
            for (y, s) in seen.iter_mut().enumerate() {
                if self.in_ball(b.center, b.radius, y) {
                    if *s {
                        return false;
                    }
                    *s = true;
                }
            }
        }
        true
    }

    /// Whether `⋃ B(c, factor·r)` over `balls` contains every ball of `family`.
    pub fn enlargement_covers(&self, balls: &[BallSpec], factor: f64, family: &[BallSpec]) -> bool {
        (0..self.n).all(|y| {
            let needed = family.iter().any(|b| self.in_ball(b.center, b.radius, y));
            !needed || balls.iter().any(|b| self.in_ball(b.center, factor * b.radius, y))
        })
    }

    /// `μ(B(x,r) △ B(y,r))`.
    pub fn symm_diff_measure(&self, x: usize, y: usize, r: f64) -> Result<f64> {
        self.check_atom(x)?;
        self.check_atom(y)?;
        check_radius(r)?;
        Ok((0..self.n)
            .filter(|&z| self.in_ball(x, r, z) != self.in_ball(y, r, z))
            .map(|z| self.weights[z])
            .sum())
    }

    pub fn boundedness_report(&self, r: f64) -> Result<BoundednessReport> {
        let g1 = self.doubling_constant(r)?.gamma;
        let g2 = self.doubling_constant(2.0 * r)?.gamma;
        let g3 = self.doubling_constant(4.0 * r)?.gamma;
        let small = self.ball_measures(r);
        let min_ball_measure = small.iter().copied().fold(f64::INFINITY, f64::min);
        let min_ball_ratio = small
            .iter()
            .enumerate()
            .map(|(x, m)| m / self.ball_measure(x, 2.0 * r))
            .fold(f64::INFINITY, f64::min);
        Ok(BoundednessReport {
            radius: r,
            diameter: self.diameter(),
            total_measure: self.total,
            min_ball_measure,
            min_ball_ratio,
            doubling: [g1, g2, g3],
        })
    }

    /// Explicit-matrix description of this space.
    pub fn to_description(&self) -> SpaceDescription {
        let dist = self.dist.chunks(self.n).map(<[f64]>::to_vec).collect();
        SpaceDescription::matrix(dist, self.weights.clone())
    }
}

fn required<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| Error::Parse(format!("missing field `{name}` for this space kind")))
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    Ok(())
}

fn flatten_matrix(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = rows.len();
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(Error::NotMetric(format!(
            "row {i} has {} entries, expected {n}",
            row.len()
        )));
    }
    Ok(rows.iter().flatten().copied().collect())
}

fn cloud_distances(coords: &[Vec<f64>], metric: CloudMetric) -> Result<Vec<f64>> {
    let dim = coords.first().map_or(0, Vec::len);
    if let Some((i, _)) = coords.iter().enumerate().find(|(_, c)| c.len() != dim) {
        return Err(Error::Parse(format!("point {i} does not have dimension {dim}")));
    }
    if coords.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Domain("coordinates must be finite".into()));
    }
    Ok(coords
        .iter()
        .flat_map(|a| coords.iter().map(move |b| metric.distance(a, b)))
        .collect())
}

fn graph_distances(n: usize, edges: &[(usize, usize, f64)]) -> Result<Vec<f64>> {
    let mut graph = UnGraph::<(), f64>::with_capacity(n, edges.len());
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for &(u, v, len) in edges {
        if u >= n || v >= n {
            return Err(Error::InvalidAtom {
                index: u.max(v),
                atoms: n,
            });
        }
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::Domain(format!(
                "edge ({u},{v}) has length {len}; lengths must be positive"
            )));
        }
        graph.add_edge(nodes[u], nodes[v], len);
    }
    let paths =
        floyd_warshall(&graph, |e| *e.weight()).map_err(|_| Error::Domain("graph has a negative cycle".into()))?;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = paths.get(&(nodes[i], nodes[j])).copied().unwrap_or(f64::INFINITY);
            // unreachable pairs come back as f64::MAX
            if !d.is_finite() || d == f64::MAX {
                return Err(Error::Domain(format!("graph is disconnected: no path from {i} to {j}")));
            }
            dist[i * n + j] = d;
        }
    }
    Ok(dist)
}

fn check_basic_axioms(n: usize, dist: &[f64]) -> Result<()> {
    for i in 0..n {
        for j in 0..n {
            let d = dist[i * n + j];
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::NotMetric(format!(
                    "d({i},{j}) = {d} is not a finite nonnegative number"
                )));
            }
            if i == j && d != 0.0 {
                return Err(Error::NotMetric(format!("d({i},{i}) = {d} must be 0")));
            }
            if i != j && d == 0.0 {
                return Err(Error::NotMetric(format!(
                    "distinct atoms {i} and {j} are at distance 0"
                )));
            }
            if d != dist[j * n + i] {
                return Err(Error::NotMetric(format!(
                    "d({i},{j}) = {d} differs from d({j},{i}) = {}",
                    dist[j * n + i]
                )));
            }
        }
    }
    Ok(())
}

fn check_triangle_inequality(n: usize, dist: &[f64]) -> Result<()> {
    for i in 0..n {
        for k in (i + 1)..n {
            let direct = dist[i * n + k];
            for j in 0..n {
                let via = dist[i * n + j] + dist[j * n + k];
                if direct > via + TRIANGLE_SLACK * direct {
                    return Err(Error::TriangleViolation { i, j, k, direct, via });
                }
            }
        }
    }
    Ok(())
}
