//! Random spaces, functions and norm parameters shared by the integration tests.
#![allow(dead_code)]

use loravg::space::CloudMetric;
use loravg::{BallSpec, FunctionOnSpace, MetricMeasureSpace, NormSpec, SpaceDescription, Variant};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const P_GRID: [f64; 4] = [1.5, 2.0, 3.0, 10.0];
pub const Q_GRID: [f64; 5] = [1.0, 2.0, 3.0, 3.5, f64::INFINITY];

fn weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    if rng.random_bool(0.3) {
        vec![1.0; n]
    } else {
        (0..n).map(|_| rng.random_range(0.25..4.0)).collect()
    }
}

/// A lattice, a point cloud under one of the three metrics, or a connected
/// weighted graph, with 2 to `max_atoms` atoms.
pub fn random_space(rng: &mut impl Rng, max_atoms: usize) -> MetricMeasureSpace {
    let n = rng.random_range(2..=max_atoms);
    let desc = match rng.random_range(0..3) {
        0 => SpaceDescription::lattice(n - 1),
        1 => {
            let dim = rng.random_range(1..=3);
            // integer coordinates make ties in distances common
            let coords = (0..n)
                .map(|i| {
                    let mut c: Vec<f64> = (0..dim).map(|_| rng.random_range(0..8) as f64).collect();
                    c[0] += 8.0 * i as f64 / n as f64;
                    c[0] += i as f64 * 1e-3;
                    c
                })
                .collect();
            let metric = *[CloudMetric::Euclidean, CloudMetric::L1, CloudMetric::Linf]
                .choose(rng)
                .unwrap();
            SpaceDescription::cloud(coords, metric, Some(weights(rng, n)))
        }
        _ => {
            let mut edges: Vec<(usize, usize, f64)> = (1..n)
                .map(|v| (rng.random_range(0..v), v, rng.random_range(1..4) as f64))
                .collect();
            for _ in 0..n / 2 {
                let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
                if a != b {
                    edges.push((a, b, rng.random_range(1..4) as f64));
                }
            }
            SpaceDescription::graph(n, edges, Some(weights(rng, n)))
        }
    };
    MetricMeasureSpace::build(&desc).expect("generated spaces are valid")
}

/// Signed values from a small pool so that ties and zeros occur.
pub fn random_function(rng: &mut impl Rng, n: usize) -> FunctionOnSpace {
    let pool: Vec<f64> = (0..rng.random_range(1..=6))
        .map(|_| rng.random_range(-5.0..5.0))
        .collect();
    FunctionOnSpace::new(
        (0..n)
            .map(|_| {
                if rng.random_bool(0.25) {
                    0.0
                } else if rng.random_bool(0.5) {
                    *pool.choose(rng).unwrap()
                } else {
                    rng.random_range(-5.0..5.0)
                }
            })
            .collect(),
    )
}

/// Nonempty random subset of `0..n`, sorted.
pub fn random_subset(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut atoms: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
    if atoms.is_empty() {
        atoms.push(rng.random_range(0..n));
    }
    atoms
}

/// A radius that is either an attained distance or a random value up to the diameter.
pub fn random_radius(rng: &mut impl Rng, space: &MetricMeasureSpace) -> f64 {
    let n = space.len();
    let diam = space.diameter();
    if rng.random_bool(0.5) {
        let d = space.dist(rng.random_range(0..n), rng.random_range(0..n));
        if d > 0.0 {
            return d;
        }
    }
    rng.random_range(0.05..=diam.max(0.1))
}

pub fn random_spec(rng: &mut impl Rng) -> NormSpec {
    let p = *P_GRID.choose(rng).unwrap();
    let q = *Q_GRID.choose(rng).unwrap();
    let variant = if rng.random_bool(0.5) {
        Variant::Plain
    } else {
        Variant::DoubleStar
    };
    NormSpec::new(p, q, variant).unwrap()
}

/// Exponents drawn from the grids or continuously, with `1 < p < ∞`.
pub fn random_exponents(rng: &mut impl Rng) -> (f64, f64) {
    if rng.random_bool(0.5) {
        (*P_GRID.choose(rng).unwrap(), *Q_GRID.choose(rng).unwrap())
    } else {
        let q = if rng.random_bool(0.1) {
            f64::INFINITY
        } else {
            rng.random_range(1.0..12.0)
        };
        (rng.random_range(1.05..12.0), q)
    }
}

pub fn random_ball_family(rng: &mut impl Rng, space: &MetricMeasureSpace) -> Vec<BallSpec> {
    let count = rng.random_range(1..=12);
    (0..count)
        .map(|_| BallSpec {
            center: rng.random_range(0..space.len()),
            radius: random_radius(rng, space),
        })
        .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
