//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use loravg::averaging::{
    average, distribution_sweep, equicontinuity_modulus, extremal_function, verify_operator_bound,
    verify_rearrangement_bound, MaximalConstant,
};
use loravg::compactness::{
    compactness_probe, covering_number, sample_unit_sphere, witness_sequence, FamilySpec, WitnessOutcome,
};
use loravg::norms::{chi_norm_closed_form, holder_check, lebesgue_norm, lorentz_norm, norm_equivalence_check};
use loravg::rearrange::hardy_littlewood_check;
use loravg::{BallSpec, FunctionOnSpace, MetricMeasureSpace, NormSpec, Variant};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

const CLOSED_FORM_REL: f64 = 1e-10;
const LEBESGUE_REL: f64 = 1e-10;
const SANDWICH_SLACK: f64 = 1e-12;
const SANDWICH_EDGE_REL: f64 = 1e-12;
const HL_SLACK: f64 = 1e-12;
const CONTRACT_SLACK: f64 = 1e-12;
const EXTREMAL_TOL: f64 = 1e-9;

const LIMIT_CLOSED_FORM: Duration = Duration::from_secs(10);
const LIMIT_WITNESS: Duration = Duration::from_secs(5);
const LIMIT_PROBE: Duration = Duration::from_secs(60);

struct Line {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn within(lhs: f64, rhs: f64, slack: f64) -> bool {
    lhs <= rhs + slack * rhs.abs().max(1.0)
}

fn closed_form_agreement() -> Line {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst, mut failures) = (0.0_f64, 0);
    for _ in 0..500 {
        let space = random_space(&mut rng, 40);
        let atoms = random_subset(&mut rng, space.len());
        let spec = random_spec(&mut rng);
        let chi = FunctionOnSpace::indicator(space.len(), &atoms);
        let value = lorentz_norm(&space, &chi, &spec).unwrap();
        let exact = chi_norm_closed_form(space.measure_of(&atoms).unwrap(), &spec).unwrap();
        let rel = (value - exact).abs() / exact;
        worst = worst.max(rel);
        failures += usize::from(rel > CLOSED_FORM_REL);
    }
    let elapsed = start.elapsed();
    Line {
        id: "1",
        title: "closed-form indicator norms",
        pass: failures == 0 && elapsed < LIMIT_CLOSED_FORM,
        detail: format!("500 instances, {failures} off by > {CLOSED_FORM_REL:e}, worst rel {worst:.2e}, {elapsed:.2?}"),
    }
}

fn lebesgue_diagonal() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let (mut worst, mut failures) = (0.0_f64, 0);
    for _ in 0..500 {
        let space = random_space(&mut rng, 40);
        let f = random_function(&mut rng, space.len());
        let p = if rng.random_bool(0.5) {
            *[1.0, 1.5, 2.0, 3.0, 10.0].choose(&mut rng).unwrap()
        } else {
            rng.random_range(1.0..15.0)
        };
        let lorentz = lorentz_norm(&space, &f, &NormSpec::plain(p, p).unwrap()).unwrap();
        let lebesgue = lebesgue_norm(&space, &f, p).unwrap();
        let ok = rel_close(lorentz, lebesgue, LEBESGUE_REL);
        if lebesgue > 0.0 {
            worst = worst.max((lorentz - lebesgue).abs() / lebesgue);
        }
        failures += usize::from(!ok);
    }
    Line {
        id: "2",
        title: "Lebesgue diagonal p = q",
        pass: failures == 0,
        detail: format!("500 instances, {failures} off by > {LEBESGUE_REL:e}, worst rel {worst:.2e}"),
    }
}

fn norm_sandwich() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut failures = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..500 {
        let space = random_space(&mut rng, 40);
        let f = random_function(&mut rng, space.len());
        let (p, q) = random_exponents(&mut rng);
        let (plain, double) = norm_equivalence_check(&space, &f, p, q).unwrap();
        let hardy = p / (p - 1.0);
        failures +=
            usize::from(!(within(plain, double, SANDWICH_SLACK) && within(double, hardy * plain, SANDWICH_SLACK)));
        if plain > 0.0 {
            tightest = tightest.min(hardy - double / plain);
        }
    }
    let mut edge_failures = 0;
    for _ in 0..100 {
        let space = random_space(&mut rng, 40);
        let chi = FunctionOnSpace::indicator(space.len(), &random_subset(&mut rng, space.len()));
        let p = rng.random_range(1.05..12.0);
        let (plain, double) = norm_equivalence_check(&space, &chi, p, 1.0).unwrap();
        edge_failures += usize::from(!rel_close(double, p / (p - 1.0) * plain, SANDWICH_EDGE_REL));
    }
    Line {
        id: "3",
        title: "norm sandwich plain <= double-star <= p/(p-1) plain",
        pass: failures == 0 && edge_failures == 0,
        detail: format!(
            "500 instances, {failures} violations, smallest gap to p/(p-1) {tightest:.2e}; \
             q = 1 indicators at the upper edge: {} of 100",
            100 - edge_failures
        ),
    }
}

fn hardy_littlewood_and_holder() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let (mut hl_failures, mut holder_failures) = (0, 0);
    for _ in 0..1000 {
        let space = random_space(&mut rng, 40);
        let f = random_function(&mut rng, space.len());
        let g = random_function(&mut rng, space.len());
        let (lhs, rhs) = hardy_littlewood_check(&space, &f, &g).unwrap();
        hl_failures += usize::from(!within(lhs, rhs, HL_SLACK));

        let atoms = random_subset(&mut rng, space.len());
        let (p, q) = random_exponents(&mut rng);
        let (lhs, rhs) = holder_check(&space, &f, &atoms, &NormSpec::plain(p, q).unwrap()).unwrap();
        holder_failures += usize::from(!within(lhs, rhs, HL_SLACK));
    }
    Line {
        id: "4",
        title: "Hardy-Littlewood and Hölder",
        pass: hl_failures == 0 && holder_failures == 0,
        detail: format!(
            "1000 instances, {hl_failures} HL and {holder_failures} Hölder violations at slack {HL_SLACK:e}"
        ),
    }
}

struct AveragingInstance {
    space: MetricMeasureSpace,
    f: FunctionOnSpace,
    r: f64,
    spec: NormSpec,
}

fn averaging_instances() -> Vec<AveragingInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    (0..200)
        .map(|_| {
            let space = random_space(&mut rng, 60);
            let f = random_function(&mut rng, space.len());
            let r = random_radius(&mut rng, &space);
            let (p, q) = random_exponents(&mut rng);
            let variant = if rng.random_bool(0.5) {
                Variant::Plain
            } else {
                Variant::DoubleStar
            };
            AveragingInstance {
                space,
                f,
                r,
                spec: NormSpec::new(p, q, variant).unwrap(),
            }
        })
        .collect()
}

fn distribution_inequality(instances: &[AveragingInstance]) -> Line {
    let mut failures = 0;
    let mut worst = 0.0_f64;
    let mut thresholds = 0;
    for inst in instances {
        let sweep = distribution_sweep(&inst.space, &inst.f, inst.r).unwrap();
        thresholds += sweep.checks.len();
        worst = worst.max(sweep.worst_ratio);
        failures += sweep
            .checks
            .iter()
            .filter(|c| !within(c.lhs, c.rhs, CONTRACT_SLACK))
            .count();
    }
    let c = MaximalConstant::new(&MetricMeasureSpace::lattice(200), 1.0).unwrap().c;
    Line {
        id: "5",
        title: "distribution inequality with c = γ₁γ₂γ₃ + 1",
        pass: failures == 0 && c == 20.0 / 3.0,
        detail: format!(
            "200 instances, {thresholds} thresholds, {failures} violations, worst lhs/rhs {worst:.4}; lattice(200) c = {c:?}"
        ),
    }
}

fn rearrangement_bound(instances: &[AveragingInstance]) -> Line {
    let mut failures = 0;
    let mut worst = 0.0_f64;
    for inst in instances {
        let check = verify_rearrangement_bound(&inst.space, &inst.f, inst.r).unwrap();
        failures += usize::from(!check.pass);
        worst = worst.max(check.max_ratio / check.constant.c);
    }
    Line {
        id: "6",
        title: "(A_r f)* <= c f**",
        pass: failures == 0,
        detail: format!("200 instances, {failures} violations, worst (A_r f)*/(c f**) {worst:.4}"),
    }
}

fn operator_bound(instances: &[AveragingInstance]) -> Line {
    let mut failures = 0;
    let mut worst = 0.0_f64;
    let mut counts = [0usize; 2];
    for inst in instances {
        let check = verify_operator_bound(&inst.space, &inst.f, inst.r, &inst.spec).unwrap();
        counts[usize::from(inst.spec.variant == Variant::DoubleStar)] += 1;
        failures += usize::from(!within(check.lhs, check.rhs, CONTRACT_SLACK));
        if check.rhs > 0.0 {
            worst = worst.max(check.lhs / check.rhs);
        }
    }
    Line {
        id: "7",
        title: "‖A_r f‖ <= c p/(p-1) ‖f‖",
        pass: failures == 0 && counts.iter().all(|&n| n > 0),
        detail: format!(
            "200 instances ({} plain, {} double-star), {failures} violations, worst lhs/rhs {worst:.4}",
            counts[0], counts[1]
        ),
    }
}

fn witness_separation() -> Line {
    let start = Instant::now();
    let space = MetricMeasureSpace::lattice(100);
    let mut parts = Vec::new();
    let mut pass = true;
    for (p, q) in [(2.0, 2.0), (2.0, 1.0), (3.0, f64::INFINITY)] {
        let spec = NormSpec::plain(p, q).unwrap();
        match witness_sequence(&space, 1.0, 5, &spec).unwrap() {
            WitnessOutcome::Separated(w) => {
                let ok = w.centers.len() == 5 && w.c_lower == 0.6 && w.min_distance >= w.c_lower && w.pass;
                pass &= ok;
                parts.push(format!("({p},{q}) min {:.4}", w.min_distance));
            }
            WitnessOutcome::Bounded { .. } => {
                pass = false;
                parts.push(format!("({p},{q}) no witnesses"));
            }
        }
    }
    let elapsed = start.elapsed();
    Line {
        id: "8",
        title: "witness separation on lattice(100)",
        pass: pass && elapsed < LIMIT_WITNESS,
        detail: format!("c_lower = 3/5; {}; {elapsed:.2?}", parts.join(", ")),
    }
}

fn dichotomy_trend() -> Line {
    let start = Instant::now();
    let family = "lattice:10:200:10".parse::<FamilySpec>().unwrap().spaces();
    let spec = NormSpec::lebesgue(2.0).unwrap();
    let rows = compactness_probe(&family, 1.0, &spec, 0.3, 200, 7).unwrap();
    let counts: Vec<usize> = rows.iter().map(|r| r.witness_count).collect();
    let nondecreasing = counts.windows(2).all(|w| w[0] <= w[1]);
    let last = *counts.last().unwrap();
    let elapsed = start.elapsed();
    Line {
        id: "9a",
        title: "separated witness images grow with L",
        pass: nondecreasing && last > 10 && elapsed < LIMIT_PROBE,
        detail: format!("witness counts {counts:?}; {elapsed:.2?}"),
    }
}

fn sample_size_stability() -> Line {
    let start = Instant::now();
    let space = MetricMeasureSpace::lattice(20);
    let spec = NormSpec::lebesgue(2.0).unwrap();
    let k = |n: usize| {
        let images: Vec<FunctionOnSpace> = sample_unit_sphere(&space, &spec, n, 7)
            .unwrap()
            .iter()
            .map(|f| average(&space, f, 1.0).unwrap())
            .collect();
        covering_number(&space, &images, 0.3, &spec).unwrap().k
    };
    let (k200, k400) = (k(200), k(400));
    let elapsed = start.elapsed();
    Line {
        id: "9b",
        title: "covering number on lattice(20) stable when n doubles",
        pass: k200 == k400 && elapsed < LIMIT_PROBE,
        detail: format!("k(n=200) = {k200}, k(n=400) = {k400} at ε = 0.3; {elapsed:.2?}"),
    }
}

fn equicontinuity() -> Line {
    let space = MetricMeasureSpace::lattice(100);
    let spec = NormSpec::lebesgue(2.0).unwrap();
    let samples = sample_unit_sphere(&space, &spec, 100, 110).unwrap();
    let mut bound_failures = 0;
    let mut worst = 0.0_f64;
    for f in &samples {
        let avg = average(&space, f, 1.0).unwrap();
        for x in 0..100 {
            let m = equicontinuity_modulus(&space, x, x + 1, 1.0, &spec).unwrap();
            let diff = (avg.values[x] - avg.values[x + 1]).abs();
            bound_failures += usize::from(!within(diff, m.bound, CONTRACT_SLACK));
            worst = worst.max(diff / m.bound);
        }
    }
    let (mut exact_failures, mut attain_failures) = (0, 0);
    for x in 0..100 {
        let m = equicontinuity_modulus(&space, x, x + 1, 1.0, &spec).unwrap();
        let exact = m.exact.unwrap();
        exact_failures += usize::from(!within(exact, m.bound, CONTRACT_SLACK));
        let f = extremal_function(&space, x, x + 1, 1.0, 2.0).unwrap().unwrap();
        let avg = average(&space, &f, 1.0).unwrap();
        let attained = (avg.values[x] - avg.values[x + 1]).abs();
        let unit = lebesgue_norm(&space, &f, 2.0).unwrap();
        attain_failures += usize::from((attained - exact).abs() > EXTREMAL_TOL || (unit - 1.0).abs() > EXTREMAL_TOL);
    }
    Line {
        id: "10",
        title: "equicontinuity modulus on lattice(100)",
        pass: bound_failures == 0 && exact_failures == 0 && attain_failures == 0,
        detail: format!(
            "100 unit f x 100 pairs: {bound_failures} bound violations (worst ratio {worst:.4}); \
             exact <= bound failures {exact_failures}; extremal misses {attain_failures}"
        ),
    }
}

fn vitali() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let mut failures = 0;
    for _ in 0..200 {
        let space = random_space(&mut rng, 50);
        let family = random_ball_family(&mut rng, &space);
        let kept = space.vitali_subfamily(&family).unwrap();
        let members = |b: &BallSpec, factor: f64| -> Vec<usize> {
            (0..space.len())
                .filter(|&y| space.dist(b.center, y) <= factor * b.radius)
                .collect()
        };
        let mut owner = vec![usize::MAX; space.len()];
        let mut disjoint = true;
        for (i, b) in kept.iter().enumerate() {
            for y in members(b, 1.0) {
                disjoint &= owner[y] == usize::MAX;
                owner[y] = i;
            }
        }
        let enlarged: Vec<bool> = (0..space.len())
            .map(|y| kept.iter().any(|b| space.dist(b.center, y) <= 5.0 * b.radius))
            .collect();
        let covers = family.iter().all(|b| members(b, 1.0).into_iter().all(|y| enlarged[y]));
        failures += usize::from(!(disjoint && covers));
    }
    Line {
        id: "11",
        title: "Vitali subfamily disjoint with 5x cover",
        pass: failures == 0,
        detail: format!("200 families, {failures} failures"),
    }
}

fn run_cli(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_loravg")).args(args).output().unwrap();
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn determinism() -> Line {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    std::fs::write(path("space.json"), r#"{"kind":"lattice","L":60}"#).unwrap();
    std::fs::write(
        path("weighted.json"),
        r#"{"kind":"matrix","dist":[[0,1,2],[1,0,1],[2,1,0]],"weights":[1,2,1]}"#,
    )
    .unwrap();
    std::fs::write(path("f.json"), r#"{"values":[3,1,2]}"#).unwrap();

    let mut identical = 0;
    let mut total = 0;
    let mut compare = |args: Vec<String>, files: &[&str]| {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = run_cli(&args);
        let first_files: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(path(f)).unwrap()).collect();
        let second = run_cli(&args);
        let second_files: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(path(f)).unwrap()).collect();
        total += 1;
        identical += usize::from(first == second && first_files == second_files && !first.0.is_empty());
    };
    let s = path("space.json");
    compare(
        [
            "verify",
            "--lemma",
            "operator-bound",
            "--space",
            &s,
            "--seed",
            "7",
            "--r",
            "1",
        ]
        .map(String::from)
        .to_vec(),
        &[],
    );
    compare(
        [
            "verify",
            "--lemma",
            "distribution",
            "--space",
            &s,
            "--seed",
            "3",
            "--r",
            "2",
        ]
        .map(String::from)
        .to_vec(),
        &[],
    );
    let svg = path("probe.svg");
    compare(
        [
            "probe",
            "--family",
            "lattice:10:40:10",
            "--r",
            "1",
            "--epsilon",
            "0.3",
            "--n",
            "60",
            "--seed",
            "7",
            "--plot",
            &svg,
        ]
        .map(String::from)
        .to_vec(),
        &["probe.svg"],
    );
    let step = path("step.svg");
    compare(
        [
            "rearrange",
            "--space",
            &path("weighted.json"),
            "--fn",
            &path("f.json"),
            "--plot",
            &step,
        ]
        .map(String::from)
        .to_vec(),
        &["step.svg"],
    );
    Line {
        id: "12",
        title: "byte-identical outputs for identical seeds",
        pass: identical == total,
        detail: format!("{identical} of {total} commands reproduced JSON/CSV/SVG byte for byte"),
    }
}

fn main() {
    let instances = averaging_instances();
    let lines = vec![
        closed_form_agreement(),
        lebesgue_diagonal(),
        norm_sandwich(),
        hardy_littlewood_and_holder(),
        distribution_inequality(&instances),
        rearrangement_bound(&instances),
        operator_bound(&instances),
        witness_separation(),
        dichotomy_trend(),
        sample_size_stability(),
        equicontinuity(),
        vitali(),
        determinism(),
    ];
    let mut failed = 0;
    for line in &lines {
        let verdict = if line.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>3} {verdict}  {}: {}", line.id, line.title, line.detail);
        failed += usize::from(!line.pass);
    }
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
