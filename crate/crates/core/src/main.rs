use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use loravg::averaging::{
    average, distribution_sweep, equicontinuity_modulus, verify_operator_bound, verify_rearrangement_bound,
    MaximalConstant,
};
use loravg::compactness::{
    compactness_probe, probe_csv, sample_unit_sphere, simple_approximation, witness_sequence, FamilySpec,
    WitnessOutcome,
};
use loravg::norms::lorentz_norm;
use loravg::plot::{line_chart_svg, step_svg, Series};
use loravg::rearrange::{distribution_function, maximal_profile, rearrangement};
use loravg::report::{read_input, to_json, write_atomic, Check, RunReport};
use loravg::space::BuildOptions;
use loravg::{Error, FunctionOnSpace, MetricMeasureSpace, NormSpec, SpaceDescription, Variant};

#[derive(Parser)]
#[command(
    name = "loravg",
    version,
    about = "Averaging operators and Lorentz norms on finite metric measure spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a space description and print it in explicit matrix form.
    BuildSpace {
        #[arg(long)]
        space: PathBuf,
        /// Skip the O(n³) triangle-inequality check for matrix input.
        #[arg(long)]
        skip_triangle_check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lorentz norm of a function: {value, normable}.
    Norm {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        norm: NormArgs,
    },
    /// Distribution function, decreasing rearrangement and maximal profile.
    Rearrange {
        #[command(flatten)]
        input: Input,
        /// Write an SVG step plot of f*.
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The averaged function A_r f.
    Avg {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one of the averaging inequalities; exit 1 if it fails.
    Verify {
        #[arg(long, value_enum)]
        lemma: Lemma,
        #[arg(long)]
        space: PathBuf,
        /// Function to test; without it a random unit-norm function is drawn from --seed.
        #[arg(long = "fn")]
        function: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        r: f64,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Separated witness functions and the distances between their images.
    Witness {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Covering numbers and witness separation over a family of lattices (CSV).
    Probe {
        /// lattice:L or lattice:START:END:STEP
        #[arg(long)]
        family: String,
        #[arg(long)]
        r: f64,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write an SVG line chart of k and witness_count against L.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Approximate A_r f by a simple function on disjoint balls.
    Approx {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        norm: NormArgs,
        /// Approximate f itself instead of A_r f.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    space: PathBuf,
    #[arg(long = "fn")]
    function: PathBuf,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Use `inf` for q = ∞.
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Plain)]
    variant: VariantArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Plain,
    DoubleStar,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lemma {
    Distribution,
    Rearrange,
    OperatorBound,
    Equicontinuity,
}

impl NormArgs {
    fn spec(&self) -> loravg::Result<NormSpec> {
        let variant = match self.variant {
            VariantArg::Plain => Variant::Plain,
            VariantArg::DoubleStar => Variant::DoubleStar,
        };
        NormSpec::new(self.p, self.q, variant)
    }
}

enum Failure {
    Input(String),
    Contract,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Ctx {
    report: RunReport,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> loravg::Result<Vec<u8>> {
        let bytes = read_input(path)?;
        self.report.add_input(&path.display().to_string(), &bytes);
        Ok(bytes)
    }

    fn json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> std::result::Result<T, Failure> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    fn space(&mut self, path: &Path, opts: BuildOptions) -> std::result::Result<MetricMeasureSpace, Failure> {
        let desc: SpaceDescription = self.json(path)?;
        Ok(MetricMeasureSpace::build_with(&desc, opts)?)
    }

    fn function(&mut self, path: &Path, space: &MetricMeasureSpace) -> std::result::Result<FunctionOnSpace, Failure> {
        let f: FunctionOnSpace = self.json(path)?;
        f.check_on(space)?;
        Ok(f)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => write_atomic(path, text.as_bytes())
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Outcome {
    emit(out, &to_json(value)?)
}

fn verdict(pass: bool) -> Outcome {
    if pass {
        Ok(())
    } else {
        Err(Failure::Contract)
    }
}

fn run(command: Command, ctx: &mut Ctx) -> Outcome {
    let opts = BuildOptions::from_env();
    match command {
        Command::BuildSpace {
            space,
            skip_triangle_check,
            out,
        } => {
            let opts = BuildOptions {
                skip_triangle_check,
                ..opts
            };
            let built = ctx.space(&space, opts)?;
            emit_json(out.as_deref(), &built.to_description())
        }
        Command::Norm { input, norm } => {
            let spec = norm.spec()?;
            let space = ctx.space(&input.space, opts)?;
            let f = ctx.function(&input.function, &space)?;
            let value = lorentz_norm(&space, &f, &spec)?;
            emit_json(None, &json!({ "value": value, "normable": spec.is_normable() }))
        }
        Command::Rearrange { input, plot, out } => {
            let space = ctx.space(&input.space, opts)?;
            let f = ctx.function(&input.function, &space)?;
            let star = rearrangement(&space, &f)?;
            let body = json!({
                "distribution": distribution_function(&space, &f)?,
                "rearrangement": star,
                "maximal_profile": maximal_profile(&space, &f)?,
            });
            if let Some(path) = plot {
                emit(Some(&path), &step_svg(&star, "decreasing rearrangement"))?;
            }
            emit_json(out.as_deref(), &body)
        }
        Command::Avg { input, r, out } => {
            let space = ctx.space(&input.space, opts)?;
            let f = ctx.function(&input.function, &space)?;
            emit_json(out.as_deref(), &average(&space, &f, r)?)
        }
        Command::Verify {
            lemma,
            space,
            function,
            seed,
            r,
            norm,
            out,
        } => {
            let spec = norm.spec()?;
            let space = ctx.space(&space, opts)?;
            let f = match (function, seed) {
                (Some(path), _) => ctx.function(&path, &space)?,
                (None, Some(seed)) => sample_unit_sphere(&space, &spec, 1, seed)?.remove(0),
                (None, None) => return Err(Failure::Input("verify needs --fn or --seed".into())),
            };
            let (constant_c, worst_ratio) = verify(lemma, &space, &f, r, &spec, &mut ctx.report)?;
            let pass = ctx.report.pass();
            emit_json(
                out.as_deref(),
                &json!({
                    "lemma": lemma.to_possible_value().map(|v| v.get_name().to_string()),
                    "constant_c": constant_c,
                    "worst_ratio": worst_ratio,
                    "pass": pass,
                    "report": ctx.report,
                }),
            )?;
            verdict(pass)
        }
        Command::Witness { space, r, k, norm, out } => {
            let spec = norm.spec()?;
            let space = ctx.space(&space, opts)?;
            let outcome = witness_sequence(&space, r, k, &spec)?;
            emit_json(out.as_deref(), &outcome)?;
            verdict(match outcome {
                WitnessOutcome::Bounded { .. } => true,
                WitnessOutcome::Separated(w) => w.pass,
            })
        }
        Command::Probe {
            family,
            r,
            norm,
            epsilon,
            n,
            seed,
            out,
            plot,
        } => {
            let seed = seed.ok_or_else(|| Failure::Input("probe needs --seed".into()))?;
            let spec = norm.spec()?;
            let family: FamilySpec = family.parse()?;
            let max = opts.max_atoms;
            if let Some(big) = family.lengths().find(|l| l + 1 > max) {
                return Err(Failure::Input(format!("lattice({big}) exceeds the {max}-atom cap")));
            }
            let rows = compactness_probe(&family.spaces(), r, &spec, epsilon, n, seed)?;
            if let Some(path) = plot {
                let series = vec![
                    Series {
                        name: "k".into(),
                        points: rows.iter().map(|row| (row.label as f64, row.k as f64)).collect(),
                    },
                    Series {
                        name: "witness_count".into(),
                        points: rows
                            .iter()
                            .map(|row| (row.label as f64, row.witness_count as f64))
                            .collect(),
                    },
                ];
                emit(Some(&path), &line_chart_svg(&series, "covering numbers", "L", "count"))?;
            }
            emit(out.as_deref(), &probe_csv(&rows))
        }
        Command::Approx {
            input,
            r,
            epsilon,
            norm,
            raw,
            out,
        } => {
            let spec = norm.spec()?;
            let space = ctx.space(&input.space, opts)?;
            let f = ctx.function(&input.function, &space)?;
            let g = if raw { f } else { average(&space, &f, r)? };
            emit_json(out.as_deref(), &simple_approximation(&space, &g, r, epsilon, &spec)?)
        }
    }
}

/// Runs one lemma check, appending its checks to `report`.
/// Returns `(constant_c, worst_ratio)`.
fn verify(
    lemma: Lemma,
    space: &MetricMeasureSpace,
    f: &FunctionOnSpace,
    r: f64,
    spec: &NormSpec,
    report: &mut RunReport,
) -> loravg::Result<(f64, f64)> {
    match lemma {
        Lemma::Distribution => {
            let sweep = distribution_sweep(space, f, r)?;
            for c in &sweep.checks {
                report.push(Check::new("distribution", c.lhs, c.rhs, c.pass).constant("t", c.t));
            }
            Ok((sweep.constant.c, sweep.worst_ratio))
        }
        Lemma::Rearrange => {
            let check = verify_rearrangement_bound(space, f, r)?;
            let c = check.constant.c;
            report.push(
                Check::new("rearrange", check.max_ratio, c, check.pass)
                    .constant("c", c)
                    .constant("argmax_t", check.argmax_t),
            );
            Ok((c, check.max_ratio))
        }
        Lemma::OperatorBound => {
            let check = verify_operator_bound(space, f, r, spec)?;
            report.push(
                Check::new("operator-bound", check.lhs, check.rhs, check.pass)
                    .constant("c", check.constant.c)
                    .constant("factor", check.factor),
            );
            let ratio = if check.rhs > 0.0 { check.lhs / check.rhs } else { 0.0 };
            Ok((check.constant.c, ratio))
        }
        Lemma::Equicontinuity => {
            let constant = MaximalConstant::new(space, r)?;
            let avg = average(space, f, r)?;
            let norm = lorentz_norm(space, f, spec)?;
            let mut worst = 0.0_f64;
            for x in 0..space.len() {
                for y in (x + 1)..space.len() {
                    if space.dist(x, y) > r {
                        continue;
                    }
                    let modulus = equicontinuity_modulus(space, x, y, r, spec)?;
                    let lhs = (avg.values[x] - avg.values[y]).abs();
                    let rhs = modulus.bound * norm;
                    let pass = lhs <= rhs * (1.0 + 1e-12) + 1e-12;
                    if rhs > 0.0 {
                        worst = worst.max(lhs / rhs);
                    }
                    report.push(
                        Check::new(format!("equicontinuity({x},{y})"), lhs, rhs, pass).constant("bound", modulus.bound),
                    );
                }
            }
            Ok((constant.c, worst))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let started = Instant::now();
    let mut ctx = Ctx {
        report: RunReport::new(std::env::args().collect()),
    };
    let result = run(cli.command, &mut ctx);
    eprintln!("wall time: {:.3} s", started.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Contract) => {
            eprintln!("contract check failed");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
