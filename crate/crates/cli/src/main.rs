//! `simdoc`: generate document-similarity instances, run exact and
//! heuristic solvers, apply reductions between problem forms, and drive
//! benchmark and accuracy sweeps.
//!
//! Exit codes: 0 success, 2 validation or input-format error, 3 solver
//! failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use simdoc_core::attention::ProblemTag;
use simdoc_core::bench::{
    bench_scaling, build_spec_for, compare_accuracy, solve_decision, write_csv, BenchConfig,
    CompareConfig, SolverSpecTag,
};
use simdoc_core::exact::parse_rational;
use simdoc_core::instances::{
    gen_random, gen_random_bichrom, plant, read_bichrom, read_set, write_bichrom, write_set,
    PlantKind, PlantSpec,
};
use simdoc_core::oracles::Threshold;
use simdoc_core::reductions::{
    ov_bichrom_to_mono, ov_mono_to_bichrom, pad_equal_popcount, tensor_power, MonoToBichrom,
};
use simdoc_core::{Error, Result};

#[derive(Parser)]
#[command(name = "simdoc", about = "Document-similarity solvers, reductions, and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file
    Gen(GenArgs),
    /// Decide one instance with a chosen solver backend
    Solve(SolveArgs),
    /// Rewrite an instance through a reduction
    Reduce(ReduceArgs),
    /// Run a runtime-scaling benchmark from a TOML config
    Bench(BenchArgs),
    /// Compare solver accuracies on a planted family
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of vectors (per side for --bichrom)
    #[arg(long)]
    n: usize,
    /// Dimension
    #[arg(long)]
    l: usize,
    /// Per-coordinate one-probability
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generate a two-set instance instead of a single set
    #[arg(long)]
    bichrom: bool,
    /// Plant a witness pair: orthogonal | ip-at-least:<t> | ip-at-most:<t>
    /// | cosine-at-least:<p/q> | cosine-at-most:<p/q>
    #[arg(long)]
    plant: Option<String>,
    /// Indices of the planted pair, e.g. 0,1
    #[arg(long, requires = "plant", default_value = "0,1")]
    pair: String,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// ov | max-ip | min-ip | msd | lsd
    #[arg(long)]
    problem: String,
    /// oracle | fast-ov | transformer | reduction:<name> | heuristic:<kind>:<param>
    #[arg(long, default_value = "oracle")]
    solver: String,
    /// Decision threshold: integer for max-ip/min-ip, rational p/q for msd/lsd
    #[arg(long)]
    threshold: Option<String>,
    /// Instance file produced by `gen`
    #[arg(long)]
    input: PathBuf,
    /// Seed for randomized (heuristic) backends
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ReduceArgs {
    /// ov-mono | ov-bichrom | bichrom | mono
    #[arg(long)]
    from: String,
    /// ov-bichrom | ov-mono | equal-popcount | tensor:<q>
    #[arg(long)]
    to: String,
    #[arg(long)]
    input: PathBuf,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML benchmark configuration
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Instance family (only `msd` is available)
    #[arg(long, default_value = "msd")]
    family: String,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    l: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated solver tags
    #[arg(long, default_value = "oracle,transformer,heuristic:sampled:8")]
    solvers: String,
    /// Evaluate instances on multiple threads (same counts, faster)
    #[arg(long)]
    parallel: bool,
    /// CSV output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Validation(_) | Error::Codec { .. } => ExitCode::from(2),
                Error::Solver(_) | Error::Io(_) => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_plant(spec: &str, pair: &str) -> Result<PlantSpec> {
    let (i, j) = pair
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
        .ok_or_else(|| Error::validation(format!("pair `{pair}` is not `i,j`")))?;
    let (kind, value) = match spec.split_once(':') {
        Some((k, v)) => (k, Some(v)),
        None => (spec, None),
    };
    let need =
        || value.ok_or_else(|| Error::validation(format!("plant kind `{kind}` needs a value")));
    let kind = match kind {
        "orthogonal" => PlantKind::OrthogonalPair,
        "ip-at-least" => PlantKind::IpAtLeast(
            need()?.parse().map_err(|_| Error::validation("bad integer plant value"))?,
        ),
        "ip-at-most" => PlantKind::IpAtMost(
            need()?.parse().map_err(|_| Error::validation("bad integer plant value"))?,
        ),
        "cosine-at-least" => PlantKind::CosineAtLeast(parse_rational(need()?)?),
        "cosine-at-most" => PlantKind::CosineAtMost(parse_rational(need()?)?),
        other => return Err(Error::validation(format!("unknown plant kind `{other}`"))),
    };
    PlantSpec::new(kind, i, j)
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    if args.bichrom {
        if args.plant.is_some() {
            return Err(Error::validation("--plant applies to single-set instances only"));
        }
        let inst = gen_random_bichrom(args.n, args.l, args.p, args.seed)?;
        return emit(&args.output, &write_bichrom(&inst));
    }
    let mut set = gen_random(args.n, args.l, args.p, args.seed)?;
    if let Some(spec) = &args.plant {
        let spec = parse_plant(spec, &args.pair)?;
        set = plant(&set, &spec, args.seed ^ 0x9e37_79b9_7f4a_7c15)?;
    }
    emit(&args.output, &write_set(&set))
}

fn parse_threshold(tag: ProblemTag, raw: &Option<String>) -> Result<Option<Threshold>> {
    match (tag, raw) {
        (ProblemTag::Ov, None) => Ok(None),
        (ProblemTag::Ov, Some(_)) => Err(Error::validation("ov takes no threshold")),
        (_, None) => Err(Error::validation(format!("{} needs --threshold", tag.as_str()))),
        (ProblemTag::MaxIp | ProblemTag::MinIp, Some(s)) => Ok(Some(Threshold::Ip(
            s.parse().map_err(|_| Error::validation("threshold must be a nonnegative integer"))?,
        ))),
        (ProblemTag::Msd | ProblemTag::Lsd, Some(s)) => {
            Ok(Some(Threshold::Cosine(parse_rational(s)?)))
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let tag = ProblemTag::parse(&args.problem)?;
    let solver = SolverSpecTag::parse(&args.solver)?;
    let set = read_set(&fs::read_to_string(&args.input)?)?;
    let threshold = parse_threshold(tag, &args.threshold)?;
    let spec = match solver {
        SolverSpecTag::Transformer | SolverSpecTag::Heuristic(_) => {
            Some(build_spec_for(tag, set.n(), set.dim(), &threshold)?)
        }
        _ => None,
    };
    let answer = solve_decision(tag, &solver, &set, &threshold, spec.as_ref(), args.seed)?;
    println!("{}", if answer { "yes" } else { "no" });
    Ok(())
}

fn cmd_reduce(args: ReduceArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input)?;
    let out = match (args.from.as_str(), args.to.as_str()) {
        ("ov-mono", "ov-bichrom") => match ov_mono_to_bichrom(&read_set(&text)?)? {
            MonoToBichrom::TrivialYes => {
                println!("trivial yes: the input contains a zero vector");
                return Ok(());
            }
            MonoToBichrom::Instance(inst) => write_bichrom(&inst),
        },
        ("ov-bichrom", "ov-mono") => write_set(&ov_bichrom_to_mono(&read_bichrom(&text)?)),
        ("bichrom", "equal-popcount") => {
            write_bichrom(&pad_equal_popcount(&read_bichrom(&text)?))
        }
        ("mono", to) if to.starts_with("tensor:") => {
            let q: u32 = to["tensor:".len()..]
                .parse()
                .map_err(|_| Error::validation("tensor power must be an integer"))?;
            write_set(&tensor_power(&read_set(&text)?, q)?)
        }
        (from, to) => {
            return Err(Error::validation(format!("no reduction from `{from}` to `{to}`")))
        }
    };
    emit(&args.output, &out)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let config: BenchConfig = toml::from_str(&fs::read_to_string(&args.config)?)
        .map_err(|e| Error::validation(format!("bad bench config: {e}")))?;
    let rows = bench_scaling(&config)?;
    let csv = write_csv(&rows);
    match &config.output {
        Some(path) => fs::write(path, &csv).map_err(Error::from),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    if args.family != "msd" {
        return Err(Error::validation(format!(
            "unknown family `{}`; only `msd` is available",
            args.family
        )));
    }
    let solvers = args
        .solvers
        .split(',')
        .map(|s| SolverSpecTag::parse(s.trim()))
        .collect::<Result<Vec<_>>>()?;
    let report = compare_accuracy(&CompareConfig {
        n: args.n,
        l: args.l,
        trials: args.trials,
        seed: args.seed,
        solvers,
        parallel: args.parallel,
    })?;
    emit(&args.output, &report.to_csv())
}
