//! Benchmark and accuracy-comparison layer: instance families, solver
//! dispatch, runtime scaling over a size ladder, and exact-vs-heuristic
//! accuracy reports.
//!
//! CSV schema: `problem,solver,n,l,threshold,answer,median_ms,min_ms,seed`,
//! LF newlines. Timing uses wall-clock medians over at least 3 repetitions
//! with one warm-up discard; instance generation and I/O are excluded.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::attention::{
    attention_eval, build_ip_transformer, build_ov_transformer, build_similarity_transformer,
    transformer_run, transformer_run_with, AttentionUnitParams, IpMode, Mask, Matrix, ProblemTag,
    SimilarityMode, TransformerSpec,
};
use crate::bits::BinaryVectorSet;
use crate::error::{Error, Result};
use crate::exact::{parse_rational, rational_between, Rational};
use crate::heuristics::{heuristic_attention, HeuristicKind};
use crate::instances::{gen_random, plant, PlantKind, PlantSpec};
use crate::oracles::{decide, decide_bichrom, ov_decide, ov_decide_fast, Objective, Threshold};
use crate::reductions::{
    enumerate_cosine_candidates, ov_mono_to_bichrom, ov_via_bichrom_maxip, ov_via_gamma_lsd,
    solve_mono_via_bichrom_decide, MaxIpQuery, MonoToBichrom, SolverHandle,
};

/// What a benchmark or comparison runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchProblem {
    /// Raw attention kernels on random real inputs (no decision semantics).
    Attention,
    Decision(ProblemTag),
}

impl BenchProblem {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "attention" {
            Ok(BenchProblem::Attention)
        } else {
            Ok(BenchProblem::Decision(ProblemTag::parse(s)?))
        }
    }

    pub fn as_str(self) -> String {
        match self {
            BenchProblem::Attention => "attention".to_string(),
            BenchProblem::Decision(tag) => tag.as_str().to_string(),
        }
    }
}

/// Solver backend tags accepted by the harness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverSpecTag {
    Oracle,
    FastOv,
    Transformer,
    /// One of the named reductions wired to oracle sub-solvers:
    /// `bichrom`, `maxip`, `gamma-lsd`, `halving`.
    Reduction(String),
    Heuristic(HeuristicKind),
}

impl SolverSpecTag {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        Ok(match parts.as_slice() {
            ["oracle"] => SolverSpecTag::Oracle,
            ["fast-ov"] => SolverSpecTag::FastOv,
            ["transformer"] => SolverSpecTag::Transformer,
            ["reduction", name] => SolverSpecTag::Reduction((*name).to_string()),
            ["heuristic", "sampled", k] => SolverSpecTag::Heuristic(HeuristicKind::Sampled {
                k: k.parse().map_err(|_| Error::validation("invalid sample size"))?,
            }),
            ["heuristic", "kernel", r] => SolverSpecTag::Heuristic(HeuristicKind::KernelFeature {
                r: r.parse().map_err(|_| Error::validation("invalid feature rank"))?,
            }),
            _ => return Err(Error::validation(format!("unknown solver tag {s:?}"))),
        })
    }
}

impl fmt::Display for SolverSpecTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverSpecTag::Oracle => write!(f, "oracle"),
            SolverSpecTag::FastOv => write!(f, "fast-ov"),
            SolverSpecTag::Transformer => write!(f, "transformer"),
            SolverSpecTag::Reduction(name) => write!(f, "reduction:{name}"),
            SolverSpecTag::Heuristic(HeuristicKind::Sampled { k }) => {
                write!(f, "heuristic:sampled:{k}")
            }
            SolverSpecTag::Heuristic(HeuristicKind::KernelFeature { r }) => {
                write!(f, "heuristic:kernel:{r}")
            }
        }
    }
}

/// Benchmark configuration, deserializable from TOML.
#[derive(Clone, Debug, Deserialize)]
pub struct BenchConfig {
    pub problem: String,
    pub solver: String,
    pub ladder: Vec<usize>,
    pub l: usize,
    #[serde(default)]
    pub threshold: Option<String>,
    pub reps: usize,
    pub seed: u64,
    /// Bit probability for generated instances; 0.5 when omitted.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub output: Option<String>,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(BenchProblem, SolverSpecTag)> {
        if self.reps < 3 {
            return Err(Error::validation("repetitions must be at least 3"));
        }
        if self.ladder.is_empty() {
            return Err(Error::validation("size ladder must be nonempty"));
        }
        if !self.ladder.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::validation("size ladder must be strictly increasing"));
        }
        if self.l == 0 {
            return Err(Error::validation("l must be at least 1"));
        }
        Ok((BenchProblem::parse(&self.problem)?, SolverSpecTag::parse(&self.solver)?))
    }
}

/// One measured CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub problem: String,
    pub solver: String,
    pub n: usize,
    pub l: usize,
    pub threshold: String,
    pub answer: String,
    pub median_ms: f64,
    pub min_ms: f64,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "problem,solver,n,l,threshold,answer,median_ms,min_ms,seed";

pub fn write_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.3},{:.3},{}\n",
            r.problem, r.solver, r.n, r.l, r.threshold, r.answer, r.median_ms, r.min_ms, r.seed
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(Error::validation(format!("bad CSV header {other:?}"))),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(Error::validation(format!("bad CSV row {line:?}")));
            }
            let bad = |what: &str| Error::validation(format!("invalid {what} in CSV row {line:?}"));
            Ok(BenchRow {
                problem: f[0].to_string(),
                solver: f[1].to_string(),
                n: f[2].parse().map_err(|_| bad("n"))?,
                l: f[3].parse().map_err(|_| bad("l"))?,
                threshold: f[4].to_string(),
                answer: f[5].to_string(),
                median_ms: f[6].parse().map_err(|_| bad("median_ms"))?,
                min_ms: f[7].parse().map_err(|_| bad("min_ms"))?,
                seed: f[8].parse().map_err(|_| bad("seed"))?,
            })
        })
        .collect()
}

/// A grid-midpoint cosine threshold for dimension `l`: a rational strictly
/// between two adjacent attainable cosine values, together with a promise
/// gap `delta` that every instance of dimension `l` satisfies by
/// construction (no cosine can fall inside `(t - delta, t + delta)`).
pub fn grid_midpoint_threshold(l: usize) -> Result<(Rational, f64)> {
    let grid = enumerate_cosine_candidates(l)?;
    if grid.len() < 2 {
        return Err(Error::validation("grid too small for a midpoint threshold"));
    }
    let k = grid.len() / 2;
    let (lo, hi) = (&grid[k - 1], &grid[k]);
    let t = rational_between(lo, hi)
        .ok_or_else(|| Error::solver("no rational between adjacent grid values"))?;
    let t_f = *t.numer() as f64 / *t.denom() as f64;
    let delta = 0.9 * (t_f - lo.to_f64()).min(hi.to_f64() - t_f);
    if !(delta > 0.0) {
        return Err(Error::solver("degenerate grid gap"));
    }
    Ok((t, delta))
}

/// Promise gap for an arbitrary off-grid rational threshold: the distance
/// to the nearest grid value below and above, scaled down for safety.
pub fn delta_for_threshold(l: usize, t: &Rational) -> Result<f64> {
    let grid = enumerate_cosine_candidates(l)?;
    let t_f = *t.numer() as f64 / *t.denom() as f64;
    let mut below = f64::NEG_INFINITY;
    let mut above = f64::INFINITY;
    for g in &grid {
        match g.cmp_rational(t) {
            std::cmp::Ordering::Less => below = below.max(g.to_f64()),
            std::cmp::Ordering::Greater => above = above.min(g.to_f64()),
            std::cmp::Ordering::Equal => {
                return Err(Error::validation(
                    "threshold coincides with an attainable cosine; no promise gap exists",
                ))
            }
        }
    }
    let delta = 0.9 * (t_f - below).min(above - t_f).min(t_f.max(1e-9));
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::validation("could not derive a positive promise gap"));
    }
    Ok(delta)
}

/// Generates a random instance legal for the given problem: cosine and
/// max-ip modes get every zero row replaced by a one-hot row; ov/min-ip
/// modes only need one nonzero row.
pub fn gen_guarded(tag: ProblemTag, n: usize, l: usize, p: f64, seed: u64) -> Result<BinaryVectorSet> {
    let mut set = gen_random(n, l, p, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995);
    match tag {
        ProblemTag::MaxIp | ProblemTag::Msd | ProblemTag::Lsd => {
            while let Some(idx) = set.zero_row_index() {
                let mut row = crate::bits::BinaryVector::zeros(l);
                row.set(rng.gen_range(0..l), true);
                set = set.with_row(idx, row)?;
            }
        }
        ProblemTag::Ov | ProblemTag::MinIp => {
            if set.rows().iter().all(|r| r.is_zero()) {
                let mut row = crate::bits::BinaryVector::zeros(l);
                row.set(rng.gen_range(0..l), true);
                set = set.with_row(0, row)?;
            }
        }
    }
    Ok(set)
}

fn objective_of(tag: ProblemTag) -> Option<Objective> {
    match tag {
        ProblemTag::Ov => None,
        ProblemTag::MaxIp => Some(Objective::MaxIp),
        ProblemTag::MinIp => Some(Objective::MinIp),
        ProblemTag::Msd => Some(Objective::Msd),
        ProblemTag::Lsd => Some(Objective::Lsd),
    }
}

fn parse_threshold(tag: ProblemTag, raw: &Option<String>) -> Result<Option<Threshold>> {
    match (tag, raw) {
        (ProblemTag::Ov, _) => Ok(None),
        (_, None) => Err(Error::validation(format!(
            "problem {} requires a threshold",
            tag.as_str()
        ))),
        (ProblemTag::MaxIp | ProblemTag::MinIp, Some(s)) => {
            let t = s.parse::<u64>().map_err(|_| Error::validation("invalid integer threshold"))?;
            Ok(Some(Threshold::Ip(t)))
        }
        (ProblemTag::Msd | ProblemTag::Lsd, Some(s)) => {
            Ok(Some(Threshold::Cosine(parse_rational(s)?)))
        }
    }
}

/// Builds the transformer spec for a decision problem at the given sizes.
pub fn build_spec_for(
    tag: ProblemTag,
    n: usize,
    l: usize,
    threshold: &Option<Threshold>,
) -> Result<TransformerSpec> {
    match (tag, threshold) {
        (ProblemTag::Ov, _) => build_ov_transformer(n, l),
        (ProblemTag::MaxIp, Some(Threshold::Ip(t))) => build_ip_transformer(n, l, *t, IpMode::Max),
        (ProblemTag::MinIp, Some(Threshold::Ip(t))) => build_ip_transformer(n, l, *t, IpMode::Min),
        (ProblemTag::Msd, Some(Threshold::Cosine(t))) => {
            let delta = delta_for_threshold(l, t)?;
            build_similarity_transformer(n, l, *t, SimilarityMode::Msd, delta)
        }
        (ProblemTag::Lsd, Some(Threshold::Cosine(t))) => {
            let delta = delta_for_threshold(l, t)?;
            build_similarity_transformer(n, l, *t, SimilarityMode::Lsd, delta)
        }
        _ => Err(Error::validation("threshold kind does not match the problem")),
    }
}

fn oracle_answer(tag: ProblemTag, set: &BinaryVectorSet, threshold: &Option<Threshold>) -> Result<bool> {
    match (objective_of(tag), threshold) {
        (None, _) => ov_decide(set),
        (Some(obj), Some(t)) => decide(set, obj, t),
        _ => Err(Error::validation("missing threshold")),
    }
}

fn reduction_answer(name: &str, set: &BinaryVectorSet) -> Result<bool> {
    match name {
        "bichrom" => match ov_mono_to_bichrom(set)? {
            MonoToBichrom::TrivialYes => Ok(true),
            MonoToBichrom::Instance(inst) => {
                Ok(crate::oracles::ov_decide_bichrom(&inst))
            }
        },
        "maxip" => {
            let mut h = SolverHandle::new("oracle", |q: &MaxIpQuery| {
                decide_bichrom(&q.inst, Objective::MaxIp, &Threshold::Ip(q.t))
            });
            ov_via_bichrom_maxip(set, &mut h)
        }
        "gamma-lsd" => {
            let mut h = SolverHandle::new("oracle", |s: &BinaryVectorSet| {
                crate::oracles::exact_pair(s, Objective::Lsd)
            });
            ov_via_gamma_lsd(set, &mut h)
        }
        "halving" => {
            let mut h = SolverHandle::new("oracle", |inst: &crate::bits::BichromaticInstance| {
                decide_bichrom(inst, Objective::MinIp, &Threshold::Ip(0))
            });
            solve_mono_via_bichrom_decide(set, &mut h)
        }
        other => Err(Error::validation(format!(
            "unknown reduction {other:?} (expected bichrom, maxip, gamma-lsd, or halving)"
        ))),
    }
}

/// Decide one instance with the chosen backend. A prebuilt transformer
/// spec may be supplied to amortize construction across instances;
/// otherwise one is built on the fly.
pub fn solve_decision(
    tag: ProblemTag,
    solver: &SolverSpecTag,
    set: &BinaryVectorSet,
    threshold: &Option<Threshold>,
    spec: Option<&TransformerSpec>,
    seed: u64,
) -> Result<bool> {
    match solver {
        SolverSpecTag::Oracle => oracle_answer(tag, set, threshold),
        SolverSpecTag::FastOv => {
            if tag != ProblemTag::Ov {
                return Err(Error::validation("fast-ov only solves ov"));
            }
            ov_decide_fast(set)
        }
        SolverSpecTag::Transformer => {
            let spec = spec.ok_or_else(|| Error::solver("missing transformer spec"))?;
            Ok(transformer_run(spec, set)?.decision)
        }
        SolverSpecTag::Reduction(name) => {
            if tag != ProblemTag::Ov {
                return Err(Error::validation("named reductions here solve ov only"));
            }
            reduction_answer(name, set)
        }
        SolverSpecTag::Heuristic(kind) => {
            let spec = spec.ok_or_else(|| Error::solver("missing transformer spec"))?;
            let run = transformer_run_with(spec, set, |params, x| {
                heuristic_attention(*kind, params, x, seed)
            })?;
            Ok(run.decision)
        }
    }
}

fn median_min(samples: &mut [f64]) -> (f64, f64) {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (samples[samples.len() / 2], samples[0])
}

fn random_real_matrix(n: usize, l: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    Matrix::from_rows(&rows).expect("nonempty random matrix")
}

/// Runs the configured solver over the size ladder, timing each size with
/// one warm-up discard and `reps` measured repetitions. Timing excludes
/// instance generation.
pub fn bench_scaling(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    let (problem, solver) = config.validate()?;
    let p = config.p.unwrap_or(0.5);
    let mut rows = Vec::new();
    for &n in &config.ladder {
        let (answer, mut times_ms) = match problem {
            BenchProblem::Attention => {
                let x = random_real_matrix(n, config.l, config.seed ^ n as u64);
                // mild scale keeps exp() well-conditioned at any n
                let params = AttentionUnitParams::new(
                    Matrix::scaled_identity(config.l, 1.0 / config.l as f64),
                    Matrix::from_rows(&vec![vec![1.0]; config.l])?,
                    Mask::None,
                )?;
                let eval = |rep: u64| -> Result<Matrix> {
                    match &solver {
                        SolverSpecTag::Oracle | SolverSpecTag::Transformer => {
                            attention_eval(&params, &x)
                        }
                        SolverSpecTag::Heuristic(kind) => {
                            let _ = rep;
                            heuristic_attention(*kind, &params, &x, config.seed)
                        }
                        other => Err(Error::validation(format!(
                            "solver {other} cannot time raw attention"
                        ))),
                    }
                };
                let mut answer = String::new();
                let mut times = Vec::with_capacity(config.reps);
                for rep in 0..=config.reps {
                    let start = Instant::now();
                    let out = eval(rep as u64)?;
                    let elapsed = start.elapsed().as_secs_f64() * 1e3;
                    let sum: f64 = (0..out.nrows()).map(|i| out.get(i, 0)).sum();
                    let this = format!("{sum:.6}");
                    if rep == 0 {
                        answer = this; // warm-up sets the reference answer
                    } else {
                        if this != answer {
                            return Err(Error::solver("nondeterministic answer across repetitions"));
                        }
                        times.push(elapsed);
                    }
                }
                (answer, times)
            }
            BenchProblem::Decision(tag) => {
                let threshold = parse_threshold(tag, &config.threshold)?;
                let set = gen_guarded(tag, n, config.l, p, config.seed ^ n as u64)?;
                let needs_spec = matches!(
                    solver,
                    SolverSpecTag::Transformer | SolverSpecTag::Heuristic(_)
                );
                let spec =
                    if needs_spec { Some(build_spec_for(tag, n, config.l, &threshold)?) } else { None };
                let mut answer = String::new();
                let mut times = Vec::with_capacity(config.reps);
                for rep in 0..=config.reps {
                    let start = Instant::now();
                    let got =
                        solve_decision(tag, &solver, &set, &threshold, spec.as_ref(), config.seed)?;
                    let elapsed = start.elapsed().as_secs_f64() * 1e3;
                    let this = got.to_string();
                    if rep == 0 {
                        answer = this;
                    } else {
                        if this != answer {
                            return Err(Error::solver("nondeterministic answer across repetitions"));
                        }
                        times.push(elapsed);
                    }
                }
                (answer, times)
            }
        };
        let (median_ms, min_ms) = median_min(&mut times_ms);
        rows.push(BenchRow {
            problem: problem.as_str(),
            solver: solver.to_string(),
            n,
            l: config.l,
            threshold: config.threshold.clone().unwrap_or_else(|| "-".to_string()),
            answer,
            median_ms,
            min_ms,
            seed: config.seed,
        });
    }
    Ok(rows)
}

/// Consecutive median-time ratios `T(n_{k+1}) / T(n_k)` of a bench run.
pub fn scaling_ratios(rows: &[BenchRow]) -> Vec<f64> {
    rows.windows(2).map(|w| w[1].median_ms / w[0].median_ms).collect()
}

/// Configuration of a planted-family accuracy comparison.
#[derive(Clone, Debug)]
pub struct CompareConfig {
    pub n: usize,
    pub l: usize,
    pub trials: usize,
    pub seed: u64,
    pub solvers: Vec<SolverSpecTag>,
    /// Evaluate instances on multiple threads; counts and answers are
    /// identical to a single-threaded run, only wall times differ.
    pub parallel: bool,
}

/// Per-solver accuracy against oracle ground truth.
#[derive(Clone, Debug)]
pub struct AccuracyRow {
    pub solver: SolverSpecTag,
    pub correct: usize,
    pub total: usize,
    pub median_ms: f64,
    pub min_ms: f64,
}

#[derive(Clone, Debug)]
pub struct AccuracyReport {
    pub problem: ProblemTag,
    pub threshold: Rational,
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyReport {
    pub fn to_csv(&self) -> String {
        let rows: Vec<BenchRow> = self
            .rows
            .iter()
            .map(|r| BenchRow {
                problem: self.problem.as_str().to_string(),
                solver: r.solver.to_string(),
                n: self.n,
                l: self.l,
                threshold: format!("{}/{}", self.threshold.numer(), self.threshold.denom()),
                answer: format!("{}/{}", r.correct, r.total),
                median_ms: r.median_ms,
                min_ms: r.min_ms,
                seed: self.seed,
            })
            .collect();
        write_csv(&rows)
    }
}

/// Planted MSD-decision family: half the trials get a cosine-at-least pair
/// planted at the (grid-midpoint) threshold, the rest stay random. Ground
/// truth comes from the oracle; the exact transformer is asserted to agree
/// on every trial (the family is guarded and the threshold avoids the
/// grid), heuristic rows are reported without assertion.
pub fn compare_accuracy(config: &CompareConfig) -> Result<AccuracyReport> {
    if config.trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    let (t, _delta) = grid_midpoint_threshold(config.l)?;
    let threshold = Some(Threshold::Cosine(t));
    let spec = build_spec_for(ProblemTag::Msd, config.n, config.l, &threshold)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut instances = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let mut set =
            gen_guarded(ProblemTag::Msd, config.n, config.l, 0.5, config.seed ^ (trial as u64) << 8)?;
        if trial % 2 == 0 {
            let i = rng.gen_range(0..config.n);
            let mut j = rng.gen_range(0..config.n - 1);
            if j >= i {
                j += 1;
            }
            set = plant(&set, &PlantSpec::new(PlantKind::CosineAtLeast(t), i, j)?, rng.gen())?;
            // planting copies a row; the copy is nonzero because the family is guarded
        }
        let truth = decide(&set, Objective::Msd, threshold.as_ref().unwrap())?;
        instances.push((set, truth));
    }

    let eval = |solver: &SolverSpecTag, set: &BinaryVectorSet, truth: bool| {
        let start = Instant::now();
        let got =
            solve_decision(ProblemTag::Msd, solver, set, &threshold, Some(&spec), config.seed)?;
        Ok::<_, Error>((got == truth, start.elapsed().as_secs_f64() * 1e3))
    };

    let mut rows = Vec::new();
    for solver in &config.solvers {
        let outcomes: Vec<(bool, f64)> = if config.parallel && instances.len() > 1 {
            let workers = std::thread::available_parallelism().map_or(1, |p| p.get());
            let chunk = instances.len().div_ceil(workers);
            std::thread::scope(|scope| {
                let handles: Vec<_> = instances
                    .chunks(chunk)
                    .map(|part| {
                        scope.spawn(move || {
                            part.iter()
                                .map(|(set, truth)| eval(solver, set, *truth))
                                .collect::<Result<Vec<_>>>()
                        })
                    })
                    .collect();
                let mut all = Vec::with_capacity(instances.len());
                for h in handles {
                    all.extend(h.join().expect("accuracy worker panicked")?);
                }
                Ok::<_, Error>(all)
            })?
        } else {
            instances
                .iter()
                .map(|(set, truth)| eval(solver, set, *truth))
                .collect::<Result<Vec<_>>>()?
        };
        let correct = outcomes.iter().filter(|(ok, _)| *ok).count();
        let mut times: Vec<f64> = outcomes.iter().map(|(_, t)| *t).collect();
        if matches!(solver, SolverSpecTag::Oracle | SolverSpecTag::Transformer)
            && correct != instances.len()
        {
            return Err(Error::solver(format!(
                "exact solver {solver} disagreed with ground truth: {correct}/{}",
                instances.len()
            )));
        }
        let (median_ms, min_ms) = median_min(&mut times);
        rows.push(AccuracyRow {
            solver: solver.clone(),
            correct,
            total: instances.len(),
            median_ms,
            min_ms,
        });
    }
    Ok(AccuracyReport {
        problem: ProblemTag::Msd,
        threshold: t,
        n: config.n,
        l: config.l,
        seed: config.seed,
        rows,
    })
}
