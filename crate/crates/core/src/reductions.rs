//! Fine-grained reductions as executable instance transformations and
//! solver-combinators.
//!
//! Reductions phrased as "given an algorithm for X, solve Y" take a
//! `SolverHandle` so any backend (oracle, transformer, heuristic) can be
//! slotted in; the handle counts invocations and instance sizes, which makes
//! the recursion accounting itself testable.

use std::cmp::Ordering;

use crate::bits::{BichromaticInstance, BinaryVector, BinaryVectorSet};
use crate::error::{Error, Result};
use crate::exact::{ExactCosine, Rational};
use crate::oracles::{compare_values, Objective, PairResult, PairValue};

/// Size measure recorded by `SolverHandle` on every invocation.
pub trait ProblemSize {
    fn problem_size(&self) -> usize;
}

impl ProblemSize for BinaryVectorSet {
    fn problem_size(&self) -> usize {
        self.n()
    }
}

impl ProblemSize for BichromaticInstance {
    fn problem_size(&self) -> usize {
        self.a().n() + self.b().n()
    }
}

/// An instrumented solver for one problem variant.
pub struct SolverHandle<'a, I, O> {
    label: String,
    calls: usize,
    sizes: Vec<usize>,
    f: Box<dyn FnMut(&I) -> Result<O> + 'a>,
}

impl<'a, I: ProblemSize, O> SolverHandle<'a, I, O> {
    pub fn new(label: impl Into<String>, f: impl FnMut(&I) -> Result<O> + 'a) -> Self {
        SolverHandle { label: label.into(), calls: 0, sizes: Vec::new(), f: Box::new(f) }
    }

    pub fn invoke(&mut self, input: &I) -> Result<O> {
        self.calls += 1;
        self.sizes.push(input.problem_size());
        (self.f)(input)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }
}

/// Output of `ov_mono_to_bichrom`: a zero row answers OV without any
/// bichromatic work.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonoToBichrom {
    TrivialYes,
    Instance(BichromaticInstance),
}

/// Monochromatic OV reduces to bichromatic OV with `A = B = V`; the only
/// spurious cross pairs are `(v, v)`, which are orthogonal iff `v = 0`.
pub fn ov_mono_to_bichrom(set: &BinaryVectorSet) -> Result<MonoToBichrom> {
    if set.n() < 2 {
        return Err(Error::validation("need at least 2 vectors"));
    }
    if set.contains_zero_row() {
        return Ok(MonoToBichrom::TrivialYes);
    }
    Ok(MonoToBichrom::Instance(BichromaticInstance::new(set.clone(), set.clone())?))
}

/// Bichromatic OV reduces to monochromatic OV in dimension `l + 2`:
/// `a_i -> (a_i, 1, 0)`, `b_j -> (b_j, 0, 1)`. Same-side pairs share an
/// appended 1, so only cross pairs can be orthogonal.
pub fn ov_bichrom_to_mono(inst: &BichromaticInstance) -> BinaryVectorSet {
    let tag = |v: &BinaryVector, first: bool| {
        let mut flags = BinaryVector::zeros(2);
        flags.set(if first { 0 } else { 1 }, true);
        v.concat(&flags)
    };
    let rows = inst
        .a()
        .rows()
        .iter()
        .map(|a| tag(a, true))
        .chain(inst.b().rows().iter().map(|b| tag(b, false)))
        .collect();
    BinaryVectorSet::new(rows).expect("both sides nonempty with equal dimension")
}

fn pick_lex(best: Option<PairResult>, cand: PairResult, objective: Objective) -> PairResult {
    match best {
        None => cand,
        Some(b) => match compare_values(&cand.value, &b.value, objective) {
            Ordering::Greater => cand,
            Ordering::Equal if (cand.i, cand.j) < (b.i, b.j) => cand,
            _ => b,
        },
    }
}

fn halving<T>(
    set: &BinaryVectorSet,
    lo: usize,
    hi: usize,
    cross: &mut impl FnMut(&BichromaticInstance, usize, usize) -> Result<T>,
    out: &mut Vec<T>,
) -> Result<()> {
    if hi - lo < 2 {
        return Ok(());
    }
    // first part takes the ceiling half
    let mid = lo + (hi - lo + 1) / 2;
    let left: Vec<usize> = (lo..mid).collect();
    let right: Vec<usize> = (mid..hi).collect();
    let inst = BichromaticInstance::new(set.subset(&left)?, set.subset(&right)?)?;
    out.push(cross(&inst, lo, mid)?);
    halving(set, lo, mid, cross, out)?;
    halving(set, mid, hi, cross, out)
}

/// Optimizing-pair form of the halving reduction: every unordered pair of
/// distinct indices is covered by exactly one cross call (n - 1 calls in
/// total), and the combined answer reproduces the monochromatic optimum with
/// the lexicographic tie-break.
pub fn solve_mono_via_bichrom_pair(
    set: &BinaryVectorSet,
    handle: &mut SolverHandle<'_, BichromaticInstance, PairResult>,
    objective: Objective,
) -> Result<PairResult> {
    if set.n() < 2 {
        return Err(Error::validation("need at least 2 vectors"));
    }
    let mut results = Vec::new();
    halving(
        set,
        0,
        set.n(),
        &mut |inst, lo, mid| {
            let local = handle.invoke(inst)?;
            if local.i >= inst.a().n() || local.j >= inst.b().n() {
                return Err(Error::solver("bichromatic solver returned out-of-range indices"));
            }
            // value recomputed on the original set; the handle's value is not trusted
            let (gi, gj) = (lo + local.i, mid + local.j);
            let value = recompute_value(set, gi, gj, objective)?;
            Ok(PairResult { i: gi, j: gj, value })
        },
        &mut results,
    )?;
    let mut best = None;
    for r in results {
        best = Some(pick_lex(best, r, objective));
    }
    best.ok_or_else(|| Error::solver("no cross calls produced a result"))
}

/// Decision form of the halving reduction: OR over the same n - 1 cross
/// calls, without short-circuiting so the call accounting is deterministic.
pub fn solve_mono_via_bichrom_decide(
    set: &BinaryVectorSet,
    handle: &mut SolverHandle<'_, BichromaticInstance, bool>,
) -> Result<bool> {
    if set.n() < 2 {
        return Err(Error::validation("need at least 2 vectors"));
    }
    let mut results = Vec::new();
    halving(set, 0, set.n(), &mut |inst, _, _| handle.invoke(inst), &mut results)?;
    Ok(results.into_iter().any(|b| b))
}

fn recompute_value(
    set: &BinaryVectorSet,
    i: usize,
    j: usize,
    objective: Objective,
) -> Result<PairValue> {
    Ok(if objective.uses_cosine() {
        PairValue::Cosine(ExactCosine::between(set.row(i), set.row(j))?)
    } else {
        PairValue::Ip(set.row(i).dot(set.row(j)))
    })
}

/// A bichromatic Max-IP decision query: does some cross pair have inner
/// product at least `t`?
#[derive(Clone, Debug)]
pub struct MaxIpQuery {
    pub inst: BichromaticInstance,
    pub t: u64,
}

impl ProblemSize for MaxIpQuery {
    fn problem_size(&self) -> usize {
        self.inst.problem_size()
    }
}

/// OV via a bichromatic Max-IP decider: bucket rows by popcount, and for
/// buckets `S_i`, `S_j` ask whether `max` over `S_i x flipped(S_j)` reaches
/// `i`, since `<v, flip(w)> = i - <v, w>` when `|v| = i`. At most `l^2`
/// calls; popcount-0 rows are answered before bucketing.
pub fn ov_via_bichrom_maxip(
    set: &BinaryVectorSet,
    handle: &mut SolverHandle<'_, MaxIpQuery, bool>,
) -> Result<bool> {
    if set.n() < 2 {
        return Err(Error::validation("need at least 2 vectors"));
    }
    if set.contains_zero_row() {
        return Ok(true);
    }
    let l = set.dim();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); l + 1];
    for (idx, row) in set.rows().iter().enumerate() {
        buckets[row.popcount() as usize].push(idx);
    }
    for i in 1..=l {
        if buckets[i].is_empty() {
            continue;
        }
        for j in 1..=l {
            // exclude the self pair: a row against its own flip scores i - i = 0,
            // never i >= 1, so same-bucket queries are sound as stated
            if buckets[j].is_empty() {
                continue;
            }
            let a = set.subset(&buckets[i])?;
            let flipped = buckets[j]
                .iter()
                .map(|&idx| set.row(idx).complement())
                .collect::<Vec<_>>();
            let b = BinaryVectorSet::new(flipped)?;
            let query = MaxIpQuery { inst: BichromaticInstance::new(a, b)?, t: i as u64 };
            if handle.invoke(&query)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// OV via any gamma-approximate LSD solver: the minimum cosine is 0 iff an
/// orthogonal pair exists, and a multiplicative approximation of 0 must be
/// 0, so it suffices to check the returned pair exactly. Zero rows are
/// answered before the handle is consulted.
pub fn ov_via_gamma_lsd(
    set: &BinaryVectorSet,
    handle: &mut SolverHandle<'_, BinaryVectorSet, PairResult>,
) -> Result<bool> {
    if set.n() < 2 {
        return Err(Error::validation("need at least 2 vectors"));
    }
    if set.contains_zero_row() {
        return Ok(true);
    }
    let pair = handle.invoke(set)?;
    if pair.i >= set.n() || pair.j >= set.n() || pair.i == pair.j {
        return Err(Error::solver("LSD solver returned invalid indices"));
    }
    Ok(ExactCosine::between(set.row(pair.i), set.row(pair.j))?.is_zero())
}

const TENSOR_BUDGET: usize = 1 << 22;

/// The q-fold Kronecker power of every row; cosines are raised to the q-th
/// power exactly (`dot^q / sqrt(normProdSq^q)`).
pub fn tensor_power(set: &BinaryVectorSet, q: u32) -> Result<BinaryVectorSet> {
    if q == 0 {
        return Err(Error::validation("tensor power q must be at least 1"));
    }
    let dim = set
        .dim()
        .checked_pow(q)
        .filter(|&d| d <= TENSOR_BUDGET)
        .ok_or_else(|| {
            Error::validation(format!(
                "tensor dimension {}^{q} exceeds the budget {TENSOR_BUDGET}",
                set.dim()
            ))
        })?;
    let rows = set
        .rows()
        .iter()
        .map(|v| {
            let mut out = v.clone();
            for _ in 1..q {
                out = out.kron(v);
            }
            debug_assert_eq!(out.len(), dim);
            out
        })
        .collect();
    BinaryVectorSet::new(rows)
}

/// Similarity amplification: a gamma-approximate MSD solver on the q-th
/// tensor power yields a gamma^(1/q)-approximate MSD pair for the original
/// set. Indices are preserved by the transformation; the returned value is
/// recomputed on the original set.
pub fn msd_amplify(
    set: &BinaryVectorSet,
    q: u32,
    weak_solver: &mut SolverHandle<'_, BinaryVectorSet, PairResult>,
) -> Result<PairResult> {
    let tensored = tensor_power(set, q)?;
    let pair = weak_solver.invoke(&tensored)?;
    if pair.i >= set.n() || pair.j >= set.n() || pair.i == pair.j {
        return Err(Error::solver("MSD solver returned invalid indices"));
    }
    Ok(PairResult {
        i: pair.i,
        j: pair.j,
        value: recompute_value(set, pair.i, pair.j, Objective::Msd)?,
    })
}

/// Pads both sides to dimension `3l` so every vector has popcount exactly
/// `l` while all cross inner products are preserved:
/// `a_i -> a_i . 1^(l-|a_i|) . 0^(l+|a_i|)`, `b_j -> b_j . 0^(l+|b_j|) . 1^(l-|b_j|)`.
pub fn pad_equal_popcount(inst: &BichromaticInstance) -> BichromaticInstance {
    let l = inst.dim();
    let pad = |v: &BinaryVector, ones_first: bool| {
        let deficit = l - v.popcount() as usize;
        let mut tail = BinaryVector::zeros(2 * l);
        let offset = if ones_first { 0 } else { 2 * l - deficit };
        for k in 0..deficit {
            tail.set(offset + k, true);
        }
        v.concat(&tail)
    };
    let a = BinaryVectorSet::new(inst.a().rows().iter().map(|v| pad(v, true)).collect())
        .expect("side A nonempty");
    let b = BinaryVectorSet::new(inst.b().rows().iter().map(|v| pad(v, false)).collect())
        .expect("side B nonempty");
    BichromaticInstance::new(a, b).expect("equal padded dimensions")
}

/// Which additive promise problem an `AdditiveInstance` encodes. Both are
/// max-type: yes iff some cross pair reaches `alpha`, no iff every cross
/// pair stays below `alpha - gap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdditiveForm {
    MaxIp,
    Msd,
}

/// A promise instance of additive Max-IP or additive MSD. Inputs violating
/// the promise are not detected; this mirrors the problem definition.
#[derive(Clone, Debug)]
pub struct AdditiveInstance {
    pub inst: BichromaticInstance,
    pub form: AdditiveForm,
    pub alpha: Rational,
    pub gap: Rational,
}

impl AdditiveInstance {
    pub fn new(
        inst: BichromaticInstance,
        form: AdditiveForm,
        alpha: Rational,
        gap: Rational,
    ) -> Result<Self> {
        if gap == Rational::from_integer(0) {
            return Err(Error::validation("promise gap must be positive"));
        }
        Ok(AdditiveInstance { inst, form, alpha, gap })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BridgeDirection {
    MaxIpToMsd,
    MsdToMaxIp,
}

/// Translates between the two additive promise forms.
///
/// maxip -> msd pads to equal popcount `l` and divides `alpha` and the gap
/// by `l`; the padded norms are all `sqrt(l)`, so cross cosines equal
/// `<a,b>/l` and yes/no status transfers exactly. msd -> maxip requires a
/// common popcount `m` (the regime the forward direction produces, where
/// `m` plays the role of `l`) and multiplies by `m`.
pub fn additive_bridge(
    inst: &AdditiveInstance,
    direction: BridgeDirection,
) -> Result<AdditiveInstance> {
    match direction {
        BridgeDirection::MaxIpToMsd => {
            if inst.form != AdditiveForm::MaxIp {
                return Err(Error::validation("maxip->msd bridge needs a MaxIp-form instance"));
            }
            let l = Rational::from_integer(inst.inst.dim() as u64);
            AdditiveInstance::new(
                pad_equal_popcount(&inst.inst),
                AdditiveForm::Msd,
                inst.alpha / l,
                inst.gap / l,
            )
        }
        BridgeDirection::MsdToMaxIp => {
            if inst.form != AdditiveForm::Msd {
                return Err(Error::validation("msd->maxip bridge needs a Msd-form instance"));
            }
            let m = common_popcount(&inst.inst)?;
            let m = Rational::from_integer(m);
            AdditiveInstance::new(inst.inst.clone(), AdditiveForm::MaxIp, inst.alpha * m, inst.gap * m)
        }
    }
}

fn common_popcount(inst: &BichromaticInstance) -> Result<u64> {
    let mut all = inst.a().rows().iter().chain(inst.b().rows());
    let first = all.next().expect("nonempty side").popcount();
    if first == 0 || all.any(|v| v.popcount() != first) {
        return Err(Error::validation(
            "msd->maxip bridge requires all vectors to share a positive popcount \
             (cosine scales to inner product only at equal norms)",
        ));
    }
    Ok(first)
}

/// Brute-force answer of an additive promise instance: does some cross pair
/// reach `alpha`? Exact on promise instances by definition of the promise.
pub fn additive_decide_brute(inst: &AdditiveInstance) -> Result<bool> {
    for a in inst.inst.a().rows() {
        for b in inst.inst.b().rows() {
            let reached = match inst.form {
                AdditiveForm::MaxIp => {
                    Rational::from_integer(a.dot(b)) >= inst.alpha
                }
                AdditiveForm::Msd => {
                    ExactCosine::between(a, b)?.cmp_rational(&inst.alpha) != Ordering::Less
                }
            };
            if reached {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// A decision query at an exact threshold, used by `opt_via_decision`. The
/// cosine variant carries an exact grid value, which is irrational in
/// general and cannot be expressed as a `Rational` threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecisionQuery {
    Ip(u64),
    Cosine(ExactCosine),
}

impl ProblemSize for DecisionQuery {
    fn problem_size(&self) -> usize {
        1
    }
}

/// Largest index in `0..count` at which the predicate holds, assuming the
/// predicate is true on a nonempty prefix. Zero probes when `count == 1`.
pub fn search_last_true(
    count: usize,
    probe: &mut impl FnMut(usize) -> Result<bool>,
) -> Result<usize> {
    let (mut lo, mut hi) = (0, count - 1);
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        if probe(mid)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// Smallest index in `0..count` at which the predicate holds, assuming the
/// predicate is true on a nonempty suffix.
pub fn search_first_true(
    count: usize,
    probe: &mut impl FnMut(usize) -> Result<bool>,
) -> Result<usize> {
    let (mut lo, mut hi) = (0, count - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if probe(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Recovers the exact optimal value from a decision solver with O(log l)
/// calls: binary search over the integers `[0, l]` for Max-IP/Min-IP, or
/// over the sorted exact candidate grid for MSD/LSD.
pub fn opt_via_decision(
    set: &BinaryVectorSet,
    decision_solver: &mut SolverHandle<'_, DecisionQuery, bool>,
    objective: Objective,
) -> Result<PairValue> {
    if set.n() < 2 {
        return Err(Error::validation("need at least 2 vectors"));
    }
    if objective.uses_cosine() {
        let grid = enumerate_cosine_candidates(set.dim())?;
        let probe_max = &mut |k: usize| decision_solver.invoke(&DecisionQuery::Cosine(grid[k]));
        let idx = if objective.is_max_type() {
            search_last_true(grid.len(), probe_max)?
        } else {
            search_first_true(grid.len(), probe_max)?
        };
        Ok(PairValue::Cosine(grid[idx]))
    } else {
        let count = set.dim() + 1;
        let probe = &mut |k: usize| decision_solver.invoke(&DecisionQuery::Ip(k as u64));
        let idx = if objective.is_max_type() {
            search_last_true(count, probe)?
        } else {
            search_first_true(count, probe)?
        };
        Ok(PairValue::Ip(idx as u64))
    }
}

const CANDIDATE_DIM_CAP: usize = 128;

/// All exact cosine values attainable between nonzero binary vectors of
/// dimension `l`: `{a / sqrt(b c) : 1 <= b, c <= l, 0 <= a <= min(b, c)}`,
/// deduplicated by exact comparison and sorted ascending. At most `l^3 + 1`
/// values.
pub fn enumerate_cosine_candidates(l: usize) -> Result<Vec<ExactCosine>> {
    if l == 0 {
        return Err(Error::validation("dimension must be at least 1"));
    }
    if l > CANDIDATE_DIM_CAP {
        return Err(Error::validation(format!(
            "candidate grid for dimension {l} exceeds the cap {CANDIDATE_DIM_CAP}"
        )));
    }
    let mut grid = Vec::new();
    for b in 1..=l as u64 {
        for c in b..=l as u64 {
            for a in 0..=b {
                grid.push(ExactCosine::new(a, b * c)?);
            }
        }
    }
    grid.sort();
    grid.dedup();
    Ok(grid)
}
