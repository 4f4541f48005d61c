//! Exact softmax attention and the single-attention-unit transformer
//! constructions for OV, Max-IP/Min-IP decision, and MSD/LSD decision.
//!
//! A unit computes `softmax(X M X^T) X V` with `M = Q K^T` folded into one
//! score matrix. The constructions append one end-token row to the input;
//! with score scale beta chosen against the instance size, the maximum
//! attention output entry lands at least `1/(n+1)` on yes-instances and at
//! most `1/(n+1)^1.5` on no-instances, so a fixed piecewise-linear detector
//! reads off the decision.

use std::fmt::Write as _;

use crate::bits::BinaryVectorSet;
use crate::error::{Error, Result};
use crate::exact::{parse_rational, Rational};
use crate::oracles::Threshold;

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, c);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::validation("matrix needs at least one row"));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::validation("ragged matrix rows"));
        }
        Ok(Matrix { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::validation(format!(
                "matmul shape mismatch: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.set(i, j, out.get(i, j) + a * other.get(k, j));
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }
}

/// Self-interaction handling in the softmax.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mask {
    None,
    ExcludeSelf,
}

/// One attention unit: score matrix `M = Q K^T`, value matrix, and mask.
#[derive(Clone, Debug)]
pub struct AttentionUnitParams {
    pub score: Matrix,
    pub value: Matrix,
    pub mask: Mask,
}

impl AttentionUnitParams {
    pub fn new(score: Matrix, value: Matrix, mask: Mask) -> Result<Self> {
        if score.nrows() != score.ncols() {
            return Err(Error::validation("score matrix must be square"));
        }
        if value.nrows() != score.nrows() {
            return Err(Error::validation("value matrix rows must match score dimension"));
        }
        Ok(AttentionUnitParams { score, value, mask })
    }

    pub fn d_in(&self) -> usize {
        self.score.nrows()
    }

    pub fn d_out(&self) -> usize {
        self.value.ncols()
    }
}

/// Numerically stable softmax with row-max subtraction; exact in real
/// arithmetic since softmax is shift-invariant.
pub fn softmax_row(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::validation("softmax of an empty row"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation("softmax input must be finite"));
    }
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.iter().map(|e| e / sum).collect())
}

/// `softmax(X M X^T) X V`, row by row. With `mask = exclude-self`, index
/// `j = i` is removed from row `i`'s softmax support. Accumulation runs in
/// fixed index order so results are bitwise reproducible.
pub fn attention_eval(params: &AttentionUnitParams, x: &Matrix) -> Result<Matrix> {
    if x.ncols() != params.d_in() {
        return Err(Error::validation(format!(
            "input width {} does not match score dimension {}",
            x.ncols(),
            params.d_in()
        )));
    }
    let n = x.nrows();
    if params.mask == Mask::ExcludeSelf && n < 2 {
        return Err(Error::validation("exclude-self mask needs at least 2 rows"));
    }
    let xm = x.matmul(&params.score)?;
    let xv = x.matmul(&params.value)?;
    let mut out = Matrix::zeros(n, params.d_out());
    for i in 0..n {
        let support: Vec<usize> = (0..n)
            .filter(|&j| params.mask == Mask::None || j != i)
            .collect();
        let scores: Vec<f64> = support
            .iter()
            .map(|&j| xm.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum())
            .collect();
        let weights = softmax_row(&scores)?;
        for (w, &j) in weights.iter().zip(&support) {
            for c in 0..params.d_out() {
                out.set(i, c, out.get(i, c) + w * xv.get(j, c));
            }
        }
    }
    Ok(out)
}

/// Splits `M` into `Q = [M | 0]`, `K = [I | 0]` of width `m >= d_in`, so
/// that `Q K^T = M` exactly.
pub fn factor_m(m_mat: &Matrix, m: usize) -> Result<(Matrix, Matrix)> {
    let d = m_mat.nrows();
    if m_mat.ncols() != d {
        return Err(Error::validation("score matrix must be square"));
    }
    if m < d {
        return Err(Error::validation(format!("factor width {m} below dimension {d}")));
    }
    let mut q = Matrix::zeros(d, m);
    let mut k = Matrix::zeros(d, m);
    for i in 0..d {
        for j in 0..d {
            q.set(i, j, m_mat.get(i, j));
        }
        k.set(i, i, 1.0);
    }
    Ok((q, k))
}

/// The fixed piecewise-linear MLPs of the constructions. `append-flag` and
/// `normalize-append` are row maps `d -> d+1`; `threshold-detector` and
/// `constant` collapse a margin vector to a scalar.
#[derive(Clone, Debug, PartialEq)]
pub enum MlpSpec {
    Identity,
    /// Data rows (last coordinate <= 1) become `(x, 1)`; the end-token row
    /// (last coordinate >= the carried threshold T > 1) becomes
    /// `(0, ..., 0, last)`, with a linear blend between the knees.
    AppendFlag(f64),
    /// As `append-flag`, but data rows are first divided by their Euclidean
    /// norm, so inner products of mapped data rows are cosine similarities
    /// plus one.
    NormalizeAppend(f64),
    /// `f(x) = 1 - prod_i (1 - g(x_i))` with `g` the clamped linear ramp
    /// rising from 0 at `a` to 1 at `b`; exactly 1 if any coordinate >= b,
    /// exactly 0 if all coordinates < a.
    ThresholdDetector { a: f64, b: f64 },
    Constant(f64),
}

impl MlpSpec {
    fn validate(&self) -> Result<()> {
        match self {
            MlpSpec::AppendFlag(t) | MlpSpec::NormalizeAppend(t) => {
                if !(*t > 1.0) {
                    return Err(Error::validation("carried end-token threshold must exceed 1"));
                }
            }
            MlpSpec::ThresholdDetector { a, b } => {
                if !(0.0 < *a && *a < *b) {
                    return Err(Error::validation("threshold-detector needs b > a > 0"));
                }
            }
            MlpSpec::Identity | MlpSpec::Constant(_) => {}
        }
        Ok(())
    }

    fn is_row_map(&self) -> bool {
        matches!(self, MlpSpec::Identity | MlpSpec::AppendFlag(_) | MlpSpec::NormalizeAppend(_))
    }
}

fn append_branch(row: &[f64], t: f64, normalize: bool) -> Result<Vec<f64>> {
    let d = row.len();
    let last = row[d - 1];
    // data branch value
    let data = |row: &[f64]| -> Result<Vec<f64>> {
        let mut out = row.to_vec();
        if normalize {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::validation("cannot normalize a zero data row"));
            }
            out.iter_mut().for_each(|x| *x /= norm);
        }
        out.push(1.0);
        Ok(out)
    };
    // end-token branch value
    let end = |last: f64| {
        let mut out = vec![0.0; d];
        out.push(last);
        out
    };
    if last <= 1.0 {
        data(row)
    } else if last >= t {
        Ok(end(last))
    } else {
        // continuous blend between the knees at 1 and t
        let lambda = (last - 1.0) / (t - 1.0);
        let (lo, hi) = (data(row)?, end(last));
        Ok(lo.iter().zip(&hi).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect())
    }
}

/// Applies a row-map MLP to every row of a matrix.
pub fn mlp_rows(spec: &MlpSpec, x: &Matrix) -> Result<Matrix> {
    spec.validate()?;
    let rows: Result<Vec<Vec<f64>>> = (0..x.nrows())
        .map(|i| match spec {
            MlpSpec::Identity => Ok(x.row(i).to_vec()),
            MlpSpec::AppendFlag(t) => append_branch(x.row(i), *t, false),
            MlpSpec::NormalizeAppend(t) => append_branch(x.row(i), *t, true),
            _ => Err(Error::validation("not a row-map MLP")),
        })
        .collect();
    Matrix::from_rows(&rows?)
}

/// `1 - prod_i (1 - g(x_i))` with `g` the clamped linear ramp.
pub fn detector_scalar(a: f64, b: f64, xs: &[f64]) -> f64 {
    let g = |x: f64| ((x - a) / (b - a)).clamp(0.0, 1.0);
    1.0 - xs.iter().map(|&x| 1.0 - g(x)).product::<f64>()
}

/// Applies a scalar-map MLP to a margin vector.
pub fn mlp_scalar(spec: &MlpSpec, xs: &[f64]) -> Result<f64> {
    spec.validate()?;
    match spec {
        MlpSpec::ThresholdDetector { a, b } => Ok(detector_scalar(*a, *b, xs)),
        MlpSpec::Constant(c) => Ok(*c),
        _ => Err(Error::validation("not a scalar-map MLP")),
    }
}

/// Which decision problem a transformer construction targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemTag {
    Ov,
    MaxIp,
    MinIp,
    Msd,
    Lsd,
}

impl ProblemTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemTag::Ov => "ov",
            ProblemTag::MaxIp => "max-ip",
            ProblemTag::MinIp => "min-ip",
            ProblemTag::Msd => "msd",
            ProblemTag::Lsd => "lsd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "ov" => ProblemTag::Ov,
            "max-ip" => ProblemTag::MaxIp,
            "min-ip" => ProblemTag::MinIp,
            "msd" => ProblemTag::Msd,
            "lsd" => ProblemTag::Lsd,
            other => return Err(Error::validation(format!("unknown problem tag {other:?}"))),
        })
    }
}

/// A complete single-unit construction: `phi2(A(phi1(X with end token)))`.
#[derive(Clone, Debug)]
pub struct TransformerSpec {
    pub problem: ProblemTag,
    pub n: usize,
    pub l: usize,
    pub threshold: Option<Threshold>,
    pub beta: f64,
    pub delta: Option<f64>,
    pub phi1: MlpSpec,
    pub attention: AttentionUnitParams,
    pub phi2: MlpSpec,
    /// Raw input row of length `l` appended to the instance before phi1.
    pub end_token: Vec<f64>,
}

fn margin_detector(n: usize) -> MlpSpec {
    let np1 = (n + 1) as f64;
    MlpSpec::ThresholdDetector { a: np1.powf(-1.5), b: 1.0 / np1 }
}

fn check_guard(n: usize, l: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::validation("need n >= 2"));
    }
    if l == 0 {
        return Err(Error::validation("need l >= 1"));
    }
    // l <= sqrt(n)/2, kept exact in integers
    if 4 * l * l > n {
        return Err(Error::validation(format!(
            "margin guard violated: need 4 l^2 <= n, got l = {l}, n = {n}"
        )));
    }
    Ok(())
}

/// OV construction: identity phi1, end token `0^l`, scores `-beta <v_i, v_j>`
/// with `beta = 3 ln n`, values `|v_j|_1`.
pub fn build_ov_transformer(n: usize, l: usize) -> Result<TransformerSpec> {
    check_guard(n, l)?;
    let beta = 3.0 * (n as f64).ln();
    let attention = AttentionUnitParams::new(
        Matrix::scaled_identity(l, -beta),
        Matrix::from_rows(&vec![vec![1.0]; l])?,
        Mask::None,
    )?;
    Ok(TransformerSpec {
        problem: ProblemTag::Ov,
        n,
        l,
        threshold: None,
        beta,
        delta: None,
        phi1: MlpSpec::Identity,
        attention,
        phi2: margin_detector(n),
        end_token: vec![0.0; l],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IpMode {
    Max,
    Min,
}

/// Max-IP/Min-IP decision construction: phi1 appends the flag coordinate,
/// the end token is `(0, ..., 0, t+1)`, scores are `+-beta (<v_i,v_j> + 1)`,
/// and the end token scores exactly `+-beta (t+1)` against every data row.
/// Max mode masks the self pair, whose score would dominate the softmax.
pub fn build_ip_transformer(n: usize, l: usize, t: u64, mode: IpMode) -> Result<TransformerSpec> {
    check_guard(n, l)?;
    if t < 1 || t > l as u64 {
        return Err(Error::validation(format!("threshold {t} outside [1, {l}]")));
    }
    let beta = 3.0 * (n as f64).ln();
    let sign = if mode == IpMode::Max { 1.0 } else { -1.0 };
    let mut value_col = vec![vec![1.0]; l];
    value_col.push(vec![0.0]);
    let attention = AttentionUnitParams::new(
        Matrix::scaled_identity(l + 1, sign * beta),
        Matrix::from_rows(&value_col)?,
        if mode == IpMode::Max { Mask::ExcludeSelf } else { Mask::None },
    )?;
    let carried = (t + 1) as f64;
    let mut end_token = vec![0.0; l];
    end_token[l - 1] = carried;
    Ok(TransformerSpec {
        problem: if mode == IpMode::Max { ProblemTag::MaxIp } else { ProblemTag::MinIp },
        n,
        l,
        threshold: Some(Threshold::Ip(t)),
        beta,
        delta: None,
        phi1: MlpSpec::AppendFlag(carried),
        attention,
        phi2: margin_detector(n),
        end_token,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimilarityMode {
    Msd,
    Lsd,
}

/// MSD/LSD decision construction: MSD is exactly Max-IP after Euclidean
/// normalization, so phi1 normalizes data rows before appending the flag.
/// The score scale must grow with the promise gap `delta`: correctness is
/// guaranteed whenever every pairwise cosine is `>= t` or `<= t - delta`
/// (msd side; mirrored for lsd). `t = 0` msd is trivially yes.
pub fn build_similarity_transformer(
    n: usize,
    l: usize,
    t: Rational,
    mode: SimilarityMode,
    delta: f64,
) -> Result<TransformerSpec> {
    check_guard(n, l)?;
    if t > Rational::from_integer(1) {
        return Err(Error::validation(format!("cosine threshold {t} outside [0, 1]")));
    }
    if !(delta > 0.0) {
        return Err(Error::validation("promise gap delta must be positive"));
    }
    let trivial = t == Rational::from_integer(0);
    if trivial && mode == SimilarityMode::Lsd {
        return Err(Error::validation("lsd threshold must be positive"));
    }
    let beta = (2.5 * ((n + 1) as f64).ln() + 0.5 * (l as f64).ln() + 1.0) / delta;
    let sign = if mode == SimilarityMode::Msd { 1.0 } else { -1.0 };
    let mut value_col = vec![vec![1.0]; l];
    value_col.push(vec![0.0]);
    let attention = AttentionUnitParams::new(
        Matrix::scaled_identity(l + 1, sign * beta),
        Matrix::from_rows(&value_col)?,
        if mode == SimilarityMode::Msd { Mask::ExcludeSelf } else { Mask::None },
    )?;
    let carried = 1.0 + *t.numer() as f64 / *t.denom() as f64;
    let mut end_token = vec![0.0; l];
    end_token[l - 1] = carried;
    Ok(TransformerSpec {
        problem: if mode == SimilarityMode::Msd { ProblemTag::Msd } else { ProblemTag::Lsd },
        n,
        l,
        threshold: Some(Threshold::Cosine(t)),
        beta,
        delta: Some(delta),
        phi1: if trivial { MlpSpec::Identity } else { MlpSpec::NormalizeAppend(carried) },
        attention: if trivial {
            // attention output is ignored by the constant phi2; keep shapes legal
            AttentionUnitParams::new(
                Matrix::scaled_identity(l, 0.0),
                Matrix::from_rows(&vec![vec![0.0]; l])?,
                Mask::None,
            )?
        } else {
            attention
        },
        phi2: if trivial { MlpSpec::Constant(1.0) } else { margin_detector(n) },
        end_token: if trivial { vec![0.0; l] } else { end_token },
    })
}

/// Result of running a construction on an instance.
#[derive(Clone, Debug)]
pub struct TransformerRun {
    pub decision: bool,
    /// Full attention output, `(n+1) x 1`.
    pub output: Matrix,
    /// Pre-phi2 attention entries for the `n` data rows; the end-token row
    /// is excluded because its output is unrelated to the decision bands.
    pub margins: Vec<f64>,
}

fn check_instance(spec: &TransformerSpec, set: &BinaryVectorSet) -> Result<()> {
    if set.dim() != spec.l || set.n() != spec.n {
        return Err(Error::validation(format!(
            "instance shape {}x{} does not match spec {}x{}",
            set.n(),
            set.dim(),
            spec.n,
            spec.l
        )));
    }
    match spec.problem {
        // max-side needs every row nonzero (cosines undefined / the yes
        // bound uses |v|_1 >= 1)
        ProblemTag::MaxIp | ProblemTag::Msd | ProblemTag::Lsd => {
            if let Some(idx) = set.zero_row_index() {
                return Err(Error::validation(format!(
                    "row {idx} is the zero vector; not allowed for {}",
                    spec.problem.as_str()
                )));
            }
        }
        // all-zero sets have identically zero value rows, so no margin can
        // certify the (trivially yes) answer
        ProblemTag::Ov | ProblemTag::MinIp => {
            if set.rows().iter().all(|r| r.is_zero()) {
                return Err(Error::validation(
                    "all rows are zero; at least one nonzero row is required",
                ));
            }
        }
    }
    Ok(())
}

fn assemble_input(spec: &TransformerSpec, set: &BinaryVectorSet) -> Result<Matrix> {
    if !spec.phi1.is_row_map() {
        return Err(Error::validation("phi1 must be a row map"));
    }
    let mut rows: Vec<Vec<f64>> = set
        .rows()
        .iter()
        .map(|r| r.iter_bits().map(|b| if b { 1.0 } else { 0.0 }).collect())
        .collect();
    rows.push(spec.end_token.clone());
    let x0 = Matrix::from_rows(&rows)?;
    mlp_rows(&spec.phi1, &x0)
}

/// Runs the construction with a caller-supplied attention backend, so the
/// exact evaluator and the heuristic approximations share one pipeline.
pub fn transformer_run_with(
    spec: &TransformerSpec,
    set: &BinaryVectorSet,
    attention: impl FnOnce(&AttentionUnitParams, &Matrix) -> Result<Matrix>,
) -> Result<TransformerRun> {
    check_instance(spec, set)?;
    let x = assemble_input(spec, set)?;
    let out = attention(&spec.attention, &x)?;
    if out.nrows() != spec.n + 1 || out.ncols() != 1 {
        return Err(Error::solver("attention backend returned a wrong shape"));
    }
    let margins: Vec<f64> = (0..spec.n).map(|i| out.get(i, 0)).collect();
    let decision = mlp_scalar(&spec.phi2, &margins)? >= 0.5;
    Ok(TransformerRun { decision, output: out, margins })
}

/// Runs the construction with exact attention.
pub fn transformer_run(spec: &TransformerSpec, set: &BinaryVectorSet) -> Result<TransformerRun> {
    transformer_run_with(spec, set, attention_eval)
}

// ---------------------------------------------------------------------------
// Manifest

fn fmt_f64_list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Serializes a spec to a replayable text manifest. All constructions use
/// scaled-identity score matrices and a single value column, which is what
/// the format records.
pub fn write_manifest(spec: &TransformerSpec) -> Result<String> {
    let d = spec.attention.d_in();
    let diag = spec.attention.score.get(0, 0);
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { diag } else { 0.0 };
            if spec.attention.score.get(i, j) != want {
                return Err(Error::validation("manifest requires a scaled-identity score matrix"));
            }
        }
    }
    if spec.attention.d_out() != 1 {
        return Err(Error::validation("manifest requires a single value column"));
    }
    let mut out = String::new();
    let _ = writeln!(out, "problem {}", spec.problem.as_str());
    let _ = writeln!(out, "n {}", spec.n);
    let _ = writeln!(out, "l {}", spec.l);
    let t = match &spec.threshold {
        None => "-".to_string(),
        Some(Threshold::Ip(t)) => t.to_string(),
        Some(Threshold::Cosine(t)) => format!("{}/{}", t.numer(), t.denom()),
    };
    let _ = writeln!(out, "t {t}");
    let _ = writeln!(out, "beta {}", spec.beta);
    let _ = writeln!(out, "delta {}", spec.delta.map_or("-".to_string(), |d| d.to_string()));
    let mask = match spec.attention.mask {
        Mask::None => "none",
        Mask::ExcludeSelf => "exclude-self",
    };
    let _ = writeln!(out, "mask {mask}");
    let phi1 = match &spec.phi1 {
        MlpSpec::Identity => "identity".to_string(),
        MlpSpec::AppendFlag(t) => format!("append-flag {t}"),
        MlpSpec::NormalizeAppend(t) => format!("normalize-append {t}"),
        _ => return Err(Error::validation("phi1 must be a row map")),
    };
    let _ = writeln!(out, "phi1 {phi1}");
    let phi2 = match &spec.phi2 {
        MlpSpec::ThresholdDetector { a, b } => format!("detector {a} {b}"),
        MlpSpec::Constant(c) => format!("constant {c}"),
        _ => return Err(Error::validation("phi2 must be a scalar map")),
    };
    let _ = writeln!(out, "phi2 {phi2}");
    let _ = writeln!(out, "end {}", fmt_f64_list(&spec.end_token));
    let _ = writeln!(out, "score diag {diag} dim {d}");
    let col: Vec<f64> = (0..d).map(|i| spec.attention.value.get(i, 0)).collect();
    let _ = writeln!(out, "value col {}", fmt_f64_list(&col));
    Ok(out)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::validation(format!("invalid number {s:?} in manifest")))
}

/// Parses a manifest back into a runnable spec.
pub fn parse_manifest(text: &str) -> Result<TransformerSpec> {
    let mut fields = std::collections::HashMap::new();
    for line in text.lines().filter(|l| !l.is_empty()) {
        let (key, rest) = line
            .split_once(' ')
            .ok_or_else(|| Error::validation(format!("malformed manifest line {line:?}")))?;
        fields.insert(key.to_string(), rest.to_string());
    }
    let get = |key: &str| {
        fields
            .get(key)
            .cloned()
            .ok_or_else(|| Error::validation(format!("manifest missing field {key:?}")))
    };
    let problem = ProblemTag::parse(&get("problem")?)?;
    let n: usize = get("n")?.parse().map_err(|_| Error::validation("invalid n"))?;
    let l: usize = get("l")?.parse().map_err(|_| Error::validation("invalid l"))?;
    let threshold = match get("t")?.as_str() {
        "-" => None,
        s if s.contains('/') => Some(Threshold::Cosine(parse_rational(s)?)),
        s => Some(Threshold::Ip(
            s.parse().map_err(|_| Error::validation("invalid integer threshold"))?,
        )),
    };
    let beta = parse_f64(&get("beta")?)?;
    let delta = match get("delta")?.as_str() {
        "-" => None,
        s => Some(parse_f64(s)?),
    };
    let mask = match get("mask")?.as_str() {
        "none" => Mask::None,
        "exclude-self" => Mask::ExcludeSelf,
        other => return Err(Error::validation(format!("unknown mask {other:?}"))),
    };
    let phi1 = {
        let raw = get("phi1")?;
        let mut parts = raw.split(' ');
        match parts.next() {
            Some("identity") => MlpSpec::Identity,
            Some("append-flag") => MlpSpec::AppendFlag(parse_f64(
                parts.next().ok_or_else(|| Error::validation("append-flag needs a threshold"))?,
            )?),
            Some("normalize-append") => MlpSpec::NormalizeAppend(parse_f64(
                parts
                    .next()
                    .ok_or_else(|| Error::validation("normalize-append needs a threshold"))?,
            )?),
            other => return Err(Error::validation(format!("unknown phi1 {other:?}"))),
        }
    };
    let phi2 = {
        let raw = get("phi2")?;
        let parts: Vec<&str> = raw.split(' ').collect();
        match parts.as_slice() {
            ["detector", a, b] => MlpSpec::ThresholdDetector { a: parse_f64(a)?, b: parse_f64(b)? },
            ["constant", c] => MlpSpec::Constant(parse_f64(c)?),
            _ => return Err(Error::validation(format!("unknown phi2 {raw:?}"))),
        }
    };
    let end_token: Vec<f64> = get("end")?
        .split(' ')
        .map(parse_f64)
        .collect::<Result<_>>()?;
    let score_raw = get("score")?;
    let score_parts: Vec<&str> = score_raw.split(' ').collect();
    let (diag, d) = match score_parts.as_slice() {
        ["diag", c, "dim", d] => (
            parse_f64(c)?,
            d.parse::<usize>().map_err(|_| Error::validation("invalid score dim"))?,
        ),
        _ => return Err(Error::validation(format!("unknown score line {score_raw:?}"))),
    };
    let value_raw = get("value")?;
    let col_str = value_raw
        .strip_prefix("col ")
        .ok_or_else(|| Error::validation(format!("unknown value line {value_raw:?}")))?;
    let col: Vec<f64> = col_str.split(' ').map(parse_f64).collect::<Result<_>>()?;
    if col.len() != d {
        return Err(Error::validation("value column length does not match score dimension"));
    }
    let attention = AttentionUnitParams::new(
        Matrix::scaled_identity(d, diag),
        Matrix::from_rows(&col.iter().map(|&c| vec![c]).collect::<Vec<_>>())?,
        mask,
    )?;
    if end_token.len() != l {
        return Err(Error::validation("end token length does not match l"));
    }
    Ok(TransformerSpec { problem, n, l, threshold, beta, delta, phi1, attention, phi2, end_token })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BinaryVector;
    use crate::instances::{gen_random, plant, PlantKind, PlantSpec};
    use crate::oracles::{decide, exact_pair, ov_decide, Objective, PairValue};
    use proptest::prelude::*;

    fn set(rows: &[&str]) -> BinaryVectorSet {
        BinaryVectorSet::new(rows.iter().map(|r| BinaryVector::from_01_str(r).unwrap()).collect())
            .unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn softmax_closed_forms() {
        let w = softmax_row(&[0.0, 0.0]).unwrap();
        assert_close(w[0], 0.5, 1e-15);
        let w = softmax_row(&[2f64.ln(), 0.0]).unwrap();
        assert_close(w[0], 2.0 / 3.0, 1e-12);
        assert_close(w[1], 1.0 / 3.0, 1e-12);
        assert!(softmax_row(&[f64::NAN, 0.0]).is_err());
        assert!(softmax_row(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let v = [0.3, -1.2, 4.0];
        let shifted: Vec<f64> = v.iter().map(|x| x + 123.456).collect();
        let (a, b) = (softmax_row(&v).unwrap(), softmax_row(&shifted).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert_close(*x, *y, 1e-12);
        }
        assert_close(a.iter().sum::<f64>(), 1.0, 1e-12);
    }

    #[test]
    fn attention_simple_cases() {
        // zero scores average the values uniformly
        let p = AttentionUnitParams::new(
            Matrix::from_rows(&[vec![0.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            Mask::None,
        )
        .unwrap();
        let x = Matrix::from_rows(&[vec![1.0], vec![3.0]]).unwrap();
        let out = attention_eval(&p, &x).unwrap();
        assert_close(out.get(0, 0), 2.0, 1e-12);
        assert_close(out.get(1, 0), 2.0, 1e-12);

        // single row: softmax weight is 1
        let x1 = Matrix::from_rows(&[vec![5.0]]).unwrap();
        let out = attention_eval(&p, &x1).unwrap();
        assert_close(out.get(0, 0), 5.0, 1e-12);

        // n = 2 with exclude-self: each row takes the other's value
        let p = AttentionUnitParams::new(
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            Mask::ExcludeSelf,
        )
        .unwrap();
        let out = attention_eval(&p, &x).unwrap();
        assert_close(out.get(0, 0), 3.0, 1e-15);
        assert_close(out.get(1, 0), 1.0, 1e-15);
    }

    #[test]
    fn factor_m_reproduces_the_score_matrix() {
        let (q, k) = factor_m(&Matrix::identity(2), 3).unwrap();
        assert_eq!(q.matmul(&k.transpose()).unwrap(), Matrix::identity(2));
        let m = Matrix::scaled_identity(4, -2.5);
        let (q, k) = factor_m(&m, 4).unwrap();
        assert_eq!(q.matmul(&k.transpose()).unwrap(), m);
        assert!(factor_m(&m, 3).is_err());

        // evaluation through the factors equals evaluation through M
        let params = AttentionUnitParams::new(
            m.clone(),
            Matrix::from_rows(&[vec![1.0], vec![0.5], vec![-1.0], vec![2.0]]).unwrap(),
            Mask::None,
        )
        .unwrap();
        let x = Matrix::from_rows(&[
            vec![1.0, 0.0, 1.0, 0.5],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0, 0.0],
        ])
        .unwrap();
        let direct = attention_eval(&params, &x).unwrap();
        let (q, k) = factor_m(&m, 6).unwrap();
        let via_factors = AttentionUnitParams::new(
            q.matmul(&k.transpose()).unwrap(),
            params.value.clone(),
            Mask::None,
        )
        .unwrap();
        let refactored = attention_eval(&via_factors, &x).unwrap();
        for i in 0..3 {
            assert_close(direct.get(i, 0), refactored.get(i, 0), 1e-12);
        }
    }

    #[test]
    fn detector_regions_and_interior_value() {
        assert_eq!(detector_scalar(0.25, 0.5, &[0.6, 0.1]), 1.0);
        assert_eq!(detector_scalar(0.25, 0.5, &[0.1, 0.2]), 0.0);
        // g(0.3) = 0.2, f = 1 - (1 - 0.2)^2 = 0.36
        assert_close(detector_scalar(0.25, 0.5, &[0.3, 0.3]), 0.36, 1e-12);
    }

    #[test]
    fn append_flag_branches() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 0.0, 3.0]]).unwrap();
        let out = mlp_rows(&MlpSpec::AppendFlag(3.0), &x).unwrap();
        assert_eq!(out.row(0), &[1.0, 0.0, 1.0, 1.0]);
        assert_eq!(out.row(1), &[0.0, 0.0, 0.0, 3.0]);
    }

    #[test]
    fn normalize_append_branches() {
        let x = Matrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.5]]).unwrap();
        let out = mlp_rows(&MlpSpec::NormalizeAppend(1.5), &x).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_close(out.get(0, 0), s, 1e-12);
        assert_close(out.get(0, 1), s, 1e-12);
        assert_eq!(out.get(0, 3), 1.0);
        assert_eq!(out.row(1), &[0.0, 0.0, 0.0, 1.5]);
        // zero data row is rejected
        let bad = Matrix::from_rows(&[vec![0.0, 0.0, 0.0]]).unwrap();
        assert!(mlp_rows(&MlpSpec::NormalizeAppend(2.0), &bad).is_err());
    }

    #[test]
    fn append_blend_is_continuous_at_the_knees() {
        let probe = |last: f64| {
            let x = Matrix::from_rows(&[vec![1.0, last]]).unwrap();
            mlp_rows(&MlpSpec::AppendFlag(3.0), &x).unwrap().row(0).to_vec()
        };
        for eps in [1e-9, 1e-6] {
            let (lo, hi) = (probe(1.0 - eps), probe(1.0 + eps));
            for (a, b) in lo.iter().zip(&hi) {
                assert_close(*a, *b, 1e-5);
            }
            let (lo, hi) = (probe(3.0 - eps), probe(3.0 + eps));
            for (a, b) in lo.iter().zip(&hi) {
                assert_close(*a, *b, 1e-5);
            }
        }
    }

    #[test]
    fn ov_hand_computed_entry_at_n2() {
        // guard requires 4 l^2 <= n, so assemble the n = 2 params by hand
        let beta = 3.0 * 2f64.ln();
        let params = AttentionUnitParams::new(
            Matrix::scaled_identity(2, -beta),
            Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap(),
            Mask::None,
        )
        .unwrap();
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let out = attention_eval(&params, &x).unwrap();
        // row 1: weights prop to (2^-3, 1, 1) on values (1, 1, 0)
        assert_close(out.get(0, 0), 1.125 / 2.125, 1e-12);
        assert!(out.get(0, 0) >= 1.0 / 3.0);
    }

    #[test]
    fn ov_transformer_margins_and_decisions() {
        let spec = build_ov_transformer(16, 2).unwrap();
        // planted orthogonal pair
        let base = set(&[
            "11", "01", "11", "01", "11", "01", "11", "01", "11", "01", "11", "01", "11", "01",
            "11", "10",
        ]);
        let yes = transformer_run(&spec, &base).unwrap();
        assert!(ov_decide(&base).unwrap());
        assert!(yes.decision);
        let max = yes.margins.iter().cloned().fold(0.0f64, f64::max);
        assert!(max >= 1.0 / 17.0, "max margin {max}");

        // no-instance: rows from {11, 01} are never orthogonal
        let no = set(&[
            "11", "01", "11", "01", "11", "01", "11", "01", "11", "01", "11", "01", "11", "01",
            "11", "01",
        ]);
        assert!(!ov_decide(&no).unwrap());
        let run = transformer_run(&spec, &no).unwrap();
        assert!(!run.decision);
        let max = run.margins.iter().cloned().fold(0.0f64, f64::max);
        assert!(max <= (17.0f64).powf(-1.5), "max margin {max}");

        // a zero row makes the answer yes
        let zero = base.with_row(3, BinaryVector::zeros(2)).unwrap();
        assert!(transformer_run(&spec, &zero).unwrap().decision);
    }

    #[test]
    fn guards_are_enforced() {
        assert!(build_ov_transformer(2, 2).is_err());
        assert!(build_ov_transformer(16, 2).is_ok());
        assert!(build_ip_transformer(16, 2, 0, IpMode::Max).is_err());
        assert!(build_ip_transformer(16, 2, 3, IpMode::Max).is_err());
        assert!(
            build_similarity_transformer(16, 2, Rational::new(3, 2), SimilarityMode::Msd, 0.1)
                .is_err()
        );
        assert!(
            build_similarity_transformer(16, 2, Rational::new(1, 2), SimilarityMode::Msd, 0.0)
                .is_err()
        );

        // all-zero set rejected for ov; zero row rejected for max-ip
        let spec = build_ov_transformer(16, 2).unwrap();
        let zeros = BinaryVectorSet::new(vec![BinaryVector::zeros(2); 16]).unwrap();
        assert!(transformer_run(&spec, &zeros).is_err());
        let spec = build_ip_transformer(16, 2, 1, IpMode::Max).unwrap();
        let mut rows = vec![BinaryVector::from_01_str("11").unwrap(); 16];
        rows[5] = BinaryVector::zeros(2);
        let s = BinaryVectorSet::new(rows).unwrap();
        assert!(transformer_run(&spec, &s).is_err());
    }

    fn oracle_decision(s: &BinaryVectorSet, obj: Objective, t: &crate::oracles::Threshold) -> bool {
        decide(s, obj, t).unwrap()
    }

    #[test]
    fn ip_transformers_match_the_oracle() {
        for seed in 0..25 {
            for p in [0.2, 0.5, 0.8] {
                let s = gen_random(36, 3, p, seed).unwrap();
                for t in 1..=3u64 {
                    let th = crate::oracles::Threshold::Ip(t);
                    if !s.contains_zero_row() {
                        let spec = build_ip_transformer(36, 3, t, IpMode::Max).unwrap();
                        let run = transformer_run(&spec, &s).unwrap();
                        assert_eq!(run.decision, oracle_decision(&s, Objective::MaxIp, &th));
                    }
                    let spec = build_ip_transformer(36, 3, t, IpMode::Min).unwrap();
                    if s.rows().iter().any(|r| !r.is_zero()) {
                        let run = transformer_run(&spec, &s).unwrap();
                        assert_eq!(run.decision, oracle_decision(&s, Objective::MinIp, &th));
                    }
                }
            }
        }
    }

    #[test]
    fn similarity_transformers_match_the_oracle() {
        // l = 2 grid is {0, 1/2, 1/sqrt2, 1}; t = 3/5 sits between 1/2 and
        // 1/sqrt2 with clearance > 0.09 on both sides
        let t = Rational::new(3, 5);
        for seed in 0..40 {
            let s = gen_random(16, 2, 0.6, seed).unwrap();
            if s.contains_zero_row() {
                continue;
            }
            for mode in [SimilarityMode::Msd, SimilarityMode::Lsd] {
                let spec = build_similarity_transformer(16, 2, t, mode, 0.09).unwrap();
                let run = transformer_run(&spec, &s).unwrap();
                let obj = if mode == SimilarityMode::Msd { Objective::Msd } else { Objective::Lsd };
                let want = oracle_decision(&s, obj, &crate::oracles::Threshold::Cosine(t));
                assert_eq!(run.decision, want, "seed {seed} mode {mode:?}");
            }
        }
    }

    #[test]
    fn msd_threshold_zero_is_constant_yes() {
        let t = Rational::from_integer(0);
        let spec = build_similarity_transformer(16, 2, t, SimilarityMode::Msd, 0.1).unwrap();
        let s = set(&[
            "11", "01", "11", "01", "11", "01", "11", "01", "11", "01", "11", "01", "11", "01",
            "11", "10",
        ]);
        assert!(transformer_run(&spec, &s).unwrap().decision);
        assert!(
            build_similarity_transformer(16, 2, t, SimilarityMode::Lsd, 0.1).is_err()
        );
    }

    #[test]
    fn lsd_with_threshold_one_accepts_duplicates() {
        let spec =
            build_similarity_transformer(16, 2, Rational::from_integer(1), SimilarityMode::Lsd, 0.2)
                .unwrap();
        let s = set(&[
            "11", "11", "01", "01", "11", "01", "11", "01", "11", "01", "11", "01", "11", "01",
            "11", "01",
        ]);
        assert!(transformer_run(&spec, &s).unwrap().decision);
    }

    #[test]
    fn maxip_yes_instance_found_via_planting() {
        let spec = build_ip_transformer(36, 3, 3, IpMode::Max).unwrap();
        let base = gen_random(36, 3, 0.4, 77).unwrap();
        let planted = plant(
            &base,
            &PlantSpec::new(PlantKind::IpAtLeast(3), 4, 20).unwrap(),
            7,
        )
        .unwrap();
        if !planted.contains_zero_row() {
            let run = transformer_run(&spec, &planted).unwrap();
            assert!(run.decision);
            let max = run.margins.iter().cloned().fold(0.0f64, f64::max);
            assert!(max >= 1.0 / 37.0);
        }
    }

    #[test]
    fn manifest_round_trip() {
        let specs = vec![
            build_ov_transformer(64, 4).unwrap(),
            build_ip_transformer(36, 3, 2, IpMode::Max).unwrap(),
            build_ip_transformer(36, 3, 2, IpMode::Min).unwrap(),
            build_similarity_transformer(16, 2, Rational::new(3, 5), SimilarityMode::Msd, 0.09)
                .unwrap(),
        ];
        for spec in specs {
            let text = write_manifest(&spec).unwrap();
            let back = parse_manifest(&text).unwrap();
            assert_eq!(back.problem, spec.problem);
            assert_eq!((back.n, back.l), (spec.n, spec.l));
            assert_eq!(back.threshold, spec.threshold);
            assert_eq!(back.beta, spec.beta);
            assert_eq!(back.delta, spec.delta);
            assert_eq!(back.phi1, spec.phi1);
            assert_eq!(back.phi2, spec.phi2);
            assert_eq!(back.end_token, spec.end_token);
            assert_eq!(back.attention.score, spec.attention.score);
            assert_eq!(back.attention.value, spec.attention.value);
            assert_eq!(back.attention.mask, spec.attention.mask);
        }
    }

    #[test]
    fn decision_matches_margin_bands_against_exact_values() {
        // cross-check: when the oracle optimum is exactly at the threshold,
        // the transformer must say yes (inclusive comparison)
        for seed in 0..20 {
            let s = gen_random(36, 3, 0.5, seed).unwrap();
            let best = exact_pair(&s, Objective::MaxIp).unwrap();
            let PairValue::Ip(v) = best.value else { unreachable!() };
            if v < 1 || s.contains_zero_row() {
                continue;
            }
            let spec = build_ip_transformer(36, 3, v, IpMode::Max).unwrap();
            assert!(transformer_run(&spec, &s).unwrap().decision);
        }
    }

    proptest! {
        #[test]
        fn attention_is_permutation_equivariant(seed in 0u64..50, n in 2usize..7, mask_self in proptest::bool::ANY) {
            let s = gen_random(n, 3, 0.5, seed).unwrap();
            let rows: Vec<Vec<f64>> = s.rows().iter()
                .map(|r| r.iter_bits().map(|b| if b { 1.0 } else { 0.0 }).collect())
                .collect();
            let x = Matrix::from_rows(&rows).unwrap();
            let reversed: Vec<Vec<f64>> = rows.iter().rev().cloned().collect();
            let xr = Matrix::from_rows(&reversed).unwrap();
            let params = AttentionUnitParams::new(
                Matrix::scaled_identity(3, -1.3),
                Matrix::from_rows(&[vec![1.0], vec![0.5], vec![2.0]]).unwrap(),
                if mask_self { Mask::ExcludeSelf } else { Mask::None },
            ).unwrap();
            let out = attention_eval(&params, &x).unwrap();
            let out_r = attention_eval(&params, &xr).unwrap();
            for i in 0..n {
                prop_assert!((out.get(i, 0) - out_r.get(n - 1 - i, 0)).abs() < 1e-12);
            }
        }

        #[test]
        fn softmax_rows_sum_to_one(v in proptest::collection::vec(-50.0f64..50.0, 1..8)) {
            let w = softmax_row(&v).unwrap();
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|&x| x > 0.0));
        }
    }
}
