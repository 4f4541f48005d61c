//! Instance construction: bag-of-words embedding, seeded random generation,
//! witness planting, and the text codec.
//!
//! Instance text format: first line `n l` (ASCII decimal, single space),
//! then `n` lines of exactly `l` characters from `{0,1}`, LF newlines.
//! A bichromatic instance is a `BICHROM` line followed by two such blocks.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::{BichromaticInstance, BinaryVector, BinaryVectorSet};
use crate::error::{Error, Result};
use crate::exact::{ExactCosine, Rational};

/// Ordered list of distinct normalized keywords; defines the coordinates of
/// the bag-of-words embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeywordList {
    words: Vec<String>,
}

impl KeywordList {
    pub fn new(raw: impl IntoIterator<Item = impl AsRef<str>>) -> Result<Self> {
        let mut words = Vec::new();
        let mut seen = HashSet::new();
        for w in raw {
            let norm = normalize_token(w.as_ref());
            if norm.is_empty() {
                return Err(Error::validation("keyword is empty after normalization"));
            }
            if !seen.insert(norm.clone()) {
                return Err(Error::validation(format!("duplicate keyword {norm:?}")));
            }
            words.push(norm);
        }
        Ok(KeywordList { words })
    }

    /// Parses one keyword per line; blank lines are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        KeywordList::new(text.lines())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Lowercases and strips leading/trailing punctuation. Exact-match only:
/// "apples" does not match "apple"; stemming is out of scope.
pub fn normalize_token(tok: &str) -> String {
    tok.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

/// Bag-of-words embedding: bit `i` is 1 iff keyword `i` occurs as a token of
/// the document. Invariant under token reordering and repetition.
pub fn embed_bag_of_words(doc: &str, keywords: &KeywordList) -> BinaryVector {
    let tokens: HashSet<String> = doc
        .split_whitespace()
        .map(normalize_token)
        .filter(|t| !t.is_empty())
        .collect();
    let mut v = BinaryVector::zeros(keywords.len());
    for (i, w) in keywords.words().iter().enumerate() {
        if tokens.contains(w) {
            v.set(i, true);
        }
    }
    v
}

/// Random set with each bit independently 1 with probability `p`,
/// deterministic in the seed.
pub fn gen_random(n: usize, l: usize, p: f64, seed: u64) -> Result<BinaryVectorSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::validation(format!("bit probability {p} outside [0, 1]")));
    }
    if n == 0 || l == 0 {
        return Err(Error::validation("n and l must both be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let mut row = BinaryVector::zeros(l);
            for i in 0..l {
                if rng.gen::<f64>() < p {
                    row.set(i, true);
                }
            }
            row
        })
        .collect();
    BinaryVectorSet::new(rows)
}

/// Random bichromatic instance; both sides drawn from the same distribution.
pub fn gen_random_bichrom(n: usize, l: usize, p: f64, seed: u64) -> Result<BichromaticInstance> {
    BichromaticInstance::new(gen_random(n, l, p, seed)?, gen_random(n, l, p, seed ^ 0x9e37_79b9)?)
}

/// What to plant at a target index pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlantKind {
    OrthogonalPair,
    IpAtLeast(u64),
    IpAtMost(u64),
    CosineAtLeast(Rational),
    CosineAtMost(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantSpec {
    pub kind: PlantKind,
    pub i: usize,
    pub j: usize,
}

impl PlantSpec {
    pub fn new(kind: PlantKind, i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::validation("plant target indices must differ"));
        }
        Ok(PlantSpec { kind, i, j })
    }
}

/// Rewrites rows `i` and `j` so the requested property holds exactly at the
/// target pair; all other rows are untouched. The result is verified by
/// exact arithmetic before it is returned.
pub fn plant(set: &BinaryVectorSet, spec: &PlantSpec, seed: u64) -> Result<BinaryVectorSet> {
    let n = set.n();
    let l = set.dim();
    if spec.i >= n || spec.j >= n {
        return Err(Error::validation(format!(
            "plant indices ({}, {}) out of range for n = {n}",
            spec.i, spec.j
        )));
    }
    match &spec.kind {
        PlantKind::IpAtLeast(t) | PlantKind::IpAtMost(t) => {
            if *t > l as u64 {
                return Err(Error::validation(format!(
                    "inner-product threshold {t} outside [0, {l}]"
                )));
            }
        }
        PlantKind::CosineAtLeast(t) | PlantKind::CosineAtMost(t) => {
            if *t > Rational::from_integer(1) {
                return Err(Error::validation(format!("cosine threshold {t} outside [0, 1]")));
            }
        }
        PlantKind::OrthogonalPair => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ri = set.row(spec.i).clone();
    let mut rj = set.row(spec.j).clone();

    match &spec.kind {
        PlantKind::OrthogonalPair => {
            clear_overlap(&ri, &mut rj);
        }
        PlantKind::IpAtMost(t) => {
            reduce_overlap(&ri, &mut rj, *t);
        }
        PlantKind::IpAtLeast(t) => {
            // Choose t positions and set them in both rows.
            let mut picks: Vec<usize> = (0..l).collect();
            for k in 0..(*t as usize) {
                let swap = rng.gen_range(k..l);
                picks.swap(k, swap);
                ri.set(picks[k], true);
                rj.set(picks[k], true);
            }
        }
        PlantKind::CosineAtLeast(_) => {
            // Cosine 1 satisfies every legal threshold.
            force_nonzero(&mut ri, &mut rng);
            rj = ri.clone();
        }
        PlantKind::CosineAtMost(t) => {
            force_nonzero(&mut ri, &mut rng);
            force_nonzero(&mut rj, &mut rng);
            if ExactCosine::between(&ri, &rj)?.cmp_rational(t) == Ordering::Greater {
                // Disjoint nonzero supports give cosine 0, which needs l >= 2.
                if l < 2 {
                    return Err(Error::validation(
                        "cannot plant cosine below 1 at dimension 1: \
                         both rows must stay nonzero",
                    ));
                }
                let half = l / 2;
                ri = restrict_support(&ri, 0, half);
                if ri.is_zero() {
                    ri.set(0, true);
                }
                rj = restrict_support(&rj, half, l);
                if rj.is_zero() {
                    rj.set(l - 1, true);
                }
            }
        }
    }

    let planted = set.with_row(spec.i, ri)?.with_row(spec.j, rj)?;
    verify_plant(&planted, spec)?;
    Ok(planted)
}

fn clear_overlap(keep: &BinaryVector, target: &mut BinaryVector) {
    for k in 0..keep.len() {
        if keep.get(k) {
            target.set(k, false);
        }
    }
}

fn reduce_overlap(keep: &BinaryVector, target: &mut BinaryVector, limit: u64) {
    let mut overlap = keep.dot(target);
    for k in 0..keep.len() {
        if overlap <= limit {
            break;
        }
        if keep.get(k) && target.get(k) {
            target.set(k, false);
            overlap -= 1;
        }
    }
}

fn force_nonzero(v: &mut BinaryVector, rng: &mut ChaCha8Rng) {
    if v.is_zero() {
        let bit = rng.gen_range(0..v.len());
        v.set(bit, true);
    }
}

fn restrict_support(v: &BinaryVector, from: usize, to: usize) -> BinaryVector {
    let mut out = BinaryVector::zeros(v.len());
    for k in from..to {
        if v.get(k) {
            out.set(k, true);
        }
    }
    out
}

fn verify_plant(set: &BinaryVectorSet, spec: &PlantSpec) -> Result<()> {
    let (u, v) = (set.row(spec.i), set.row(spec.j));
    let ok = match &spec.kind {
        PlantKind::OrthogonalPair => u.dot(v) == 0,
        PlantKind::IpAtLeast(t) => u.dot(v) >= *t,
        PlantKind::IpAtMost(t) => u.dot(v) <= *t,
        PlantKind::CosineAtLeast(t) => {
            ExactCosine::between(u, v)?.cmp_rational(t) != Ordering::Less
        }
        PlantKind::CosineAtMost(t) => {
            ExactCosine::between(u, v)?.cmp_rational(t) != Ordering::Greater
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::solver(format!(
            "planted property {:?} failed verification at ({}, {})",
            spec.kind, spec.i, spec.j
        )))
    }
}

// ---------------------------------------------------------------------------
// Text codec

pub fn write_set(set: &BinaryVectorSet) -> String {
    let mut out = String::with_capacity((set.dim() + 1) * (set.n() + 1));
    out.push_str(&format!("{} {}\n", set.n(), set.dim()));
    for row in set.rows() {
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}

pub fn write_bichrom(inst: &BichromaticInstance) -> String {
    format!("BICHROM\n{}{}", write_set(inst.a()), write_set(inst.b()))
}

pub fn read_set(text: &str) -> Result<BinaryVectorSet> {
    let mut lines = text.lines().enumerate();
    let set = read_set_block(&mut lines)?;
    reject_trailing(&mut lines)?;
    Ok(set)
}

pub fn read_bichrom(text: &str) -> Result<BichromaticInstance> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "BICHROM")) => {}
        Some((ln, other)) => {
            return Err(Error::codec(ln + 1, 1, format!("expected BICHROM header, found {other:?}")))
        }
        None => return Err(Error::codec(1, 1, "empty input")),
    }
    let a = read_set_block(&mut lines)?;
    let b = read_set_block(&mut lines)?;
    reject_trailing(&mut lines)?;
    BichromaticInstance::new(a, b)
}

fn read_set_block<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<BinaryVectorSet> {
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::codec(1, 1, "missing instance header"))?;
    let (n, l) = parse_header(hline + 1, header)?;
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let (rline, raw) = lines.next().ok_or_else(|| {
            Error::codec(hline + 2 + rows.len(), 1, format!("expected {n} rows, found {}", rows.len()))
        })?;
        if raw.chars().count() != l {
            return Err(Error::codec(
                rline + 1,
                raw.chars().count().min(l) + 1,
                format!("row has length {} but the header says {l}", raw.chars().count()),
            ));
        }
        for (col, c) in raw.chars().enumerate() {
            if c != '0' && c != '1' {
                return Err(Error::codec(rline + 1, col + 1, format!("invalid character {c:?}")));
            }
        }
        rows.push(BinaryVector::from_01_str(raw)?);
    }
    BinaryVectorSet::new(rows)
}

fn parse_header(line_no: usize, header: &str) -> Result<(usize, usize)> {
    let bad = |msg: &str| Error::codec(line_no, 1, msg.to_string());
    let (ns, ls) = header
        .split_once(' ')
        .ok_or_else(|| bad("header must be \"n l\" separated by a single space"))?;
    let n: usize = ns.parse().map_err(|_| bad("invalid n in header"))?;
    let l: usize = ls.parse().map_err(|_| bad("invalid l in header"))?;
    if n == 0 {
        return Err(bad("n must be at least 1"));
    }
    if l == 0 {
        return Err(bad("l must be at least 1"));
    }
    Ok((n, l))
}

fn reject_trailing<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<()> {
    if let Some((ln, extra)) = lines.find(|(_, s)| !s.is_empty()) {
        return Err(Error::codec(ln + 1, 1, format!("unexpected trailing content {extra:?}")));
    }
    Ok(())
}
