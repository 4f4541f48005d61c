//! Ground-truth solvers: brute-force quadratic algorithms with exact
//! arithmetic for every problem variant, plus the fast low-dimension OV
//! algorithm.
//!
//! Monochromatic problems range over unordered pairs `i < j`; bichromatic
//! pairs take `i` from the A side and `j` from the B side. Ties are broken
//! by the lexicographically smallest `(i, j)`. Indices are 0-based.

use std::cmp::Ordering;

use crate::bits::{BichromaticInstance, BinaryVector, BinaryVectorSet};
use crate::error::{Error, Result};
use crate::exact::{
    cosine_within_gamma_max, cosine_within_gamma_min, ip_within_gamma_max, ip_within_gamma_min,
    ExactCosine, Rational,
};

/// Objective of the optimizing-pair problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    MaxIp,
    MinIp,
    Msd,
    Lsd,
}

impl Objective {
    pub fn is_max_type(self) -> bool {
        matches!(self, Objective::MaxIp | Objective::Msd)
    }

    pub fn uses_cosine(self) -> bool {
        matches!(self, Objective::Msd | Objective::Lsd)
    }
}

/// Exact value attained by a pair, tagged by objective family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairValue {
    Ip(u64),
    Cosine(ExactCosine),
}

/// Decision threshold: integer for inner products, rational for cosines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    Ip(u64),
    Cosine(Rational),
}

/// An optimizing pair together with its exactly recomputed value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairResult {
    pub i: usize,
    pub j: usize,
    pub value: PairValue,
}

fn require_pairs(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::validation(format!("need at least 2 vectors, got {n}")));
    }
    Ok(())
}

fn require_nonzero_rows(set: &BinaryVectorSet, objective: Objective) -> Result<()> {
    if objective.uses_cosine() {
        if let Some(idx) = set.zero_row_index() {
            return Err(Error::validation(format!(
                "row {idx} is the zero vector; cosine objectives require nonzero rows"
            )));
        }
    }
    Ok(())
}

/// Orthogonal Vectors: is there a pair `i != j` with inner product 0?
pub fn ov_decide(set: &BinaryVectorSet) -> Result<bool> {
    require_pairs(set.n())?;
    let rows = set.rows();
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            if rows[i].dot(&rows[j]) == 0 {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Bichromatic OV: is some cross pair orthogonal?
pub fn ov_decide_bichrom(inst: &BichromaticInstance) -> bool {
    inst.a()
        .rows()
        .iter()
        .any(|a| inst.b().rows().iter().any(|b| a.dot(b) == 0))
}

const FAST_OV_MAX_DIM: usize = 24;

/// OV in `O(2^l + n)` via sum-over-subsets DP.
///
/// `count[S]` = number of rows with support exactly `S`; the zeta transform
/// gives `reach[S]` = number of rows with support contained in `S`. A row
/// `v` has an orthogonal partner iff some row's support lies inside the
/// complement of `v`, excluding `v` itself when its support is empty.
pub fn ov_decide_fast(set: &BinaryVectorSet) -> Result<bool> {
    require_pairs(set.n())?;
    let l = set.dim();
    if l > FAST_OV_MAX_DIM {
        return Err(Error::validation(format!(
            "dimension {l} exceeds the subset-DP cap {FAST_OV_MAX_DIM}"
        )));
    }
    let full = 1usize << l;
    let mut reach = vec![0u32; full];
    for row in set.rows() {
        reach[row.low_word() as usize] += 1;
    }
    for bit in 0..l {
        for s in 0..full {
            if s >> bit & 1 == 1 {
                reach[s] += reach[s ^ (1 << bit)];
            }
        }
    }
    let mask = full - 1;
    Ok(set.rows().iter().any(|row| {
        let s = row.low_word() as usize;
        let partners = reach[!s & mask] - u32::from(s == 0);
        partners >= 1
    }))
}

fn pair_value(u: &BinaryVector, v: &BinaryVector, objective: Objective) -> Result<PairValue> {
    Ok(if objective.uses_cosine() {
        PairValue::Cosine(ExactCosine::between(u, v)?)
    } else {
        PairValue::Ip(u.dot(v))
    })
}

/// `Greater` means `a` is strictly better than `b` for the objective.
pub fn compare_values(a: &PairValue, b: &PairValue, objective: Objective) -> Ordering {
    let natural = match (a, b) {
        (PairValue::Ip(x), PairValue::Ip(y)) => x.cmp(y),
        (PairValue::Cosine(x), PairValue::Cosine(y)) => x.cmp(y),
        _ => unreachable!("mixed pair value kinds"),
    };
    if objective.is_max_type() {
        natural
    } else {
        natural.reverse()
    }
}

fn optimize(
    pairs: impl Iterator<Item = (usize, usize)>,
    value: impl Fn(usize, usize) -> Result<PairValue>,
    objective: Objective,
) -> Result<PairResult> {
    let mut best: Option<PairResult> = None;
    // Pairs arrive in lexicographic order; strict improvement keeps the
    // lexicographically smallest optimizer.
    for (i, j) in pairs {
        let v = value(i, j)?;
        if best
            .as_ref()
            .map_or(true, |b| compare_values(&v, &b.value, objective) == Ordering::Greater)
        {
            best = Some(PairResult { i, j, value: v });
        }
    }
    best.ok_or_else(|| Error::validation("no pairs to optimize over"))
}

/// Exact optimizing pair, monochromatic.
pub fn exact_pair(set: &BinaryVectorSet, objective: Objective) -> Result<PairResult> {
    require_pairs(set.n())?;
    require_nonzero_rows(set, objective)?;
    let n = set.n();
    optimize(
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j))),
        |i, j| pair_value(set.row(i), set.row(j), objective),
        objective,
    )
}

/// Exact optimizing cross pair, bichromatic; `i` indexes A, `j` indexes B.
pub fn exact_pair_bichrom(inst: &BichromaticInstance, objective: Objective) -> Result<PairResult> {
    require_nonzero_rows(inst.a(), objective)?;
    require_nonzero_rows(inst.b(), objective)?;
    let (na, nb) = (inst.a().n(), inst.b().n());
    optimize(
        (0..na).flat_map(move |i| (0..nb).map(move |j| (i, j))),
        |i, j| pair_value(inst.a().row(i), inst.b().row(j), objective),
        objective,
    )
}

fn check_threshold(threshold: &Threshold, objective: Objective, l: usize) -> Result<()> {
    match (threshold, objective.uses_cosine()) {
        (Threshold::Ip(t), false) => {
            if *t > l as u64 {
                return Err(Error::validation(format!("threshold {t} outside [0, {l}]")));
            }
        }
        (Threshold::Cosine(t), true) => {
            if *t > Rational::from_integer(1) {
                return Err(Error::validation(format!("cosine threshold {t} outside [0, 1]")));
            }
        }
        _ => {
            return Err(Error::validation(
                "threshold kind does not match objective (integer for IP, rational for cosine)",
            ))
        }
    }
    Ok(())
}

fn qualifies(value: &PairValue, threshold: &Threshold, objective: Objective) -> bool {
    match (value, threshold) {
        (PairValue::Ip(v), Threshold::Ip(t)) => {
            if objective.is_max_type() {
                v >= t
            } else {
                v <= t
            }
        }
        (PairValue::Cosine(c), Threshold::Cosine(t)) => {
            let ord = c.cmp_rational(t);
            if objective.is_max_type() {
                ord != Ordering::Less
            } else {
                ord != Ordering::Greater
            }
        }
        _ => unreachable!("threshold kind checked upstream"),
    }
}

/// Decision form: is there a pair meeting the threshold on the objective's
/// side (`>= t` for max-type, `<= t` for min-type)?
pub fn decide(set: &BinaryVectorSet, objective: Objective, threshold: &Threshold) -> Result<bool> {
    check_threshold(threshold, objective, set.dim())?;
    // The optimum qualifies iff any pair does.
    let best = exact_pair(set, objective)?;
    Ok(qualifies(&best.value, threshold, objective))
}

/// Bichromatic decision form.
pub fn decide_bichrom(
    inst: &BichromaticInstance,
    objective: Objective,
    threshold: &Threshold,
) -> Result<bool> {
    check_threshold(threshold, objective, inst.dim())?;
    let best = exact_pair_bichrom(inst, objective)?;
    Ok(qualifies(&best.value, threshold, objective))
}

/// Exact three-way comparison of `cos(u, v)` against a rational `p/q`.
pub fn cosine_compare(u: &BinaryVector, v: &BinaryVector, t: &Rational) -> Result<Ordering> {
    if *t > Rational::from_integer(1) {
        return Err(Error::validation(format!("cosine threshold {t} outside [0, 1]")));
    }
    Ok(ExactCosine::between(u, v)?.cmp_rational(t))
}

/// Does the candidate pair's value lie within the multiplicative
/// `gamma`-window around the exact optimum? The candidate value is
/// recomputed from its indices, never trusted.
pub fn verify_gamma(
    set: &BinaryVectorSet,
    candidate: (usize, usize),
    gamma: &Rational,
    objective: Objective,
) -> Result<bool> {
    let (i, j) = candidate;
    if i >= set.n() || j >= set.n() || i == j {
        return Err(Error::validation(format!(
            "candidate indices ({i}, {j}) invalid for n = {}",
            set.n()
        )));
    }
    let value = pair_value(set.row(i), set.row(j), objective)?;
    let opt = exact_pair(set, objective)?.value;
    match (value, opt) {
        (PairValue::Ip(c), PairValue::Ip(o)) => {
            if objective.is_max_type() {
                ip_within_gamma_max(c, o, gamma)
            } else {
                ip_within_gamma_min(c, o, gamma)
            }
        }
        (PairValue::Cosine(c), PairValue::Cosine(o)) => {
            if objective.is_max_type() {
                cosine_within_gamma_max(&c, &o, gamma)
            } else {
                cosine_within_gamma_min(&c, &o, gamma)
            }
        }
        _ => unreachable!("value kinds agree per objective"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_random;
    use proptest::prelude::*;

    fn set(rows: &[&str]) -> BinaryVectorSet {
        BinaryVectorSet::new(rows.iter().map(|r| BinaryVector::from_01_str(r).unwrap()).collect())
            .unwrap()
    }

    #[test]
    fn ov_decide_small_cases() {
        assert!(ov_decide(&set(&["10", "01"])).unwrap());
        assert!(ov_decide(&set(&["11", "10", "01"])).unwrap());
        assert!(!ov_decide(&set(&["11", "10"])).unwrap());
        assert!(ov_decide(&set(&["10"])).is_err());
    }

    #[test]
    fn fast_ov_handles_zero_vectors_and_caps_dimension() {
        assert!(ov_decide_fast(&set(&["10", "01"])).unwrap());
        // zero vector is orthogonal to anything
        assert!(ov_decide_fast(&set(&["00", "11"])).unwrap());
        // a single zero row is not orthogonal to itself in the i != j sense
        assert!(!ov_decide_fast(&set(&["00", "00"])).is_err());
        assert!(ov_decide_fast(&set(&["00", "00"])).unwrap());
        let wide = BinaryVectorSet::new(vec![BinaryVector::zeros(25), BinaryVector::zeros(25)]).unwrap();
        assert!(ov_decide_fast(&wide).is_err());
    }

    #[test]
    fn exact_pair_worked_examples() {
        let s = set(&["110", "111", "001"]);
        let max = exact_pair(&s, Objective::MaxIp).unwrap();
        assert_eq!((max.i, max.j, max.value), (0, 1, PairValue::Ip(2)));
        let min = exact_pair(&s, Objective::MinIp).unwrap();
        assert_eq!((min.i, min.j, min.value), (0, 2, PairValue::Ip(0)));

        let s = set(&["1100", "1110", "0001"]);
        let msd = exact_pair(&s, Objective::Msd).unwrap();
        assert_eq!(
            (msd.i, msd.j, msd.value),
            (0, 1, PairValue::Cosine(ExactCosine::new(2, 6).unwrap()))
        );
    }

    #[test]
    fn exact_pair_reports_offending_zero_row() {
        let s = set(&["10", "00", "01"]);
        let err = exact_pair(&s, Objective::Msd).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
        // zero rows are fine for inner-product objectives
        assert!(exact_pair(&s, Objective::MinIp).is_ok());
    }

    #[test]
    fn decide_worked_examples() {
        let s = set(&["1100", "1110", "0001"]);
        assert!(decide(&s, Objective::Msd, &Threshold::Cosine(Rational::new(4, 5))).unwrap());
        assert!(!decide(&s, Objective::Msd, &Threshold::Cosine(Rational::new(9, 10))).unwrap());
        assert!(decide(&s, Objective::Lsd, &Threshold::Cosine(Rational::from_integer(1))).unwrap());
        assert!(decide(&s, Objective::MaxIp, &Threshold::Cosine(Rational::new(1, 2))).is_err());
        assert!(decide(&s, Objective::MaxIp, &Threshold::Ip(9)).is_err());
    }

    #[test]
    fn cosine_compare_examples() {
        let u = BinaryVector::from_01_str("1100").unwrap();
        let v = BinaryVector::from_01_str("1110").unwrap();
        assert_eq!(cosine_compare(&u, &u, &Rational::from_integer(1)).unwrap(), Ordering::Equal);
        assert_eq!(cosine_compare(&u, &v, &Rational::new(4, 5)).unwrap(), Ordering::Greater);
        let w = BinaryVector::from_01_str("0011").unwrap();
        assert_eq!(cosine_compare(&u, &w, &Rational::new(0, 1)).unwrap(), Ordering::Equal);
    }

    #[test]
    fn verify_gamma_windows() {
        // cosines: (0,1) = 2/sqrt(6), (0,2) = 1/sqrt(8), (1,2) = 1/sqrt(12)
        let s = set(&["1100", "1110", "0101"]);
        // optimum accepted at gamma = 1
        assert!(verify_gamma(&s, (0, 1), &Rational::from_integer(1), Objective::Msd).unwrap());
        // non-optimum rejected at gamma = 1
        assert!(!verify_gamma(&s, (0, 2), &Rational::from_integer(1), Objective::Msd).unwrap());
        // wide window accepts it
        assert!(verify_gamma(&s, (0, 2), &Rational::from_integer(3), Objective::Msd).unwrap());
        assert!(verify_gamma(&s, (0, 1), &Rational::new(1, 2), Objective::Msd).is_err());
    }

    #[test]
    fn gamma_approximation_of_zero_minimum_must_be_zero() {
        let s = set(&["1100", "0011", "1110"]);
        // minimum cosine is 0 at (0, 1); any gamma accepts only cosine-0 pairs
        for g in [1u64, 2, 10, 1000] {
            let gamma = Rational::from_integer(g);
            assert!(verify_gamma(&s, (0, 1), &gamma, Objective::Lsd).unwrap());
            assert!(!verify_gamma(&s, (0, 2), &gamma, Objective::Lsd).unwrap());
        }
    }

    #[test]
    fn ov_equals_zero_optimum_characterizations() {
        for seed in 0..30 {
            let s = gen_random(8, 5, 0.4, seed).unwrap();
            if s.contains_zero_row() {
                continue;
            }
            let ov = ov_decide(&s).unwrap();
            let min = exact_pair(&s, Objective::MinIp).unwrap();
            let lsd = exact_pair(&s, Objective::Lsd).unwrap();
            assert_eq!(ov, min.value == PairValue::Ip(0));
            assert_eq!(
                ov,
                matches!(lsd.value, PairValue::Cosine(c) if c.is_zero())
            );
        }
    }

    proptest! {
        #[test]
        fn fast_ov_agrees_with_brute_force(seed in 0u64..200, n in 2usize..40, l in 1usize..12, p in 1u32..10) {
            let s = gen_random(n, l, p as f64 / 10.0, seed).unwrap();
            prop_assert_eq!(ov_decide_fast(&s).unwrap(), ov_decide(&s).unwrap());
        }

        #[test]
        fn decide_is_monotone_in_the_threshold(seed in 0u64..100, n in 2usize..12, l in 1usize..8) {
            let s = gen_random(n, l, 0.5, seed).unwrap();
            let mut prev = false;
            // max-ip: lowering t can only turn false into true
            for t in (0..=l as u64).rev() {
                let d = decide(&s, Objective::MaxIp, &Threshold::Ip(t)).unwrap();
                prop_assert!(d >= prev);
                prev = d;
            }
            let mut prev = false;
            // min-ip: raising t can only turn false into true
            for t in 0..=l as u64 {
                let d = decide(&s, Objective::MinIp, &Threshold::Ip(t)).unwrap();
                prop_assert!(d >= prev);
                prev = d;
            }
        }

        #[test]
        fn exact_value_is_the_decision_breakpoint(seed in 0u64..100, n in 2usize..10, l in 1usize..8) {
            let s = gen_random(n, l, 0.5, seed).unwrap();
            let best = exact_pair(&s, Objective::MaxIp).unwrap();
            let PairValue::Ip(v) = best.value else { unreachable!() };
            prop_assert!(decide(&s, Objective::MaxIp, &Threshold::Ip(v)).unwrap());
            if v < l as u64 {
                prop_assert!(!decide(&s, Objective::MaxIp, &Threshold::Ip(v + 1)).unwrap());
            }
        }

        #[test]
        fn row_permutation_permutes_indices(seed in 0u64..60, n in 2usize..10, l in 1usize..7) {
            let s = gen_random(n, l, 0.6, seed).unwrap();
            if s.contains_zero_row() {
                return Ok(());
            }
            // reverse the rows
            let perm: Vec<usize> = (0..n).rev().collect();
            let rs = s.subset(&perm).unwrap();
            for obj in [Objective::MaxIp, Objective::MinIp, Objective::Msd, Objective::Lsd] {
                let a = exact_pair(&s, obj).unwrap();
                let b = exact_pair(&rs, obj).unwrap();
                prop_assert_eq!(a.value, b.value);
                // mapped-back indices attain the same exact value
                let (bi, bj) = (perm[b.i], perm[b.j]);
                let v = if obj.uses_cosine() {
                    PairValue::Cosine(ExactCosine::between(s.row(bi), s.row(bj)).unwrap())
                } else {
                    PairValue::Ip(s.row(bi).dot(s.row(bj)))
                };
                prop_assert_eq!(v, a.value);
            }
        }
    }
}
