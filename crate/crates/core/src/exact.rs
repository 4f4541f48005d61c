//! Exact rational representation of cosine similarity.
//!
//! For binary vectors the squared cosine `<u,v>^2 / (|u|^2 |v|^2)` is a
//! ratio of integers, so every comparison a solver needs (against another
//! cosine, a rational threshold, or an approximation window) can be done by
//! integer cross-multiplication. No floating point appears in any oracle;
//! float ties at grid boundaries would corrupt decision ground truth.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::bits::BinaryVector;
use crate::error::{Error, Result};

/// Nonnegative rational, used for cosine thresholds and approximation ratios.
pub type Rational = num_rational::Ratio<u64>;

/// Exact value of a cosine similarity `dot / sqrt(norm_prod_sq)`.
///
/// Both vectors must be nonzero, so `norm_prod_sq >= 1`, and Cauchy-Schwarz
/// gives `dot^2 <= norm_prod_sq`.
#[derive(Clone, Copy, Debug)]
pub struct ExactCosine {
    dot: u64,
    norm_prod_sq: u64,
}

/// Equality is by value, not representation: 0/sqrt(6) == 0/sqrt(4).
impl PartialEq for ExactCosine {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExactCosine {}

impl ExactCosine {
    pub fn new(dot: u64, norm_prod_sq: u64) -> Result<Self> {
        if norm_prod_sq == 0 {
            return Err(Error::validation("norm product must be positive (zero vector?)"));
        }
        if (dot as u128) * (dot as u128) > norm_prod_sq as u128 {
            return Err(Error::validation(format!(
                "dot^2 = {dot}^2 exceeds norm product {norm_prod_sq}; not a cosine"
            )));
        }
        Ok(ExactCosine { dot, norm_prod_sq })
    }

    /// Cosine of two nonzero binary vectors of equal length.
    pub fn between(u: &BinaryVector, v: &BinaryVector) -> Result<Self> {
        let (pu, pv) = (u.popcount(), v.popcount());
        if pu == 0 || pv == 0 {
            return Err(Error::validation("cosine of a zero vector is undefined"));
        }
        ExactCosine::new(u.dot(v), pu * pv)
    }

    pub fn zero() -> Self {
        ExactCosine { dot: 0, norm_prod_sq: 1 }
    }

    pub fn one() -> Self {
        ExactCosine { dot: 1, norm_prod_sq: 1 }
    }

    pub fn dot(&self) -> u64 {
        self.dot
    }

    pub fn norm_prod_sq(&self) -> u64 {
        self.norm_prod_sq
    }

    pub fn is_zero(&self) -> bool {
        self.dot == 0
    }

    /// Raises the cosine to the `q`-th power; the value of a `q`-fold
    /// Kronecker power of the underlying vectors.
    pub fn pow(&self, q: u32) -> Result<Self> {
        let dot = self
            .dot
            .checked_pow(q)
            .ok_or_else(|| Error::validation("dot^q overflows u64"))?;
        let nps = self
            .norm_prod_sq
            .checked_pow(q)
            .ok_or_else(|| Error::validation("norm_prod_sq^q overflows u64"))?;
        ExactCosine::new(dot, nps)
    }

    /// Exact comparison against a rational threshold `p/q` in `[0, 1]`.
    ///
    /// Compares `dot^2 * q^2` with `p^2 * norm_prod_sq`; both sides are
    /// nonnegative so squaring preserves order.
    pub fn cmp_rational(&self, t: &Rational) -> Ordering {
        let lhs = big(self.dot) * big(self.dot) * big(*t.denom()) * big(*t.denom());
        let rhs = big(*t.numer()) * big(*t.numer()) * big(self.norm_prod_sq);
        lhs.cmp(&rhs)
    }

    pub fn to_f64(&self) -> f64 {
        self.dot as f64 / (self.norm_prod_sq as f64).sqrt()
    }
}

impl Ord for ExactCosine {
    fn cmp(&self, other: &Self) -> Ordering {
        // dot1^2 * nps2 vs dot2^2 * nps1; dimensions are guarded well below
        // the point where these products could leave u128.
        let lhs = (self.dot as u128) * (self.dot as u128) * other.norm_prod_sq as u128;
        let rhs = (other.dot as u128) * (other.dot as u128) * self.norm_prod_sq as u128;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for ExactCosine {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn validate_gamma(gamma: &Rational) -> Result<()> {
    if gamma.numer() < gamma.denom() {
        return Err(Error::validation(format!("approximation ratio {gamma} must be >= 1")));
    }
    Ok(())
}

/// `candidate` lies in the max-side window `[opt / gamma, opt]`.
pub fn cosine_within_gamma_max(candidate: &ExactCosine, opt: &ExactCosine, gamma: &Rational) -> Result<bool> {
    validate_gamma(gamma)?;
    if candidate > opt {
        return Ok(false);
    }
    // candidate * gamma >= opt  <=>  (dot_c * gn)^2 * nps_o >= (dot_o * gd)^2 * nps_c
    let lhs = (big(candidate.dot) * big(*gamma.numer())).pow(2) * big(opt.norm_prod_sq);
    let rhs = (big(opt.dot) * big(*gamma.denom())).pow(2) * big(candidate.norm_prod_sq);
    Ok(lhs >= rhs)
}

/// `candidate` lies in the min-side window `[opt, gamma * opt]`.
pub fn cosine_within_gamma_min(candidate: &ExactCosine, opt: &ExactCosine, gamma: &Rational) -> Result<bool> {
    validate_gamma(gamma)?;
    if candidate < opt {
        return Ok(false);
    }
    // candidate <= gamma * opt
    let lhs = (big(candidate.dot) * big(*gamma.denom())).pow(2) * big(opt.norm_prod_sq);
    let rhs = (big(opt.dot) * big(*gamma.numer())).pow(2) * big(candidate.norm_prod_sq);
    Ok(lhs <= rhs)
}

/// Integer inner product in the max-side window `[opt / gamma, opt]`.
pub fn ip_within_gamma_max(candidate: u64, opt: u64, gamma: &Rational) -> Result<bool> {
    validate_gamma(gamma)?;
    if candidate > opt {
        return Ok(false);
    }
    Ok(big(candidate) * big(*gamma.numer()) >= big(opt) * big(*gamma.denom()))
}

/// Integer inner product in the min-side window `[opt, gamma * opt]`.
pub fn ip_within_gamma_min(candidate: u64, opt: u64, gamma: &Rational) -> Result<bool> {
    validate_gamma(gamma)?;
    if candidate < opt {
        return Ok(false);
    }
    Ok(big(candidate) * big(*gamma.denom()) <= big(opt) * big(*gamma.numer()))
}

/// Parses "p/q" or "p" into a rational; used by thresholds on the CLI.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let parse_u64 = |part: &str| {
        part.trim()
            .parse::<u64>()
            .map_err(|_| Error::validation(format!("invalid rational component {part:?}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let den = parse_u64(q)?;
            if den == 0 {
                return Err(Error::validation("rational denominator must be nonzero"));
            }
            Ok(Rational::new(parse_u64(p)?, den))
        }
        None => Ok(Rational::from_integer(parse_u64(s)?)),
    }
}

/// A rational strictly between two exact cosines, if one exists.
///
/// Searches denominators in increasing order; gaps between adjacent grid
/// values at the dimensions we handle are wide enough for small denominators.
pub fn rational_between(lo: &ExactCosine, hi: &ExactCosine) -> Option<Rational> {
    if lo >= hi {
        return None;
    }
    let (lo_f, hi_f) = (lo.to_f64(), hi.to_f64());
    let mid = (lo_f + hi_f) / 2.0;
    for den in 1u64..=1_000_000 {
        let num = (mid * den as f64).round() as u64;
        for cand_num in num.saturating_sub(1)..=num + 1 {
            let t = Rational::new(cand_num, den);
            if lo.cmp_rational(&t) == Ordering::Less && hi.cmp_rational(&t) == Ordering::Greater {
                return Some(t);
            }
        }
    }
    None
}

#[allow(unused)]
fn rational_to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_cauchy_schwarz_violation() {
        assert!(ExactCosine::new(3, 8).is_err());
        assert!(ExactCosine::new(3, 9).is_ok());
        assert!(ExactCosine::new(1, 0).is_err());
    }

    #[test]
    fn compares_against_rational_thresholds() {
        // 2/sqrt(6) vs 4/5: 100 >= 96
        let c = ExactCosine::new(2, 6).unwrap();
        assert_eq!(c.cmp_rational(&Rational::new(4, 5)), Ordering::Greater);
        // vs 9/10: 400 < 486
        assert_eq!(c.cmp_rational(&Rational::new(9, 10)), Ordering::Less);
    }

    #[test]
    fn equal_vectors_have_cosine_one() {
        let v = BinaryVector::from_01_str("1101").unwrap();
        let c = ExactCosine::between(&v, &v).unwrap();
        assert_eq!(c.cmp_rational(&Rational::from_integer(1)), Ordering::Equal);
    }

    #[test]
    fn gamma_windows_are_inclusive_at_the_boundary() {
        // opt = 2/sqrt(6), candidate = 1/sqrt(6) = opt/2 exactly.
        let opt = ExactCosine::new(2, 6).unwrap();
        let cand = ExactCosine::new(1, 6).unwrap();
        assert!(cosine_within_gamma_max(&cand, &opt, &Rational::from_integer(2)).unwrap());
        assert!(!cosine_within_gamma_max(&cand, &opt, &Rational::new(3, 2)).unwrap());
    }

    #[test]
    fn rational_between_splits_a_grid_gap() {
        // 1/2 and 1/sqrt(2)
        let lo = ExactCosine::new(1, 4).unwrap();
        let hi = ExactCosine::new(1, 2).unwrap();
        let t = rational_between(&lo, &hi).unwrap();
        assert_eq!(lo.cmp_rational(&t), Ordering::Less);
        assert_eq!(hi.cmp_rational(&t), Ordering::Greater);
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("4/5").unwrap(), Rational::new(4, 5));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
