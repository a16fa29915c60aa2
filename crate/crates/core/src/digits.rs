//! Digit patterns of the significand in an integer base, and their exact
//! probability sets under the Benford (log-uniform) law: subsets of `[0, 1)`
//! whose Lebesgue measure is the pattern probability of the fractional part
//! of `log_base x`.

use crate::error::Error;
use crate::util::CompensatedSum;

/// Largest admissible digit prefix: `base^m` must stay below 2^53 so every
/// prefix integer is exact in f64.
const EXACT_PREFIX_LIMIT: u64 = 1 << 53;

/// Cap on how many intervals a positioned-pattern enumeration may produce.
const INTERVAL_CAP: u64 = 10_000_000;

/// A digit event on the significand, written in `base`.
///
/// `Leading` fixes the first `digits.len()` significand digits. `Positioned`
/// fixes the digits at chosen positions; position 1 is the leading digit and
/// is reserved to `Leading` patterns, so positioned constraints start at 2
/// and must be strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DigitPattern {
    Leading { base: u32, digits: Vec<u32> },
    Positioned { base: u32, constraints: Vec<(u32, u32)> },
}

impl DigitPattern {
    pub fn leading(base: u32, digits: Vec<u32>) -> Result<Self, Error> {
        if base < 2 {
            return Err(Error::Domain(format!("base must be >= 2, got {base}")));
        }
        if digits.is_empty() {
            return Err(Error::Domain("leading pattern needs at least one digit".into()));
        }
        if digits[0] == 0 || digits[0] >= base {
            return Err(Error::Domain(format!(
                "leading digit must lie in 1..{base}, got {}",
                digits[0]
            )));
        }
        if digits[1..].iter().any(|&d| d >= base) {
            return Err(Error::Domain(format!("digits must lie below the base {base}")));
        }
        Ok(DigitPattern::Leading { base, digits })
    }

    pub fn positioned(base: u32, constraints: Vec<(u32, u32)>) -> Result<Self, Error> {
        if base < 2 {
            return Err(Error::Domain(format!("base must be >= 2, got {base}")));
        }
        if constraints.is_empty() {
            return Err(Error::Domain("positioned pattern needs at least one constraint".into()));
        }
        for &(pos, digit) in &constraints {
            if pos < 2 {
                return Err(Error::Domain(
                    "positioned constraints start at position 2; use a leading pattern for position 1"
                        .into(),
                ));
            }
            if digit >= base {
                return Err(Error::Domain(format!("digit {digit} not below base {base}")));
            }
        }
        if constraints.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Domain("positions must be strictly increasing".into()));
        }
        Ok(DigitPattern::Positioned { base, constraints })
    }

    pub fn base(&self) -> u32 {
        match self {
            DigitPattern::Leading { base, .. } | DigitPattern::Positioned { base, .. } => *base,
        }
    }

    /// Number of significand digits the pattern looks at.
    pub fn depth(&self) -> u32 {
        match self {
            DigitPattern::Leading { digits, .. } => digits.len() as u32,
            DigitPattern::Positioned { constraints, .. } => constraints.last().unwrap().0,
        }
    }
}

/// Finite union of disjoint half-open subintervals of `[0, 1]`, kept sorted.
#[derive(Clone, Debug)]
pub struct UnitIntervalSet {
    intervals: Vec<(f64, f64)>,
    total: f64,
}

impl UnitIntervalSet {
    /// Validates ordering, disjointness, and containment in `[0, 1]`.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self, Error> {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &intervals {
            if !(0.0 <= a && a < b && b <= 1.0) {
                return Err(Error::Domain(format!("bad interval ({a}, {b})")));
            }
        }
        if intervals.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::Domain("intervals overlap".into()));
        }
        let mut total = CompensatedSum::default();
        for &(a, b) in &intervals {
            total.add(b - a);
        }
        Ok(Self { intervals, total: total.value() })
    }

    /// Internal constructor for pre-sorted disjoint intervals whose exact
    /// total is known more precisely than endpoint differences give.
    fn presorted(intervals: Vec<(f64, f64)>, total: f64) -> Self {
        Self { intervals, total }
    }

    /// The whole circle `[0, 1)`.
    pub fn full() -> Self {
        Self { intervals: vec![(0.0, 1.0)], total: 1.0 }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.total
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x < b)
    }
}

/// `x * base^{-e}` evaluated in two steps so the intermediate power cannot
/// overflow or underflow in a way that breaks the comparison direction.
fn scaled(x: f64, base: f64, e: i32) -> f64 {
    let h = e / 2;
    x / base.powi(h) / base.powi(e - h)
}

/// First `m` significand digits of `x` in `base`, plus the exponent `M` with
/// `base^M <= x < base^{M+1}`.
///
/// The exponent from the float log is corrected by direct comparison, and the
/// digit prefix is the floor of `x * base^{m-1-M}`, which is exact whenever
/// that scaling is (integers, exact powers). `base^m` must fit in 53 bits.
pub fn extract_digits(x: f64, base: u32, m: u32) -> Result<(Vec<u32>, i32), Error> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digits need x > 0 and finite, got {x}")));
    }
    if base < 2 {
        return Err(Error::Domain(format!("base must be >= 2, got {base}")));
    }
    if m == 0 {
        return Err(Error::Domain("need at least one digit".into()));
    }
    let bm = (base as u64)
        .checked_pow(m)
        .filter(|&v| v <= EXACT_PREFIX_LIMIT)
        .ok_or_else(|| {
            Error::Capacity(format!("base^m = {base}^{m} exceeds the exact integer range"))
        })?;

    let bf = base as f64;
    let mut mm = (x.ln() / bf.ln()).floor() as i32;
    while scaled(x, bf, mm + 1) >= 1.0 {
        mm += 1;
    }
    while scaled(x, bf, mm) < 1.0 {
        mm -= 1;
    }

    let mut prefix = scaled(x, bf, mm + 1 - m as i32).floor() as u64;
    // guard the half-open bracket against end rounding of the scaling
    prefix = prefix.clamp(bm / base as u64, bm - 1);

    let mut digits = vec![0u32; m as usize];
    let mut v = prefix;
    for slot in digits.iter_mut().rev() {
        *slot = (v % base as u64) as u32;
        v /= base as u64;
    }
    Ok((digits, mm))
}

/// Does the significand of `x` match the pattern?
pub fn value_matches(x: f64, pattern: &DigitPattern) -> Result<bool, Error> {
    let (digits, _) = extract_digits(x, pattern.base(), pattern.depth())?;
    Ok(match pattern {
        DigitPattern::Leading { digits: want, .. } => {
            digits.iter().zip(want).all(|(a, b)| a == b)
        }
        DigitPattern::Positioned { constraints, .. } => {
            constraints.iter().all(|&(pos, d)| digits[pos as usize - 1] == d)
        }
    })
}

fn prefix_integer(base: u32, digits: &[u32]) -> Result<u64, Error> {
    let bm = (base as u64)
        .checked_pow(digits.len() as u32)
        .filter(|&v| v <= EXACT_PREFIX_LIMIT)
        .ok_or_else(|| Error::Capacity("digit prefix exceeds the exact integer range".into()))?;
    let _ = bm;
    Ok(digits.iter().fold(0u64, |acc, &d| acc * base as u64 + d as u64))
}

/// The single subinterval of `[0, 1)` where the fractional part of
/// `log_base x` lands exactly when the leading digits match.
pub fn leading_interval(pattern: &DigitPattern) -> Result<(f64, f64), Error> {
    let DigitPattern::Leading { base, digits } = pattern else {
        return Err(Error::Domain("leading_interval needs a leading pattern".into()));
    };
    let k = prefix_integer(*base, digits)?;
    let lb = (*base as f64).ln();
    let lo = ((k as f64).ln() / lb - (digits.len() as f64 - 1.0)).clamp(0.0, 1.0);
    let hi = (((k + 1) as f64).ln() / lb - (digits.len() as f64 - 1.0)).clamp(0.0, 1.0);
    Ok((lo, hi))
}

/// Benford probability of a pattern: `log_base(1 + 1/K)` for a leading
/// block, the classical prefix sum for a single positioned digit, and the
/// enumerated interval measure for several positioned digits.
pub fn benford_prob(pattern: &DigitPattern) -> Result<f64, Error> {
    match pattern {
        DigitPattern::Leading { base, digits } => {
            let k = prefix_integer(*base, digits)? as f64;
            Ok((1.0 / k).ln_1p() / (*base as f64).ln())
        }
        DigitPattern::Positioned { base, constraints } if constraints.len() == 1 => {
            single_position_prob(*base, constraints[0].0, constraints[0].1)
        }
        DigitPattern::Positioned { .. } => Ok(positioned_digit_set(pattern)?.total_length()),
    }
}

/// `P(d_pos = digit)` under the Benford law:
/// `sum_{s = base^{pos-2}}^{base^{pos-1} - 1} log_base(1 + 1/(base s + digit))`.
fn single_position_prob(base: u32, pos: u32, digit: u32) -> Result<f64, Error> {
    let lo = (base as u64)
        .checked_pow(pos - 2)
        .ok_or_else(|| Error::Capacity("position too deep".into()))?;
    let hi = lo * base as u64;
    if hi > 100_000_000 {
        return Err(Error::Capacity(format!(
            "single-digit sum at position {pos} needs {hi} terms"
        )));
    }
    let lb = (base as f64).ln();
    let mut acc = CompensatedSum::default();
    for s in lo..hi {
        let k = (s * base as u64 + digit as u64) as f64;
        acc.add((1.0 / k).ln_1p() / lb);
    }
    Ok(acc.value())
}

/// Upper bound on `|P(pattern) - base^{-L}|` for a positioned pattern with
/// `L` constraints, the first at position `m1`: `log_base(1 + base^{1-m1})`.
pub fn uniformity_gap_bound(pattern: &DigitPattern) -> Result<f64, Error> {
    let DigitPattern::Positioned { base, constraints } = pattern else {
        return Err(Error::Domain("uniformity bound applies to positioned patterns".into()));
    };
    let m1 = constraints[0].0;
    let b = *base as f64;
    Ok(b.powi(1 - m1 as i32).ln_1p() / b.ln())
}

/// All intervals of `[0, 1)` realizing a positioned pattern, enumerated as
/// one interval per qualifying prefix integer. The count is exactly
/// `(base - 1) * base^{m_L - 1 - L}` and is capped at ten million.
pub fn positioned_digit_set(pattern: &DigitPattern) -> Result<UnitIntervalSet, Error> {
    let DigitPattern::Positioned { base, constraints } = pattern else {
        return Err(Error::Domain("positioned_digit_set needs a positioned pattern".into()));
    };
    let b = *base as u64;
    let m_l = constraints.last().unwrap().0;
    let l = constraints.len() as u32;

    let bm = b
        .checked_pow(m_l)
        .filter(|&v| v <= EXACT_PREFIX_LIMIT)
        .ok_or_else(|| Error::Capacity("pattern too deep for exact prefixes".into()))?;
    let _ = bm;
    let count = (b - 1)
        .checked_mul(b.checked_pow(m_l - 1 - l).ok_or_else(|| {
            Error::Capacity("pattern too deep".into())
        })?)
        .ok_or_else(|| Error::Capacity("pattern too deep".into()))?;
    if count > INTERVAL_CAP {
        return Err(Error::Capacity(format!(
            "pattern enumerates {count} intervals, above the cap of {INTERVAL_CAP}"
        )));
    }

    // place values of the free positions, most significant first
    let constrained: Vec<u32> = constraints.iter().map(|&(p, _)| p).collect();
    let free: Vec<u32> = (1..=m_l).filter(|p| !constrained.contains(p)).collect();
    let base_k: u64 =
        constraints.iter().map(|&(p, d)| d as u64 * b.pow(m_l - p)).sum();
    let place: Vec<u64> = free.iter().map(|&p| b.pow(m_l - p)).collect();

    let lb = (*base as f64).ln();
    let shift = m_l as f64 - 1.0;
    let mut intervals = Vec::with_capacity(count as usize);
    let mut total = CompensatedSum::default();
    for idx in 0..count {
        // mixed-radix decomposition; the last free position varies fastest
        let mut rem = idx;
        let mut k = base_k;
        for (i, &pv) in place.iter().enumerate().rev() {
            let radix = if free[i] == 1 { b - 1 } else { b };
            let mut d = rem % radix;
            rem /= radix;
            if free[i] == 1 {
                d += 1; // leading digit starts at 1
            }
            k += d * pv;
        }
        let lo = ((k as f64).ln() / lb - shift).clamp(0.0, 1.0);
        let hi = (((k + 1) as f64).ln() / lb - shift).clamp(0.0, 1.0);
        intervals.push((lo, hi));
        total.add((1.0 / k as f64).ln_1p() / lb);
    }
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(UnitIntervalSet::presorted(intervals, total.value()))
}

/// The event set of any pattern as intervals of `[0, 1)`.
pub fn digit_event_set(pattern: &DigitPattern) -> Result<UnitIntervalSet, Error> {
    match pattern {
        DigitPattern::Leading { base, digits } => {
            let (lo, hi) = leading_interval(pattern)?;
            let k = prefix_integer(*base, digits)? as f64;
            let total = (1.0 / k).ln_1p() / (*base as f64).ln();
            Ok(UnitIntervalSet::presorted(vec![(lo, hi)], total))
        }
        DigitPattern::Positioned { .. } => positioned_digit_set(pattern),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn pattern_validation() {
        assert!(DigitPattern::leading(10, vec![1, 3]).is_ok());
        assert!(DigitPattern::leading(10, vec![0, 3]).is_err());
        assert!(DigitPattern::leading(10, vec![10]).is_err());
        assert!(DigitPattern::leading(1, vec![1]).is_err());
        assert!(DigitPattern::positioned(10, vec![(2, 0)]).is_ok());
        assert!(DigitPattern::positioned(10, vec![(1, 1)]).is_err());
        assert!(DigitPattern::positioned(10, vec![(3, 1), (3, 2)]).is_err());
        assert!(DigitPattern::positioned(10, vec![(4, 2), (3, 1)]).is_err());
    }

    #[test]
    fn extraction_examples() {
        let (d, e) = extract_digits(271.828, 10, 4).unwrap();
        assert_eq!((d, e), (vec![2, 7, 1, 8], 2));
        let (d, e) = extract_digits(0.00123, 10, 3).unwrap();
        assert_eq!((d, e), (vec![1, 2, 3], -3));
        let (d, e) = extract_digits(5.5, 2, 4).unwrap();
        assert_eq!((d, e), (vec![1, 0, 1, 1], 2));
        let (d, e) = extract_digits(1000.0, 10, 3).unwrap();
        assert_eq!((d, e), (vec![1, 0, 0], 3));
        let (d, e) = extract_digits(1e20, 10, 1).unwrap();
        assert_eq!((d, e), (vec![1], 20));
    }

    #[test]
    fn extraction_guards() {
        assert!(extract_digits(0.0, 10, 1).is_err());
        assert!(extract_digits(-3.0, 10, 1).is_err());
        assert!(matches!(extract_digits(3.0, 10, 16), Err(Error::Capacity(_))));
        assert!(extract_digits(3.0, 2, 53).is_ok());
        assert!(matches!(extract_digits(3.0, 2, 54), Err(Error::Capacity(_))));
    }

    #[test]
    fn leading_probabilities() {
        let log10_2 = std::f64::consts::LOG10_2;
        let one = DigitPattern::leading(10, vec![1]).unwrap();
        assert_relative_eq!(benford_prob(&one).unwrap(), log10_2, max_relative = 1e-15);
        let (lo, hi) = leading_interval(&one).unwrap();
        assert_eq!(lo, 0.0);
        assert_relative_eq!(hi, log10_2, max_relative = 1e-15);

        let twelve = DigitPattern::leading(10, vec![1, 2]).unwrap();
        assert_relative_eq!(
            benford_prob(&twelve).unwrap(),
            0.0347621062592119415,
            max_relative = 1e-14
        );
    }

    #[test]
    fn second_digit_probabilities() {
        let p0 = DigitPattern::positioned(10, vec![(2, 0)]).unwrap();
        assert_relative_eq!(benford_prob(&p0).unwrap(), 0.119679268596880767, max_relative = 1e-14);
        let p7 = DigitPattern::positioned(10, vec![(2, 7)]).unwrap();
        assert_relative_eq!(benford_prob(&p7).unwrap(), 0.0903519892696033696, max_relative = 1e-14);
    }

    #[test]
    fn positioned_enumeration_binary() {
        // base 2, digit at position 3 equal to 1: prefixes 101 and 111
        let p = DigitPattern::positioned(2, vec![(3, 1)]).unwrap();
        let set = positioned_digit_set(&p).unwrap();
        assert_eq!(set.len(), 2);
        let expect = ((6f64 / 5.0).ln() + (8f64 / 7.0).ln()) / 2f64.ln();
        assert_relative_eq!(set.total_length(), expect, max_relative = 1e-14);
        // enumeration agrees with the closed single-digit sum
        assert_relative_eq!(
            set.total_length(),
            benford_prob(&p).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn positioned_counts_match_formula() {
        for (base, cons, expect) in [
            (10u32, vec![(2u32, 0u32)], 9u64),
            (10, vec![(3, 5)], 90),
            (2, vec![(2, 1), (4, 0)], 2),
            (3, vec![(2, 2), (3, 0)], 2 * 3u64.pow(0)),
        ] {
            let p = DigitPattern::positioned(base, cons).unwrap();
            let set = positioned_digit_set(&p).unwrap();
            assert_eq!(set.len() as u64, expect);
        }
    }

    #[test]
    fn partition_sums_to_one() {
        // fixing one position and summing over its digit values tiles [0, 1)
        let mut total = 0.0;
        for d in 0..3 {
            let p = DigitPattern::positioned(3, vec![(3, d)]).unwrap();
            total += positioned_digit_set(&p).unwrap().total_length();
        }
        assert_relative_eq!(total, 1.0, max_relative = 1e-13);
    }

    #[test]
    fn adjacent_intervals_share_endpoints_exactly() {
        // the union over all digits at one position tiles [0,1) with
        // bit-identical shared endpoints
        let mut all: Vec<(f64, f64)> = Vec::new();
        for d in 0..10 {
            let p = DigitPattern::positioned(10, vec![(2, d)]).unwrap();
            all.extend(positioned_digit_set(&p).unwrap().intervals());
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(all[0].0, 0.0);
        assert_eq!(all.last().unwrap().1, 1.0);
        for w in all.windows(2) {
            assert_eq!(w[0].1, w[1].0, "gap between {:?} and {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn interval_cap_enforced() {
        let p = DigitPattern::positioned(10, vec![(10, 3)]).unwrap();
        assert!(matches!(positioned_digit_set(&p), Err(Error::Capacity(_))));
    }

    #[test]
    fn matches_by_position() {
        let p = DigitPattern::positioned(10, vec![(2, 7)]).unwrap();
        assert!(value_matches(27.3, &p).unwrap());
        assert!(!value_matches(21.0, &p).unwrap());
        let l = DigitPattern::leading(10, vec![2, 7]).unwrap();
        assert!(value_matches(0.0277, &l).unwrap());
        assert!(!value_matches(0.0207, &l).unwrap());
    }

    #[test]
    fn set_validation() {
        assert!(UnitIntervalSet::new(vec![(0.0, 0.5), (0.5, 1.0)]).is_ok());
        assert!(UnitIntervalSet::new(vec![(0.0, 0.6), (0.5, 1.0)]).is_err());
        assert!(UnitIntervalSet::new(vec![(-0.1, 0.5)]).is_err());
        assert!(UnitIntervalSet::new(vec![(0.4, 0.4)]).is_err());
        let s = UnitIntervalSet::new(vec![(0.7, 0.9), (0.1, 0.2)]).unwrap();
        assert_eq!(s.intervals()[0], (0.1, 0.2));
        assert!(s.contains(0.75));
        assert!(!s.contains(0.5));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn extraction_round_trip(
            mag in -18f64..18f64,
            frac in 0.0f64..1.0,
            base in prop::sample::select(vec![2u32, 10, 16]),
            m in 1u32..=5,
        ) {
            let x = 10f64.powf(mag) * (1.0 + frac);
            let (digits, e) = extract_digits(x, base, m).unwrap();
            prop_assert!(digits[0] >= 1 && digits[0] < base);
            prop_assert!(digits.iter().all(|&d| d < base));
            let prefix = digits.iter().fold(0u64, |a, &d| a * base as u64 + d as u64) as f64;
            let b = base as f64;
            // prefix * b^{e+1-m} <= x < (prefix+1) * b^{e+1-m}, up to rounding slack
            let s = scaled(x, b, e + 1 - m as i32);
            prop_assert!(prefix <= s * (1.0 + 1e-12) && s <= (prefix + 1.0) * (1.0 + 1e-12));
        }
    }
}
