//! Basic sequences `Q = (q_n)`, Cantor series conversion and the partial
//! sums `Q_n^(k) = sum_{j<=n} 1/(q_j ... q_{j+k-1})`.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::numeric::{from_biguint, rational_to_f64};
use crate::{Error, Result};

/// Largest index a [`BasicSequence::Rule`] is evaluated at term by term.
const RULE_LIMIT: u64 = 10_000_000;

/// A maximal stretch of equal bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub len: BigUint,
    pub base: BigUint,
}

#[derive(Clone)]
pub enum BasicSequence {
    Constant(BigUint),
    /// `q_1, q_2, ...` listed; undefined past the end.
    Explicit(Vec<BigUint>),
    /// Piecewise constant: `q_n` equals the base of the run containing `n`.
    Schedule(Vec<Run>),
    Rule {
        name: String,
        q: Arc<dyn Fn(u64) -> BigUint + Send + Sync>,
    },
}

impl fmt::Debug for BasicSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicSequence::Constant(b) => write!(f, "Constant({b})"),
            BasicSequence::Explicit(q) => f.debug_tuple("Explicit").field(q).finish(),
            BasicSequence::Schedule(runs) => f.debug_tuple("Schedule").field(&runs.len()).finish(),
            BasicSequence::Rule { name, .. } => write!(f, "Rule({name})"),
        }
    }
}

fn check_base(q: &BigUint, index: impl fmt::Display) -> Result<()> {
    if *q < BigUint::from(2u32) {
        return Err(Error::Precondition(format!("q_{index} = {q} is below 2")));
    }
    Ok(())
}

impl BasicSequence {
    pub fn constant(b: u64) -> Result<Self> {
        if b < 2 {
            return Err(Error::BadBase(b));
        }
        Ok(BasicSequence::Constant(BigUint::from(b)))
    }

    pub fn explicit(q: Vec<BigUint>) -> Result<Self> {
        for (j, v) in q.iter().enumerate() {
            check_base(v, j + 1)?;
        }
        Ok(BasicSequence::Explicit(q))
    }

    /// Zero-length runs are dropped.
    pub fn schedule(runs: impl IntoIterator<Item = (BigUint, u64)>) -> Result<Self> {
        let mut out: Vec<Run> = Vec::new();
        for (len, base) in runs {
            if base < 2 {
                return Err(Error::BadBase(base));
            }
            if len.is_zero() {
                continue;
            }
            let base = BigUint::from(base);
            match out.last_mut() {
                Some(last) if last.base == base => last.len += len,
                _ => out.push(Run { len, base }),
            }
        }
        Ok(BasicSequence::Schedule(out))
    }

    /// `q_n` given by a closed-form rule; values below 2 surface as errors
    /// when evaluated.
    pub fn rule(name: &str, q: impl Fn(u64) -> BigUint + Send + Sync + 'static) -> Self {
        BasicSequence::Rule {
            name: name.to_string(),
            q: Arc::new(q),
        }
    }

    /// `q_n = n + 1`.
    pub fn successor() -> Self {
        Self::rule("n+1", |n| BigUint::from(n) + 1u32)
    }

    /// Last index at which `q` is defined, `None` if defined everywhere.
    pub fn defined_through(&self) -> Option<BigUint> {
        match self {
            BasicSequence::Constant(_) => None,
            BasicSequence::Explicit(q) => Some(BigUint::from(q.len())),
            BasicSequence::Schedule(runs) => Some(runs.iter().map(|r| &r.len).sum()),
            BasicSequence::Rule { .. } => Some(BigUint::from(u64::MAX)),
        }
    }

    fn require(&self, last: &BigUint) -> Result<()> {
        match self.defined_through() {
            Some(end) if *last > end => Err(Error::Undefined(last.to_string())),
            _ => Ok(()),
        }
    }

    /// `q_n` for `n >= 1`.
    pub fn q(&self, n: &BigUint) -> Result<BigUint> {
        if n.is_zero() {
            return Err(Error::Undefined("0".into()));
        }
        self.require(n)?;
        let v = match self {
            BasicSequence::Constant(b) => b.clone(),
            BasicSequence::Explicit(q) => q[n.to_usize().expect("bounded by length") - 1].clone(),
            BasicSequence::Schedule(runs) => {
                let mut seen = BigUint::zero();
                let mut found = None;
                for r in runs {
                    seen += &r.len;
                    if *n <= seen {
                        found = Some(r.base.clone());
                        break;
                    }
                }
                found.expect("bounded by total length")
            }
            BasicSequence::Rule { q, .. } => q(n.to_u64().expect("bounded by u64")),
        };
        check_base(&v, n)?;
        Ok(v)
    }

    /// Runs covering positions `1..=last`; the final run is truncated.
    pub fn runs_through(&self, last: &BigUint) -> Result<Vec<Run>> {
        self.require(last)?;
        if last.is_zero() {
            return Ok(Vec::new());
        }
        let mut out: Vec<Run> = Vec::new();
        let mut push = |base: BigUint, len: BigUint| match out.last_mut() {
            Some(r) if r.base == base => r.len += len,
            _ => out.push(Run { len, base }),
        };
        match self {
            BasicSequence::Constant(b) => push(b.clone(), last.clone()),
            BasicSequence::Schedule(runs) => {
                let mut left = last.clone();
                for r in runs {
                    if left.is_zero() {
                        break;
                    }
                    let take = (&r.len).min(&left).clone();
                    left -= &take;
                    push(r.base.clone(), take);
                }
            }
            BasicSequence::Explicit(_) | BasicSequence::Rule { .. } => {
                let end = last.to_u64().filter(|&e| e <= RULE_LIMIT).ok_or_else(|| {
                    Error::Unfeasible {
                        what: "term-by-term basic sequence".into(),
                        needed: last.to_u128().unwrap_or(u128::MAX),
                        budget: RULE_LIMIT,
                    }
                })?;
                for j in 1..=end {
                    push(self.q(&BigUint::from(j))?, BigUint::one());
                }
            }
        }
        Ok(out)
    }
}

/// An exact rational or a dyadic approximation with a certified error.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSum {
    pub value: BigRational,
    /// `|value - true value| <= error_bound`; zero in exact mode.
    pub error_bound: BigRational,
}

impl PartialSum {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }

    pub fn is_exact(&self) -> bool {
        self.error_bound.is_zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumMode {
    Exact,
    /// Fixed point with the given number of fractional bits; every
    /// contribution is rounded down independently.
    Fixed {
        bits: u32,
    },
}

impl Default for SumMode {
    fn default() -> Self {
        SumMode::Fixed { bits: 128 }
    }
}

struct Accumulator {
    mode: SumMode,
    exact: BigRational,
    fixed: BigUint,
    terms: u64,
}

impl Accumulator {
    fn new(mode: SumMode) -> Self {
        Accumulator {
            mode,
            exact: BigRational::zero(),
            fixed: BigUint::zero(),
            terms: 0,
        }
    }

    /// Adds `num / den`.
    fn add(&mut self, num: &BigUint, den: &BigUint) {
        if num.is_zero() {
            return;
        }
        match self.mode {
            SumMode::Exact => {
                self.exact +=
                    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()));
            }
            SumMode::Fixed { bits } => {
                self.fixed += (num << bits as usize) / den;
                self.terms += 1;
            }
        }
    }

    fn finish(self) -> PartialSum {
        match self.mode {
            SumMode::Exact => PartialSum {
                value: self.exact,
                error_bound: BigRational::zero(),
            },
            SumMode::Fixed { bits } => {
                let scale = BigInt::one() << bits as usize;
                PartialSum {
                    value: BigRational::new(BigInt::from(self.fixed), scale.clone()),
                    error_bound: BigRational::new(BigInt::from(self.terms), scale),
                }
            }
        }
    }
}

/// A Cantor series value `sum_{j<=n} E_j/(q_1...q_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CantorValue {
    pub partial: PartialSum,
    /// Bound on the contribution of the digits after `n`: `1/(q_1...q_n)`.
    pub tail_bound: BigRational,
}

/// Evaluates the first `digits.len()` terms of the expansion.
pub fn digits_to_value(
    q: &BasicSequence,
    digits: &[BigUint],
    mode: SumMode,
) -> Result<CantorValue> {
    if digits.is_empty() {
        return Err(Error::Precondition("need at least one digit".into()));
    }
    let mut product = BigUint::one();
    let mut acc = Accumulator::new(mode);
    for (j, e) in digits.iter().enumerate() {
        let qj = q.q(&BigUint::from(j + 1))?;
        if *e >= qj {
            return Err(Error::DigitOutOfRange {
                digit: e.to_u64().unwrap_or(u64::MAX),
                position: j + 1,
                base: qj.to_u64().unwrap_or(u64::MAX),
            });
        }
        product *= &qj;
        acc.add(e, &product);
    }
    Ok(CantorValue {
        partial: acc.finish(),
        tail_bound: BigRational::new(BigInt::one(), BigInt::from(product)),
    })
}

/// The first `n` Cantor digits of `x`, and the remainder `x_{n+1}` in
/// `[0,1)` with `x = sum E_j/(q_1...q_j) + x_{n+1}/(q_1...q_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CantorDigits {
    pub digits: Vec<BigUint>,
    pub remainder: BigRational,
}

/// Greedy expansion `E_j = floor(x_j q_j)`, `x_{j+1} = x_j q_j - E_j`.
///
/// On rationals the greedy recurrence never produces a tail of maximal
/// digits, so terminating expansions come out in terminating form.
pub fn value_to_digits(q: &BasicSequence, x: &BigRational, n: usize) -> Result<CantorDigits> {
    if x < &BigRational::zero() || x >= &BigRational::one() {
        return Err(Error::OutOfRange {
            what: format!("value {x} (must lie in [0,1))"),
        });
    }
    let mut rem = x.clone();
    let mut digits = Vec::with_capacity(n);
    for j in 1..=n {
        let qj = BigInt::from(q.q(&BigUint::from(j))?);
        let scaled = rem * BigRational::from_integer(qj);
        let e = scaled.floor();
        rem = scaled - &e;
        digits.push(e.to_integer().to_biguint().expect("non-negative"));
    }
    Ok(CantorDigits {
        digits,
        remainder: rem,
    })
}

fn product_window(
    q_at: &mut impl FnMut(&BigUint) -> Result<BigUint>,
    start: &BigUint,
    k: u32,
) -> Result<BigUint> {
    let mut p = BigUint::one();
    for t in 0..k {
        p *= q_at(&(start + t))?;
    }
    Ok(p)
}

/// `Q_n^(k)`, computed by run-length grouping: positions whose window sits
/// inside one run of base `b` contribute `b^-k` each, and at most `k-1`
/// positions per run boundary are evaluated directly.
pub fn q_partial_sum(q: &BasicSequence, n: &BigUint, k: u32, mode: SumMode) -> Result<PartialSum> {
    if n.is_zero() || k == 0 {
        return Err(Error::Precondition("need n >= 1 and k >= 1".into()));
    }
    let last = n + (k - 1);
    let runs = q.runs_through(&last)?;
    let starts: Vec<BigUint> = runs
        .iter()
        .scan(BigUint::one(), |pos, r| {
            let s = pos.clone();
            *pos += &r.len;
            Some(s)
        })
        .collect();
    let mut cursor = 0usize;
    let mut q_at = |pos: &BigUint| -> Result<BigUint> {
        while cursor + 1 < runs.len() && *pos >= starts[cursor + 1] {
            cursor += 1;
        }
        while cursor > 0 && *pos < starts[cursor] {
            cursor -= 1;
        }
        Ok(runs[cursor].base.clone())
    };

    let mut acc = Accumulator::new(mode);
    for (r, run) in runs.iter().enumerate() {
        let a = &starts[r];
        if a > n {
            break;
        }
        let e = a + &run.len - 1u32;
        // Pure windows: j in [a, e-k+1] and j <= n.
        let pure_end = if &e + 1u32 >= a + k {
            Some(&e + 1u32 - k)
        } else {
            None
        };
        if let Some(pe) = &pure_end {
            let hi = pe.min(n);
            if hi >= a {
                let count = hi - a + 1u32;
                acc.add(&count, &run.base.pow(k));
            }
        }
        // Straddling windows start in the run and leave it.
        let mixed_lo = match &pure_end {
            Some(pe) => pe + 1u32,
            None => a.clone(),
        };
        let mixed_hi = (&e).min(n).clone();
        let mut j = mixed_lo;
        while j <= mixed_hi {
            let prod = product_window(&mut q_at, &j, k)?;
            acc.add(&BigUint::one(), &prod);
            j += 1u32;
        }
    }
    Ok(acc.finish())
}

/// Growth table for `Q_n^(k)` at increasing checkpoints.
#[derive(Clone, Debug)]
pub struct DivergenceReport {
    pub k: u32,
    pub rows: Vec<(BigUint, BigRational)>,
    /// Strictly increasing, with the last increment at least
    /// [`PLATEAU_TOLERANCE`] relative to the last value. Evidence only.
    pub divergence_consistent: bool,
}

pub const PLATEAU_TOLERANCE: f64 = 1e-6;

pub fn is_k_divergent_report(
    q: &BasicSequence,
    k: u32,
    checkpoints: &[BigUint],
) -> Result<DivergenceReport> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "checkpoints must be strictly increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(checkpoints.len());
    for n in checkpoints {
        rows.push((n.clone(), q_partial_sum(q, n, k, SumMode::Exact)?.value));
    }
    let increasing = rows.windows(2).all(|w| w[0].1 < w[1].1);
    let no_plateau = match rows.as_slice() {
        [.., (_, a), (_, b)] => rational_to_f64(&((b - a) / b)) >= PLATEAU_TOLERANCE,
        _ => true,
    };
    Ok(DivergenceReport {
        k,
        rows,
        divergence_consistent: increasing && no_plateau,
    })
}

/// Exact rational `num/den` for `n` with arbitrary-precision operands.
pub fn big_ratio(num: &BigUint, den: &BigUint) -> BigRational {
    let g = num.gcd(den);
    from_biguint(&(num / &g)) / from_biguint(&(den / &g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn naive(q: &BasicSequence, n: u64, k: u32) -> BigRational {
        let mut s = BigRational::zero();
        for j in 1..=n {
            let mut p = BigUint::one();
            for t in 0..u64::from(k) {
                p *= q.q(&big(j + t)).unwrap();
            }
            s += big_ratio(&BigUint::one(), &p);
        }
        s
    }

    #[test]
    fn quarter_in_base_ten() {
        let q = BasicSequence::constant(10).unwrap();
        let d = value_to_digits(&q, &ratio(1, 4), 4).unwrap();
        assert_eq!(d.digits, vec![big(2), big(5), big(0), big(0)]);
        let v = digits_to_value(&q, &d.digits, SumMode::Exact).unwrap();
        assert_eq!(v.partial.value, ratio(1, 4));
        assert_eq!(v.tail_bound, ratio(1, 10_000));
    }

    #[test]
    fn e_minus_two() {
        let q = BasicSequence::successor();
        let ones = vec![BigUint::one(); 20];
        let v = digits_to_value(&q, &ones, SumMode::Exact).unwrap();
        // Reference: sum_{j=2}^{40} 1/j!.
        let mut reference = BigRational::zero();
        let mut fact = BigUint::one();
        for j in 2..=40u32 {
            fact *= j;
            reference += big_ratio(&BigUint::one(), &fact);
        }
        let gap = &reference - &v.partial.value;
        assert!(gap > BigRational::zero() && gap <= v.tail_bound);
        assert!((v.partial.to_f64() - (std::f64::consts::E - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_and_terminating_forms() {
        let q2 = BasicSequence::constant(2).unwrap();
        let d = value_to_digits(&q2, &ratio(0, 1), 5).unwrap();
        assert!(d.digits.iter().all(Zero::is_zero));
        let d = value_to_digits(&q2, &ratio(1, 2), 3).unwrap();
        assert_eq!(d.digits, vec![big(1), big(0), big(0)]);
        assert!(value_to_digits(&q2, &ratio(3, 2), 3).is_err());
        assert!(value_to_digits(&q2, &ratio(1, 1), 3).is_err());
    }

    #[test]
    fn digit_range_enforced() {
        let q = BasicSequence::constant(3).unwrap();
        assert!(matches!(
            digits_to_value(&q, &[big(1), big(3)], SumMode::Exact),
            Err(Error::DigitOutOfRange { position: 2, .. })
        ));
    }

    #[test]
    fn partial_sum_examples() {
        let q10 = BasicSequence::constant(10).unwrap();
        assert_eq!(
            q_partial_sum(&q10, &big(7), 1, SumMode::Exact)
                .unwrap()
                .value,
            ratio(7, 10)
        );
        let succ = BasicSequence::successor();
        assert_eq!(
            q_partial_sum(&succ, &big(5), 2, SumMode::Exact)
                .unwrap()
                .value,
            ratio(5, 14)
        );
        assert_eq!(naive(&succ, 5, 2), ratio(5, 14));
        let q3 = BasicSequence::constant(3).unwrap();
        assert_eq!(
            q_partial_sum(&q3, &big(1000), 3, SumMode::Exact)
                .unwrap()
                .value,
            ratio(1000, 27)
        );
    }

    #[test]
    fn grouping_matches_naive() {
        let runs = vec![
            (big(0), 2),
            (big(5), 2),
            (big(1), 3),
            (big(2), 4),
            (big(7), 5),
            (big(30), 6),
        ];
        let q = BasicSequence::schedule(runs).unwrap();
        let total = q.defined_through().unwrap().to_u64().unwrap();
        for k in 1..=4u32 {
            for n in 1..=(total - u64::from(k) + 1) {
                let grouped = q_partial_sum(&q, &big(n), k, SumMode::Exact).unwrap().value;
                assert_eq!(grouped, naive(&q, n, k), "n={n} k={k}");
            }
        }
        assert!(matches!(
            q_partial_sum(&q, &big(total), 2, SumMode::Exact),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn fixed_mode_within_bound() {
        let q = BasicSequence::schedule(vec![(big(10), 2), (big(3), 3), (big(100), 7)]).unwrap();
        for bits in [16u32, 64, 128] {
            for n in [1u64, 11, 14, 100] {
                let exact = q_partial_sum(&q, &big(n), 3, SumMode::Exact).unwrap();
                let approx = q_partial_sum(&q, &big(n), 3, SumMode::Fixed { bits }).unwrap();
                let err = &exact.value - &approx.value;
                assert!(err >= BigRational::zero() && err <= approx.error_bound);
            }
        }
    }

    #[test]
    fn divergence_reports() {
        let q10 = BasicSequence::constant(10).unwrap();
        let cps = [big(100), big(1000), big(10_000)];
        let r = is_k_divergent_report(&q10, 2, &cps).unwrap();
        let vals: Vec<_> = r.rows.iter().map(|row| row.1.clone()).collect();
        assert_eq!(vals, vec![ratio(1, 1), ratio(10, 1), ratio(100, 1)]);
        assert!(r.divergence_consistent);

        let pow2 = BasicSequence::rule("2^n", |n| BigUint::one() << n as usize);
        let r = is_k_divergent_report(&pow2, 1, &[big(10), big(20), big(40)]).unwrap();
        assert!(r.rows.iter().all(|row| row.1 < ratio(1, 1)));
        assert!(!r.divergence_consistent);
    }

    #[test]
    fn lookups() {
        let q = BasicSequence::schedule(vec![(big(2), 2), (big(0), 9), (big(3), 3)]).unwrap();
        let qs: Vec<_> = (1..=5).map(|n| q.q(&big(n)).unwrap()).collect();
        assert_eq!(qs, vec![big(2), big(2), big(3), big(3), big(3)]);
        assert!(q.q(&big(6)).is_err());
        assert!(q.q(&big(0)).is_err());
        assert!(BasicSequence::explicit(vec![big(1)]).is_err());
    }
}
