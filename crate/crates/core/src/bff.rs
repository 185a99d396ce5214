//! Block friendly families `W = (l_i, b_i, p_i, eps_i, k_i, mu_i)`, the
//! range set `R(W)` and trend checks of the growth conditions on a
//! sequence of blocks `x_i`.
//!
//! The growth conditions are asymptotic (`omega`, `o`), so the verdicts here
//! are evidence from a finite prefix, never proof.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::blocks::Segment;
use crate::numeric::{format_rational, ln_biguint, ln_rational};
use crate::weightings::{is_pb_uniform, Weighting};
use crate::{Error, EvalBudget, Result};

/// One member of a block friendly family.
#[derive(Clone, Debug)]
pub struct BffTuple {
    pub l: BigUint,
    pub b: u32,
    pub p: u32,
    pub eps: BigRational,
    pub k: u32,
    pub mu: Weighting,
}

/// Declared `lim k_i`; limits are not computable from a prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KLimit {
    Finite(u32),
    Infinite,
}

/// `R(W)`: `{0, ..., K}` or all naturals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RangeSet {
    UpTo(u32),
    AllNaturals,
}

impl RangeSet {
    pub fn contains(self, k: u32) -> bool {
        match self {
            RangeSet::UpTo(max) => k <= max,
            RangeSet::AllNaturals => true,
        }
    }

    pub fn require(self, k: u32) -> Result<()> {
        if self.contains(k) {
            Ok(())
        } else {
            Err(Error::KOutOfRange {
                k,
                range: self.to_string(),
            })
        }
    }
}

impl fmt::Display for RangeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RangeSet::UpTo(k) => write!(f, "{{0,...,{k}}}"),
            RangeSet::AllNaturals => write!(f, "{{0,1,2,...}}"),
        }
    }
}

pub type BffRule = Arc<dyn Fn(u64) -> Result<BffTuple> + Send + Sync>;

#[derive(Clone)]
pub struct BffSpec {
    pub name: String,
    pub rule: BffRule,
    pub k_limit: KLimit,
}

impl fmt::Debug for BffSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BffSpec")
            .field("name", &self.name)
            .field("k_limit", &self.k_limit)
            .finish()
    }
}

fn invariant(index: u64, reason: impl Into<String>) -> Error {
    Error::BffInvariant {
        index,
        reason: reason.into(),
    }
}

impl BffSpec {
    pub fn new(
        name: &str,
        k_limit: KLimit,
        rule: impl Fn(u64) -> Result<BffTuple> + Send + Sync + 'static,
    ) -> Self {
        BffSpec {
            name: name.to_string(),
            rule: Arc::new(rule),
            k_limit,
        }
    }

    /// The `i`-th tuple (`i >= 1`), checked on its own.
    pub fn tuple(&self, i: u64) -> Result<BffTuple> {
        if i == 0 {
            return Err(Error::OutOfRange {
                what: "index 0".into(),
            });
        }
        let t = (self.rule)(i)?;
        if t.b < 2 {
            return Err(invariant(i, format!("b_i = {} is below 2", t.b)));
        }
        if t.p < 1 {
            return Err(invariant(i, "p_i must be at least 1"));
        }
        if t.k < 1 {
            return Err(invariant(i, "k_i must be at least 1"));
        }
        if t.eps <= BigRational::zero() || t.eps >= BigRational::one() {
            return Err(invariant(
                i,
                format!("eps_i = {} is outside (0,1)", format_rational(&t.eps)),
            ));
        }
        Ok(t)
    }

    /// Tuples `1..=i_max`, with the monotonicity invariants checked.
    pub fn prefix(&self, i_max: u64) -> Result<Vec<BffTuple>> {
        let mut out: Vec<BffTuple> = Vec::with_capacity(i_max as usize);
        for i in 1..=i_max {
            let t = self.tuple(i)?;
            if let Some(prev) = out.last() {
                if t.l < prev.l {
                    return Err(invariant(i, "l_i decreases"));
                }
                if t.b < prev.b {
                    return Err(invariant(i, "b_i decreases"));
                }
                if t.p < prev.p {
                    return Err(invariant(i, "p_i decreases"));
                }
                if t.k < prev.k {
                    return Err(invariant(i, "k_i decreases"));
                }
                if t.eps >= prev.eps {
                    return Err(invariant(i, "eps_i does not strictly decrease"));
                }
            }
            if let KLimit::Finite(limit) = self.k_limit {
                if t.k > limit {
                    return Err(invariant(
                        i,
                        format!("k_i = {} exceeds the declared limit {limit}", t.k),
                    ));
                }
            }
            out.push(t);
        }
        Ok(out)
    }

    /// [`prefix`](Self::prefix) plus a `(p_i, b_i)`-uniformity check of
    /// each `mu_i` up to block length `depth`.
    pub fn validate(&self, i_max: u64, depth: u32, budget: EvalBudget) -> Result<Vec<BffTuple>> {
        let tuples = self.prefix(i_max)?;
        for (idx, t) in tuples.iter().enumerate() {
            if !is_pb_uniform(&t.mu, t.p, t.b, depth, 0.0, budget)? {
                return Err(invariant(idx as u64 + 1, "mu_i is not (p_i, b_i)-uniform"));
            }
        }
        Ok(tuples)
    }
}

pub fn range_set(w: &BffSpec) -> RangeSet {
    match w.k_limit {
        KLimit::Finite(k) => RangeSet::UpTo(k),
        KLimit::Infinite => RangeSet::AllNaturals,
    }
}

pub type BlockRule = Arc<dyn Fn(u64) -> Result<Segment> + Send + Sync>;

/// The blocks `x_1, x_2, ...`.
#[derive(Clone)]
pub struct GoodSequence {
    pub name: String,
    pub rule: BlockRule,
}

impl fmt::Debug for GoodSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GoodSequence")
            .field("name", &self.name)
            .finish()
    }
}

impl GoodSequence {
    pub fn new(name: &str, rule: impl Fn(u64) -> Result<Segment> + Send + Sync + 'static) -> Self {
        GoodSequence {
            name: name.to_string(),
            rule: Arc::new(rule),
        }
    }

    pub fn x(&self, i: u64) -> Result<Segment> {
        if i == 0 {
            return Err(Error::OutOfRange {
                what: "index 0".into(),
            });
        }
        (self.rule)(i)
    }
}

/// Natural logs of the three growth ratios at index `i`; `None` where the
/// ratio is skipped (`l_{i-1} = 0`, or `i = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub i: u64,
    /// `|x_i| (eps_{i-1} - eps_i) / b_i^k`, should tend to infinity.
    pub ln_r1: Option<f64>,
    /// `(l_{i-1}/l_i)(|x_{i-1}|/|x_i|) i b_i^k`, should tend to 0.
    pub ln_r2: Option<f64>,
    /// `(1/l_i)(|x_{i+1}|/|x_i|) b_i^k`, should tend to 0.
    pub ln_r3: Option<f64>,
}

/// Monotonicity of one ratio over the evaluated prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trend {
    /// Strictly monotone in the required direction over the last half.
    pub tail: bool,
    /// Strictly monotone over every evaluated index.
    pub full: bool,
}

#[derive(Clone, Debug)]
pub struct RatioReport {
    pub k: u32,
    pub rows: Vec<RatioRow>,
    pub r1: Trend,
    pub r2: Trend,
    pub r3: Trend,
    /// All three tail trends hold.
    pub pass: bool,
}

fn strictly(values: &[f64], increasing: bool) -> bool {
    values
        .windows(2)
        .all(|w| if increasing { w[0] < w[1] } else { w[0] > w[1] })
}

/// Checks strict monotonicity of a series over its full range and over its
/// last half (at least two points).
pub fn trend(values: &[f64], increasing: bool) -> Trend {
    let half = values.len() / 2;
    let tail = &values[half.min(values.len().saturating_sub(2))..];
    Trend {
        tail: values.len() >= 2 && strictly(tail, increasing),
        full: values.len() >= 2 && strictly(values, increasing),
    }
}

/// Evaluates the growth ratios for `i = 2..=i_max` in the log domain and
/// reports their trends. Needs `x_{i_max+1}`.
pub fn check_w_good(w: &BffSpec, x: &GoodSequence, i_max: u64, k: u32) -> Result<RatioReport> {
    if i_max < 3 {
        return Err(Error::Precondition("i_max must be at least 3".into()));
    }
    range_set(w).require(k)?;
    let tuples: Vec<BffTuple> = (1..=i_max + 1).map(|i| w.tuple(i)).collect::<Result<_>>()?;
    let lens: Vec<BigUint> = (1..=i_max + 1)
        .map(|i| x.x(i).map(|s| s.len()))
        .collect::<Result<_>>()?;
    for i in 2..=i_max as usize {
        if lens[i - 1] < lens[i - 2] {
            return Err(Error::Precondition(format!("|x_i| decreases at index {i}")));
        }
    }

    let mut rows = Vec::new();
    for i in 2..=i_max {
        let (cur, prev) = (&tuples[i as usize - 1], &tuples[i as usize - 2]);
        let ln_x = ln_biguint(&lens[i as usize - 1]);
        let ln_bk = f64::from(k) * f64::from(cur.b).ln();
        let gap = &prev.eps - &cur.eps;
        if gap.is_zero() {
            return Err(Error::DegenerateSchedule {
                index: i,
                reason: "eps_{i-1} = eps_i".into(),
            });
        }
        if cur.l.is_zero() {
            return Err(Error::DegenerateSchedule {
                index: i,
                reason: "l_i = 0".into(),
            });
        }
        let ln_l = ln_biguint(&cur.l);
        let ln_r1 = ln_x + ln_rational(&gap) - ln_bk;
        let ln_r2 = (!prev.l.is_zero()).then(|| {
            ln_biguint(&prev.l) - ln_l + ln_biguint(&lens[i as usize - 2]) - ln_x
                + (i as f64).ln()
                + ln_bk
        });
        let ln_r3 = -ln_l + ln_biguint(&lens[i as usize]) - ln_x + ln_bk;
        rows.push(RatioRow {
            i,
            ln_r1: Some(ln_r1),
            ln_r2,
            ln_r3: Some(ln_r3),
        });
    }
    // Degenerate divisions are reported first; the remaining invariants after.
    w.prefix(i_max + 1)?;
    let series = |f: fn(&RatioRow) -> Option<f64>| rows.iter().filter_map(f).collect::<Vec<_>>();
    let r1 = trend(&series(|r| r.ln_r1), true);
    let r2 = trend(&series(|r| r.ln_r2), false);
    let r3 = trend(&series(|r| r.ln_r3), false);
    Ok(RatioReport {
        k,
        rows,
        pass: r1.tail && r2.tail && r3.tail,
        r1,
        r2,
        r3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{make_block, Champernowne};
    use crate::numeric::ratio;
    use crate::weightings::uniform;

    fn canonical() -> (BffSpec, GoodSequence) {
        let w = BffSpec::new("canonical", KLimit::Infinite, |i| {
            Ok(if i == 1 {
                BffTuple {
                    l: BigUint::zero(),
                    b: 2,
                    p: 2,
                    eps: ratio(3, 5),
                    k: 1,
                    mu: uniform(2)?,
                }
            } else {
                let b = i as u32;
                BffTuple {
                    l: BigUint::from(i).pow(3 * b),
                    b,
                    p: b,
                    eps: ratio(1, i),
                    k: b,
                    mu: uniform(b)?,
                }
            })
        });
        let x = GoodSequence::new("C(i, i^2)", |i| {
            if i == 1 {
                Ok(make_block(2, &[0, 1])?.into())
            } else {
                Ok(Champernowne::new(i as u32, (i * i) as u32)?.into())
            }
        });
        (w, x)
    }

    fn constant(l: u64, eps_gap_zero: bool) -> (BffSpec, GoodSequence) {
        let w = BffSpec::new("flat", KLimit::Finite(1), move |i| {
            Ok(BffTuple {
                l: BigUint::from(l),
                b: i as u32 + 1,
                p: 1,
                eps: if eps_gap_zero {
                    ratio(1, 2)
                } else {
                    ratio(1, i + 1)
                },
                k: 1,
                mu: uniform(i as u32 + 1)?,
            })
        });
        let x = GoodSequence::new("flat", |_| Ok(make_block(2, &[0, 1, 1, 0])?.into()));
        (w, x)
    }

    #[test]
    fn range_sets() {
        let (w, _) = canonical();
        assert_eq!(range_set(&w), RangeSet::AllNaturals);
        let five = BffSpec::new("five", KLimit::Finite(5), |_| unreachable!());
        assert_eq!(range_set(&five), RangeSet::UpTo(5));
        assert!(range_set(&five).contains(5) && !range_set(&five).contains(6));
        assert!(matches!(
            range_set(&five).require(7),
            Err(Error::KOutOfRange { k: 7, .. })
        ));
    }

    #[test]
    fn canonical_prefix_is_valid() {
        let (w, _) = canonical();
        let tuples = w.validate(8, 2, EvalBudget::default()).unwrap();
        assert_eq!(tuples[2].l, BigUint::from(19683u32));
    }

    #[test]
    fn canonical_is_w_good_at_k2() {
        let (w, x) = canonical();
        let report = check_w_good(&w, &x, 8, 2).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.rows[0].ln_r2.is_none());
        // ln r3 closed form: -3i ln i + (i+1)^2 ln(i+1) - i^2 ln i + ln((i+1)^2/i^2) + k ln i.
        for row in &report.rows {
            let i = row.i as f64;
            let expect = -3.0 * i * i.ln() + (i + 1.0).powi(2) * (i + 1.0).ln() - i * i * i.ln()
                + 2.0 * ((i + 1.0) / i).ln()
                + 2.0 * i.ln();
            assert!((row.ln_r3.unwrap() - expect).abs() < 1e-9 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn bounded_growth_fails() {
        let (w, x) = constant(1, false);
        let report = check_w_good(&w, &x, 8, 1).unwrap();
        assert!(!report.r1.tail);
        assert!(!report.pass);
    }

    #[test]
    fn equal_eps_is_caught() {
        let (w, x) = constant(1, true);
        assert!(matches!(
            check_w_good(&w, &x, 5, 1),
            Err(Error::DegenerateSchedule { index: 2, .. })
        ));
        assert!(matches!(
            w.prefix(5),
            Err(Error::BffInvariant { index: 2, .. })
        ));
        let degenerate = BffSpec::new("d", KLimit::Finite(1), |i| {
            Ok(BffTuple {
                l: BigUint::from(u64::from(i > 2)),
                b: 2,
                p: 1,
                eps: ratio(1, i + 1),
                k: 1,
                mu: uniform(2)?,
            })
        });
        let (_, x) = constant(1, false);
        assert!(matches!(
            check_w_good(&degenerate, &x, 4, 1),
            Err(Error::DegenerateSchedule { index: 2, .. })
        ));
    }

    #[test]
    fn monotonicity_violations_name_the_index() {
        let w = BffSpec::new("bad", KLimit::Infinite, |i| {
            Ok(BffTuple {
                l: BigUint::from(if i == 4 { 0u32 } else { 5 }),
                b: 2,
                p: 2,
                eps: ratio(1, i + 1),
                k: 1,
                mu: uniform(2)?,
            })
        });
        assert!(matches!(
            w.prefix(6),
            Err(Error::BffInvariant { index: 4, .. })
        ));
        let bad_eps = BffSpec::new("bad", KLimit::Infinite, |_| {
            Ok(BffTuple {
                l: BigUint::one(),
                b: 2,
                p: 2,
                eps: ratio(1, 1),
                k: 1,
                mu: uniform(2)?,
            })
        });
        assert!(matches!(
            bad_eps.tuple(1),
            Err(Error::BffInvariant { index: 1, .. })
        ));
    }

    #[test]
    fn trends() {
        assert_eq!(
            trend(&[1.0, 0.0, 2.0, 3.0], true),
            Trend {
                tail: true,
                full: false
            }
        );
        assert_eq!(
            trend(&[3.0, 2.0, 1.0], false),
            Trend {
                tail: true,
                full: true
            }
        );
        assert!(!trend(&[1.0], true).tail);
    }
}
