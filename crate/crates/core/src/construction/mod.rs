//! The constructed number `x = l_1 x_1 l_2 x_2 ...`: cumulative lengths
//! `L_i`, the induced basic sequence `q_n = b_i` on `(L_{i-1}, L_i]`, random
//! access into its digits and exact prefix counts.

mod config;
mod expr;

pub use config::{builtin, builtin_names, ScheduleConfig};
pub use expr::Expr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bff::{range_set, BffSpec, BffTuple, GoodSequence, KLimit, RangeSet};
use crate::blocks::{count_in_schedule, make_block, Block, Champernowne, ConcatSchedule, Segment};
use crate::cantor::BasicSequence;
use crate::numeric::ratio;
use crate::weightings::uniform;
use crate::{BigCount, Error, Result};

/// A block friendly family and its block sequence, evaluated and cached
/// through index `i_cap + 2` so that every `n <= L_{i_cap+1}` has a
/// following block.
#[derive(Clone, Debug)]
pub struct Construction {
    w: BffSpec,
    x: GoodSequence,
    i_cap: u64,
    tuples: Vec<BffTuple>,
    segments: Vec<Segment>,
    lens: Vec<BigUint>,
    cumulative: Vec<BigUint>,
    schedule: ConcatSchedule,
    q: BasicSequence,
}

/// `n = L_i + m` with `m = alpha |x_{i+1}| + beta`, where `i` is the largest
/// index with `L_i <= n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixDecomposition {
    pub i: u64,
    pub m: BigUint,
    pub alpha: BigUint,
    pub beta: BigUint,
}

impl Construction {
    pub fn new(w: BffSpec, x: GoodSequence, i_cap: u64) -> Result<Self> {
        if i_cap < 1 {
            return Err(Error::Precondition("i_cap must be at least 1".into()));
        }
        let top = i_cap + 2;
        let tuples = w.prefix(top)?;
        let mut segments = Vec::with_capacity(top as usize);
        let mut lens: Vec<BigUint> = Vec::with_capacity(top as usize);
        let mut cumulative = vec![BigUint::zero()];
        for (idx, t) in tuples.iter().enumerate() {
            let i = idx as u64 + 1;
            let seg = x.x(i)?;
            if seg.base() > t.b {
                return Err(Error::Precondition(format!(
                    "x_{i} uses base {} but b_{i} = {}",
                    seg.base(),
                    t.b
                )));
            }
            let len = seg.len();
            if lens.last().is_some_and(|prev| &len < prev) {
                return Err(Error::Precondition(format!("|x_{i}| decreases")));
            }
            let next = cumulative.last().expect("L_0") + &t.l * &len;
            cumulative.push(next);
            lens.push(len);
            segments.push(seg);
        }
        let schedule = ConcatSchedule::new(
            tuples
                .iter()
                .zip(&segments)
                .map(|(t, s)| (t.l.clone(), s.clone())),
        );
        let q = BasicSequence::schedule(
            tuples
                .iter()
                .zip(&lens)
                .map(|(t, len)| (&t.l * len, u64::from(t.b))),
        )?;
        Ok(Construction {
            w,
            x,
            i_cap,
            tuples,
            segments,
            lens,
            cumulative,
            schedule,
            q,
        })
    }

    pub fn bff(&self) -> &BffSpec {
        &self.w
    }

    pub fn good_sequence(&self) -> &GoodSequence {
        &self.x
    }

    pub fn i_cap(&self) -> u64 {
        self.i_cap
    }

    /// Largest cached index, `i_cap + 2`.
    pub fn top(&self) -> u64 {
        self.i_cap + 2
    }

    pub fn range_set(&self) -> RangeSet {
        range_set(&self.w)
    }

    fn index(&self, i: u64) -> Result<usize> {
        if i == 0 || i > self.top() {
            return Err(Error::OutOfRange {
                what: format!("index {i} (cached 1..={})", self.top()),
            });
        }
        Ok(i as usize - 1)
    }

    pub fn tuple(&self, i: u64) -> Result<&BffTuple> {
        Ok(&self.tuples[self.index(i)?])
    }

    pub fn x(&self, i: u64) -> Result<&Segment> {
        Ok(&self.segments[self.index(i)?])
    }

    /// `|x_i|`.
    pub fn x_len(&self, i: u64) -> Result<&BigUint> {
        Ok(&self.lens[self.index(i)?])
    }

    /// `L_i = sum_{j<=i} l_j |x_j|`, with `L_0 = 0`.
    pub fn cumulative_length(&self, i: u64) -> Result<&BigUint> {
        self.cumulative
            .get(i as usize)
            .ok_or_else(|| Error::OutOfRange {
                what: format!("L_{i} (cached through L_{})", self.top()),
            })
    }

    /// Number of digits represented, `L_{i_cap+2}`.
    pub fn total_len(&self) -> &BigUint {
        self.cumulative.last().expect("non-empty")
    }

    /// Largest `n` with a defined decomposition, `L_{i_cap+1}`.
    pub fn analysis_limit(&self) -> &BigUint {
        &self.cumulative[self.top() as usize - 1]
    }

    /// `q_n = b_i` for `L_{i-1} < n <= L_i`.
    pub fn basic_sequence(&self) -> &BasicSequence {
        &self.q
    }

    /// `l_1 x_1 ... l_top x_top` as a symbolic concatenation.
    pub fn full_schedule(&self) -> &ConcatSchedule {
        &self.schedule
    }

    pub fn decompose(&self, n: &BigUint) -> Result<PrefixDecomposition> {
        if n.is_zero() {
            return Err(Error::OutOfRange {
                what: "position 0".into(),
            });
        }
        if n > self.analysis_limit() {
            return Err(Error::OutOfRange {
                what: format!("n = {n} beyond L_{}", self.top() - 1),
            });
        }
        let i = self.cumulative.partition_point(|l| l <= n) - 1;
        let m = n - &self.cumulative[i];
        let (alpha, beta) = m.div_rem(&self.lens[i]);
        Ok(PrefixDecomposition {
            i: i as u64,
            m,
            alpha,
            beta,
        })
    }

    /// Digits `E_{n_start}, ..., E_{n_start+count-1}`.
    pub fn digit_stream(&self, n_start: &BigUint, count: usize) -> Result<Vec<u32>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        if n_start.is_zero() {
            return Err(Error::OutOfRange {
                what: "position 0".into(),
            });
        }
        let end = n_start + count - 1u32;
        if &end > self.total_len() {
            return Err(Error::OutOfRange {
                what: format!("position {end} beyond {}", self.total_len()),
            });
        }
        Ok(self
            .schedule
            .digits_from(&(n_start - 1u32))
            .take(count)
            .collect())
    }

    /// `N_n^Q(B, x)`: occurrences of `pattern` starting at positions `<= n`.
    pub fn count_prefix(&self, pattern: &Block, n: &BigUint) -> Result<BigCount> {
        count_in_schedule(&self.schedule, pattern, n)
    }
}

/// Desk-scale replacement parameters for the canonical construction:
/// `l_i = i^l_power`, `x_i = C_{i, width_mult * i}`, `k_i = k` and
/// `eps_i = k/(width_mult * i)` for `i >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScaleOverrides {
    pub l_power: u32,
    pub width_mult: u32,
    pub k: u32,
}

impl Default for ScaleOverrides {
    fn default() -> Self {
        ScaleOverrides {
            l_power: 3,
            width_mult: 2,
            k: 3,
        }
    }
}

/// Canonical parameters, or scaled ones when `scale` is given. The index-1
/// tuple is `(0, 2, 2, eps_1, 1, lambda_2)` in both cases, with
/// `eps_1 = 3/5` canonically and `(1 + eps_2)/2` when scaled.
#[derive(Clone, Debug)]
pub struct TheoremInstance {
    pub i_cap: u64,
    pub scale: Option<ScaleOverrides>,
    pub x1: Block,
}

impl TheoremInstance {
    pub fn new(i_cap: u64, scale: Option<ScaleOverrides>) -> Self {
        TheoremInstance {
            i_cap,
            scale,
            x1: make_block(2, &[0, 1]).expect("valid block"),
        }
    }

    pub fn bff(&self) -> Result<BffSpec> {
        match self.scale {
            None => Ok(BffSpec::new("thm4.1", KLimit::Infinite, |i| {
                if i == 1 {
                    return first_tuple(ratio(3, 5));
                }
                let b = small(i)?;
                Ok(BffTuple {
                    l: BigUint::from(b).pow(3 * b),
                    b,
                    p: b,
                    eps: ratio(1, i),
                    k: b,
                    mu: uniform(b)?,
                })
            })),
            Some(s) => {
                if s.width_mult == 0 || s.k == 0 || u64::from(s.k) >= 2 * u64::from(s.width_mult) {
                    return Err(Error::BadScale(format!(
                        "need 1 <= k < 2 * width_mult, got k = {}, width_mult = {}",
                        s.k, s.width_mult
                    )));
                }
                let eps2 = ratio(s.k, 2 * s.width_mult);
                let eps1 = (BigRational::one() + eps2) / ratio(2, 1);
                Ok(BffSpec::new(
                    "thm4.1-scaled",
                    KLimit::Finite(s.k),
                    move |i| {
                        if i == 1 {
                            return first_tuple(eps1.clone());
                        }
                        let b = small(i)?;
                        Ok(BffTuple {
                            l: BigUint::from(b).pow(s.l_power),
                            b,
                            p: b,
                            eps: ratio(s.k, u64::from(s.width_mult) * i),
                            k: s.k,
                            mu: uniform(b)?,
                        })
                    },
                ))
            }
        }
    }

    pub fn good_sequence(&self) -> GoodSequence {
        let x1: Segment = self.x1.clone().into();
        let width = self.scale.map(|s| s.width_mult);
        GoodSequence::new("C(i, w_i)", move |i| {
            if i == 1 {
                return Ok(x1.clone());
            }
            let b = small(i)?;
            let w = match width {
                None => b.checked_mul(b),
                Some(c) => b.checked_mul(c),
            };
            let w = w.ok_or_else(|| Error::OutOfRange {
                what: format!("width at index {i}"),
            })?;
            Ok(Champernowne::new(b, w)?.into())
        })
    }

    pub fn build(&self) -> Result<Construction> {
        if self.i_cap < 2 {
            return Err(Error::Precondition("i_cap must be at least 2".into()));
        }
        let w = self.bff()?;
        let built = Construction::new(w, self.good_sequence(), self.i_cap);
        match (built, self.scale) {
            (Err(Error::BffInvariant { index, reason }), Some(_)) => {
                Err(Error::BadScale(format!("index {index}: {reason}")))
            }
            (other, _) => other,
        }
    }
}

fn small(i: u64) -> Result<u32> {
    u32::try_from(i).map_err(|_| Error::OutOfRange {
        what: format!("index {i}"),
    })
}

fn first_tuple(eps: BigRational) -> Result<BffTuple> {
    Ok(BffTuple {
        l: BigUint::zero(),
        b: 2,
        p: 2,
        eps,
        k: 1,
        mu: uniform(2)?,
    })
}

/// `x_i = C_{i,i^2}`, `b_i = p_i = k_i = i`, `l_i = i^{3i}`, `eps_i = 1/i`
/// for `i >= 2`, or the scaled variant.
pub fn theorem_4_1_instance(i_cap: u64, scale: Option<ScaleOverrides>) -> Result<Construction> {
    TheoremInstance::new(i_cap, scale).build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::count_occurrences;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn canonical_lengths() {
        let c = theorem_4_1_instance(3, None).unwrap();
        assert_eq!(c.cumulative_length(0).unwrap(), &big(0));
        assert_eq!(c.cumulative_length(1).unwrap(), &big(0));
        assert_eq!(c.cumulative_length(2).unwrap(), &big(4096));
        assert_eq!(c.tuple(3).unwrap().l, big(19683));
        assert_eq!(c.x_len(3).unwrap(), &big(177_147));
        assert_eq!(c.x_len(2).unwrap(), &big(64));
        assert_eq!(c.tuple(1).unwrap().eps, ratio(3, 5));
    }

    #[test]
    fn decomposition() {
        let c = theorem_4_1_instance(3, None).unwrap();
        let d = c.decompose(&big(4096)).unwrap();
        assert_eq!(
            d,
            PrefixDecomposition {
                i: 2,
                m: big(0),
                alpha: big(0),
                beta: big(0)
            }
        );
        let x3 = c.x_len(3).unwrap().clone();
        let d = c.decompose(&(big(4096) + &x3)).unwrap();
        assert_eq!((d.i, d.alpha.clone(), d.beta.clone()), (2, big(1), big(0)));
        let d = c.decompose(&(big(4096) + &x3 + 5u32)).unwrap();
        assert_eq!((d.alpha, d.beta), (big(1), big(5)));
        let d = c.decompose(&big(17)).unwrap();
        assert_eq!((d.i, d.alpha, d.beta), (1, big(0), big(17)));
        assert!(c.decompose(&big(0)).is_err());
    }

    #[test]
    fn first_digits() {
        let c = theorem_4_1_instance(2, None).unwrap();
        assert_eq!(
            c.digit_stream(&big(1), 8).unwrap(),
            vec![0, 0, 0, 0, 0, 0, 0, 1]
        );
        assert!(c.digit_stream(&big(1), 0).unwrap().is_empty());
        assert!(c.digit_stream(&big(0), 1).is_err());
        // Across L_2: the end of C_{2,4} then the start of C_{3,9}.
        let w = c.digit_stream(&big(4090), 12).unwrap();
        assert_eq!(w, vec![1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn prefix_counts_match_scan() {
        let c = theorem_4_1_instance(2, None).unwrap();
        let zero = make_block(2, &[0]).unwrap();
        let digits = c.digit_stream(&big(1), 16).unwrap();
        let scanned = count_occurrences(&zero, digits.iter().copied(), &big(16));
        assert_eq!(c.count_prefix(&zero, &big(16)).unwrap(), scanned);
        let pair = make_block(2, &[0, 0]).unwrap();
        assert_eq!(c.count_prefix(&pair, &big(1)).unwrap(), big(1));
        let two = make_block(3, &[2]).unwrap();
        assert_eq!(
            c.count_prefix(&two, c.cumulative_length(2).unwrap())
                .unwrap(),
            big(0)
        );
    }

    #[test]
    fn scaled_instance() {
        let c = theorem_4_1_instance(5, Some(ScaleOverrides::default())).unwrap();
        assert_eq!(c.tuple(2).unwrap().eps, ratio(3, 4));
        assert_eq!(c.tuple(1).unwrap().eps, ratio(7, 8));
        assert_eq!(c.tuple(4).unwrap().l, big(64));
        assert_eq!(c.x_len(3).unwrap(), &big(6 * 729));
        assert_eq!(c.range_set(), RangeSet::UpTo(3));
        assert!(matches!(
            theorem_4_1_instance(
                5,
                Some(ScaleOverrides {
                    l_power: 3,
                    width_mult: 2,
                    k: 4
                })
            ),
            Err(Error::BadScale(_))
        ));
        assert!(matches!(
            theorem_4_1_instance(
                5,
                Some(ScaleOverrides {
                    l_power: 3,
                    width_mult: 0,
                    k: 1
                })
            ),
            Err(Error::BadScale(_))
        ));
    }

    #[test]
    fn basic_sequence_follows_runs() {
        let c = theorem_4_1_instance(3, Some(ScaleOverrides::default())).unwrap();
        let q = c.basic_sequence();
        let l2 = c.cumulative_length(2).unwrap().clone();
        assert_eq!(q.q(&l2).unwrap(), big(2));
        assert_eq!(q.q(&(&l2 + 1u32)).unwrap(), big(3));
        assert_eq!(q.defined_through().unwrap(), *c.total_len());
    }
}
