use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{Block, Champernowne, ChampernowneDigits, Matcher};
use crate::{BigCount, Error, Result};

/// One repeatable piece of a schedule: an explicit block or a lexicographic
/// block generated on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Explicit(Block),
    Champernowne(Champernowne),
}

impl From<Block> for Segment {
    fn from(b: Block) -> Self {
        Segment::Explicit(b)
    }
}

impl From<Champernowne> for Segment {
    fn from(c: Champernowne) -> Self {
        Segment::Champernowne(c)
    }
}

impl Segment {
    pub fn base(&self) -> u32 {
        match self {
            Segment::Explicit(b) => b.base(),
            Segment::Champernowne(c) => c.base(),
        }
    }

    pub fn len(&self) -> BigUint {
        match self {
            Segment::Explicit(b) => BigUint::from(b.len()),
            Segment::Champernowne(c) => c.len().clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn digit_at(&self, offset: &BigUint) -> u32 {
        match self {
            Segment::Explicit(b) => b.get(offset.to_usize().expect("offset within block")),
            Segment::Champernowne(c) => c.digit_at(offset),
        }
    }

    pub fn digits(&self) -> SegmentDigits<'_> {
        self.digits_from(&BigUint::zero())
    }

    /// Digits from a 0-based offset to the end of the segment.
    pub fn digits_from(&self, offset: &BigUint) -> SegmentDigits<'_> {
        match self {
            Segment::Explicit(b) => SegmentDigits::Explicit {
                block: b,
                pos: offset.to_usize().unwrap_or(usize::MAX).min(b.len()),
            },
            Segment::Champernowne(c) => SegmentDigits::Champernowne(c.digits_from(offset)),
        }
    }

    /// Occurrences lying entirely inside the segment with 0-based start
    /// `< start_limit`.
    pub fn count_interior(&self, pattern: &[u32], start_limit: &BigUint) -> BigCount {
        match self {
            Segment::Explicit(b) => {
                if pattern.len() > b.len() {
                    return BigCount::zero();
                }
                let limit = start_limit.to_usize().unwrap_or(usize::MAX);
                let digits = b.to_vec();
                BigCount::from(Matcher::new(pattern).count_slice(&digits, limit))
            }
            Segment::Champernowne(c) => c.count_interior(pattern, start_limit),
        }
    }

    /// The explicit digits, when the segment is short enough.
    pub fn materialize(&self, limit: u64) -> Result<Block> {
        let len = self.len();
        if len > BigUint::from(limit) {
            return Err(Error::TooLong {
                length: len.to_string(),
                limit,
            });
        }
        match self {
            Segment::Explicit(b) => Ok(b.clone()),
            Segment::Champernowne(c) => Block::new(c.base(), &self.digits().collect::<Vec<_>>()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum SegmentDigits<'a> {
    Explicit { block: &'a Block, pos: usize },
    Champernowne(ChampernowneDigits),
}

impl Iterator for SegmentDigits<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        match self {
            SegmentDigits::Explicit { block, pos } => {
                if *pos < block.len() {
                    *pos += 1;
                    Some(block.get(*pos - 1))
                } else {
                    None
                }
            }
            SegmentDigits::Champernowne(it) => it.next(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub multiplicity: BigUint,
    pub segment: Segment,
}

/// The symbolic concatenation `l_1 B_1 l_2 B_2 ... l_n B_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcatSchedule {
    terms: Vec<Term>,
    len: BigUint,
}

/// Schedule from explicit blocks with machine-sized multiplicities.
pub fn concat(terms: Vec<(u64, Block)>) -> ConcatSchedule {
    ConcatSchedule::new(
        terms
            .into_iter()
            .map(|(m, b)| (BigUint::from(m), Segment::Explicit(b))),
    )
}

impl ConcatSchedule {
    pub fn new<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (BigUint, Segment)>,
    {
        let terms: Vec<Term> = terms
            .into_iter()
            .map(|(multiplicity, segment)| Term {
                multiplicity,
                segment,
            })
            .collect();
        let len = terms
            .iter()
            .map(|t| &t.multiplicity * t.segment.len())
            .sum();
        ConcatSchedule { terms, len }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Represented length `sum(l_j * |B_j|)`.
    pub fn len(&self) -> &BigUint {
        &self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len.is_zero()
    }

    /// Largest base among the terms.
    pub fn base(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.segment.base())
            .max()
            .unwrap_or(2)
    }

    /// Explicit digit string, refusing when longer than `limit`.
    pub fn materialize(&self, limit: u64) -> Result<Block> {
        if self.len > BigUint::from(limit) {
            return Err(Error::TooLong {
                length: self.len.to_string(),
                limit,
            });
        }
        let digits: Vec<u32> = self.digits().collect();
        Block::new(self.base(), &digits)
    }

    pub fn digits(&self) -> ScheduleDigits<'_> {
        ScheduleDigits::at_copy(&self.terms, 0, BigUint::zero(), BigUint::zero())
    }

    /// Digits from a 0-based offset onward.
    pub fn digits_from(&self, offset: &BigUint) -> ScheduleDigits<'_> {
        let mut start = BigUint::zero();
        for (idx, term) in self.terms.iter().enumerate() {
            let len = term.segment.len();
            let span = &term.multiplicity * &len;
            if offset < &(&start + &span) {
                let (copy, within) = (offset - &start).div_rem(&len);
                return ScheduleDigits::at_copy(&self.terms, idx, copy, within);
            }
            start += span;
        }
        ScheduleDigits::at_copy(
            &self.terms,
            self.terms.len(),
            BigUint::zero(),
            BigUint::zero(),
        )
    }

    /// Digit at a 1-indexed position.
    pub fn digit_at(&self, position: &BigUint) -> Result<u32> {
        if position.is_zero() || position > &self.len {
            return Err(Error::OutOfRange {
                what: format!("position {position}"),
            });
        }
        Ok(self
            .digits_from(&(position - 1u32))
            .next()
            .expect("position inside schedule"))
    }
}

/// Streaming digits of a schedule.
#[derive(Clone, Debug)]
pub struct ScheduleDigits<'a> {
    terms: &'a [Term],
    term: usize,
    copies_left: BigUint,
    current: Option<SegmentDigits<'a>>,
}

impl<'a> ScheduleDigits<'a> {
    fn at_copy(terms: &'a [Term], term: usize, copy: BigUint, offset: BigUint) -> Self {
        let mut it = ScheduleDigits {
            terms,
            term,
            copies_left: BigUint::zero(),
            current: None,
        };
        if let Some(t) = terms.get(term) {
            if copy < t.multiplicity {
                it.copies_left = &t.multiplicity - &copy - 1u32;
                it.current = Some(t.segment.digits_from(&offset));
            } else {
                it.term += 1;
                it.copies_left = terms
                    .get(it.term)
                    .map_or_else(BigUint::zero, |t| t.multiplicity.clone());
            }
        }
        it
    }
}

impl Iterator for ScheduleDigits<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        loop {
            if let Some(cur) = self.current.as_mut() {
                if let Some(d) = cur.next() {
                    return Some(d);
                }
                self.current = None;
            }
            let term = self.terms.get(self.term)?;
            if self.copies_left.is_zero() {
                self.term += 1;
                self.copies_left = self
                    .terms
                    .get(self.term)
                    .map_or_else(BigUint::zero, |t| t.multiplicity.clone());
                continue;
            }
            self.copies_left -= 1u32;
            self.current = Some(term.segment.digits());
        }
    }
}

/// Exact `N_n(B, s)` over the virtual concatenation `s`, without
/// materializing it.
///
/// Each copy contributes its interior occurrences (closed form or scan) plus
/// the occurrences that start in its last `|B| - 1` digits and run into the
/// following digits, read from an explicit junction window. Copies whose
/// following digits come from the same term share one window.
pub fn count_in_schedule(
    schedule: &ConcatSchedule,
    pattern: &Block,
    n: &BigUint,
) -> Result<BigCount> {
    if n > schedule.len() {
        return Err(Error::OutOfRange {
            what: format!(
                "prefix length {n} of a schedule of length {}",
                schedule.len()
            ),
        });
    }
    let pat = pattern.to_vec();
    let k = pat.len();
    let terms = schedule.terms();
    let mut total = BigCount::zero();
    let mut offset = BigUint::zero();

    for (idx, term) in terms.iter().enumerate() {
        if &offset >= n {
            break;
        }
        let m = &term.multiplicity;
        if m.is_zero() {
            continue;
        }
        let seg = &term.segment;
        let len = seg.len();
        let span = m * &len;
        let allowed = (n - &offset).min(span.clone());
        let (full, rem) = allowed.div_rem(&len);

        if !full.is_zero() {
            total += &full * seg.count_interior(&pat, &len);
        }
        if !rem.is_zero() {
            total += seg.count_interior(&pat, &rem);
        }

        if k >= 2 {
            let carry = k - 1;
            let tail_len = len.to_usize().map_or(carry, |l| l.min(carry));
            let tail: Vec<u32> = seg.digits_from(&(&len - tail_len)).collect();
            // Copies c with c + reach < m see only later copies of this term
            // in their next k - 1 digits.
            let reach = BigUint::from(carry).div_ceil(&len);
            let periodic = if m > &reach {
                m - &reach
            } else {
                BigUint::zero()
            };
            let periodic_full = full.clone().min(periodic);
            if !periodic_full.is_zero() {
                let head: Vec<u32> = seg.digits().take(carry).collect();
                let following: Vec<u32> = head.iter().copied().cycle().take(carry).collect();
                total += &periodic_full * straddles(&pat, &tail, &following, &len, &len);
            }
            let mut c = periodic_full;
            while c < full {
                let following: Vec<u32> =
                    ScheduleDigits::at_copy(terms, idx, &c + 1u32, BigUint::zero())
                        .take(carry)
                        .collect();
                total += straddles(&pat, &tail, &following, &len, &len);
                c += 1u32;
            }
            if !rem.is_zero() {
                let following: Vec<u32> =
                    ScheduleDigits::at_copy(terms, idx, &full + 1u32, BigUint::zero())
                        .take(carry)
                        .collect();
                total += straddles(&pat, &tail, &following, &len, &rem);
            }
        }
        offset += span;
    }
    Ok(total)
}

/// Occurrences starting in `tail` (the last digits of a copy of length
/// `len`) at offsets `< allowed` that do not fit in the copy and complete
/// within `following`.
fn straddles(
    pat: &[u32],
    tail: &[u32],
    following: &[u32],
    len: &BigUint,
    allowed: &BigUint,
) -> u64 {
    let k = pat.len();
    let tail_start = len - tail.len();
    if allowed <= &tail_start {
        return 0;
    }
    let q_limit = (allowed - &tail_start)
        .to_usize()
        .unwrap_or(usize::MAX)
        .min(tail.len());
    let window: Vec<u32> = tail.iter().chain(following).copied().collect();
    (0..q_limit)
        .filter(|&q| q + k > tail.len() && q + k <= window.len() && window[q..q + k] == *pat)
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{champernowne_block, count_occurrences, make_block};

    fn b(base: u32, d: &[u32]) -> Block {
        make_block(base, d).unwrap()
    }

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn concatenation_example() {
        let s = concat(vec![(2, b(10, &[2, 3, 5])), (1, b(10, &[0, 8]))]);
        assert_eq!(s.len(), &n(8));
        assert_eq!(
            s.materialize(100).unwrap().to_vec(),
            vec![2, 3, 5, 2, 3, 5, 0, 8]
        );
    }

    #[test]
    fn zero_multiplicity_and_repetition() {
        let x = b(3, &[1, 2]);
        let s = concat(vec![(0, x.clone()), (1, x.clone())]);
        assert_eq!(s.materialize(10).unwrap(), x);
        let s = concat(vec![(3, b(2, &[0]))]);
        assert_eq!(s.materialize(10).unwrap().to_vec(), vec![0, 0, 0]);
        assert!(matches!(s.materialize(2), Err(Error::TooLong { .. })));
    }

    #[test]
    fn base_is_max_of_terms() {
        let s = concat(vec![(1, b(3, &[2])), (1, b(7, &[6]))]);
        assert_eq!(s.base(), 7);
        assert_eq!(s.materialize(10).unwrap().base(), 7);
    }

    #[test]
    fn schedule_counts() {
        let s = concat(vec![(2, b(10, &[2, 3, 5])), (1, b(10, &[0, 8]))]);
        assert_eq!(count_in_schedule(&s, &b(10, &[5, 2]), &n(8)).unwrap(), n(1));
        let s = concat(vec![(3, b(2, &[0]))]);
        assert_eq!(count_in_schedule(&s, &b(2, &[0, 0]), &n(3)).unwrap(), n(2));
        assert_eq!(count_in_schedule(&s, &b(2, &[0, 0]), &n(0)).unwrap(), n(0));
        assert!(count_in_schedule(&s, &b(2, &[0]), &n(4)).is_err());
    }

    #[test]
    fn counts_at_every_cut() {
        let s = ConcatSchedule::new(vec![
            (n(3), Segment::from(b(3, &[0, 1]))),
            (n(0), Segment::from(b(3, &[2]))),
            (
                n(2),
                Segment::Champernowne(Champernowne::new(2, 2).unwrap()),
            ),
            (n(5), Segment::from(b(3, &[1]))),
            (n(1), Segment::from(b(3, &[0, 1, 1, 0]))),
        ]);
        let digits: Vec<u32> = s.digits().collect();
        assert_eq!(digits.len() as u64, 3 * 2 + 2 * 8 + 5 + 4);
        for pattern in [
            vec![0, 1],
            vec![1, 1],
            vec![1, 0, 1],
            vec![1, 1, 1, 1],
            vec![0, 0, 0, 1],
        ] {
            let p = b(3, &pattern);
            for cut in 0..=digits.len() as u64 {
                let expected = count_occurrences(&p, digits.iter().copied(), &n(cut));
                assert_eq!(
                    count_in_schedule(&s, &p, &n(cut)).unwrap(),
                    expected,
                    "{pattern:?} n={cut}"
                );
            }
        }
    }

    #[test]
    fn digit_access() {
        let s = champernowne_block(3, 2).unwrap();
        let all: Vec<u32> = s.digits().collect();
        for (i, &d) in all.iter().enumerate() {
            assert_eq!(s.digit_at(&n(i as u64 + 1)).unwrap(), d);
            assert_eq!(
                s.digits_from(&n(i as u64)).collect::<Vec<_>>(),
                all[i..].to_vec()
            );
        }
        assert!(s.digit_at(&n(0)).is_err());
        assert!(s.digit_at(&n(19)).is_err());
    }

    #[test]
    fn huge_multiplicity() {
        // 10^30 copies of (0,1): (1,0) straddles every junction.
        let m = BigUint::from(10u32).pow(30);
        let s = ConcatSchedule::new(vec![(m.clone(), Segment::from(b(2, &[0, 1])))]);
        let total = s.len().clone();
        assert_eq!(
            count_in_schedule(&s, &b(2, &[1, 0]), &total).unwrap(),
            &m - 1u32
        );
        assert_eq!(
            count_in_schedule(&s, &b(2, &[0, 1, 0]), &total).unwrap(),
            &m - 1u32
        );
        assert_eq!(count_in_schedule(&s, &b(2, &[0]), &n(5)).unwrap(), n(3));
    }
}
