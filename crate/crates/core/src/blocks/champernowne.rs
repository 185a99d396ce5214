use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{ConcatSchedule, Segment};
use crate::{BigCount, Error, Result};

/// `C_{b,w}`: every length-`w` block in base `b`, concatenated in
/// lexicographic order. Its length is `w * b^w`.
///
/// Digits are produced on demand and occurrence counts inside the block are
/// computed in closed form, so the block never has to be materialized.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Champernowne {
    base: u32,
    width: u32,
    block_count: BigUint,
    len: BigUint,
}

/// Inclusive digit range constraint for one position; empty when `lo > hi`.
type DigitRange = (u32, u32);

/// `C_{b,w}` as a streamable one-term schedule.
pub fn champernowne_block(b: u32, w: u32) -> Result<ConcatSchedule> {
    let c = Champernowne::new(b, w)?;
    Ok(ConcatSchedule::new(vec![(
        BigUint::one(),
        Segment::Champernowne(c),
    )]))
}

impl Champernowne {
    pub fn new(base: u32, width: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::BadBase(u64::from(base)));
        }
        if width < 1 {
            return Err(Error::BadLength(u64::from(width)));
        }
        let block_count = BigUint::from(base).pow(width);
        let len = &block_count * width;
        Ok(Champernowne {
            base,
            width,
            block_count,
            len,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Number of constituent blocks, `b^w`.
    pub fn block_count(&self) -> &BigUint {
        &self.block_count
    }

    /// `w * b^w`.
    pub fn len(&self) -> &BigUint {
        &self.len
    }

    /// The `w` base-`b` digits of `t`, most significant first.
    pub fn number_digits(&self, t: &BigUint) -> Vec<u32> {
        let w = self.width as usize;
        let mut out = vec![0u32; w];
        if let Some(mut v) = t.to_u128() {
            let b = u128::from(self.base);
            for slot in out.iter_mut().rev() {
                *slot = (v % b) as u32;
                v /= b;
            }
            return out;
        }
        let b = BigUint::from(self.base);
        let mut v = t.clone();
        for slot in out.iter_mut().rev() {
            let (q, r) = v.div_rem(&b);
            *slot = r.to_u32().unwrap_or(0);
            v = q;
        }
        out
    }

    /// Digit at a 0-based offset.
    pub fn digit_at(&self, offset: &BigUint) -> u32 {
        let (t, j) = offset.div_rem(&BigUint::from(self.width));
        let j = j.to_usize().unwrap_or(0);
        let weight = BigUint::from(self.base).pow(self.width - 1 - j as u32);
        ((t / weight) % self.base).to_u32().unwrap_or(0)
    }

    /// Digits from a 0-based offset to the end.
    pub fn digits_from(&self, offset: &BigUint) -> ChampernowneDigits {
        let (t, j) = offset.div_rem(&BigUint::from(self.width));
        let done = t >= self.block_count;
        ChampernowneDigits {
            base: self.base,
            odometer: if done {
                vec![0; self.width as usize]
            } else {
                self.number_digits(&t)
            },
            pos: j.to_usize().unwrap_or(0),
            done,
        }
    }

    /// Occurrences of `pattern` lying entirely inside the block whose 0-based
    /// start offset is `< start_limit`.
    ///
    /// An occurrence starting at offset `j` of constituent `t` either stays
    /// inside `t`, straddles into `t + 1`, or (for patterns longer than `w`)
    /// pins down a whole constituent. Each case reduces to counting numbers
    /// below a bound whose digits lie in per-position ranges.
    pub fn count_interior(&self, pattern: &[u32], start_limit: &BigUint) -> BigCount {
        let k = pattern.len();
        if k == 0 || pattern.iter().any(|&d| d >= self.base) {
            return BigCount::zero();
        }
        let k_big = BigUint::from(k);
        if self.len < k_big {
            return BigCount::zero();
        }
        let max_starts = &self.len - &k_big + 1u32;
        let starts = start_limit.min(&max_starts);
        if starts.is_zero() {
            return BigCount::zero();
        }
        let (full, partial) = starts.div_rem(&BigUint::from(self.width));
        let mut total = BigCount::zero();
        for j in 0..self.width as usize {
            total += self.count_at_offset(pattern, j, &full);
        }
        let partial = partial.to_usize().unwrap_or(0);
        if partial > 0 {
            let digits: Vec<u32> = self
                .digits_from(&(&full * self.width))
                .take(partial - 1 + k)
                .collect();
            total += (0..partial)
                .filter(|&j| digits[j..j + k] == *pattern)
                .count();
        }
        total
    }

    /// Constituents `t < limit` with an occurrence starting at offset `j`.
    fn count_at_offset(&self, pattern: &[u32], j: usize, limit: &BigUint) -> BigCount {
        if limit.is_zero() {
            return BigCount::zero();
        }
        let w = self.width as usize;
        let b = self.base;
        let k = pattern.len();
        let inside = w - j;
        let full_range: DigitRange = (0, b - 1);

        if k <= inside {
            let mut ranges = vec![full_range; w];
            for (p, &d) in pattern.iter().enumerate() {
                ranges[j + p] = (d, d);
            }
            return self.count_below(limit, &ranges);
        }

        let spill = k - inside;
        if spill <= w {
            // Enumerate the number z of trailing (b-1) digits of t; t + 1
            // then differs from t only from position w - z - 1 on.
            let mut total = BigCount::zero();
            'z: for z in 0..w {
                let pivot = w - z - 1;
                let mut ranges = vec![full_range; w];
                for p in j..w {
                    intersect(&mut ranges[p], pattern[p - j]);
                }
                for r in ranges.iter_mut().skip(pivot + 1) {
                    intersect(r, b - 1);
                }
                let r = &mut ranges[pivot];
                *r = (r.0, r.1.min(b - 2));
                for p in 0..spill {
                    let want = pattern[inside + p];
                    if p > pivot {
                        if want != 0 {
                            continue 'z;
                        }
                    } else if p == pivot {
                        if want == 0 {
                            continue 'z;
                        }
                        intersect(&mut ranges[p], want - 1);
                    } else {
                        intersect(&mut ranges[p], want);
                    }
                }
                total += self.count_below(limit, &ranges);
            }
            return total;
        }

        // The constituent after t is entirely determined by the pattern.
        let next = pattern[inside..inside + w]
            .iter()
            .fold(BigUint::zero(), |acc, &d| acc * b + d);
        if next.is_zero() {
            return BigCount::zero();
        }
        let t = next - 1u32;
        if &t >= limit {
            return BigCount::zero();
        }
        let start = &t * self.width + j;
        if start.clone() + k > self.len {
            return BigCount::zero();
        }
        let matches = self.digits_from(&start).take(k).eq(pattern.iter().copied());
        BigCount::from(u32::from(matches))
    }

    /// Numbers `t < limit` (`t < b^w`) whose `w` digits lie in `ranges`.
    fn count_below(&self, limit: &BigUint, ranges: &[DigitRange]) -> BigCount {
        if ranges.iter().any(|&(lo, hi)| lo > hi) {
            return BigCount::zero();
        }
        let w = ranges.len();
        let mut suffix = vec![BigUint::one(); w + 1];
        for p in (0..w).rev() {
            let (lo, hi) = ranges[p];
            suffix[p] = &suffix[p + 1] * (hi - lo + 1);
        }
        if limit >= &self.block_count {
            return suffix.swap_remove(0);
        }
        let digits = self.number_digits(limit);
        let mut total = BigCount::zero();
        for p in 0..w {
            let (lo, hi) = ranges[p];
            let tp = digits[p];
            if tp > lo {
                let top = hi.min(tp - 1);
                if top >= lo {
                    total += &suffix[p + 1] * (top - lo + 1);
                }
            }
            if tp < lo || tp > hi {
                break;
            }
        }
        total
    }
}

fn intersect(range: &mut DigitRange, d: u32) {
    *range = (range.0.max(d), range.1.min(d));
}

/// Lazy digit stream of a [`Champernowne`] block, an odometer over the
/// constituent blocks.
#[derive(Clone, Debug)]
pub struct ChampernowneDigits {
    base: u32,
    odometer: Vec<u32>,
    pos: usize,
    done: bool,
}

impl Iterator for ChampernowneDigits {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.done {
            return None;
        }
        let d = self.odometer[self.pos];
        self.pos += 1;
        if self.pos == self.odometer.len() {
            self.pos = 0;
            let mut carried = true;
            for slot in self.odometer.iter_mut().rev() {
                if *slot + 1 < self.base {
                    *slot += 1;
                    carried = false;
                    break;
                }
                *slot = 0;
            }
            self.done = carried;
        }
        Some(d)
    }
}
