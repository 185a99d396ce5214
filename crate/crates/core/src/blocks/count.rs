use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::Block;
use crate::BigCount;

/// Streaming matcher for one fixed pattern (Knuth-Morris-Pratt automaton).
/// Reports overlapping matches.
#[derive(Clone, Debug)]
pub struct Matcher {
    pattern: Vec<u32>,
    failure: Vec<usize>,
    state: usize,
}

impl Matcher {
    pub fn new(pattern: &[u32]) -> Self {
        assert!(!pattern.is_empty(), "pattern must be non-empty");
        let mut failure = vec![0; pattern.len()];
        let mut k = 0;
        for i in 1..pattern.len() {
            while k > 0 && pattern[i] != pattern[k] {
                k = failure[k - 1];
            }
            if pattern[i] == pattern[k] {
                k += 1;
            }
            failure[i] = k;
        }
        Matcher {
            pattern: pattern.to_vec(),
            failure,
            state: 0,
        }
    }

    pub fn pattern_len(&self) -> usize {
        self.pattern.len()
    }

    pub fn reset(&mut self) {
        self.state = 0;
    }

    /// Consumes one digit; returns true when a match ends at this digit.
    pub fn feed(&mut self, d: u32) -> bool {
        while self.state > 0 && self.pattern[self.state] != d {
            self.state = self.failure[self.state - 1];
        }
        if self.pattern[self.state] == d {
            self.state += 1;
        }
        if self.state == self.pattern.len() {
            self.state = self.failure[self.state - 1];
            true
        } else {
            false
        }
    }

    /// Matches in `digits` whose 0-based start is `< start_limit`.
    pub fn count_slice(&mut self, digits: &[u32], start_limit: usize) -> u64 {
        self.reset();
        let k = self.pattern.len();
        let end = digits.len().min(start_limit.saturating_add(k - 1));
        let mut count = 0;
        for (pos, &d) in digits[..end].iter().enumerate() {
            if self.feed(d) && pos + 1 - k < start_limit {
                count += 1;
            }
        }
        count
    }
}

/// `N_n(B, y)`: occurrences of `pattern` in `y` starting at a 1-indexed
/// position `<= n` and fitting inside `y`. Overlaps count.
pub fn count_occurrences<I>(pattern: &Block, y: I, n: &BigUint) -> BigCount
where
    I: IntoIterator<Item = u32>,
{
    let k = pattern.len() as u64;
    // Past u64 the stream itself is the limit.
    let last_end = n.to_u64().and_then(|n| n.checked_add(k - 1));
    let mut matcher = Matcher::new(&pattern.to_vec());
    let mut count: u64 = 0;
    for (idx, d) in y.into_iter().enumerate() {
        let pos = idx as u64 + 1;
        if let Some(last) = last_end {
            if pos > last {
                break;
            }
        }
        if matcher.feed(d) {
            count += 1;
        }
    }
    BigCount::from(count)
}

/// Counts of every length-`k` window over digits `< alphabet`, indexed by
/// the window read as a base-`alphabet` number. Windows that contain a digit
/// `>= alphabet` are skipped.
pub fn window_histogram<I>(digits: I, alphabet: u32, k: usize) -> Vec<u64>
where
    I: IntoIterator<Item = u32>,
{
    let size = (alphabet as usize).pow(k as u32);
    let mut hist = vec![0u64; size];
    let mut code = 0usize;
    let mut valid = 0usize;
    for d in digits {
        if d >= alphabet {
            valid = 0;
            code = 0;
            continue;
        }
        code = (code * alphabet as usize + d as usize) % size;
        valid += 1;
        if valid >= k {
            hist[code] += 1;
        }
    }
    hist
}
