//! Exhaustive checks of the count bounds and block normality of the
//! lexicographic blocks `C_{b,w}`.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::blocks::{window_histogram, Champernowne, Segment};
use crate::numeric::ratio;
use crate::weightings::{check_normality, uniform};
use crate::{EvalBudget, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LemmaTally {
    pub cases: u64,
    pub passes: u64,
    /// Human-readable descriptions of the first failures.
    pub failures: Vec<String>,
}

impl LemmaTally {
    pub fn failed(&self) -> u64 {
        self.cases - self.passes
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if ok {
            self.passes += 1;
        } else if self.failures.len() < 32 {
            self.failures.push(what());
        }
    }

    fn merge(&mut self, other: LemmaTally) {
        self.cases += other.cases;
        self.passes += other.passes;
        let room = 32usize.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChampernowneReport {
    /// `(w-k+1) b^{w-k} <= N <= w b^{w-k}` for every base-`b` block.
    pub count_bounds: LemmaTally,
    /// Blocks using the digit `b` never occur.
    pub foreign_digits: LemmaTally,
    /// `(K/w, K, lambda_b)`-normality for every `K < w`.
    pub normality: LemmaTally,
}

impl ChampernowneReport {
    pub fn pass(&self) -> bool {
        self.count_bounds.failed() == 0
            && self.foreign_digits.failed() == 0
            && self.normality.failed() == 0
    }
}

fn check_one(b: u32, w: u32, budget: EvalBudget) -> Result<ChampernowneReport> {
    let champ = Champernowne::new(b, w)?;
    let segment = Segment::from(champ);
    let mut report = ChampernowneReport::default();
    for k in 1..=w {
        let hist = window_histogram(segment.digits(), b, k as usize);
        let lo = u64::from(w - k + 1) * u64::from(b).pow(w - k);
        let hi = u64::from(w) * u64::from(b).pow(w - k);
        for (code, &count) in hist.iter().enumerate() {
            report.count_bounds.record(lo <= count && count <= hi, || {
                format!("b={b} w={w} k={k} block #{code}: {lo} <= {count} <= {hi} fails")
            });
        }
        // Over the alphabet 0..=b, every block that uses the digit b is absent.
        let wide = window_histogram(segment.digits(), b + 1, k as usize);
        let mut digits = vec![0u32; k as usize];
        for (code, &count) in wide.iter().enumerate() {
            let mut c = code;
            for slot in digits.iter_mut().rev() {
                *slot = (c % (b as usize + 1)) as u32;
                c /= b as usize + 1;
            }
            if digits.contains(&b) {
                report.foreign_digits.record(count == 0, || {
                    format!("b={b} w={w} block {digits:?} occurs {count} times")
                });
            }
        }
    }
    let mu = uniform(b)?;
    for big_k in 1..w {
        let eps = ratio(big_k, w);
        let r = check_normality(&segment, &eps, big_k, &mu, b, budget)?;
        report.normality.record(r.pass, || {
            format!(
                "b={b} w={w} K={big_k}: {} violations, worst {:?}",
                r.violations, r.worst
            )
        });
    }
    Ok(report)
}

/// Runs every `2 <= b <= b_max`, `1 <= w <= w_max`.
pub fn verify_champernowne_lemmas(
    b_max: u32,
    w_max: u32,
    budget: EvalBudget,
) -> Result<ChampernowneReport> {
    let cases: Vec<(u32, u32)> = (2..=b_max)
        .flat_map(|b| (1..=w_max).map(move |w| (b, w)))
        .collect();
    // Each (b, w) scans its block once per k over two alphabets.
    let needed: u128 = cases
        .iter()
        .map(|&(b, w)| {
            let len = BigUint::from(w) * BigUint::from(b).pow(w);
            let len = u128::try_from(len).unwrap_or(u128::MAX);
            len.saturating_mul(2 * u128::from(w)) + u128::from(b + 1).saturating_pow(w)
        })
        .fold(0u128, u128::saturating_add);
    budget.check("lexicographic block verification", needed)?;
    let parts = cases
        .par_iter()
        .map(|&(b, w)| check_one(b, w, budget))
        .collect::<Result<Vec<_>>>()?;
    let mut total = ChampernowneReport::default();
    for p in parts {
        total.count_bounds.merge(p.count_bounds);
        total.foreign_digits.merge(p.foreign_digits);
        total.normality.merge(p.normality);
    }
    Ok(total)
}
