//! Weightings `mu = (mu^(1), mu^(2), ...)` and `(eps, k, mu)`-normality of
//! finite blocks.
//!
//! Uniform weightings evaluate to exact rationals; custom weightings are
//! floating point and carry their own tolerance.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::blocks::{window_histogram, Block, Segment};
use crate::numeric::{from_biguint, inv_pow, rational_to_f64};
use crate::{BigCount, Error, EvalBudget, Result};

/// Value of `mu^(k)(B)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    Exact(BigRational),
    Approx(f64),
}

impl Weight {
    pub fn to_f64(&self) -> f64 {
        match self {
            Weight::Exact(r) => rational_to_f64(r),
            Weight::Approx(v) => *v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Weight::Exact(r) => r.is_zero(),
            Weight::Approx(v) => *v == 0.0,
        }
    }
}

pub type WeightFn = Arc<dyn Fn(&[u32]) -> f64 + Send + Sync>;

/// A weighting given by an arbitrary function of the block digits.
#[derive(Clone)]
pub struct CustomWeighting {
    pub name: String,
    pub eval: WeightFn,
    pub tolerance: f64,
}

impl fmt::Debug for CustomWeighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomWeighting")
            .field("name", &self.name)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum Weighting {
    /// `lambda_b`: `b^-k` on base-`b` blocks of length `k`, zero elsewhere.
    Uniform {
        base: u32,
    },
    Custom(CustomWeighting),
}

/// The uniform weighting `lambda_b`.
pub fn uniform(b: u32) -> Result<Weighting> {
    if b < 2 {
        return Err(Error::BadBase(u64::from(b)));
    }
    Ok(Weighting::Uniform { base: b })
}

impl Weighting {
    /// `mu^(k)(B)` with `k = digits.len()`.
    pub fn evaluate(&self, digits: &[u32]) -> Weight {
        match self {
            Weighting::Uniform { base } => {
                if digits.iter().any(|&d| d >= *base) {
                    Weight::Exact(BigRational::zero())
                } else {
                    Weight::Exact(inv_pow(*base, digits.len() as u32))
                }
            }
            Weighting::Custom(c) => Weight::Approx((c.eval)(digits)),
        }
    }

    fn tolerance(&self) -> f64 {
        match self {
            Weighting::Uniform { .. } => 0.0,
            Weighting::Custom(c) => c.tolerance,
        }
    }

    /// Checks `mu^(k)(B) = sum_{j < digit_bound} mu^(k+1)(B, j)` for all
    /// blocks over digits `< digit_bound` with `k < k_max`, and that
    /// `mu^(1)` has total mass 1 on that range.
    pub fn check_consistency(
        &self,
        k_max: u32,
        digit_bound: u32,
        tol: f64,
        budget: EvalBudget,
    ) -> Result<bool> {
        let needed: u128 = (1..=k_max).map(|k| u128::from(digit_bound).pow(k)).sum();
        budget.check("weighting consistency", needed)?;
        let tol = tol + self.tolerance();
        let mass = (0..digit_bound).map(|d| self.evaluate(&[d]));
        if !close(sum_weights(mass), Weight::Exact(BigRational::one()), tol) {
            return Ok(false);
        }
        for k in 1..k_max {
            for digits in all_blocks(digit_bound, k as usize) {
                let parent = self.evaluate(&digits);
                let children = (0..digit_bound).map(|j| {
                    let mut child = digits.clone();
                    child.push(j);
                    self.evaluate(&child)
                });
                if !close(parent, sum_weights(children), tol) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn sum_weights(ws: impl Iterator<Item = Weight>) -> Weight {
    let mut exact = BigRational::zero();
    let mut approx = 0.0;
    let mut any_approx = false;
    for w in ws {
        match w {
            Weight::Exact(r) => exact += r,
            Weight::Approx(v) => {
                approx += v;
                any_approx = true;
            }
        }
    }
    if any_approx {
        Weight::Approx(approx + rational_to_f64(&exact))
    } else {
        Weight::Exact(exact)
    }
}

fn close(a: Weight, b: Weight, tol: f64) -> bool {
    match (a, b) {
        (Weight::Exact(x), Weight::Exact(y)) => rational_to_f64(&(x - y).abs()) <= tol,
        (a, b) => (a.to_f64() - b.to_f64()).abs() <= tol,
    }
}

/// Every block of length `k` over digits `< base`, in lexicographic order.
pub fn all_blocks(base: u32, k: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (base as u64).pow(k as u32);
    (0..total).map(move |mut code| {
        let mut digits = vec![0u32; k];
        for slot in digits.iter_mut().rev() {
            *slot = (code % u64::from(base)) as u32;
            code /= u64::from(base);
        }
        digits
    })
}

/// `true` iff `|mu^(k)(B) - b^-k| <= tol` for every block of length
/// `k <= k_max` in base `p`.
pub fn is_pb_uniform(
    mu: &Weighting,
    p: u32,
    b: u32,
    k_max: u32,
    tol: f64,
    budget: EvalBudget,
) -> Result<bool> {
    if p < 1 || p > b {
        return Err(Error::Precondition(format!(
            "need 1 <= p <= b, got p={p}, b={b}"
        )));
    }
    if k_max < 1 {
        return Err(Error::Precondition("k_max must be at least 1".into()));
    }
    let needed: u128 = (1..=k_max).map(|k| u128::from(p).pow(k)).sum();
    budget.check("(p,b)-uniformity check", needed)?;
    let tol = tol + mu.tolerance();
    for k in 1..=k_max {
        let target = Weight::Exact(inv_pow(b, k));
        for digits in all_blocks(p, k as usize) {
            if !close(mu.evaluate(&digits), target.clone(), tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Outcome of an `(eps, k, mu)`-normality check.
#[derive(Clone, Debug)]
pub struct NormalityReport {
    pub pass: bool,
    /// Block with the most extreme `N / (mu |y|)`, with that ratio.
    pub worst: Option<(Block, f64)>,
    pub blocks_checked: u64,
    pub violations: u64,
}

/// Checks `mu(B)|y|(1-eps) <= N_{|y|}(B,y) <= mu(B)|y|(1+eps)` for every
/// block `B` of length `m <= k` over digits `< alphabet_bound`.
///
/// Blocks with `mu(B) = 0` pass iff they never occur.
pub fn check_normality(
    y: &Segment,
    eps: &BigRational,
    k: u32,
    mu: &Weighting,
    alphabet_bound: u32,
    budget: EvalBudget,
) -> Result<NormalityReport> {
    if !(eps.is_positive() && eps < &BigRational::one()) {
        return Err(Error::Precondition("need 0 < eps < 1".into()));
    }
    if k < 1 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    if alphabet_bound < 2 {
        return Err(Error::BadBase(u64::from(alphabet_bound)));
    }
    let blocks: u128 = (1..=k).map(|m| u128::from(alphabet_bound).pow(m)).sum();
    budget.check("normality check", blocks)?;

    let len = y.len();
    let len_q = from_biguint(&len);
    let len_f = rational_to_f64(&len_q);
    // Scanning touches every digit once per length; closed-form counting
    // costs a few hundred operations per block.
    let scan = len
        .to_u64()
        .filter(|&l| u128::from(l) * u128::from(k) <= u128::from(budget.0));

    let lo_factor = BigRational::one() - eps;
    let hi_factor = BigRational::one() + eps;
    let eps_f = rational_to_f64(eps);
    let mut report = NormalityReport {
        pass: true,
        worst: None,
        blocks_checked: 0,
        violations: 0,
    };
    let mut worst_dev = -1.0f64;

    for m in 1..=k {
        let hist = scan.map(|_| window_histogram(y.digits(), alphabet_bound, m as usize));
        for (code, digits) in all_blocks(alphabet_bound, m as usize).enumerate() {
            let count: BigCount = match &hist {
                Some(h) => BigCount::from(h[code]),
                None => y.count_interior(&digits, &len),
            };
            let count_q = from_biguint(&count);
            let weight = mu.evaluate(&digits);
            let (ok, ratio) = match &weight {
                Weight::Exact(w) if w.is_zero() => (
                    count.is_zero(),
                    if count.is_zero() { 1.0 } else { f64::INFINITY },
                ),
                Weight::Exact(w) => {
                    let expected = w * &len_q;
                    let ok = &expected * &lo_factor <= count_q && count_q <= &expected * &hi_factor;
                    (ok, rational_to_f64(&(&count_q / &expected)))
                }
                Weight::Approx(w) => {
                    let c = rational_to_f64(&count_q);
                    if *w == 0.0 {
                        (
                            count.is_zero(),
                            if count.is_zero() { 1.0 } else { f64::INFINITY },
                        )
                    } else {
                        let slack = mu.tolerance() * len_f * (1.0 + eps_f);
                        let expected = w * len_f;
                        let ok = expected * (1.0 - eps_f) - slack <= c
                            && c <= expected * (1.0 + eps_f) + slack;
                        (ok, c / expected)
                    }
                }
            };
            report.blocks_checked += 1;
            if !ok {
                report.pass = false;
                report.violations += 1;
            }
            let dev = (ratio - 1.0).abs();
            if dev > worst_dev {
                worst_dev = dev;
                report.worst = Some((Block::new(alphabet_bound, &digits)?, ratio));
            }
        }
    }
    Ok(report)
}

/// `lambda_b^(k)` summed over all base-`b` blocks of length `k`.
pub fn uniform_total_mass(b: u32, k: u32) -> BigRational {
    let count = BigUint::from(b).pow(k);
    BigRational::from_integer(BigInt::from(count)) * inv_pow(b, k)
}
