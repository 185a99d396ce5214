//! Brute-force reference implementations shared by the integration tests.
//! None of these reuse library counting or generation code.

#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `C_{b,w}` by listing every length-`w` block in lexicographic order.
pub fn champernowne_digits(b: u32, w: u32) -> Vec<u32> {
    let total = (b as usize).pow(w);
    let mut out = Vec::with_capacity(total * w as usize);
    for t in 0..total {
        let mut digits = vec![0u32; w as usize];
        let mut v = t;
        for slot in digits.iter_mut().rev() {
            *slot = (v % b as usize) as u32;
            v /= b as usize;
        }
        out.extend(digits);
    }
    out
}

/// Occurrences of `pattern` starting at 1-based positions `<= n` that fit
/// inside `y`.
pub fn count_naive(pattern: &[u32], y: &[u32], n: usize) -> u64 {
    if pattern.len() > y.len() {
        return 0;
    }
    let last_start = (y.len() - pattern.len() + 1).min(n);
    (0..last_start)
        .filter(|&j| y[j..j + pattern.len()] == *pattern)
        .count() as u64
}

pub fn rational(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// `sum_{j<=n} 1/(q_j ... q_{j+k-1})` term by term.
pub fn q_sum_naive(q: &[u64], n: usize, k: usize) -> BigRational {
    let mut s = BigRational::zero();
    for j in 0..n {
        let mut p = BigUint::one();
        for t in 0..k {
            p *= q[j + t];
        }
        s += rational(&BigUint::one(), &p);
    }
    s
}
