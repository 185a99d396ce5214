//! Normal numbers for Cantor series expansions.
//!
//! The crate builds the digit stream of a number assembled from repeated
//! blocks `l_1 x_1 l_2 x_2 ...`, where the base changes from run to run, and
//! provides the machinery to check that it is normal with respect to the
//! induced basic sequence `Q`:
//!
//! * [`blocks`]: digit blocks, symbolic concatenations and exact overlapping
//!   occurrence counting, including closed-form counting inside
//!   lexicographic (Champernowne) blocks.
//! * [`weightings`]: block weightings and `(eps, k, mu)`-normality of finite
//!   blocks.
//! * [`bff`]: block friendly families and the growth conditions on the
//!   block sequence.
//! * [`cantor`]: basic sequences, Cantor series conversion and the partial
//!   sums `Q_n^(k)`.
//! * [`construction`]: the assembled number, its cumulative lengths and
//!   random access into its digits.
//! * [`analysis`]: the bounding quantities used to control
//!   `|N_n^Q(B,x) / Q_n^(k) - 1|` and the discrepancy harness.

pub mod analysis;
pub mod bff;
pub mod blocks;
pub mod cantor;
pub mod construction;
mod error;
pub mod numeric;
pub mod weightings;

pub use error::{Error, Result};

/// Exact occurrence counts. Lengths in the canonical construction exceed
/// 64 bits quickly, so every count is arbitrary precision.
pub type BigCount = num_bigint::BigUint;

/// Upper bound on the number of elementary evaluations an exhaustive check
/// may perform before it refuses with [`Error::Unfeasible`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalBudget(pub u64);

impl Default for EvalBudget {
    fn default() -> Self {
        EvalBudget(50_000_000)
    }
}

impl EvalBudget {
    pub fn check(self, what: &str, needed: u128) -> Result<()> {
        if needed > u128::from(self.0) {
            Err(Error::Unfeasible {
                what: what.to_string(),
                needed,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}
