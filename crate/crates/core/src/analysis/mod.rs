//! Bounding quantities for `|N_n^Q(B,x)/Q_n^(k) - 1|` and the checks built
//! on them.
//!
//! Inequalities that hold at a given `n` are checked exactly; statements
//! about limits are rendered as monotone-trend evidence over a finite range.

mod champernowne;
mod context;
mod discrepancy;
mod lemmas;

pub use champernowne::{verify_champernowne_lemmas, ChampernowneReport, LemmaTally};
pub use context::{GCoefficients, Hypotheses, IndexQuantities, SectionTwoContext};
pub use discrepancy::{
    cumulative_checkpoints, discrepancy_sweep, DiscrepancyReport, DiscrepancyRow, RowHypotheses,
};
pub use lemmas::{
    check_lemma_2_1, check_lemma_2_2, check_lemma_2_5, epsilon_prime_trend, lemma_2_3_sweep,
    s_minus_q_bound_check, s_start, EpsPrimeReport, EpsPrimeRow, GridSpec, Lemma23Report,
    Lemma25Report, LemmaCheck, SMinusQ, Sandwich,
};
