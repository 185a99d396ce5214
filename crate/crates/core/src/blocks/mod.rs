//! Blocks of digits, symbolic concatenations `l_1 B_1 l_2 B_2 ...`, and exact
//! counting of overlapping occurrences.
//!
//! Positions are 1-indexed in the public counting API. An occurrence counts
//! toward `N_n(B, y)` when it starts at a position `<= n` and fits entirely
//! inside `y`.

mod block;
mod champernowne;
mod count;
mod schedule;

pub use block::{make_block, Block};
pub use champernowne::{champernowne_block, Champernowne, ChampernowneDigits};
pub use count::{count_occurrences, window_histogram, Matcher};
pub use schedule::{concat, count_in_schedule, ConcatSchedule, Segment, SegmentDigits, Term};
