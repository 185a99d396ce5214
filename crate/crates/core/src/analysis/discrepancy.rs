//! `|N_n^Q(B,x)/Q_n^(k) - 1|` at checkpoints, against the envelope
//! `2 eps_i' + (S_n - Q_n)/S_n`.

use std::io::Write;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::context::{Hypotheses, SectionTwoContext};
use crate::blocks::Block;
use crate::construction::Construction;
use crate::numeric::{from_biguint, rational_to_f64};
use crate::{Error, Result};

/// Conditions under which the envelope is claimed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowHypotheses {
    /// `S_n / Q_n < 2`.
    pub s_over_q_below_two: bool,
    /// `k <= k_i`.
    pub k_within: bool,
    /// Smallest base of the block `<= p_i`.
    pub base_within: bool,
    pub monotonicity: Hypotheses,
}

impl RowHypotheses {
    pub fn all(self) -> bool {
        self.s_over_q_below_two && self.k_within && self.base_within && self.monotonicity.all()
    }
}

#[derive(Clone, Debug)]
pub struct DiscrepancyRow {
    pub n: BigUint,
    pub block: Block,
    pub count: BigUint,
    pub q: BigRational,
    pub ratio: BigRational,
    pub abs_err: BigRational,
    pub eps_prime: Option<BigRational>,
    pub s_minus_q_over_s: BigRational,
    pub envelope: Option<BigRational>,
    pub hypotheses: RowHypotheses,
    /// `Some(abs_err < envelope)` where the hypotheses hold.
    pub pass: Option<bool>,
}

impl DiscrepancyRow {
    /// Hypotheses unmet: the row is evidence only.
    pub fn pre_asymptotic(&self) -> bool {
        self.pass.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct DiscrepancyReport {
    pub k: u32,
    pub rows: Vec<DiscrepancyRow>,
}

impl DiscrepancyReport {
    pub fn applicable(&self) -> usize {
        self.rows.iter().filter(|r| r.pass.is_some()).count()
    }

    pub fn failures(&self) -> Vec<&DiscrepancyRow> {
        self.rows.iter().filter(|r| r.pass == Some(false)).collect()
    }

    pub fn pass(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Output(e.to_string());
        w.write_record([
            "n",
            "block",
            "N",
            "Q",
            "ratio",
            "abs_err",
            "eps_prime",
            "s_minus_q_over_s",
            "envelope",
            "pass",
        ])
        .map_err(io)?;
        let real = |x: &BigRational| format!("{:e}", rational_to_f64(x));
        let opt = |x: &Option<BigRational>| x.as_ref().map(real).unwrap_or_default();
        for r in &self.rows {
            let verdict = match r.pass {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "n/a",
            };
            w.write_record([
                r.n.to_string(),
                r.block.to_string(),
                r.count.to_string(),
                real(&r.q),
                real(&r.ratio),
                real(&r.abs_err),
                opt(&r.eps_prime),
                real(&r.s_minus_q_over_s),
                opt(&r.envelope),
                verdict.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Output(e.to_string()))
    }
}

fn checkpoint_rows(
    c: &Construction,
    patterns: &[Block],
    k: u32,
    n: &BigUint,
) -> Result<Vec<DiscrepancyRow>> {
    let ctx = SectionTwoContext::new(c, k, n)?;
    let s = ctx.s_partial_sum();
    let q = ctx.q_partial_sum()?;
    let s_minus_q_over_s = (&s - &q) / &s;
    let index = ctx.index().ok();
    let eps_prime = index.as_ref().and_then(|q| q.epsilon_prime().ok());
    let envelope = eps_prime
        .as_ref()
        .map(|e| BigRational::from_integer(2.into()) * e + &s_minus_q_over_s);
    // Before the first run is complete (i = 0) nothing is claimed.
    let (k_i, p_i) = match ctx.i() {
        0 => (0, 0),
        i => (c.tuple(i)?.k, c.tuple(i)?.p),
    };
    let monotonicity = index
        .map(|q| q.monotonicity_hypotheses())
        .unwrap_or(Hypotheses {
            x_i_long: false,
            x_next_long: false,
            l_positive: false,
        });
    let two = BigRational::from_integer(2.into());
    patterns
        .iter()
        .map(|b| {
            let count = c.count_prefix(b, n)?;
            let ratio = from_biguint(&count) / &q;
            let abs_err = (&ratio - BigRational::one()).abs();
            let hypotheses = RowHypotheses {
                s_over_q_below_two: &s / &q < two,
                k_within: k <= k_i,
                base_within: Block::minimal_base(&b.to_vec()) <= p_i,
                monotonicity,
            };
            let pass = match (&envelope, hypotheses.all()) {
                (Some(env), true) => Some(&abs_err < env),
                _ => None,
            };
            Ok(DiscrepancyRow {
                n: n.clone(),
                block: b.clone(),
                count,
                q: q.clone(),
                ratio,
                abs_err,
                eps_prime: eps_prime.clone(),
                s_minus_q_over_s: s_minus_q_over_s.clone(),
                envelope: envelope.clone(),
                hypotheses,
                pass,
            })
        })
        .collect()
}

/// One row per `(checkpoint, block)`, in input order.
pub fn discrepancy_sweep(
    c: &Construction,
    patterns: &[Block],
    k: u32,
    checkpoints: &[BigUint],
) -> Result<DiscrepancyReport> {
    c.range_set().require(k)?;
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "checkpoints must be strictly increasing".into(),
        ));
    }
    if checkpoints.first().is_some_and(Zero::is_zero) {
        return Err(Error::OutOfRange {
            what: "checkpoint 0".into(),
        });
    }
    if let Some(b) = patterns.iter().find(|b| b.len() != k as usize) {
        return Err(Error::Precondition(format!(
            "block {b} does not have length k = {k}"
        )));
    }
    let per_checkpoint = checkpoints
        .par_iter()
        .map(|n| checkpoint_rows(c, patterns, k, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscrepancyReport {
        k,
        rows: per_checkpoint.into_iter().flatten().collect(),
    })
}

/// `L_from, ..., L_to`, dropping zero and repeated lengths.
pub fn cumulative_checkpoints(c: &Construction, from: u64, to: u64) -> Result<Vec<BigUint>> {
    let mut out: Vec<BigUint> = Vec::new();
    for i in from..=to {
        let l = c.cumulative_length(i)?.clone();
        if !l.is_zero() && out.last().is_none_or(|p| *p < l) {
            out.push(l);
        }
    }
    Ok(out)
}
