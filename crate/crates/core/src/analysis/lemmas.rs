//! Finite, exact checks of the counting bounds and of `S - Q`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::context::{Hypotheses, IndexQuantities, SectionTwoContext};
use crate::bff::Trend;
use crate::blocks::{count_in_schedule, Block, ConcatSchedule};
use crate::construction::Construction;
use crate::numeric::{from_biguint, inv_pow, ln_rational};
use crate::{Error, Result};

/// `s = min{t : k < |x_t|}`.
pub fn s_start(c: &Construction, k: u32) -> Result<u64> {
    let k = BigUint::from(k);
    (1..=c.top())
        .find(|&t| c.x_len(t).map(|l| l > &k).unwrap_or(false))
        .ok_or_else(|| Error::Precondition(format!("no cached x_t is longer than k = {k}")))
}

/// `S_n - Q_n` against `r + k(i+2-s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SMinusQ {
    pub n: BigUint,
    pub diff: BigRational,
    pub bound: BigRational,
    /// `S >= Q`.
    pub nonnegative: bool,
    /// `S - Q <= r + k(i+2-s)`.
    pub within: bool,
}

impl SMinusQ {
    pub fn pass(&self) -> bool {
        self.nonnegative && self.within
    }
}

/// `S_{L_j}^(k) - Q_{L_j}^(k)`, zero for `L_j = 0`.
fn gap_at_cumulative(c: &Construction, k: u32, j: u64) -> Result<BigRational> {
    let lj = c.cumulative_length(j)?;
    if lj.is_zero() {
        return Ok(BigRational::zero());
    }
    let ctx = SectionTwoContext::new(c, k, lj)?;
    Ok(ctx.s_partial_sum() - ctx.q_partial_sum()?)
}

pub fn s_minus_q_bound_check(ctx: &SectionTwoContext<'_>, s: u64) -> Result<SMinusQ> {
    if s == 0 {
        return Err(Error::Precondition("s must be at least 1".into()));
    }
    let r = gap_at_cumulative(ctx.c, ctx.k, s - 1)?;
    let diff = ctx.s_partial_sum() - ctx.q_partial_sum()?;
    let steps = BigRational::from_integer((i128::from(ctx.i()) + 2 - i128::from(s)).into());
    let bound = r + BigRational::from_integer(ctx.k.into()) * steps;
    Ok(SMinusQ {
        n: ctx.n.clone(),
        nonnegative: diff >= BigRational::zero(),
        within: diff <= bound,
        diff,
        bound,
    })
}

#[derive(Clone, Debug)]
pub struct Lemma23Report {
    pub k: u32,
    pub s: u64,
    pub rows: Vec<SMinusQ>,
    /// `S - Q` non-decreasing across the (sorted) checkpoints.
    pub monotone: bool,
    pub pass: bool,
}

/// Runs [`s_minus_q_bound_check`] over increasing checkpoints.
pub fn lemma_2_3_sweep(c: &Construction, k: u32, checkpoints: &[BigUint]) -> Result<Lemma23Report> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "checkpoints must be strictly increasing".into(),
        ));
    }
    let s = s_start(c, k)?;
    let rows = checkpoints
        .iter()
        .map(|n| s_minus_q_bound_check(&SectionTwoContext::new(c, k, n)?, s))
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|w| w[0].diff <= w[1].diff);
    let pass = monotone && rows.iter().all(SMinusQ::pass);
    Ok(Lemma23Report {
        k,
        s,
        rows,
        monotone,
        pass,
    })
}

/// One inequality `lower <= value <= upper` with its margins.
#[derive(Clone, Debug, PartialEq)]
pub struct Sandwich {
    pub label: &'static str,
    pub lower: BigRational,
    pub value: BigRational,
    pub upper: BigRational,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.lower <= self.value && self.value <= self.upper
    }

    pub fn lower_margin(&self) -> BigRational {
        &self.value - &self.lower
    }

    pub fn upper_margin(&self) -> BigRational {
        &self.upper - &self.value
    }
}

#[derive(Clone, Debug)]
pub struct LemmaCheck {
    /// `k <= k_i` and the block's smallest base is `<= p_i`.
    pub applicable: bool,
    pub sandwiches: Vec<Sandwich>,
}

impl LemmaCheck {
    /// Holds, or is not applicable.
    pub fn pass(&self) -> bool {
        !self.applicable || self.sandwiches.iter().all(Sandwich::holds)
    }
}

fn not_applicable() -> LemmaCheck {
    LemmaCheck {
        applicable: false,
        sandwiches: Vec::new(),
    }
}

fn block_base(pattern: &Block) -> u32 {
    Block::minimal_base(&pattern.to_vec())
}

fn applicable(ctx: &SectionTwoContext<'_>, pattern: &Block) -> Result<bool> {
    if pattern.len() != ctx.k as usize {
        return Err(Error::Precondition(format!(
            "block length {} differs from k = {}",
            pattern.len(),
            ctx.k
        )));
    }
    if ctx.i() == 0 {
        return Ok(false);
    }
    let t = ctx.c.tuple(ctx.i())?;
    Ok(ctx.k <= t.k && block_base(pattern) <= t.p)
}

/// Counts in `x_i` and in the partial run `l_{i+1} x_{i+1}` against their
/// normality bounds.
pub fn check_lemma_2_1(ctx: &SectionTwoContext<'_>, pattern: &Block) -> Result<LemmaCheck> {
    let ok = applicable(ctx, pattern)?;
    if ctx.i() == 0 {
        return Ok(not_applicable());
    }
    let (i, k) = (ctx.i(), ctx.k);
    let c = ctx.c;
    let one = BigRational::one();
    let (ti, tn) = (c.tuple(i)?, c.tuple(i + 1)?);
    let xi = from_biguint(c.x_len(i)?);
    let xn = from_biguint(c.x_len(i + 1)?);
    let digits = pattern.to_vec();

    let inside = from_biguint(&c.x(i)?.count_interior(&digits, c.x_len(i)?));
    let mean_i = inv_pow(ti.b, k) * &xi;
    let first = Sandwich {
        label: "N(B, x_i)",
        lower: (&one - &ti.eps) * &mean_i,
        value: inside,
        upper: (&one + &ti.eps) * &mean_i,
    };

    let run = ConcatSchedule::new([(tn.l.clone(), c.x(i + 1)?.clone())]);
    let tail = from_biguint(&count_in_schedule(&run, pattern, &ctx.d.m)?);
    let alpha = from_biguint(&ctx.d.alpha);
    let mean_n = inv_pow(tn.b, k) * &alpha * &xn;
    let second = Sandwich {
        label: "N_m(B, l_{i+1} x_{i+1})",
        lower: (&one - &tn.eps) * &mean_n,
        value: tail,
        upper: (&one + &tn.eps) * &mean_n
            + from_biguint(&ctx.d.beta)
            + BigRational::from_integer(k.into()) * &alpha,
    };
    Ok(LemmaCheck {
        applicable: ok,
        sandwiches: vec![first, second],
    })
}

/// `N_n^Q(B,x)` between the normality lower bound and `kappa`.
pub fn check_lemma_2_2(ctx: &SectionTwoContext<'_>, pattern: &Block) -> Result<LemmaCheck> {
    let ok = applicable(ctx, pattern)?;
    if ctx.i() == 0 {
        return Ok(not_applicable());
    }
    let (i, k) = (ctx.i(), ctx.k);
    let c = ctx.c;
    let one = BigRational::one();
    let (ti, tn) = (c.tuple(i)?, c.tuple(i + 1)?);
    let lower = (&one - &ti.eps) * inv_pow(ti.b, k) * from_biguint(&(&ti.l * c.x_len(i)?))
        + (&one - &tn.eps) * inv_pow(tn.b, k) * from_biguint(&(&ctx.d.alpha * c.x_len(i + 1)?));
    let count = from_biguint(&c.count_prefix(pattern, &ctx.n)?);
    Ok(LemmaCheck {
        applicable: ok,
        sandwiches: vec![Sandwich {
            label: "N_n^Q(B,x)",
            lower,
            value: count,
            upper: ctx.kappa()?,
        }],
    })
}

/// Sampling of `{0..l_{i+1}} x {0..|x_{i+1}|-1}`: corners and edges plus
/// `interior` seeded random values per axis.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub per_axis_edge: u64,
    pub interior: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            per_axis_edge: 2,
            interior: 6,
            seed: 0x5eed,
        }
    }
}

fn axis(max: &BigUint, spec: &GridSpec, rng: &mut ChaCha8Rng) -> Vec<BigUint> {
    let mut pts: Vec<BigUint> = Vec::new();
    for t in 0..spec.per_axis_edge {
        if BigUint::from(t) <= *max {
            pts.push(BigUint::from(t));
            pts.push(max - BigUint::from(t).min(max.clone()));
        }
    }
    // Interior points: uniform over u64-sized ranges, scaled otherwise.
    for _ in 0..spec.interior {
        let v = match max.to_u64() {
            Some(m) => BigUint::from(rng.gen_range(0..=m)),
            None => {
                let frac: u64 = rng.gen();
                (max * BigUint::from(frac)) >> 64
            }
        };
        pts.push(v);
    }
    pts.sort();
    pts.dedup();
    pts
}

#[derive(Clone, Debug)]
pub struct Lemma25Report {
    pub i: u64,
    pub k: u32,
    pub hypotheses: Hypotheses,
    pub eps_prime: Option<BigRational>,
    pub points: usize,
    /// `g(w+1,z) < g(w,z)` failures.
    pub not_decreasing_in_w: usize,
    /// `g(w,z+1) > g(w,z)` failures.
    pub not_increasing_in_z: usize,
    /// `g(w,z) < eps'` failures.
    pub above_eps_prime: usize,
    /// `f(w,z) < g(w,z)` failures.
    pub f_not_below_g: usize,
}

impl Lemma25Report {
    pub fn violations(&self) -> usize {
        self.not_decreasing_in_w
            + self.not_increasing_in_z
            + self.above_eps_prime
            + self.f_not_below_g
    }

    /// `None` when the hypotheses are unmet (reported, not failed).
    pub fn pass(&self) -> Option<bool> {
        self.hypotheses.all().then(|| self.violations() == 0)
    }
}

/// Checks the monotonicity of `g_i` in each argument, and `f_i < g_i <
/// eps_i'`, on a corner-biased grid. Runs whether or not the hypotheses
/// hold; [`Lemma25Report::pass`] only judges when they do.
pub fn check_lemma_2_5(c: &Construction, i: u64, k: u32, grid: GridSpec) -> Result<Lemma25Report> {
    c.range_set().require(k)?;
    let q = IndexQuantities::new(c, i, k)?;
    let hypotheses = q.monotonicity_hypotheses();
    let mut report = Lemma25Report {
        i,
        k,
        hypotheses,
        eps_prime: None,
        points: 0,
        not_decreasing_in_w: 0,
        not_increasing_in_z: 0,
        above_eps_prime: 0,
        f_not_below_g: 0,
    };
    if !hypotheses.l_positive {
        return Ok(report);
    }
    let eps_prime = q.epsilon_prime()?;
    let w_max = c.tuple(i + 1)?.l.clone();
    let z_max = c.x_len(i + 1)? - 1u32;
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed ^ (i << 32) ^ u64::from(k));
    let ws = axis(&w_max, &grid, &mut rng);
    let zs = axis(&z_max, &grid, &mut rng);
    for w in &ws {
        for z in &zs {
            let (f, g) = q.f_g(w, z)?;
            report.points += 1;
            if f >= g {
                report.f_not_below_g += 1;
            }
            if g >= eps_prime {
                report.above_eps_prime += 1;
            }
            if *w < w_max && q.g(&(w + 1u32), z)? >= g {
                report.not_decreasing_in_w += 1;
            }
            if *z < z_max && q.g(w, &(z + 1u32))? <= g {
                report.not_increasing_in_z += 1;
            }
        }
    }
    report.eps_prime = Some(eps_prime);
    Ok(report)
}

/// `eps_i'` and the two component ratios that drive it to zero.
#[derive(Clone, Debug)]
pub struct EpsPrimeRow {
    pub i: u64,
    pub eps_prime: BigRational,
    pub ln_eps_prime: f64,
    /// `k(l_i+1)/(b_i^{-k} l_i |x_i|)`.
    pub boundary_ratio: BigRational,
    /// `2k b_i^k / |x_i|`.
    pub boundary_bound: BigRational,
    /// `(sum_{j<=i-2} l_j|x_j|)/(b_i^{-k} l_i |x_i|)`.
    pub early_mass_ratio: BigRational,
}

#[derive(Clone, Debug)]
pub struct EpsPrimeReport {
    pub k: u32,
    pub rows: Vec<EpsPrimeRow>,
    /// Indices skipped because `l_i = 0`.
    pub skipped: Vec<u64>,
    /// Strict decrease of `eps_i'`.
    pub trend: Trend,
    /// `boundary_ratio <= boundary_bound` at every row.
    pub boundary_bound_holds: bool,
}

/// `eps_i'` for `i` in `i_from..=i_to`.
pub fn epsilon_prime_trend(
    c: &Construction,
    k: u32,
    i_from: u64,
    i_to: u64,
) -> Result<EpsPrimeReport> {
    c.range_set().require(k)?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for i in i_from.max(1)..=i_to {
        let q = IndexQuantities::new(c, i, k)?;
        let (Some(boundary_ratio), Some(early_mass_ratio)) =
            (q.boundary_ratio(), q.early_mass_ratio())
        else {
            skipped.push(i);
            continue;
        };
        let eps_prime = q.epsilon_prime()?;
        rows.push(EpsPrimeRow {
            i,
            ln_eps_prime: ln_rational(&eps_prime),
            eps_prime,
            boundary_ratio,
            boundary_bound: q.boundary_bound(),
            early_mass_ratio,
        });
    }
    // Compared exactly; the logs are for display.
    let exact_trend = {
        let strictly = |rs: &[EpsPrimeRow]| {
            rs.len() >= 2 && rs.windows(2).all(|w| w[0].eps_prime > w[1].eps_prime)
        };
        let half = rows.len() / 2;
        let tail_start = half.min(rows.len().saturating_sub(2));
        Trend {
            tail: strictly(&rows[tail_start..]),
            full: strictly(&rows),
        }
    };
    Ok(EpsPrimeReport {
        k,
        boundary_bound_holds: rows.iter().all(|r| r.boundary_ratio <= r.boundary_bound),
        rows,
        skipped,
        trend: exact_trend,
    })
}
