//! Acceptance run: one line per criterion, then a non-zero exit if any
//! criterion failed.

mod common;

use std::time::{Duration, Instant};

use common::{champernowne_digits, count_naive, rational};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use qnormal::analysis::{
    check_lemma_2_5, discrepancy_sweep, epsilon_prime_trend, lemma_2_3_sweep,
    verify_champernowne_lemmas, GridSpec,
};
use qnormal::bff::check_w_good;
use qnormal::blocks::{
    champernowne_block, count_in_schedule, make_block, Block, Champernowne, ConcatSchedule, Segment,
};
use qnormal::cantor::{digits_to_value, value_to_digits, BasicSequence, SumMode};
use qnormal::construction::{theorem_4_1_instance, Construction, ScaleOverrides};
use qnormal::numeric::{ratio, rational_to_f64};
use qnormal::weightings::{all_blocks, check_normality, uniform};
use qnormal::EvalBudget;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x0acc_e97a;
const C1_RUNTIME: Duration = Duration::from_secs(60);
const C3_SCHEDULES: usize = 500;
const C3_CUTS: usize = 20;
const C3_MAX_LEN: u64 = 10_000;
const C4_CHECKPOINTS: usize = 1000;
const C7_RUNTIME: Duration = Duration::from_secs(1);
const C7_I: (u64, u64) = (3, 12);
const C7_K_MAX: u32 = 6;
const C8_VALUES: usize = 1000;
const C8_DEN_MAX: u64 = 1_000_000;
const C8_DIGITS: usize = 24;

struct Outcome {
    pass: bool,
    detail: String,
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (mut cases, mut bad) = (0u64, Vec::new());
    for b in 2..=3u32 {
        for w in 1..=6u32 {
            let sched = champernowne_block(b, w).unwrap();
            let digits = champernowne_digits(b, w);
            let n = big(digits.len() as u64);
            for k in 1..=w {
                let lo = u64::from(w - k + 1) * u64::from(b).pow(w - k);
                let hi = u64::from(w) * u64::from(b).pow(w - k);
                for pattern in all_blocks(b, k as usize) {
                    let block = make_block(b, &pattern).unwrap();
                    let count = count_in_schedule(&sched, &block, &n).unwrap();
                    let scan = count_naive(&pattern, &digits, digits.len());
                    cases += 1;
                    if count != big(scan) || scan < lo || scan > hi {
                        bad.push(format!("b={b} w={w} B={}", block.to_token()));
                    }
                }
            }
        }
    }
    let lib = verify_champernowne_lemmas(3, 6, EvalBudget::default()).unwrap();
    let elapsed = start.elapsed();
    Outcome {
        pass: bad.is_empty() && lib.count_bounds.failed() == 0 && elapsed < C1_RUNTIME,
        detail: format!(
            "{cases} blocks, {} out of bounds, library tally {}/{}, {:.2?} (limit {:?})",
            bad.len(),
            lib.count_bounds.passes,
            lib.count_bounds.cases,
            elapsed,
            C1_RUNTIME
        ),
    }
}

fn criterion_2() -> Outcome {
    let (mut cases, mut failed) = (0, Vec::new());
    for b in 2..=3u32 {
        let mu = uniform(b).unwrap();
        for w in 2..=6u32 {
            let seg = Segment::from(Champernowne::new(b, w).unwrap());
            for big_k in 1..w {
                let eps = ratio(u64::from(big_k), u64::from(w));
                let report =
                    check_normality(&seg, &eps, big_k, &mu, b, EvalBudget::default()).unwrap();
                cases += 1;
                if !report.pass {
                    failed.push(format!("b={b} w={w} K={big_k}"));
                }
            }
        }
    }
    Outcome {
        pass: failed.is_empty(),
        detail: format!("{cases} (b,w,K) cases, failures: {failed:?}"),
    }
}

fn random_segment(rng: &mut ChaCha8Rng) -> Segment {
    let b = rng.gen_range(2..=5u32);
    if rng.gen_bool(0.5) {
        let w = rng.gen_range(1..=if b == 2 { 6 } else { 3 });
        Segment::from(Champernowne::new(b, w).unwrap())
    } else {
        let len = rng.gen_range(1..=12);
        let ds: Vec<u32> = (0..len).map(|_| rng.gen_range(0..b)).collect();
        Segment::from(make_block(b, &ds).unwrap())
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let (mut checks, mut mismatches) = (0u64, 0u64);
    let mut built = 0;
    while built < C3_SCHEDULES {
        let terms: Vec<(BigUint, Segment)> = (0..rng.gen_range(1..=6))
            .map(|_| (big(rng.gen_range(0..=20)), random_segment(&mut rng)))
            .collect();
        let sched = ConcatSchedule::new(terms);
        if sched.len() > &big(C3_MAX_LEN) {
            continue;
        }
        built += 1;
        let digits: Vec<u32> = sched.digits().collect();
        for _ in 0..C3_CUTS {
            let k = rng.gen_range(1..=4);
            let pattern: Vec<u32> = if digits.len() >= k && rng.gen_bool(0.7) {
                let at = rng.gen_range(0..=digits.len() - k);
                digits[at..at + k].to_vec()
            } else {
                (0..k).map(|_| rng.gen_range(0..5)).collect()
            };
            let n = rng.gen_range(0..=digits.len());
            let block = make_block(5, &pattern).unwrap();
            checks += 1;
            if count_in_schedule(&sched, &block, &big(n as u64)).unwrap()
                != big(count_naive(&pattern, &digits, n))
            {
                mismatches += 1;
            }
        }
    }
    Outcome {
        pass: mismatches == 0,
        detail: format!("{C3_SCHEDULES} schedules x {C3_CUTS} cuts = {checks} comparisons, {mismatches} mismatches"),
    }
}

fn scaled() -> Construction {
    theorem_4_1_instance(5, Some(ScaleOverrides::default())).unwrap()
}

/// Log-uniform sample below the analysis limit plus every `L_i` and its
/// neighbours.
fn checkpoints(c: &Construction) -> Vec<BigUint> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let limit = c.analysis_limit().clone();
    let ln_limit = limit.to_f64().unwrap().ln();
    let mut pts: Vec<BigUint> = Vec::new();
    for i in 1..c.top() {
        let li = c.cumulative_length(i).unwrap().clone();
        if li.is_zero() {
            continue;
        }
        for n in [&li - 1u32, li.clone(), &li + 1u32] {
            if !n.is_zero() && n < limit {
                pts.push(n);
            }
        }
    }
    while pts.len() < C4_CHECKPOINTS {
        let n = rng.gen_range(0.0..ln_limit).exp() as u64;
        if n >= 1 && big(n) < limit {
            pts.push(big(n));
        }
        pts.sort();
        pts.dedup();
    }
    pts.sort();
    pts.dedup();
    pts
}

fn criterion_4(c: &Construction, pts: &[BigUint]) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for k in 1..=3 {
        let r = lemma_2_3_sweep(c, k, pts).unwrap();
        let bad = r.rows.iter().filter(|row| !row.pass()).count();
        pass &= r.pass;
        parts.push(format!(
            "k={k}: s={} monotone={} bad_rows={bad}",
            r.s, r.monotone
        ));
    }
    Outcome {
        pass,
        detail: format!("{} checkpoints; {}", pts.len(), parts.join("; ")),
    }
}

fn criterion_5(c: &Construction, pts: &[BigUint]) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for k in 1..=3u32 {
        let patterns: Vec<Block> = all_blocks(3, k as usize)
            .map(|d| make_block(3, &d).unwrap())
            .collect();
        let r = discrepancy_sweep(c, &patterns, k, pts).unwrap();
        let mut judged = 0;
        let mut violations = 0;
        for i in 2..=5 {
            let g = check_lemma_2_5(c, i, k, GridSpec::default()).unwrap();
            if let Some(ok) = g.pass() {
                judged += 1;
                violations += usize::from(!ok);
            }
        }
        pass &= r.pass() && r.applicable() > 0 && violations == 0 && judged > 0;
        parts.push(format!(
            "k={k}: envelope rows judged={} failed={}, g-grids judged={judged} failed={violations}",
            r.applicable(),
            r.failures().len()
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_6(c: &Construction) -> Outcome {
    let pts: Vec<BigUint> = (2..=5)
        .map(|i| c.cumulative_length(i).unwrap().clone())
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=2u32 {
        let patterns: Vec<Block> = all_blocks(2, k as usize)
            .map(|d| make_block(2, &d).unwrap())
            .collect();
        let r = discrepancy_sweep(c, &patterns, k, &pts).unwrap();
        // Worst block per checkpoint; rows come back checkpoint-major.
        let worst: Vec<f64> = r
            .rows
            .chunks(patterns.len())
            .map(|rows| {
                rows.iter()
                    .map(|row| rational_to_f64(&row.abs_err))
                    .fold(0.0, f64::max)
            })
            .collect();
        let mut per_block_ok = true;
        for b in 0..patterns.len() {
            let series: Vec<&BigRational> = r
                .rows
                .iter()
                .skip(b)
                .step_by(patterns.len())
                .map(|row| &row.abs_err)
                .collect();
            per_block_ok &= series
                .windows(2)
                .all(|w| w[1] < w[0] || (w[0].is_zero() && w[1].is_zero()));
        }
        pass &= per_block_ok;
        let worst: Vec<String> = worst.iter().map(|v| format!("{v:.2e}")).collect();
        parts.push(format!(
            "k={k}: max|N/Q-1| at L2..L5 = [{}] decreasing={per_block_ok}",
            worst.join(", ")
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_7() -> (Outcome, Outcome) {
    let start = Instant::now();
    let c = theorem_4_1_instance(C7_I.1 + 1, None).unwrap();
    let (lo, hi) = C7_I;
    let mut literal = Vec::new();
    let mut tail = Vec::new();
    for k in 1..=C7_K_MAX {
        let w = check_w_good(c.bff(), c.good_sequence(), hi, k).unwrap();
        let rows: Vec<_> = w.rows.iter().filter(|r| r.i >= lo).collect();
        let r1: Vec<f64> = rows.iter().filter_map(|r| r.ln_r1).collect();
        let r2: Vec<f64> = rows.iter().filter_map(|r| r.ln_r2).collect();
        let r3: Vec<f64> = rows.iter().filter_map(|r| r.ln_r3).collect();
        let eps = epsilon_prime_trend(&c, k, lo, hi).unwrap();
        let strict = |v: &[f64], up: bool| {
            v.windows(2)
                .all(|w| if up { w[1] > w[0] } else { w[1] < w[0] })
        };
        let full = [
            ("r1", strict(&r1, true)),
            ("r2", strict(&r2, false)),
            ("r3", strict(&r3, false)),
            ("eps'", eps.trend.full),
        ];
        let failing: Vec<&str> = full.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
        if !failing.is_empty() {
            literal.push(format!("k={k} not monotone: {}", failing.join(",")));
        }
        if !(w.r1.tail && w.r2.tail && w.r3.tail && eps.trend.tail) {
            tail.push(format!("k={k}"));
        }
    }
    let elapsed = start.elapsed();
    let timely = elapsed < C7_RUNTIME;
    (
        Outcome {
            pass: literal.is_empty() && timely,
            detail: format!(
                "strict over i in [{lo},{hi}], k<={C7_K_MAX}, {elapsed:.2?} (limit {C7_RUNTIME:?}); {}",
                if literal.is_empty() { "all monotone".to_string() } else { literal.join("; ") }
            ),
        },
        Outcome {
            pass: tail.is_empty() && timely,
            detail: format!(
                "strict over the last half of [{lo},{hi}], k<={C7_K_MAX}; failures: {}",
                if tail.is_empty() { "none".to_string() } else { tail.join(",") }
            ),
        },
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let bases = [
        BasicSequence::constant(10).unwrap(),
        BasicSequence::successor(),
        BasicSequence::schedule([(big(3), 2), (big(5), 3), (big(7), 7), (big(100), 11)]).unwrap(),
    ];
    let mut bad = 0;
    for t in 0..C8_VALUES {
        let den = rng.gen_range(1..=C8_DEN_MAX);
        let x = ratio(rng.gen_range(0..den), den);
        let q = &bases[t % bases.len()];
        let d = value_to_digits(q, &x, C8_DIGITS).unwrap();
        let v = digits_to_value(q, &d.digits, SumMode::Exact).unwrap();
        let back = v.partial.value + &d.remainder * &v.tail_bound;
        if back != x || d.remainder >= BigRational::one() {
            bad += 1;
        }
    }

    // e - 2 = sum_{n>=1} 1/(n+1)!, all digits 1 under q_n = n+1.
    let succ = BasicSequence::successor();
    let ones = vec![BigUint::one(); 20];
    let e20 = digits_to_value(&succ, &ones, SumMode::Exact).unwrap();
    let mut tail = BigRational::zero();
    let mut fact = (1..=21u64).fold(BigUint::one(), |a, j| a * j);
    for j in 22..=60u64 {
        fact *= j;
        tail += rational(&BigUint::one(), &fact);
    }
    let e_ok = tail <= e20.tail_bound
        && (rational_to_f64(&(&e20.partial.value + &tail)) - (std::f64::consts::E - 2.0)).abs()
            <= f64::EPSILON;
    let e_digits = value_to_digits(&succ, &(&e20.partial.value + &tail), 20).unwrap();
    let e_digits_ok = e_digits.digits.iter().all(|d| d.is_one());

    let quarter = value_to_digits(&bases[0], &ratio(1, 4), 4).unwrap();
    let q_ok = quarter.digits == [2u32, 5, 0, 0].map(BigUint::from);

    Outcome {
        pass: bad == 0 && e_ok && e_digits_ok && q_ok,
        detail: format!(
            "{C8_VALUES} round trips, {bad} mismatches; e-2 within tail bound={e_ok}, digits all 1={e_digits_ok}; 1/4 -> (2,5,0,0)={q_ok}"
        ),
    }
}

fn main() {
    let c = scaled();
    let pts = checkpoints(&c);
    let (c7_literal, c7_tail) = criterion_7();
    let results = [
        ("1", "count bounds over C_{b,w}", criterion_1()),
        ("2", "normality of C_{b,w}", criterion_2()),
        ("3", "counting oracle equivalence", criterion_3()),
        ("4", "S - Q bounds, scaled instance", criterion_4(&c, &pts)),
        (
            "5",
            "discrepancy envelope and g monotonicity",
            criterion_5(&c, &pts),
        ),
        ("6", "discrepancy trend at L2..L5", criterion_6(&c)),
        (
            "7",
            "canonical W-good ratios and eps', full range",
            c7_literal,
        ),
        ("7t", "canonical W-good ratios and eps', tail", c7_tail),
        ("8", "Cantor conversion round trip", criterion_8()),
    ];
    let mut failed = 0;
    for (id, name, o) in &results {
        println!(
            "criterion {id:<2} {:<4} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
