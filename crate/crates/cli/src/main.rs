use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use qnormal::analysis::{
    check_lemma_2_5, cumulative_checkpoints, discrepancy_sweep, epsilon_prime_trend,
    lemma_2_3_sweep, verify_champernowne_lemmas, GridSpec,
};
use qnormal::bff::check_w_good;
use qnormal::blocks::Block;
use qnormal::cantor::{digits_to_value, value_to_digits, BasicSequence, SumMode};
use qnormal::construction::{
    builtin, theorem_4_1_instance, Construction, ScaleOverrides, ScheduleConfig,
};
use qnormal::numeric::{format_rational, parse_rational};
use qnormal::weightings::all_blocks;
use qnormal::{Error, EvalBudget};

const DIGITS_PER_LINE: usize = 64;

/// Digit streams, discrepancy sweeps and verification runs for normal
/// numbers in Cantor series expansions.
#[derive(Parser)]
#[command(name = "qnormal", version)]
struct Cli {
    /// Worker threads (default: available cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a window of the constructed digit stream.
    Digits {
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// First position, 1-based.
        #[arg(long, default_value = "1")]
        from: BigUint,
        #[arg(long, default_value_t = 64)]
        count: usize,
    },
    /// CSV of |N/Q - 1| against the envelope at each checkpoint and block.
    Discrepancy {
        #[command(flatten)]
        schedule: ScheduleArgs,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Comma-separated blocks with digits joined by ':', e.g. "0:1,1:1".
        /// Defaults to every base-2 block of length k.
        #[arg(long)]
        blocks: Option<String>,
        /// Comma-separated positions. Defaults to L_2, ..., L_{i-cap}.
        #[arg(long)]
        checkpoints: Option<String>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run verification suites and print `suite,cases,passes,failures`.
    Verify {
        #[command(flatten)]
        schedule: ScheduleArgs,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 3)]
        bmax: u32,
        #[arg(long, default_value_t = 6)]
        wmax: u32,
        /// Largest index examined by the schedule suites.
        #[arg(long, default_value_t = 8)]
        imax: u64,
        /// Block length; every k in 1..=3 inside the range set when omitted.
        #[arg(long)]
        k: Option<u32>,
        /// Work limit for brute-force evaluations.
        #[arg(long, default_value_t = EvalBudget::default().0)]
        budget: u64,
    },
    /// Convert between a rational value and its Cantor digits.
    Convert {
        /// Basic sequence: `const:B`, `succ` (q_n = n+1) or `list:q1,q2,...`.
        #[arg(long)]
        q: String,
        /// Value `p/q` in [0,1) to expand.
        #[arg(long, conflicts_with = "digits", required_unless_present = "digits")]
        value: Option<String>,
        /// Digits to evaluate, separated by spaces or commas.
        #[arg(long)]
        digits: Option<String>,
        /// Number of digits to produce.
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Fixed-point fractional bits when evaluating digits; exact if omitted.
        #[arg(long)]
        precision: Option<u32>,
    },
}

#[derive(Args)]
struct ScheduleArgs {
    /// Built-in schedule name or path to a schedule file.
    #[arg(long, default_value = "thm4.1")]
    schedule: String,
    /// Override the schedule's i-cap.
    #[arg(long)]
    i_cap: Option<u64>,
    /// Use the scaled instance with l_i = i^L (replaces --schedule).
    #[arg(long)]
    l_power: Option<u32>,
    /// Scaled instance: x_i = C(i, WIDTH_MULT * i).
    #[arg(long)]
    width_mult: Option<u32>,
    /// Scaled instance: k_i.
    #[arg(long)]
    scale_k: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Champernowne,
    Wgood,
    Lemma23,
    Lemma25,
    Epsprime,
    All,
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

impl ScheduleArgs {
    fn scaled(&self) -> Option<ScaleOverrides> {
        if self.l_power.is_none() && self.width_mult.is_none() && self.scale_k.is_none() {
            return None;
        }
        let d = ScaleOverrides::default();
        Some(ScaleOverrides {
            l_power: self.l_power.unwrap_or(d.l_power),
            width_mult: self.width_mult.unwrap_or(d.width_mult),
            k: self.scale_k.unwrap_or(d.k),
        })
    }

    fn config(&self) -> Result<ScheduleConfig, Failure> {
        let mut cfg = if builtin(&self.schedule).is_some() {
            ScheduleConfig::builtin(&self.schedule)?
        } else {
            let text = std::fs::read_to_string(&self.schedule)
                .map_err(|e| Failure::Usage(format!("schedule '{}': {e}", self.schedule)))?;
            text.parse()?
        };
        if let Some(cap) = self.i_cap {
            cfg.set_i_cap(cap);
        }
        Ok(cfg)
    }

    fn build(&self, min_cap: u64) -> Result<Construction, Failure> {
        if let Some(scale) = self.scaled() {
            return Ok(theorem_4_1_instance(
                self.i_cap.unwrap_or(5).max(min_cap),
                Some(scale),
            )?);
        }
        let mut cfg = self.config()?;
        if cfg.i_cap() < min_cap {
            cfg.set_i_cap(min_cap);
        }
        Ok(cfg.build()?)
    }
}

fn parse_blocks(s: &str) -> Result<Vec<Block>, Failure> {
    s.split(',')
        .map(|tok| {
            let digits = Block::parse(u32::MAX, tok)?.to_vec();
            Ok(Block::new(Block::minimal_base(&digits), &digits)?)
        })
        .collect()
}

fn parse_checkpoints(s: &str) -> Result<Vec<BigUint>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<BigUint>()
                .map_err(|_| Failure::Usage(format!("bad checkpoint '{t}'")))
        })
        .collect()
}

fn parse_basic_sequence(s: &str) -> Result<BasicSequence, Failure> {
    let bad = || {
        Failure::Usage(format!(
            "bad basic sequence '{s}' (want const:B, succ or list:q1,q2,...)"
        ))
    };
    if s == "succ" {
        return Ok(BasicSequence::successor());
    }
    if let Some(b) = s.strip_prefix("const:") {
        return Ok(BasicSequence::constant(
            b.trim().parse().map_err(|_| bad())?,
        )?);
    }
    if let Some(list) = s.strip_prefix("list:") {
        let q = list
            .split(',')
            .map(|t| t.trim().parse::<BigUint>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(BasicSequence::explicit(q)?);
    }
    Err(bad())
}

fn cmd_digits(schedule: &ScheduleArgs, from: &BigUint, count: usize) -> Outcome {
    if from == &BigUint::from(0u32) {
        return Err(Failure::Usage(
            "positions are 1-based; --from must be at least 1".into(),
        ));
    }
    if count == 0 {
        return Ok(());
    }
    let c = schedule.build(0)?;
    let digits = c.digit_stream(from, count)?;
    let mut out = BufWriter::new(io::stdout().lock());
    for line in digits.chunks(DIGITS_PER_LINE) {
        let tokens: Vec<String> = line.iter().map(u32::to_string).collect();
        writeln!(out, "{}", tokens.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_discrepancy(
    schedule: &ScheduleArgs,
    k: u32,
    blocks: Option<&str>,
    checkpoints: Option<&str>,
    output: Option<&PathBuf>,
) -> Outcome {
    let c = schedule.build(0)?;
    c.range_set().require(k)?;
    let patterns = match blocks {
        Some(s) => parse_blocks(s)?,
        None => all_blocks(2, k as usize)
            .map(|d| Block::new(2, &d))
            .collect::<Result<_, _>>()?,
    };
    let pts = match checkpoints {
        Some(s) => parse_checkpoints(s)?,
        None => cumulative_checkpoints(&c, 2, c.i_cap())?,
    };
    let report = discrepancy_sweep(&c, &patterns, k, &pts)?;
    match output {
        Some(path) => report.write_csv(File::create(path)?)?,
        None => report.write_csv(io::stdout().lock())?,
    }
    let failures = report.failures();
    if failures.is_empty() {
        return Ok(());
    }
    let listed: Vec<String> = failures
        .iter()
        .map(|r| format!("n={} block={}", r.n, r.block.to_token()))
        .collect();
    Err(Failure::Verification(format!(
        "{} rows exceed the envelope: {}",
        failures.len(),
        listed.join("; ")
    )))
}

struct Tally {
    suite: &'static str,
    cases: u64,
    passes: u64,
}

impl Tally {
    fn new(suite: &'static str) -> Self {
        Tally {
            suite,
            cases: 0,
            passes: 0,
        }
    }

    fn record(&mut self, ok: bool) {
        self.cases += 1;
        self.passes += u64::from(ok);
    }
}

fn ks(c: &Construction, k: Option<u32>) -> Result<Vec<u32>, Failure> {
    match k {
        Some(k) => {
            c.range_set().require(k)?;
            Ok(vec![k])
        }
        None => Ok((1..=3).filter(|&k| c.range_set().contains(k)).collect()),
    }
}

fn run_suite(
    suite: Suite,
    schedule: &ScheduleArgs,
    bmax: u32,
    wmax: u32,
    imax: u64,
    k: Option<u32>,
    budget: EvalBudget,
) -> Result<Tally, Failure> {
    match suite {
        Suite::Champernowne => {
            let r = verify_champernowne_lemmas(bmax, wmax, budget)?;
            let mut t = Tally::new("champernowne");
            for part in [&r.count_bounds, &r.foreign_digits, &r.normality] {
                t.cases += part.cases;
                t.passes += part.passes;
            }
            Ok(t)
        }
        Suite::Wgood => {
            let c = schedule.build(imax)?;
            let mut t = Tally::new("wgood");
            for k in ks(&c, k)? {
                let r = check_w_good(c.bff(), c.good_sequence(), imax, k)?;
                for trend in [r.r1, r.r2, r.r3] {
                    t.record(trend.tail);
                }
            }
            Ok(t)
        }
        Suite::Lemma23 => {
            let c = schedule.build(imax)?;
            let limit = c.analysis_limit().clone();
            let mut pts = Vec::new();
            for i in 1..=imax {
                let l = c.cumulative_length(i)?;
                for n in [l.clone(), l + 1u32] {
                    if n > BigUint::from(0u32) && n < limit {
                        pts.push(n);
                    }
                }
            }
            pts.sort();
            pts.dedup();
            let mut t = Tally::new("lemma23");
            for k in ks(&c, k)? {
                let r = lemma_2_3_sweep(&c, k, &pts)?;
                for row in &r.rows {
                    t.record(row.pass());
                }
                t.record(r.monotone);
            }
            Ok(t)
        }
        Suite::Lemma25 => {
            let c = schedule.build(imax)?;
            let mut t = Tally::new("lemma25");
            for k in ks(&c, k)? {
                for i in 2..=imax {
                    if let Some(ok) = check_lemma_2_5(&c, i, k, GridSpec::default())?.pass() {
                        t.record(ok);
                    }
                }
            }
            Ok(t)
        }
        Suite::Epsprime => {
            let c = schedule.build(imax)?;
            let mut t = Tally::new("epsprime");
            for k in ks(&c, k)? {
                let r = epsilon_prime_trend(&c, k, 2, imax)?;
                t.record(r.trend.tail);
                t.record(r.boundary_bound_holds);
            }
            Ok(t)
        }
        Suite::All => unreachable!("expanded by the caller"),
    }
}

fn cmd_verify(
    schedule: &ScheduleArgs,
    suite: Suite,
    bmax: u32,
    wmax: u32,
    imax: u64,
    k: Option<u32>,
    budget: EvalBudget,
) -> Outcome {
    let suites = match suite {
        Suite::All => vec![
            Suite::Champernowne,
            Suite::Wgood,
            Suite::Lemma23,
            Suite::Lemma25,
            Suite::Epsprime,
        ],
        s => vec![s],
    };
    let tallies = suites
        .into_iter()
        .map(|s| run_suite(s, schedule, bmax, wmax, imax, k, budget))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = io::stdout().lock();
    writeln!(out, "suite,cases,passes,failures")?;
    for t in &tallies {
        writeln!(
            out,
            "{},{},{},{}",
            t.suite,
            t.cases,
            t.passes,
            t.cases - t.passes
        )?;
    }
    let failed: Vec<&str> = tallies
        .iter()
        .filter(|t| t.passes < t.cases)
        .map(|t| t.suite)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "failing suites: {}",
            failed.join(", ")
        )))
    }
}

fn cmd_convert(
    q: &str,
    value: Option<&str>,
    digits: Option<&str>,
    n: usize,
    precision: Option<u32>,
) -> Outcome {
    let q = parse_basic_sequence(q)?;
    let mut out = io::stdout().lock();
    if let Some(v) = value {
        let x = parse_rational(v)?;
        let d = value_to_digits(&q, &x, n)?;
        let tokens: Vec<String> = d.digits.iter().map(BigUint::to_string).collect();
        writeln!(out, "{}", tokens.join(" "))?;
        return Ok(());
    }
    let digits = digits
        .unwrap_or_default()
        .split(|ch: char| ch == ',' || ch.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<BigUint>()
                .map_err(|_| Failure::Usage(format!("bad digit '{t}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mode = precision.map_or(SumMode::Exact, |bits| SumMode::Fixed { bits });
    let v = digits_to_value(&q, &digits, mode)?;
    writeln!(out, "value {}", format_rational(&v.partial.value))?;
    writeln!(
        out,
        "error_bound {}",
        format_rational(&v.partial.error_bound)
    )?;
    writeln!(out, "tail_bound {}", format_rational(&v.tail_bound))?;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Digits {
            schedule,
            from,
            count,
        } => cmd_digits(schedule, from, *count),
        Command::Discrepancy {
            schedule,
            k,
            blocks,
            checkpoints,
            output,
        } => cmd_discrepancy(
            schedule,
            *k,
            blocks.as_deref(),
            checkpoints.as_deref(),
            output.as_ref(),
        ),
        Command::Verify {
            schedule,
            suite,
            bmax,
            wmax,
            imax,
            k,
            budget,
        } => cmd_verify(
            schedule,
            *suite,
            *bmax,
            *wmax,
            *imax,
            *k,
            EvalBudget(*budget),
        ),
        Command::Convert {
            q,
            value,
            digits,
            n,
            precision,
        } => cmd_convert(q, value.as_deref(), digits.as_deref(), *n, *precision),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
