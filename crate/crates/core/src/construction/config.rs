//! Flat `key = value` schedule files.
//!
//! ```text
//! # comment
//! name = thm4.1
//! x-rule = champernowne(i, i^2)
//! b-rule = i
//! p-rule = i
//! l-rule = i^(3*i)
//! eps-rule = 1/i
//! k-rule = i
//! k-limit = inf
//! i-cap = 12
//! x1 = 0:1
//! b1 = 2
//! p1 = 2
//! l1 = 0
//! eps1 = 3/5
//! k1 = 1
//! ```
//!
//! Rules give index `i` values; the `*1` keys override index 1. Every
//! `mu_i` is the uniform weighting in base `b_i`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;

use super::expr::Expr;
use super::Construction;
use crate::bff::{BffSpec, BffTuple, GoodSequence, KLimit};
use crate::blocks::{Block, Champernowne, Segment};
use crate::numeric::{format_rational, parse_rational};
use crate::weightings::uniform;
use crate::{Error, Result};

const CANONICAL: &str = "\
# Canonical parameters: x_i = C(i, i^2), b_i = i, l_i = i^(3i).
name = thm4.1
x-rule = champernowne(i, i^2)
b-rule = i
p-rule = i
l-rule = i^(3*i)
eps-rule = 1/i
k-rule = i
k-limit = inf
i-cap = 12
x1 = 0:1
b1 = 2
p1 = 2
l1 = 0
eps1 = 3/5
k1 = 1
";

const SCALED: &str = "\
# Desk-scale variant: l_i = i^3, x_i = C(i, 2i), k_i = 3.
name = thm4.1-scaled
x-rule = champernowne(i, 2*i)
b-rule = i
p-rule = i
l-rule = i^3
eps-rule = 3/(2*i)
k-rule = 3
k-limit = 3
i-cap = 5
x1 = 0:1
b1 = 2
p1 = 2
l1 = 0
eps1 = 7/8
k1 = 1
";

pub fn builtin_names() -> &'static [&'static str] {
    &["thm4.1", "thm4.1-scaled"]
}

/// Source text of a built-in schedule.
pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "thm4.1" => Some(CANONICAL),
        "thm4.1-scaled" => Some(SCALED),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Keyed<T> {
    value: T,
    line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleConfig {
    name: Keyed<String>,
    x_rule: Keyed<(Expr, Expr)>,
    b_rule: Keyed<Expr>,
    p_rule: Keyed<Expr>,
    l_rule: Keyed<Expr>,
    eps_rule: Keyed<Expr>,
    k_rule: Keyed<Expr>,
    k_limit: Keyed<KLimit>,
    i_cap: Keyed<u64>,
    x1: Option<Keyed<Block>>,
    b1: Option<Keyed<u32>>,
    p1: Option<Keyed<u32>>,
    l1: Option<Keyed<BigUint>>,
    eps1: Option<Keyed<BigRational>>,
    k1: Option<Keyed<u32>>,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn parse_x_rule(v: &str) -> std::result::Result<(Expr, Expr), String> {
    let inner = v
        .strip_prefix("champernowne(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or("expected champernowne(base, width)")?;
    // Split at the top-level comma.
    let mut depth = 0i32;
    for (j, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                return Ok((Expr::parse(&inner[..j])?, Expr::parse(&inner[j + 1..])?));
            }
            _ => {}
        }
    }
    Err("expected champernowne(base, width)".into())
}

fn parse_x1(v: &str) -> Result<Block> {
    let digits: Vec<u32> = v
        .split(':')
        .map(|d| {
            d.trim()
                .parse::<u32>()
                .map_err(|e| Error::Precondition(e.to_string()))
        })
        .collect::<Result<_>>()?;
    Block::new(Block::minimal_base(&digits), &digits)
}

impl FromStr for ScheduleConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut raw: BTreeMap<String, (String, usize)> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| config_err(lineno, "expected 'key = value'"))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if raw.insert(k.clone(), (v, lineno)).is_some() {
                return Err(config_err(lineno, format!("duplicate key '{k}'")));
            }
        }
        const KEYS: [&str; 15] = [
            "name", "x-rule", "b-rule", "p-rule", "l-rule", "eps-rule", "k-rule", "k-limit",
            "i-cap", "x1", "b1", "p1", "l1", "eps1", "k1",
        ];
        if let Some((k, (_, line))) = raw.iter().find(|(k, _)| !KEYS.contains(&k.as_str())) {
            return Err(config_err(*line, format!("unknown key '{k}'")));
        }
        let last_line = text.lines().count().max(1);
        let required = |key: &str| -> Result<(String, usize)> {
            raw.get(key)
                .cloned()
                .ok_or_else(|| config_err(last_line, format!("missing key '{key}'")))
        };
        let expr = |key: &str| -> Result<Keyed<Expr>> {
            let (v, line) = required(key)?;
            let value = Expr::parse(&v).map_err(|e| config_err(line, format!("{key}: {e}")))?;
            Ok(Keyed { value, line })
        };
        fn optional<T>(
            raw: &BTreeMap<String, (String, usize)>,
            key: &str,
            parse: impl Fn(&str) -> std::result::Result<T, String>,
        ) -> Result<Option<Keyed<T>>> {
            raw.get(key)
                .map(|(v, line)| {
                    parse(v)
                        .map(|value| Keyed { value, line: *line })
                        .map_err(|e| config_err(*line, format!("{key}: {e}")))
                })
                .transpose()
        }
        let int = |v: &str| v.parse::<u32>().map_err(|e| e.to_string());

        let (name, name_line) = required("name")?;
        let (xr, xr_line) = required("x-rule")?;
        let x_rule = parse_x_rule(&xr).map_err(|e| config_err(xr_line, format!("x-rule: {e}")))?;
        let (kl, kl_line) = required("k-limit")?;
        let k_limit = match kl.as_str() {
            "inf" => KLimit::Infinite,
            v => KLimit::Finite(
                v.parse()
                    .map_err(|_| config_err(kl_line, "k-limit: expected 'inf' or an integer"))?,
            ),
        };
        let (cap, cap_line) = required("i-cap")?;
        let i_cap: u64 = cap
            .parse()
            .ok()
            .filter(|&c| c >= 2)
            .ok_or_else(|| config_err(cap_line, "i-cap: expected an integer >= 2"))?;

        Ok(ScheduleConfig {
            name: Keyed {
                value: name,
                line: name_line,
            },
            x_rule: Keyed {
                value: x_rule,
                line: xr_line,
            },
            b_rule: expr("b-rule")?,
            p_rule: expr("p-rule")?,
            l_rule: expr("l-rule")?,
            eps_rule: expr("eps-rule")?,
            k_rule: expr("k-rule")?,
            k_limit: Keyed {
                value: k_limit,
                line: kl_line,
            },
            i_cap: Keyed {
                value: i_cap,
                line: cap_line,
            },
            x1: optional(&raw, "x1", |v| parse_x1(v).map_err(|e| e.to_string()))?,
            b1: optional(&raw, "b1", int)?,
            p1: optional(&raw, "p1", int)?,
            l1: optional(&raw, "l1", |v| {
                v.parse::<BigUint>().map_err(|e| e.to_string())
            })?,
            eps1: optional(&raw, "eps1", |v| {
                parse_rational(v).map_err(|e| e.to_string())
            })?,
            k1: optional(&raw, "k1", int)?,
        })
    }
}

impl fmt::Display for ScheduleConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name = {}", self.name.value)?;
        writeln!(
            f,
            "x-rule = champernowne({}, {})",
            self.x_rule.value.0, self.x_rule.value.1
        )?;
        writeln!(f, "b-rule = {}", self.b_rule.value)?;
        writeln!(f, "p-rule = {}", self.p_rule.value)?;
        writeln!(f, "l-rule = {}", self.l_rule.value)?;
        writeln!(f, "eps-rule = {}", self.eps_rule.value)?;
        writeln!(f, "k-rule = {}", self.k_rule.value)?;
        match self.k_limit.value {
            KLimit::Infinite => writeln!(f, "k-limit = inf")?,
            KLimit::Finite(k) => writeln!(f, "k-limit = {k}")?,
        }
        writeln!(f, "i-cap = {}", self.i_cap.value)?;
        if let Some(x1) = &self.x1 {
            writeln!(f, "x1 = {}", x1.value.to_token())?;
        }
        if let Some(v) = &self.b1 {
            writeln!(f, "b1 = {}", v.value)?;
        }
        if let Some(v) = &self.p1 {
            writeln!(f, "p1 = {}", v.value)?;
        }
        if let Some(v) = &self.l1 {
            writeln!(f, "l1 = {}", v.value)?;
        }
        if let Some(v) = &self.eps1 {
            writeln!(f, "eps1 = {}", format_rational(&v.value))?;
        }
        if let Some(v) = &self.k1 {
            writeln!(f, "k1 = {}", v.value)?;
        }
        Ok(())
    }
}

impl ScheduleConfig {
    pub fn builtin(name: &str) -> Result<Self> {
        builtin(name)
            .ok_or_else(|| Error::Precondition(format!("unknown schedule '{name}'")))?
            .parse()
    }

    pub fn name(&self) -> &str {
        &self.name.value
    }

    pub fn i_cap(&self) -> u64 {
        self.i_cap.value
    }

    pub fn set_i_cap(&mut self, i_cap: u64) {
        self.i_cap.value = i_cap;
    }

    pub fn bff(&self) -> BffSpec {
        let cfg = self.clone();
        BffSpec::new(&self.name.value, self.k_limit.value, move |i| cfg.tuple(i))
    }

    fn tuple(&self, i: u64) -> Result<BffTuple> {
        let at = |rule: &Keyed<Expr>, what: &str| -> Result<BigRational> {
            rule.value
                .eval(i)
                .map_err(|e| config_err(rule.line, format!("{what} at i = {i}: {e}")))
        };
        let nat = |rule: &Keyed<Expr>, what: &str| -> Result<BigUint> {
            rule.value
                .eval_natural(i)
                .map_err(|e| config_err(rule.line, format!("{what} at i = {i}: {e}")))
        };
        let small = |rule: &Keyed<Expr>, what: &str| -> Result<u32> {
            rule.value
                .eval_u32(i)
                .map_err(|e| config_err(rule.line, format!("{what} at i = {i}: {e}")))
        };
        let first = i == 1;
        let b = match (&self.b1, first) {
            (Some(v), true) => v.value,
            _ => small(&self.b_rule, "b-rule")?,
        };
        let p = match (&self.p1, first) {
            (Some(v), true) => v.value,
            _ => small(&self.p_rule, "p-rule")?,
        };
        let l = match (&self.l1, first) {
            (Some(v), true) => v.value.clone(),
            _ => nat(&self.l_rule, "l-rule")?,
        };
        let eps = match (&self.eps1, first) {
            (Some(v), true) => v.value.clone(),
            _ => at(&self.eps_rule, "eps-rule")?,
        };
        let k = match (&self.k1, first) {
            (Some(v), true) => v.value,
            _ => small(&self.k_rule, "k-rule")?,
        };
        let mu = uniform(b).map_err(|e| config_err(self.b_rule.line, e.to_string()))?;
        Ok(BffTuple {
            l,
            b,
            p,
            eps,
            k,
            mu,
        })
    }

    pub fn good_sequence(&self) -> GoodSequence {
        let cfg = self.clone();
        GoodSequence::new(&self.name.value, move |i| cfg.block(i))
    }

    fn block(&self, i: u64) -> Result<Segment> {
        if let (Some(x1), 1) = (&self.x1, i) {
            return Ok(x1.value.clone().into());
        }
        let line = self.x_rule.line;
        let (be, we) = &self.x_rule.value;
        let b = be
            .eval_u32(i)
            .map_err(|e| config_err(line, format!("x-rule base at i = {i}: {e}")))?;
        let w = we
            .eval_u32(i)
            .map_err(|e| config_err(line, format!("x-rule width at i = {i}: {e}")))?;
        Champernowne::new(b, w)
            .map(Segment::from)
            .map_err(|e| config_err(line, format!("x-rule at i = {i}: {e}")))
    }

    pub fn build(&self) -> Result<Construction> {
        Construction::new(self.bff(), self.good_sequence(), self.i_cap.value)
    }
}
