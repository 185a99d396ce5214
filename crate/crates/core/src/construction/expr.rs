//! Exact rational expressions in one variable `i`, used by schedule rules.
//!
//! Grammar: `+ - * / ^`, parentheses, unary minus, `min(a,b)`, `max(a,b)`,
//! decimal or `p/q`-free integer literals and the variable `i`. `^` is
//! right associative and needs a non-negative integer exponent.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exponents beyond this are refused rather than evaluated.
const MAX_EXPONENT: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(BigInt),
    Var,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Min,
    Max,
}

impl Op {
    fn precedence(self) -> u8 {
        match self {
            Op::Add | Op::Sub => 1,
            Op::Mul | Op::Div => 2,
            Op::Pow => 3,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Div => "/",
            Op::Pow => "^",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut j = 0;
    while j < chars.len() {
        let c = chars[j];
        if c.is_whitespace() {
            j += 1;
        } else if c.is_ascii_digit() {
            let start = j;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[start..j].iter().collect();
            out.push(Tok::Num(text.parse().expect("digits")));
        } else if c.is_ascii_alphabetic() {
            let start = j;
            while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                j += 1;
            }
            out.push(Tok::Ident(chars[start..j].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Sym(c));
            j += 1;
        } else {
            return Err(format!("unexpected character '{c}'"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected '{c}'"))
        }
    }

    fn sum(&mut self) -> Result<Expr, String> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, String> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "i" => Ok(Expr::Var),
                    "min" | "max" => {
                        self.expect('(')?;
                        let a = self.sum()?;
                        self.expect(',')?;
                        let b = self.sum()?;
                        self.expect(')')?;
                        let f = if name == "min" { Func::Min } else { Func::Max };
                        Ok(Expr::Call(f, Box::new(a), Box::new(b)))
                    }
                    _ => Err(format!("unknown name '{name}'")),
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Sym(c)) => Err(format!("unexpected '{c}'")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

impl Expr {
    pub fn parse(s: &str) -> Result<Expr, String> {
        let mut p = Parser {
            toks: tokenize(s)?,
            pos: 0,
        };
        let e = p.sum()?;
        if p.pos != p.toks.len() {
            return Err("trailing input".into());
        }
        Ok(e)
    }

    pub fn eval(&self, i: u64) -> Result<BigRational, String> {
        Ok(match self {
            Expr::Num(v) => BigRational::from_integer(v.clone()),
            Expr::Var => BigRational::from_integer(BigInt::from(i)),
            Expr::Neg(e) => -e.eval(i)?,
            Expr::Call(f, a, b) => {
                let (a, b) = (a.eval(i)?, b.eval(i)?);
                match f {
                    Func::Min => a.min(b),
                    Func::Max => a.max(b),
                }
            }
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(i)?, b.eval(i)?);
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => {
                        if b.is_zero() {
                            return Err("division by zero".into());
                        }
                        a / b
                    }
                    Op::Pow => {
                        if !b.is_integer() || b.is_negative() {
                            return Err(format!("exponent {b} is not a non-negative integer"));
                        }
                        let e = b.to_integer().to_u64().filter(|&e| e <= MAX_EXPONENT);
                        let e = e.ok_or_else(|| format!("exponent {b} is too large"))?;
                        num_traits::pow(a, e as usize)
                    }
                }
            }
        })
    }

    /// Evaluates and requires a non-negative integer.
    pub fn eval_natural(&self, i: u64) -> Result<num_bigint::BigUint, String> {
        let v = self.eval(i)?;
        if !v.is_integer() || v.is_negative() {
            return Err(format!("value {v} is not a non-negative integer"));
        }
        Ok(v.to_integer().to_biguint().expect("non-negative"))
    }

    pub fn eval_u32(&self, i: u64) -> Result<u32, String> {
        let v = self.eval_natural(i)?;
        v.to_u32().ok_or_else(|| format!("value {v} is too large"))
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "i"),
            Expr::Neg(e) if parent >= 4 => {
                write!(f, "(-")?;
                e.fmt_prec(f, 4)?;
                write!(f, ")")
            }
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 4)
            }
            Expr::Call(func, a, b) => {
                write!(f, "{}(", if *func == Func::Min { "min" } else { "max" })?;
                a.fmt_prec(f, 0)?;
                write!(f, ", ")?;
                b.fmt_prec(f, 0)?;
                write!(f, ")")
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                let wrap = p < parent || (p == parent && *op == Op::Pow);
                if wrap {
                    write!(f, "(")?;
                }
                // Left operands bind at the same level for left-associative
                // operators; the right operand must bind tighter.
                let (lp, rp) = if *op == Op::Pow {
                    (p + 1, p)
                } else {
                    (p, p + 1)
                };
                a.fmt_prec(f, lp)?;
                if *op == Op::Pow {
                    write!(f, "^")?;
                } else {
                    write!(f, " {} ", op.symbol())?;
                }
                b.fmt_prec(f, rp)?;
                if wrap {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
