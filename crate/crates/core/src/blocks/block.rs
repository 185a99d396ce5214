use std::fmt;

use crate::{Error, Result};

/// Digits stored at the narrowest width that holds `base - 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
enum DigitBuf {
    U8(Vec<u8>),
    U16(Vec<u16>),
    U32(Vec<u32>),
}

impl DigitBuf {
    fn pack(base: u32, digits: &[u32]) -> Self {
        if base <= 1 << 8 {
            DigitBuf::U8(digits.iter().map(|&d| d as u8).collect())
        } else if base <= 1 << 16 {
            DigitBuf::U16(digits.iter().map(|&d| d as u16).collect())
        } else {
            DigitBuf::U32(digits.to_vec())
        }
    }

    fn len(&self) -> usize {
        match self {
            DigitBuf::U8(v) => v.len(),
            DigitBuf::U16(v) => v.len(),
            DigitBuf::U32(v) => v.len(),
        }
    }

    fn get(&self, i: usize) -> u32 {
        match self {
            DigitBuf::U8(v) => u32::from(v[i]),
            DigitBuf::U16(v) => u32::from(v[i]),
            DigitBuf::U32(v) => v[i],
        }
    }
}

/// A non-empty string of digits in a declared base.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Block {
    base: u32,
    digits: DigitBuf,
}

/// Builds a block, validating every digit against `base`.
pub fn make_block(base: u32, digits: &[u32]) -> Result<Block> {
    Block::new(base, digits)
}

impl Block {
    pub fn new(base: u32, digits: &[u32]) -> Result<Self> {
        if base < 2 {
            return Err(Error::BadBase(u64::from(base)));
        }
        if digits.is_empty() {
            return Err(Error::EmptyBlock);
        }
        if let Some((position, &digit)) = digits.iter().enumerate().find(|(_, &d)| d >= base) {
            return Err(Error::DigitOutOfRange {
                digit: u64::from(digit),
                position: position + 1,
                base: u64::from(base),
            });
        }
        Ok(Block {
            base,
            digits: DigitBuf::pack(base, digits),
        })
    }

    /// Smallest base the digits fit in (at least 2).
    pub fn minimal_base(digits: &[u32]) -> u32 {
        digits.iter().copied().max().map_or(2, |m| (m + 1).max(2))
    }

    /// Parses digits separated by `:` (or a single digit), e.g. `0:1:1`.
    pub fn parse(base: u32, s: &str) -> Result<Self> {
        let digits = s
            .split(':')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Precondition(format!("bad digit '{t}' in block '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Block::new(base, &digits)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Digit at 0-based index `i`.
    pub fn get(&self, i: usize) -> u32 {
        self.digits.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }

    /// Same digits, re-declared in a larger base.
    pub fn with_base(&self, base: u32) -> Result<Self> {
        Block::new(base, &self.to_vec())
    }

    /// Colon-separated digits, the inverse of [`Block::parse`].
    pub fn to_token(&self) -> String {
        self.iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(":")
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Block[{}]{}", self.base, self)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, d) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_validation() {
        let b = make_block(10, &[2, 5]).unwrap();
        assert_eq!(b.base(), 10);
        assert_eq!(b.len(), 2);
        assert_eq!(b.to_vec(), vec![2, 5]);
        assert_eq!(
            make_block(3, &[0, 3]),
            Err(Error::DigitOutOfRange {
                digit: 3,
                position: 2,
                base: 3
            })
        );
        assert_eq!(make_block(2, &[]), Err(Error::EmptyBlock));
        assert_eq!(make_block(1, &[0]), Err(Error::BadBase(1)));
    }

    #[test]
    fn wide_digits() {
        let b = make_block(70_000, &[0, 69_999, 300]).unwrap();
        assert_eq!(b.to_vec(), vec![0, 69_999, 300]);
        let b = make_block(1000, &[999, 256]).unwrap();
        assert_eq!(b.get(0), 999);
    }

    #[test]
    fn parse_and_display() {
        let b = Block::parse(3, "0:2:1").unwrap();
        assert_eq!(b.to_string(), "(0,2,1)");
        assert_eq!(b.to_token(), "0:2:1");
        assert!(Block::parse(2, "0:2").is_err());
        assert_eq!(Block::minimal_base(&[0, 0]), 2);
        assert_eq!(Block::minimal_base(&[4, 1]), 5);
    }
}
