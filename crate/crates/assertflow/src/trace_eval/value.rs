//! Four-state vector values.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
    X,
    Z,
}

impl Bit {
    pub fn is_known(self) -> bool {
        matches!(self, Bit::Zero | Bit::One)
    }

    pub fn from_char(c: char) -> Option<Bit> {
        match c.to_ascii_lowercase() {
            '0' => Some(Bit::Zero),
            '1' => Some(Bit::One),
            'x' => Some(Bit::X),
            'z' => Some(Bit::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Bit::Zero => '0',
            Bit::One => '1',
            Bit::X => 'x',
            Bit::Z => 'z',
        };
        write!(f, "{c}")
    }
}

/// Three-valued boolean (Kleene logic).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    False,
    True,
    Unknown,
}

impl Tri {
    pub fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::True, Tri::True) => Tri::True,
            _ => Tri::Unknown,
        }
    }

    pub fn or(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::True, _) | (_, Tri::True) => Tri::True,
            (Tri::False, Tri::False) => Tri::False,
            _ => Tri::Unknown,
        }
    }

    pub fn not(self) -> Tri {
        match self {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        }
    }

    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }
}

/// Fixed-width 4-state vector; `bits[0]` is the LSB.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Value {
    bits: Vec<Bit>,
}

impl Value {
    pub fn new(bits: Vec<Bit>) -> Self {
        debug_assert!(!bits.is_empty());
        Value { bits }
    }

    pub fn all_x(width: u32) -> Self {
        Value {
            bits: vec![Bit::X; width.max(1) as usize],
        }
    }

    pub fn from_u64(value: u64, width: u32) -> Self {
        let width = width.max(1).min(64);
        let bits = (0..width)
            .map(|i| {
                if (value >> i) & 1 == 1 {
                    Bit::One
                } else {
                    Bit::Zero
                }
            })
            .collect();
        Value { bits }
    }

    pub fn width(&self) -> u32 {
        self.bits.len() as u32
    }

    pub fn bits(&self) -> &[Bit] {
        &self.bits
    }

    /// Bit at position `index` (LSB = 0); out-of-range reads as x.
    pub fn bit(&self, index: u32) -> Bit {
        self.bits.get(index as usize).copied().unwrap_or(Bit::X)
    }

    pub fn lsb(&self) -> Bit {
        self.bits[0]
    }

    pub fn has_unknown(&self) -> bool {
        self.bits.iter().any(|b| !b.is_known())
    }

    /// Unsigned integer interpretation; None if any bit is x/z.
    pub fn to_u64(&self) -> Option<u64> {
        if self.has_unknown() || self.bits.len() > 64 {
            return None;
        }
        let mut v = 0u64;
        for (i, b) in self.bits.iter().enumerate() {
            if *b == Bit::One {
                v |= 1 << i;
            }
        }
        Some(v)
    }

    /// Truthiness: unknown if any bit is x/z, else true iff nonzero.
    pub fn truth(&self) -> Tri {
        if self.has_unknown() {
            Tri::Unknown
        } else {
            Tri::from_bool(self.bits.iter().any(|b| *b == Bit::One))
        }
    }

    /// Zero-extend (or truncate) to `width` bits.
    pub fn resize(&self, width: u32) -> Value {
        let width = width.max(1) as usize;
        let mut bits = self.bits.clone();
        bits.resize(width, Bit::Zero);
        bits.truncate(width);
        Value { bits }
    }

    pub fn slice(&self, msb: u32, lsb: u32) -> Value {
        let bits = (lsb..=msb).map(|i| self.bit(i)).collect();
        Value { bits }
    }

    pub fn bit_not(&self) -> Value {
        let bits = self
            .bits
            .iter()
            .map(|b| match b {
                Bit::Zero => Bit::One,
                Bit::One => Bit::Zero,
                _ => Bit::X,
            })
            .collect();
        Value { bits }
    }

    pub fn bit_and(&self, other: &Value) -> Value {
        self.zip_with(other, |a, b| match (a, b) {
            (Bit::Zero, _) | (_, Bit::Zero) => Bit::Zero,
            (Bit::One, Bit::One) => Bit::One,
            _ => Bit::X,
        })
    }

    pub fn bit_or(&self, other: &Value) -> Value {
        self.zip_with(other, |a, b| match (a, b) {
            (Bit::One, _) | (_, Bit::One) => Bit::One,
            (Bit::Zero, Bit::Zero) => Bit::Zero,
            _ => Bit::X,
        })
    }

    pub fn bit_xor(&self, other: &Value) -> Value {
        self.zip_with(other, |a, b| match (a, b) {
            (Bit::Zero, Bit::Zero) | (Bit::One, Bit::One) => Bit::Zero,
            (Bit::Zero, Bit::One) | (Bit::One, Bit::Zero) => Bit::One,
            _ => Bit::X,
        })
    }

    fn zip_with(&self, other: &Value, f: impl Fn(Bit, Bit) -> Bit) -> Value {
        let width = self.width().max(other.width());
        let a = self.resize(width);
        let b = other.resize(width);
        let bits = a.bits.iter().zip(&b.bits).map(|(&x, &y)| f(x, y)).collect();
        Value { bits }
    }

    /// Exact bitwise sameness (case equality: x matches x, z matches z).
    pub fn case_equal(&self, other: &Value) -> bool {
        let width = self.width().max(other.width());
        self.resize(width).bits == other.resize(width).bits
    }

    /// Logical equality; unknown when either side has x/z.
    pub fn logic_equal(&self, other: &Value) -> Tri {
        if self.has_unknown() || other.has_unknown() {
            return Tri::Unknown;
        }
        Tri::from_bool(self.case_equal(other))
    }

    pub fn count_ones(&self) -> Option<u32> {
        if self.has_unknown() {
            return None;
        }
        Some(self.bits.iter().filter(|b| **b == Bit::One).count() as u32)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits.iter().rev() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truthiness() {
        assert_eq!(Value::from_u64(0, 8).truth(), Tri::False);
        assert_eq!(Value::from_u64(4, 8).truth(), Tri::True);
        assert_eq!(Value::all_x(1).truth(), Tri::Unknown);
    }

    #[test]
    fn comparisons_with_x_are_unknown() {
        let a = Value::new(vec![Bit::One, Bit::X]);
        let b = Value::from_u64(1, 2);
        assert_eq!(a.logic_equal(&b), Tri::Unknown);
        assert_eq!(b.logic_equal(&Value::from_u64(1, 8)), Tri::True);
    }

    #[test]
    fn bitwise_dominance() {
        let x = Value::new(vec![Bit::X]);
        let one = Value::from_u64(1, 1);
        let zero = Value::from_u64(0, 1);
        assert_eq!(x.bit_and(&zero), zero);
        assert_eq!(x.bit_or(&one), one);
        assert_eq!(x.bit_xor(&one).bit(0), Bit::X);
    }

    #[test]
    fn slicing() {
        let v = Value::from_u64(0b1010, 4);
        assert_eq!(v.bit(1), Bit::One);
        assert_eq!(v.slice(3, 2).to_u64(), Some(0b10));
        assert_eq!(v.bit(9), Bit::X);
    }
}
