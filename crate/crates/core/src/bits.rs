//! Bit strings used for certificates, messages and node labels.
//!
//! Every certificate and message in the simulator is a [`Bits`] value so
//! that certificate size and message size are measured exactly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Number of bits needed to write any value of `[0, m)`. `ceil_log2(1) == 0`.
pub fn ceil_log2(m: u64) -> usize {
    if m <= 1 {
        0
    } else {
        (64 - (m - 1).leading_zeros()) as usize
    }
}

/// Number of bits needed to write any value of `[0, max]`.
pub fn width_for(max: u64) -> usize {
    if max == u64::MAX {
        64
    } else {
        ceil_log2(max + 1)
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    /// Big-endian encoding of `value` on exactly `width` bits.
    ///
    /// Panics if `value` does not fit, since every caller sizes its fields
    /// from a known bound.
    pub fn from_uint(value: u64, width: usize) -> Self {
        let mut b = Bits::new();
        b.push_uint(value, width);
        b
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn push_uint(&mut self, value: u64, width: usize) {
        assert!(
            width >= 64 || value >> width == 0,
            "value {value} does not fit in {width} bits"
        );
        for i in (0..width).rev() {
            self.0.push(i < 64 && (value >> i) & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Bits>) -> Bits {
        let mut out = Bits::new();
        for p in parts {
            out.extend(p);
        }
        out
    }

    /// Interprets the whole string as a big-endian unsigned integer.
    pub fn to_uint(&self) -> Option<u64> {
        if self.len() > 64 {
            return None;
        }
        Some(self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: &self.0, pos: 0 }
    }

    /// `"<len>:<bits>"`, the length-prefixed wire form.
    pub fn to_length_prefixed(&self) -> String {
        format!("{}:{}", self.len(), self)
    }

    pub fn from_length_prefixed(s: &str) -> Result<Bits, ParseBitsError> {
        let (len, body) = s.split_once(':').ok_or(ParseBitsError)?;
        let len: usize = len.parse().map_err(|_| ParseBitsError)?;
        let bits: Bits = body.parse()?;
        if bits.len() != len {
            return Err(ParseBitsError);
        }
        Ok(bits)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("malformed bit string")]
pub struct ParseBitsError;

impl FromStr for Bits {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseBitsError),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits)
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sequential decoder over a [`Bits`] value. Every read returns `None` once
/// the input is exhausted, which verifiers treat as a malformed certificate.
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn read_bool(&mut self) -> Option<bool> {
        let b = *self.bits.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }

    pub fn read_uint(&mut self, width: usize) -> Option<u64> {
        if width > 64 || self.remaining() < width {
            return None;
        }
        let mut v = 0u64;
        for &b in &self.bits[self.pos..self.pos + width] {
            v = (v << 1) | b as u64;
        }
        self.pos += width;
        Some(v)
    }

    pub fn read_bits(&mut self, len: usize) -> Option<Bits> {
        if self.remaining() < len {
            return None;
        }
        let out = Bits(self.bits[self.pos..self.pos + len].to_vec());
        self.pos += len;
        Some(out)
    }

    pub fn rest(&mut self) -> Bits {
        let out = Bits(self.bits[self.pos..].to_vec());
        self.pos = self.bits.len();
        out
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn is_done(&self) -> bool {
        self.pos == self.bits.len()
    }
}
