//! Plain bit vectors used for messages, input words and codewords.

use std::fmt;
use std::ops::{BitXor, Deref, Index};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::PolarError;

/// A sequence of bits stored one per byte (each entry is 0 or 1).
///
/// Serializes as a string of `0`/`1` characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector(vec![0; len])
    }

    /// Builds a vector from arbitrary bytes, keeping only the least significant bit.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        BitVector(bits.into_iter().map(|b| b & 1).collect())
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        BitVector(bits.iter().map(|&b| b as u8).collect())
    }

    /// Bits of each byte, most significant bit first.
    pub fn from_bytes_msb(bytes: &[u8]) -> Self {
        BitVector(
            bytes
                .iter()
                .flat_map(|&byte| (0..8).rev().map(move |s| (byte >> s) & 1))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn set(&mut self, index: usize, bit: u8) {
        self.0[index] = bit & 1;
    }

    /// Number of positions in which the two vectors differ (over the common prefix).
    pub fn hamming_distance(&self, other: &BitVector) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        BitVector(bits)
    }
}

impl From<Vec<u8>> for BitVector {
    fn from(bits: Vec<u8>) -> Self {
        BitVector::from_bits(bits)
    }
}

impl From<&[u8]> for BitVector {
    fn from(bits: &[u8]) -> Self {
        BitVector::from_bits(bits.iter().copied())
    }
}

impl Deref for BitVector {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl Index<usize> for BitVector {
    type Output = u8;

    fn index(&self, index: usize) -> &u8 {
        &self.0[index]
    }
}

impl BitXor for &BitVector {
    type Output = BitVector;

    fn bitxor(self, rhs: &BitVector) -> BitVector {
        assert_eq!(self.len(), rhs.len(), "xor of unequal-length bit vectors");
        BitVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a ^ b).collect())
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(PolarError::InvalidBits(format!(
                    "unexpected character {other:?} at position {i}"
                ))),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(BitVector)
    }
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
