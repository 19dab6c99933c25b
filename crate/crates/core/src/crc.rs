//! Bit-serial cyclic redundancy checks over bit vectors.

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{PolarError, Result};

/// A non-reflected CRC with zero output xor.
///
/// The register is shifted MSB-first, one payload bit at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrcConfig {
    pub width: u32,
    pub poly: u32,
    pub init: u32,
}

impl CrcConfig {
    /// CRC-16 with polynomial 0x1021 and init 0xFFFF (CCITT-FALSE).
    pub const CRC16: CrcConfig = CrcConfig {
        width: 16,
        poly: 0x1021,
        init: 0xFFFF,
    };

    pub fn new(width: u32, poly: u32, init: u32) -> Result<Self> {
        let cfg = CrcConfig { width, poly, init };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.width > 32 {
            return Err(PolarError::InvalidCrc(format!(
                "width {} not in 1..=32",
                self.width
            )));
        }
        if self.width < 32 && (self.poly >> self.width != 0 || self.init >> self.width != 0) {
            return Err(PolarError::InvalidCrc(format!(
                "polynomial or init wider than {} bits",
                self.width
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    fn mask(&self) -> u32 {
        if self.width == 32 {
            u32::MAX
        } else {
            (1 << self.width) - 1
        }
    }

    /// Register value after shifting in `bits`.
    pub fn checksum(&self, bits: &[u8]) -> u32 {
        let top = self.width - 1;
        let mask = self.mask();
        bits.iter().fold(self.init, |reg, &bit| {
            let feedback = ((reg >> top) & 1) ^ u32::from(bit & 1);
            let shifted = (reg << 1) & mask;
            if feedback == 1 {
                shifted ^ self.poly
            } else {
                shifted
            }
        })
    }

    fn checksum_bits(&self, bits: &[u8]) -> impl Iterator<Item = u8> {
        let value = self.checksum(bits);
        (0..self.width).rev().map(move |s| ((value >> s) & 1) as u8)
    }
}

/// Appends the checksum of `payload`, MSB first.
pub fn crc_append(payload: &BitVector, cfg: &CrcConfig) -> BitVector {
    let mut bits = payload.as_slice().to_vec();
    bits.extend(cfg.checksum_bits(payload));
    BitVector::from(bits)
}

/// True iff the trailing `width` bits of `word` equal the checksum of the rest.
pub fn crc_check(word: &BitVector, cfg: &CrcConfig) -> Result<bool> {
    let width = cfg.width();
    if word.len() < width {
        return Err(PolarError::CrcTooShort {
            len: word.len(),
            width,
        });
    }
    let (payload, tail) = word.split_at(word.len() - width);
    Ok(cfg.checksum_bits(payload).eq(tail.iter().copied()))
}
