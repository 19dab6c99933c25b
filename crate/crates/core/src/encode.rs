//! Butterfly encoding x = u·F^{⊗n} and the related input-word plumbing.

use crate::bits::BitVector;
use crate::code::PolarCode;
use crate::error::{PolarError, Result};

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(PolarError::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// One butterfly stage with separation `s`: bit i ^= bit i+s for every i with i & s == 0.
#[inline]
pub fn butterfly_stage(bits: &mut [u8], separation: usize) {
    for i in 0..bits.len() {
        if i & separation == 0 {
            bits[i] ^= bits[i + separation];
        }
    }
}

/// In-place polar transform over GF(2). `bits.len()` must be a power of two.
///
/// The transform is its own inverse.
pub fn polar_transform(bits: &mut [u8]) {
    debug_assert!(bits.len().is_power_of_two());
    let mut s = 1;
    while s < bits.len() {
        butterfly_stage(bits, s);
        s <<= 1;
    }
}

/// Applies the butterfly stages in the given separation order.
///
/// The stages commute, so every ordering of {1, 2, ..., N/2} gives the same result
/// as [`polar_transform`].
pub fn polar_transform_ordered(bits: &mut [u8], separations: &[usize]) {
    for &s in separations {
        butterfly_stage(bits, s);
    }
}

/// Encodes a full input word `u` (length N, zeros on frozen positions).
pub fn encode(u: &BitVector, code: &PolarCode) -> Result<BitVector> {
    check_len(code.n(), u.len())?;
    if let Some(i) = (0..code.n()).find(|&i| code.is_frozen(i) && u[i] != 0) {
        return Err(PolarError::NonzeroFrozenBit(i));
    }
    let mut x = u.clone();
    polar_transform(x.as_mut_slice());
    Ok(x)
}

/// Scatters `payload` onto the information positions in ascending order.
pub fn assemble_u(payload: &BitVector, code: &PolarCode) -> Result<BitVector> {
    check_len(code.k(), payload.len())?;
    let mut u = BitVector::zeros(code.n());
    for (&pos, &bit) in code.info_set().iter().zip(payload.iter()) {
        u.set(pos, bit);
    }
    Ok(u)
}

/// Gathers the information positions of `u`.
pub fn extract_info(u: &BitVector, code: &PolarCode) -> Result<BitVector> {
    check_len(code.n(), u.len())?;
    Ok(BitVector::from_bits(code.info_set().iter().map(|&i| u[i])))
}

/// Re-encodes `u_hat` with frozen positions forced to 0.
pub fn reencode(u_hat: &BitVector, code: &PolarCode) -> Result<BitVector> {
    check_len(code.n(), u_hat.len())?;
    let mut x = BitVector::from_bits(
        u_hat
            .iter()
            .enumerate()
            .map(|(i, &b)| if code.is_info(i) { b } else { 0 }),
    );
    polar_transform(x.as_mut_slice());
    Ok(x)
}

/// True iff `x_hat == u_hat·G` with the frozen positions of `u_hat` forced to 0.
pub fn g_matrix_check(u_hat: &BitVector, x_hat: &BitVector, code: &PolarCode) -> Result<bool> {
    check_len(code.n(), x_hat.len())?;
    Ok(reencode(u_hat, code)? == *x_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{construct_bhattacharyya, Construction};

    fn all_info(n: usize) -> PolarCode {
        PolarCode::new(n, (0..n).collect(), Construction::Custom, None).unwrap()
    }

    #[test]
    fn encode_examples() {
        let code = all_info(4);
        let enc = |s: &str| encode(&s.parse().unwrap(), &code).unwrap().to_string();
        assert_eq!(enc("0000"), "0000");
        assert_eq!(enc("0101"), "0011");
        assert_eq!(enc("0001"), "1111");
    }

    #[test]
    fn encode_errors() {
        let code = construct_bhattacharyya(4, 2, 0.5).unwrap();
        assert_eq!(
            encode(&"000".parse().unwrap(), &code),
            Err(PolarError::LengthMismatch { expected: 4, actual: 3 })
        );
        assert_eq!(
            encode(&"0100".parse().unwrap(), &code),
            Err(PolarError::NonzeroFrozenBit(1))
        );
    }

    #[test]
    fn assemble_and_extract() {
        let code = construct_bhattacharyya(4, 2, 0.5).unwrap();
        let u = assemble_u(&"11".parse().unwrap(), &code).unwrap();
        assert_eq!(u.to_string(), "0011");
        assert_eq!(extract_info(&u, &code).unwrap().to_string(), "11");
        let zero = assemble_u(&"00".parse().unwrap(), &code).unwrap();
        assert!(zero.is_zero());
        assert_eq!(extract_info(&zero, &code).unwrap().to_string(), "00");

        let empty = construct_bhattacharyya(4, 0, 0.5).unwrap();
        let u = assemble_u(&BitVector::zeros(0), &empty).unwrap();
        assert_eq!(u.to_string(), "0000");
        assert!(extract_info(&u, &empty).unwrap().is_empty());

        assert!(assemble_u(&"1".parse().unwrap(), &code).is_err());
        assert!(extract_info(&"111".parse().unwrap(), &code).is_err());
    }

    #[test]
    fn g_matrix_examples() {
        let code = all_info(4);
        let check = |u: &str, x: &str| {
            g_matrix_check(&u.parse().unwrap(), &x.parse().unwrap(), &code).unwrap()
        };
        assert!(check("0000", "0000"));
        assert!(check("0001", "1111"));
        assert!(!check("0001", "1110"));
        assert!(g_matrix_check(&"000".parse().unwrap(), &"0000".parse().unwrap(), &code).is_err());
    }

    #[test]
    fn g_matrix_ignores_frozen_garbage() {
        let code = construct_bhattacharyya(4, 2, 0.5).unwrap();
        // frozen positions 0 and 1 are forced to zero before re-encoding
        assert!(g_matrix_check(&"1101".parse().unwrap(), &"1111".parse().unwrap(), &code).unwrap());
    }
}
