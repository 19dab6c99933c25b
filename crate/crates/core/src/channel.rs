//! BPSK over AWGN, channel LLRs and per-frame random streams.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bits::BitVector;
use crate::error::{PolarError, Result};

/// Noise standard deviation for a given Eb/N0 (dB) and code rate, with unit-energy symbols.
pub fn sigma_from_ebn0(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(PolarError::ZeroRate);
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// 0 -> +1, 1 -> -1.
pub fn bpsk_modulate(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// Sign slicer: negative samples map to 1.
pub fn hard_slice(y: &[f64]) -> BitVector {
    BitVector::from_bits(y.iter().map(|&v| (v < 0.0) as u8))
}

/// Adds i.i.d. N(0, sigma^2) noise drawn from `rng`.
pub fn awgn<R: Rng + ?Sized>(s: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    s.iter()
        .map(|&v| {
            let n: f64 = rng.sample(StandardNormal);
            v + sigma * n
        })
        .collect()
}

/// LLRs 2y/sigma^2. With sigma = 0 the LLRs saturate at ±`clip` (0 stays 0).
pub fn llr_from_channel(y: &[f64], sigma: f64, clip: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return y
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    clip
                } else if v < 0.0 {
                    -clip
                } else {
                    0.0
                }
            })
            .collect();
    }
    let scale = 2.0 / (sigma * sigma);
    y.iter().map(|&v| scale * v).collect()
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one frame, a pure function of its coordinates.
pub fn frame_seed(master_seed: u64, snr_index: u64, frame_index: u64) -> u64 {
    mix64(mix64(mix64(master_seed) ^ snr_index) ^ frame_index)
}

/// Independent payload and noise streams of one frame.
///
/// Both are ChaCha8 keyed by the frame seed; the noise uses stream 0 and the
/// payload stream 1, so all-zero and random-payload runs see the same noise.
pub fn frame_streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let noise = ChaCha8Rng::seed_from_u64(seed);
    let mut payload = ChaCha8Rng::seed_from_u64(seed);
    payload.set_stream(1);
    (payload, noise)
}
