//! Belief propagation list decoding: L independent BP decoders on distinct
//! stage permutations, followed by minimum-Euclidean-distance selection.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::BitVector;
use crate::bp::{BpConfig, BpDecoder, CheckNode, DecodeCandidate, StagePermutation, StopRule};
use crate::bp::{DEFAULT_CLIP, DEFAULT_MAX_ITERS};
use crate::code::PolarCode;
use crate::encode::reencode;
use crate::error::{PolarError, Result};

/// Exhaustive enumeration is used for the random fill up to this many stages.
const ENUMERATE_UP_TO: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BplConfig {
    pub list_size: usize,
    /// Iteration budget of each constituent decoder.
    pub max_iters: usize,
    /// Seed for the permutations drawn beyond the cyclic shifts.
    pub permutation_seed: u64,
    pub clip: f64,
    pub check_node: CheckNode,
}

impl Default for BplConfig {
    fn default() -> Self {
        BplConfig {
            list_size: 8,
            max_iters: DEFAULT_MAX_ITERS,
            permutation_seed: 0,
            clip: DEFAULT_CLIP,
            check_node: CheckNode::Exact,
        }
    }
}

impl BplConfig {
    /// Settings shared by every constituent decoder (G-matrix stopping).
    pub fn bp_config(&self) -> BpConfig {
        BpConfig {
            max_iters: self.max_iters,
            clip: self.clip,
            check_node: self.check_node,
            stop: StopRule::GMatrix,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BplResult {
    pub x_hat: BitVector,
    pub u_hat: BitVector,
    pub selected_index: usize,
    /// False when no decoder produced a valid codeword and the selection fell
    /// back to re-encoded input words.
    pub any_valid: bool,
    pub candidates: Vec<DecodeCandidate>,
    /// Euclidean distance from y to each candidate's re-encoded codeword.
    pub distances: Vec<f64>,
}

impl BplResult {
    pub fn pe_updates(&self) -> u64 {
        self.candidates.iter().map(|c| c.pe_updates).sum()
    }

    pub fn iterations(&self) -> usize {
        self.candidates.iter().map(|c| c.iterations).sum()
    }
}

/// n!, saturating at `u128::MAX`.
pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).try_fold(1u128, |acc, v| acc.checked_mul(v)).unwrap_or(u128::MAX)
}

/// All permutations of `items` in lexicographic order of positions.
fn all_orders(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in all_orders(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// The ascending order, its n - 1 left-cyclic shifts, then seeded random fill.
pub fn select_permutations(stages: usize, list: usize, seed: u64) -> Result<Vec<StagePermutation>> {
    select_permutations_from(&StagePermutation::identity(stages), list, seed)
}

/// Like [`select_permutations`] but shifting `base` instead of the ascending order.
///
/// Permutations beyond the cyclic shifts are drawn without replacement from the
/// remaining ones using ChaCha8 seeded with `seed`.
pub fn select_permutations_from(
    base: &StagePermutation,
    list: usize,
    seed: u64,
) -> Result<Vec<StagePermutation>> {
    let stages = base.stages();
    let available = factorial(stages);
    if list == 0 {
        return Err(PolarError::InvalidConfig("list size must be at least 1".into()));
    }
    if list as u128 > available {
        return Err(PolarError::ListTooLarge { list, available });
    }
    let mut perms: Vec<StagePermutation> = (0..stages.min(list))
        .map(|shift| base.rotated_left(shift))
        .collect();
    if perms.len() == list {
        return Ok(perms);
    }
    let mut seen: HashSet<Vec<usize>> = perms.iter().map(|p| p.pi().to_vec()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if stages <= ENUMERATE_UP_TO {
        let mut rest: Vec<Vec<usize>> = all_orders(base.pi())
            .into_iter()
            .filter(|p| !seen.contains(p))
            .collect();
        rest.shuffle(&mut rng);
        rest.truncate(list - perms.len());
        for pi in rest {
            perms.push(StagePermutation::new(pi)?);
        }
    } else {
        let mut pi = base.pi().to_vec();
        while perms.len() < list {
            pi.shuffle(&mut rng);
            if seen.insert(pi.clone()) {
                perms.push(StagePermutation::new(pi.clone())?);
            }
        }
    }
    Ok(perms)
}

/// Squared distance between `y` and the BPSK image (0 -> +1, 1 -> -1) of `x`.
pub fn squared_distance(y: &[f64], x: &[u8]) -> f64 {
    y.iter()
        .zip(x)
        .map(|(&v, &b)| {
            let d = v - if b == 0 { 1.0 } else { -1.0 };
            d * d
        })
        .sum()
}

/// Index and distance of the candidate closest to `y`; ties go to the lowest index.
pub fn euclidean_select(y: &[f64], candidates: &[BitVector]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if c.len() != y.len() {
            return Err(PolarError::LengthMismatch {
                expected: y.len(),
                actual: c.len(),
            });
        }
        let d = squared_distance(y, c);
        if best.map_or(true, |(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best.map(|(i, d)| (i, d.sqrt()))
        .ok_or(PolarError::EmptyCandidates)
}

/// L BP decoders over distinct factor graphs of one code.
#[derive(Debug, Clone)]
pub struct BplDecoder<'a> {
    code: &'a PolarCode,
    decoders: Vec<BpDecoder<'a>>,
}

impl<'a> BplDecoder<'a> {
    pub fn new(code: &'a PolarCode, cfg: &BplConfig) -> Result<Self> {
        let perms = select_permutations(code.stages(), cfg.list_size, cfg.permutation_seed)?;
        Self::from_permutations(code, perms, cfg)
    }

    /// Uses the given stage orders instead of the default selection.
    pub fn from_permutations(
        code: &'a PolarCode,
        perms: Vec<StagePermutation>,
        cfg: &BplConfig,
    ) -> Result<Self> {
        if perms.is_empty() {
            return Err(PolarError::InvalidConfig("empty permutation list".into()));
        }
        let bp = cfg.bp_config();
        let decoders = perms
            .into_iter()
            .map(|p| BpDecoder::new(code, p, bp))
            .collect::<Result<Vec<_>>>()?;
        Ok(BplDecoder { code, decoders })
    }

    pub fn permutations(&self) -> Vec<&StagePermutation> {
        self.decoders.iter().map(|d| d.permutation()).collect()
    }

    pub fn list_size(&self) -> usize {
        self.decoders.len()
    }

    /// Decodes one frame. `y` is the channel output, `llr_ch` its LLRs.
    pub fn decode(&mut self, y: &[f64], llr_ch: &[f64]) -> Result<BplResult> {
        if y.len() != self.code.n() {
            return Err(PolarError::LengthMismatch {
                expected: self.code.n(),
                actual: y.len(),
            });
        }
        let candidates = self
            .decoders
            .iter_mut()
            .map(|d| d.decode(llr_ch))
            .collect::<Result<Vec<_>>>()?;
        select(y, candidates, self.code)
    }
}

/// Picks the closest valid codeword, or the closest re-encoded input word when
/// no candidate is valid.
fn select(y: &[f64], candidates: Vec<DecodeCandidate>, code: &PolarCode) -> Result<BplResult> {
    let codewords = candidates
        .iter()
        .map(|c| {
            if c.valid {
                Ok(c.x_hat.clone())
            } else {
                reencode(&c.u_hat, code)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let distances: Vec<f64> = codewords
        .iter()
        .map(|x| squared_distance(y, x).sqrt())
        .collect();
    let any_valid = candidates.iter().any(|c| c.valid);
    let pool: Vec<usize> = (0..candidates.len())
        .filter(|&i| !any_valid || candidates[i].valid)
        .collect();
    let pooled: Vec<BitVector> = pool.iter().map(|&i| codewords[i].clone()).collect();
    let (pos, _) = euclidean_select(y, &pooled)?;
    let selected_index = pool[pos];
    Ok(BplResult {
        x_hat: codewords[selected_index].clone(),
        u_hat: candidates[selected_index].u_hat.clone(),
        selected_index,
        any_valid,
        candidates,
        distances,
    })
}

/// One-shot BPL decode.
pub fn bpl_decode(y: &[f64], llr_ch: &[f64], code: &PolarCode, cfg: &BplConfig) -> Result<BplResult> {
    BplDecoder::new(code, cfg)?.decode(y, llr_ch)
}
