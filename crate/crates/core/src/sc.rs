//! Successive cancellation (SC) and SC list decoding, plus a brute-force
//! maximum-likelihood oracle for small codes.
//!
//! With natural indexing, x = u·F^{⊗n} splits as x = (v_a ⊕ v_b, v_b) where
//! v_a and v_b encode the first and second halves of u. The recursion
//! decodes v_a from f-combined LLRs, then v_b from g-combined LLRs.

use crate::bits::BitVector;
use crate::bp::{boxplus, CheckNode, DEFAULT_CLIP};
use crate::code::PolarCode;
use crate::crc::crc_check;
use crate::encode::{assemble_u, extract_info, polar_transform, reencode};
use crate::error::{PolarError, Result};

/// Upper bound on k for [`ml_decode_bruteforce`].
pub const ML_MAX_K: usize = 20;

/// Check-node combination used by the SC recursion (exact boxplus).
#[inline]
pub fn sc_f(a: f64, b: f64) -> f64 {
    boxplus(a, b, CheckNode::Exact, DEFAULT_CLIP)
}

/// Variable-node combination given the partial-sum bit `u` of the upper branch.
#[inline]
pub fn sc_g(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

#[inline]
fn hard(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

fn check_llr_len(llr_ch: &[f64], code: &PolarCode) -> Result<()> {
    if llr_ch.len() != code.n() {
        return Err(PolarError::LengthMismatch {
            expected: code.n(),
            actual: llr_ch.len(),
        });
    }
    Ok(())
}

fn clipped(llr_ch: &[f64]) -> Vec<f64> {
    llr_ch.iter().map(|v| v.clamp(-DEFAULT_CLIP, DEFAULT_CLIP)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScOutput {
    pub u_hat: BitVector,
    pub x_hat: BitVector,
    /// Number of f/g evaluations, N·n for SC.
    pub llr_updates: u64,
}

fn sc_node(llr: &[f64], code: &PolarCode, offset: usize, u: &mut [u8]) -> Vec<u8> {
    if llr.len() == 1 {
        let bit = if code.is_info(offset) { hard(llr[0]) } else { 0 };
        u[offset] = bit;
        return vec![bit];
    }
    let h = llr.len() / 2;
    let (top, bottom) = llr.split_at(h);
    let left: Vec<f64> = top.iter().zip(bottom).map(|(&a, &b)| sc_f(a, b)).collect();
    let v_a = sc_node(&left, code, offset, u);
    let right: Vec<f64> = top
        .iter()
        .zip(bottom)
        .zip(&v_a)
        .map(|((&a, &b), &bit)| sc_g(a, b, bit))
        .collect();
    let v_b = sc_node(&right, code, offset + h, u);
    let mut x: Vec<u8> = v_a.iter().zip(&v_b).map(|(a, b)| a ^ b).collect();
    x.extend_from_slice(&v_b);
    x
}

/// Depth-first SC decoding. Frozen positions are decided 0.
pub fn sc_decode(llr_ch: &[f64], code: &PolarCode) -> Result<ScOutput> {
    check_llr_len(llr_ch, code)?;
    let mut u = vec![0u8; code.n()];
    let x = sc_node(&clipped(llr_ch), code, 0, &mut u);
    Ok(ScOutput {
        u_hat: BitVector::from(u),
        x_hat: BitVector::from(x),
        llr_updates: (code.n() * code.stages()) as u64,
    })
}

/// Path-metric increment for deciding `bit` against `llr`:
/// ln(1 + e^{-(1-2·bit)·llr}), the exact negative log-probability of the decision.
///
/// Its hard-decision limit is |llr| for a decision against the sign of `llr`
/// and 0 otherwise, but only the exact form makes a full list ML.
#[inline]
pub fn path_penalty(llr: f64, bit: u8) -> f64 {
    let x = if bit == 0 { -llr } else { llr };
    // softplus(x) = max(x, 0) + ln(1 + e^-|x|)
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SclOutput {
    pub u_hat: BitVector,
    pub x_hat: BitVector,
    pub path_metric: f64,
    /// Path metric of the returned path after each decided bit.
    pub metric_trace: Vec<f64>,
    /// Whether the returned path passed the CRC (None without CRC selection).
    pub crc_passed: Option<bool>,
    /// Number of f/g evaluations summed over all paths.
    pub llr_updates: u64,
}

#[derive(Debug, Clone)]
struct Path {
    /// llr[m] holds the 2^m LLRs entering the active node at level m (m < n).
    llr: Vec<Vec<f64>>,
    /// partial[m] holds the re-encoded output of the active node at level m.
    partial: Vec<Vec<u8>>,
    u: Vec<u8>,
    metric: f64,
    trace: Vec<f64>,
}

struct ListDecoder<'a> {
    code: &'a PolarCode,
    channel: Vec<f64>,
    list_size: usize,
    paths: Vec<Path>,
    llr_updates: u64,
}

impl<'a> ListDecoder<'a> {
    fn new(code: &'a PolarCode, channel: Vec<f64>, list_size: usize) -> Self {
        let n = code.stages();
        let root = Path {
            llr: (0..=n).map(|m| if m < n { vec![0.0; 1 << m] } else { Vec::new() }).collect(),
            partial: (0..=n).map(|m| vec![0u8; 1 << m]).collect(),
            u: vec![0; code.n()],
            metric: 0.0,
            trace: Vec::with_capacity(code.n()),
        };
        ListDecoder {
            code,
            channel,
            list_size,
            paths: vec![root],
            llr_updates: 0,
        }
    }

    fn node(&mut self, level: usize, offset: usize) {
        if level == 0 {
            self.leaf(offset);
            return;
        }
        let top = self.code.stages();
        let h = 1 << (level - 1);
        self.llr_updates += h as u64 * self.paths.len() as u64;
        for path in &mut self.paths {
            let (lower, upper) = path.llr.split_at_mut(level);
            let src: &[f64] = if level == top { &self.channel } else { &upper[0] };
            for (i, dst) in lower[level - 1].iter_mut().enumerate() {
                *dst = sc_f(src[i], src[h + i]);
            }
        }
        self.node(level - 1, offset);
        self.llr_updates += h as u64 * self.paths.len() as u64;
        for path in &mut self.paths {
            let (lower, upper) = path.partial.split_at_mut(level);
            upper[0][..h].copy_from_slice(&lower[level - 1]);
            let (llr_lower, llr_upper) = path.llr.split_at_mut(level);
            let src: &[f64] = if level == top { &self.channel } else { &llr_upper[0] };
            for (i, dst) in llr_lower[level - 1].iter_mut().enumerate() {
                *dst = sc_g(src[i], src[h + i], upper[0][i]);
            }
        }
        self.node(level - 1, offset + h);
        for path in &mut self.paths {
            let (lower, upper) = path.partial.split_at_mut(level);
            let (out, child) = (&mut upper[0], &lower[level - 1]);
            for i in 0..h {
                out[i] ^= child[i];
                out[h + i] = child[i];
            }
        }
    }

    fn leaf(&mut self, index: usize) {
        if self.code.is_frozen(index) {
            for path in &mut self.paths {
                let llr = path.llr[0][0];
                path.metric += path_penalty(llr, 0);
                path.trace.push(path.metric);
                path.u[index] = 0;
                path.partial[0][0] = 0;
            }
            return;
        }
        // (parent, bit, metric) in parent order, hard decision first
        let mut children: Vec<(usize, u8, f64)> = Vec::with_capacity(2 * self.paths.len());
        for (p, path) in self.paths.iter().enumerate() {
            let llr = path.llr[0][0];
            let first = hard(llr);
            for bit in [first, first ^ 1] {
                children.push((p, bit, path.metric + path_penalty(llr, bit)));
            }
        }
        let mut order: Vec<usize> = (0..children.len()).collect();
        order.sort_by(|&a, &b| children[a].2.total_cmp(&children[b].2));
        order.truncate(self.list_size);
        order.sort_unstable();

        let old = std::mem::take(&mut self.paths);
        let mut survivors_per_parent = vec![0usize; old.len()];
        for &c in &order {
            survivors_per_parent[children[c].0] += 1;
        }
        let mut parents: Vec<Option<Path>> = old.into_iter().map(Some).collect();
        for &c in &order {
            let (p, bit, metric) = children[c];
            survivors_per_parent[p] -= 1;
            let mut path = if survivors_per_parent[p] == 0 {
                parents[p].take().expect("parent consumed once")
            } else {
                parents[p].clone().expect("parent still present")
            };
            path.metric = metric;
            path.trace.push(metric);
            path.u[index] = bit;
            path.partial[0][0] = bit;
            self.paths.push(path);
        }
    }
}

/// SC list decoding with `list_size` surviving paths.
///
/// Each information bit spawns both extensions; the best `list_size` by path
/// metric survive (stable order on ties). With `use_crc`, the lowest-metric
/// path whose information bits pass the code's CRC is returned, falling back
/// to the lowest-metric path overall.
pub fn scl_decode(
    llr_ch: &[f64],
    code: &PolarCode,
    list_size: usize,
    use_crc: bool,
) -> Result<SclOutput> {
    check_llr_len(llr_ch, code)?;
    if list_size == 0 {
        return Err(PolarError::InvalidConfig("list size must be at least 1".into()));
    }
    let crc = if use_crc {
        Some(*code.crc().ok_or(PolarError::MissingCrc)?)
    } else {
        None
    };
    let mut dec = ListDecoder::new(code, clipped(llr_ch), list_size);
    dec.node(code.stages(), 0);

    let mut ranked: Vec<usize> = (0..dec.paths.len()).collect();
    ranked.sort_by(|&a, &b| dec.paths[a].metric.total_cmp(&dec.paths[b].metric));
    let (chosen, crc_passed) = match crc {
        None => (ranked[0], None),
        Some(cfg) => {
            let mut hit = None;
            for &i in &ranked {
                let u = BitVector::from(dec.paths[i].u.clone());
                if crc_check(&extract_info(&u, code)?, &cfg)? {
                    hit = Some(i);
                    break;
                }
            }
            match hit {
                Some(i) => (i, Some(true)),
                None => (ranked[0], Some(false)),
            }
        }
    };
    let llr_updates = dec.llr_updates;
    let path = dec.paths.swap_remove(chosen);
    let u_hat = BitVector::from(path.u);
    let x_hat = reencode(&u_hat, code)?;
    Ok(SclOutput {
        u_hat,
        x_hat,
        path_metric: path.metric,
        metric_trace: path.trace,
        crc_passed,
        llr_updates,
    })
}

/// Maximum-likelihood decoding on the BPSK/AWGN channel by enumerating all
/// 2^k codewords and returning the one closest to `y`.
///
/// Ties resolve to the lexicographically smallest message. Returns the
/// message and its codeword.
pub fn ml_decode_bruteforce(y: &[f64], code: &PolarCode) -> Result<(BitVector, BitVector)> {
    let k = code.k();
    if k > ML_MAX_K {
        return Err(PolarError::EnumerationTooLarge(k));
    }
    check_llr_len(y, code)?;
    let mut best: Option<(f64, BitVector, BitVector)> = None;
    for m in 0u64..(1u64 << k) {
        let msg = BitVector::from_bits((0..k).map(|j| ((m >> (k - 1 - j)) & 1) as u8));
        let mut x = assemble_u(&msg, code)?;
        polar_transform(x.as_mut_slice());
        let d: f64 = y
            .iter()
            .zip(x.iter())
            .map(|(&v, &b)| {
                let e = v - if b == 0 { 1.0 } else { -1.0 };
                e * e
            })
            .sum();
        if best.as_ref().map_or(true, |(bd, _, _)| d < *bd) {
            best = Some((d, msg, x));
        }
    }
    let (_, msg, x) = best.expect("at least one codeword");
    Ok((msg, x))
}
