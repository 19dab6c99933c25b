//! Belief propagation over one stage-permuted polar factor graph.
//!
//! The graph has n + 1 columns of N nodes. Column 0 is the input-word side,
//! column n the channel side. Stage j (0-based) joins column j to column
//! j + 1 through N/2 processing elements; the PE for upper row i couples it
//! with lower row i + s_j for every i with `i & s_j == 0`.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitVector;
use crate::code::PolarCode;
use crate::crc::crc_check;
use crate::encode::{extract_info, g_matrix_check};
use crate::error::{PolarError, Result};

/// Default LLR saturation magnitude.
pub const DEFAULT_CLIP: f64 = 40.0;
/// Default scaling factor of the min-sum check node.
pub const DEFAULT_MINSUM_SCALE: f64 = 0.9375;
/// Default iteration budget of one BP decoder.
pub const DEFAULT_MAX_ITERS: usize = 200;

/// Check-node (boxplus) evaluation rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheckNode {
    /// 2·atanh(tanh(a/2)·tanh(b/2)).
    Exact,
    /// scale · sign(a)·sign(b)·min(|a|, |b|).
    MinSum { scale: f64 },
}

impl CheckNode {
    pub fn minsum() -> Self {
        CheckNode::MinSum {
            scale: DEFAULT_MINSUM_SCALE,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CheckNode::Exact => "exact",
            CheckNode::MinSum { .. } => "minsum",
        }
    }
}

impl Default for CheckNode {
    fn default() -> Self {
        CheckNode::Exact
    }
}

#[inline]
fn clamp(v: f64, clip: f64) -> f64 {
    v.clamp(-clip, clip)
}

/// Check-node combination of two LLRs, clipped to ±`clip`.
///
/// A magnitude of at least `clip` is treated as certainty, so
/// `boxplus(±clip, b) == ±b`.
#[inline]
pub fn boxplus(a: f64, b: f64, mode: CheckNode, clip: f64) -> f64 {
    let (abs_a, abs_b) = (a.abs(), b.abs());
    if abs_a >= clip {
        return clamp(if a < 0.0 { -b } else { b }, clip);
    }
    if abs_b >= clip {
        return clamp(if b < 0.0 { -a } else { a }, clip);
    }
    let min = abs_a.min(abs_b);
    let signed = if (a < 0.0) != (b < 0.0) { -min } else { min };
    let v = match mode {
        // sgn·min + log(1 + e^-|a+b|) - log(1 + e^-|a-b|)
        CheckNode::Exact => {
            signed + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
        }
        CheckNode::MinSum { scale } => scale * signed,
    };
    clamp(v, clip)
}

/// Outgoing messages of one processing element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeOutput {
    pub l_upper: f64,
    pub l_lower: f64,
    pub r_upper: f64,
    pub r_lower: f64,
}

/// Full update of one PE from the messages on its four ports.
///
/// `l_*_right` are the L-messages arriving from the channel side, `r_*_left`
/// the R-messages arriving from the input side.
#[inline]
pub fn pe_update(
    l_upper_right: f64,
    l_lower_right: f64,
    r_upper_left: f64,
    r_lower_left: f64,
    mode: CheckNode,
    clip: f64,
) -> PeOutput {
    let cross = boxplus(r_upper_left, l_upper_right, mode, clip);
    PeOutput {
        l_upper: boxplus(l_upper_right, l_lower_right + r_lower_left, mode, clip),
        l_lower: clamp(cross + l_lower_right, clip),
        r_upper: boxplus(r_upper_left, l_lower_right + r_lower_left, mode, clip),
        r_lower: clamp(cross + r_lower_left, clip),
    }
}

/// Separations s_j = 2^(π_j - 1) of a stage permutation.
pub fn separations_from_permutation(pi: &[usize]) -> Result<Vec<usize>> {
    let n = pi.len();
    if n == 0 {
        return Err(PolarError::InvalidPermutation("empty permutation".into()));
    }
    let mut seen = vec![false; n];
    for &p in pi {
        if p == 0 || p > n {
            return Err(PolarError::InvalidPermutation(format!(
                "entry {p} outside 1..={n}"
            )));
        }
        if seen[p - 1] {
            return Err(PolarError::InvalidPermutation(format!("entry {p} repeated")));
        }
        seen[p - 1] = true;
    }
    Ok(pi.iter().map(|&p| 1usize << (p - 1)).collect())
}

/// The stage order Π of one factor-graph realization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StagePermutation {
    pi: Vec<usize>,
    separations: Vec<usize>,
}

impl StagePermutation {
    pub fn new(pi: Vec<usize>) -> Result<Self> {
        let separations = separations_from_permutation(&pi)?;
        Ok(StagePermutation { pi, separations })
    }

    /// Ascending stage order [1, 2, ..., n].
    pub fn identity(stages: usize) -> Self {
        StagePermutation::new((1..=stages).collect()).expect("identity is a permutation")
    }

    /// Descending stage order [n, ..., 2, 1].
    pub fn descending(stages: usize) -> Self {
        StagePermutation::new((1..=stages).rev().collect()).expect("reversal is a permutation")
    }

    /// This order rotated left by `shift` positions.
    pub fn rotated_left(&self, shift: usize) -> Self {
        let mut pi = self.pi.clone();
        if !pi.is_empty() {
            let len = pi.len();
            pi.rotate_left(shift % len);
        }
        StagePermutation::new(pi).expect("rotation preserves permutation")
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    pub fn separations(&self) -> &[usize] {
        &self.separations
    }

    pub fn stages(&self) -> usize {
        self.pi.len()
    }
}

impl fmt::Display for StagePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pi.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for StagePermutation {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self> {
        let pi = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| PolarError::InvalidPermutation(format!("bad entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        StagePermutation::new(pi)
    }
}

/// L- and R-message arrays of one decoder, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageMemory {
    rows: usize,
    columns: usize,
    left: Vec<f64>,
    right: Vec<f64>,
    clip: f64,
}

impl MessageMemory {
    fn zeroed(rows: usize, columns: usize, clip: f64) -> Self {
        MessageMemory {
            rows,
            columns,
            left: vec![0.0; rows * columns],
            right: vec![0.0; rows * columns],
            clip,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns, n + 1.
    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    /// L-message (right-to-left) at `row`, `col`.
    pub fn l(&self, row: usize, col: usize) -> f64 {
        self.left[col * self.rows + row]
    }

    /// R-message (left-to-right) at `row`, `col`.
    pub fn r(&self, row: usize, col: usize) -> f64 {
        self.right[col * self.rows + row]
    }

    pub fn l_column(&self, col: usize) -> &[f64] {
        &self.left[col * self.rows..(col + 1) * self.rows]
    }

    pub fn r_column(&self, col: usize) -> &[f64] {
        &self.right[col * self.rows..(col + 1) * self.rows]
    }

    /// Largest stored magnitude over both arrays.
    pub fn max_magnitude(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    fn reset(&mut self, llr_ch: &[f64], code: &PolarCode) {
        self.left.fill(0.0);
        self.right.fill(0.0);
        let rows = self.rows;
        for (i, r) in self.right[..rows].iter_mut().enumerate() {
            *r = if code.is_frozen(i) { self.clip } else { 0.0 };
        }
        let last = (self.columns - 1) * rows;
        for (l, &v) in self.left[last..].iter_mut().zip(llr_ch) {
            *l = clamp(v, self.clip);
        }
    }

    fn hard_decisions(&self, code: &PolarCode) -> (BitVector, BitVector) {
        let n = self.rows;
        let last = self.columns - 1;
        let u_hat = BitVector::from_bits((0..n).map(|i| {
            (code.is_info(i) && self.l(i, 0) + self.r(i, 0) < 0.0) as u8
        }));
        let x_hat =
            BitVector::from_bits((0..n).map(|i| (self.l(i, last) + self.r(i, last) < 0.0) as u8));
        (u_hat, x_hat)
    }
}

/// Initial message state: +clip R-priors on frozen rows, clipped channel LLRs
/// in the last L column, zeros elsewhere.
pub fn init_messages(llr_ch: &[f64], code: &PolarCode, clip: f64) -> Result<MessageMemory> {
    if llr_ch.len() != code.n() {
        return Err(PolarError::LengthMismatch {
            expected: code.n(),
            actual: llr_ch.len(),
        });
    }
    let mut mem = MessageMemory::zeroed(code.n(), code.stages() + 1, clip);
    mem.reset(llr_ch, code);
    Ok(mem)
}

/// Early-termination rule checked after every full iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Stop once x̂ = û·G.
    #[default]
    GMatrix,
    /// Stop once the CRC over the information bits of û passes.
    Crc,
    /// Always run the full iteration budget.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpConfig {
    pub max_iters: usize,
    pub clip: f64,
    pub check_node: CheckNode,
    pub stop: StopRule,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig {
            max_iters: DEFAULT_MAX_ITERS,
            clip: DEFAULT_CLIP,
            check_node: CheckNode::Exact,
            stop: StopRule::GMatrix,
        }
    }
}

/// Output of one BP decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeCandidate {
    pub u_hat: BitVector,
    pub x_hat: BitVector,
    /// Whether x̂ = û·G holds for the returned decisions.
    pub valid: bool,
    pub iterations: usize,
    /// One count per PE per sweep: `iterations · 2 · (N/2) · n`.
    pub pe_updates: u64,
}

/// A BP decoder bound to one code and one factor-graph realization.
///
/// The message memory is reused across calls to [`BpDecoder::decode`].
#[derive(Debug, Clone)]
pub struct BpDecoder<'a> {
    code: &'a PolarCode,
    perm: StagePermutation,
    cfg: BpConfig,
    mem: MessageMemory,
}

impl<'a> BpDecoder<'a> {
    pub fn new(code: &'a PolarCode, perm: StagePermutation, cfg: BpConfig) -> Result<Self> {
        if perm.stages() != code.stages() {
            return Err(PolarError::InvalidPermutation(format!(
                "permutation has {} stages, code has {}",
                perm.stages(),
                code.stages()
            )));
        }
        if !(cfg.clip > 0.0) {
            return Err(PolarError::InvalidConfig(format!("clip {} must be positive", cfg.clip)));
        }
        if cfg.stop == StopRule::Crc && code.crc().is_none() {
            return Err(PolarError::MissingCrc);
        }
        Ok(BpDecoder {
            code,
            perm,
            cfg,
            mem: MessageMemory::zeroed(code.n(), code.stages() + 1, cfg.clip),
        })
    }

    pub fn permutation(&self) -> &StagePermutation {
        &self.perm
    }

    /// Message state left by the most recent decode.
    pub fn memory(&self) -> &MessageMemory {
        &self.mem
    }

    fn r_sweep(&mut self) {
        let rows = self.mem.rows;
        let (mode, clip) = (self.cfg.check_node, self.cfg.clip);
        let MessageMemory { left, right, .. } = &mut self.mem;
        for (stage, &s) in self.perm.separations.iter().enumerate() {
            let (r_in, r_out) = right[stage * rows..(stage + 2) * rows].split_at_mut(rows);
            let l_in = &left[(stage + 1) * rows..(stage + 2) * rows];
            for block in (0..rows).step_by(2 * s) {
                for u in block..block + s {
                    let l = u + s;
                    let ru = r_in[u];
                    r_out[u] = boxplus(ru, l_in[l] + r_in[l], mode, clip);
                    r_out[l] = clamp(boxplus(ru, l_in[u], mode, clip) + r_in[l], clip);
                }
            }
        }
    }

    fn l_sweep(&mut self) {
        let rows = self.mem.rows;
        let (mode, clip) = (self.cfg.check_node, self.cfg.clip);
        let MessageMemory { left, right, .. } = &mut self.mem;
        for (stage, &s) in self.perm.separations.iter().enumerate().rev() {
            let (l_out, l_in) = left[stage * rows..(stage + 2) * rows].split_at_mut(rows);
            let r_in = &right[stage * rows..(stage + 1) * rows];
            for block in (0..rows).step_by(2 * s) {
                for u in block..block + s {
                    let l = u + s;
                    let lu = l_in[u];
                    l_out[u] = boxplus(lu, l_in[l] + r_in[l], mode, clip);
                    l_out[l] = clamp(boxplus(r_in[u], lu, mode, clip) + l_in[l], clip);
                }
            }
        }
    }

    fn satisfied(&self, u_hat: &BitVector, x_hat: &BitVector) -> Result<bool> {
        match self.cfg.stop {
            StopRule::GMatrix => g_matrix_check(u_hat, x_hat, self.code),
            StopRule::Crc => {
                let crc = self.code.crc().ok_or(PolarError::MissingCrc)?;
                crc_check(&extract_info(u_hat, self.code)?, crc)
            }
            StopRule::None => Ok(false),
        }
    }

    /// Decodes one frame of channel LLRs (positive favours bit 0).
    pub fn decode(&mut self, llr_ch: &[f64]) -> Result<DecodeCandidate> {
        let n = self.code.n();
        if llr_ch.len() != n {
            return Err(PolarError::LengthMismatch {
                expected: n,
                actual: llr_ch.len(),
            });
        }
        self.mem.reset(llr_ch, self.code);
        let pe_per_iter = (n as u64 / 2) * self.code.stages() as u64 * 2;
        let mut iterations = 0;
        while iterations < self.cfg.max_iters {
            self.r_sweep();
            self.l_sweep();
            iterations += 1;
            if self.cfg.stop != StopRule::None {
                let (u_hat, x_hat) = self.mem.hard_decisions(self.code);
                if self.satisfied(&u_hat, &x_hat)? {
                    break;
                }
            }
        }
        let (u_hat, x_hat) = self.mem.hard_decisions(self.code);
        let valid = g_matrix_check(&u_hat, &x_hat, self.code)?;
        Ok(DecodeCandidate {
            u_hat,
            x_hat,
            valid,
            iterations,
            pe_updates: pe_per_iter * iterations as u64,
        })
    }
}

/// Runs BP on one factor-graph realization.
pub fn bp_decode(
    llr_ch: &[f64],
    code: &PolarCode,
    perm: &StagePermutation,
    cfg: &BpConfig,
) -> Result<DecodeCandidate> {
    BpDecoder::new(code, perm.clone(), *cfg)?.decode(llr_ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{construct_bhattacharyya, Construction};

    const T: f64 = DEFAULT_CLIP;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn separations_examples() {
        assert_eq!(separations_from_permutation(&[3, 2, 1]).unwrap(), vec![4, 2, 1]);
        assert_eq!(separations_from_permutation(&[2, 1, 3]).unwrap(), vec![2, 1, 4]);
        assert_eq!(separations_from_permutation(&[1, 2, 3]).unwrap(), vec![1, 2, 4]);
        assert!(separations_from_permutation(&[1, 1, 3]).is_err());
        assert!(separations_from_permutation(&[0, 1, 2]).is_err());
        assert!(separations_from_permutation(&[1, 2, 4]).is_err());
        assert!(separations_from_permutation(&[]).is_err());
    }

    #[test]
    fn permutation_text_form() {
        let p: StagePermutation = "3,2,1".parse().unwrap();
        assert_eq!(p.separations(), &[4, 2, 1]);
        assert_eq!(p.to_string(), "3,2,1");
        assert_eq!(p, StagePermutation::descending(3));
        assert!("3,2,x".parse::<StagePermutation>().is_err());
        assert_eq!(StagePermutation::identity(3).rotated_left(1).pi(), &[2, 3, 1]);
    }

    #[test]
    fn boxplus_examples() {
        let exact = CheckNode::Exact;
        for b in [-3.0, -0.5, 0.0, 1.25, 39.0] {
            assert_eq!(boxplus(T, b, exact, T), b);
            assert_eq!(boxplus(-T, b, exact, T), -b);
            assert_eq!(boxplus(T, b, CheckNode::minsum(), T), b);
        }
        for a in [-7.0, 0.3, 12.0] {
            assert_eq!(boxplus(a, 0.0, exact, T), 0.0);
        }
        // 2·atanh(tanh(1)^2)
        let reference = 2.0 * (1.0f64.tanh().powi(2)).atanh();
        assert!(close(boxplus(2.0, 2.0, exact, T), reference, 1e-12));
        assert!(close(boxplus(2.0, 2.0, exact, T), 1.3249, 2e-4));
        assert_eq!(boxplus(2.0, -3.0, CheckNode::MinSum { scale: 1.0 }, T), -2.0);
        assert_eq!(boxplus(2.0, -3.0, CheckNode::minsum(), T), -2.0 * 0.9375);
    }

    #[test]
    fn boxplus_matches_tanh_rule() {
        let mut x = -9.5;
        while x < 9.5 {
            let mut y = -9.3;
            while y < 9.5 {
                let reference = 2.0 * ((x / 2.0f64).tanh() * (y / 2.0f64).tanh()).atanh();
                assert!(close(boxplus(x, y, CheckNode::Exact, T), reference, 1e-9), "{x} {y}");
                y += 0.7;
            }
            x += 0.45;
        }
    }

    #[test]
    fn pe_update_examples() {
        let out = pe_update(1.0, 2.0, 0.0, 0.0, CheckNode::Exact, T);
        let l_upper = 2.0 * ((0.5f64).tanh() * 1.0f64.tanh()).atanh();
        assert!(close(out.l_upper, l_upper, 1e-12));
        // the rounded hand value 0.7356 sits 2.7e-4 from 0.735326
        assert!(close(out.l_upper, 0.7356, 5e-4));
        assert_eq!(out.l_lower, 2.0);
        assert_eq!(out.r_upper, 0.0);
        assert_eq!(out.r_lower, 0.0);

        let out = pe_update(1.5, -0.75, T, 0.5, CheckNode::Exact, T);
        assert_eq!(out.r_upper, -0.75 + 0.5);

        let out = pe_update(0.0, 0.0, 0.0, 0.0, CheckNode::Exact, T);
        assert_eq!(
            [out.l_upper, out.l_lower, out.r_upper, out.r_lower].map(f64::abs),
            [0.0; 4]
        );
    }

    #[test]
    fn init_examples() {
        let code = construct_bhattacharyya(4, 2, 0.5).unwrap();
        let mem = init_messages(&[1000.0, -2.0, 0.5, -1000.0], &code, T).unwrap();
        assert_eq!(mem.r_column(0), &[40.0, 40.0, 0.0, 0.0]);
        assert_eq!(mem.l_column(2), &[40.0, -2.0, 0.5, -40.0]);
        assert!(mem.l_column(0).iter().chain(mem.l_column(1)).all(|&v| v == 0.0));
        assert!(mem.r_column(1).iter().chain(mem.r_column(2)).all(|&v| v == 0.0));

        let full = construct_bhattacharyya(4, 4, 0.5).unwrap();
        let mem = init_messages(&[1.0; 4], &full, T).unwrap();
        assert_eq!(mem.r_column(0), &[0.0; 4]);

        assert!(init_messages(&[1.0; 3], &code, T).is_err());
    }

    #[test]
    fn single_pe_by_hand() {
        let code = PolarCode::new(2, vec![1], Construction::Custom, None).unwrap();
        let cand = bp_decode(
            &[1.0, -2.0],
            &code,
            &StagePermutation::identity(1),
            &BpConfig::default(),
        )
        .unwrap();
        assert_eq!(cand.u_hat.to_string(), "01");
        assert_eq!(cand.x_hat.to_string(), "11");
        assert!(cand.valid);
        assert_eq!(cand.iterations, 1);
        assert_eq!(cand.pe_updates, 2);
    }

    #[test]
    fn zero_iterations_returns_initial_decisions() {
        let code = construct_bhattacharyya(8, 4, 0.5).unwrap();
        let llr = [1.0, -1.0, 2.0, -3.0, 0.5, 0.5, -0.5, 4.0];
        let cfg = BpConfig {
            max_iters: 0,
            ..BpConfig::default()
        };
        let cand = bp_decode(&llr, &code, &StagePermutation::identity(3), &cfg).unwrap();
        assert_eq!(cand.iterations, 0);
        assert_eq!(cand.pe_updates, 0);
        assert!(cand.u_hat.is_zero());
        assert_eq!(cand.x_hat.to_string(), "01010010");
        assert!(!cand.valid);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let code = construct_bhattacharyya(8, 4, 0.5).unwrap();
        let cfg = BpConfig::default();
        assert!(bp_decode(&[0.0; 8], &code, &StagePermutation::identity(2), &cfg).is_err());
        assert!(bp_decode(&[0.0; 7], &code, &StagePermutation::identity(3), &cfg).is_err());
        let crc_stop = BpConfig {
            stop: StopRule::Crc,
            ..cfg
        };
        assert_eq!(
            bp_decode(&[0.0; 8], &code, &StagePermutation::identity(3), &crc_stop),
            Err(PolarError::MissingCrc)
        );
    }
}
