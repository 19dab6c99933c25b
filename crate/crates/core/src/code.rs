//! Code parameters and information-set construction.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::crc::CrcConfig;
use crate::error::{PolarError, Result};

/// Default design erasure probability for the Bhattacharyya construction.
pub const DEFAULT_DESIGN_EPS: f64 = 0.5;

/// How the information set was chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Construction {
    /// k smallest Bhattacharyya parameters of a BEC with erasure probability `design_eps`.
    Bhattacharyya { design_eps: f64 },
    /// Rows of weight <= `d` frozen first, then the k most reliable survivors.
    RmPolar { design_eps: f64, d: u64 },
    /// Information set supplied directly.
    Custom,
}

impl Construction {
    pub fn name(&self) -> &'static str {
        match self {
            Construction::Bhattacharyya { .. } => "bhattacharyya",
            Construction::RmPolar { .. } => "rm_polar",
            Construction::Custom => "custom",
        }
    }
}

/// A polar code: block length N = 2^n, information set A with |A| = k.
///
/// Frozen positions (the complement of A) always carry 0. When a CRC is
/// attached, `k` counts payload and CRC bits together; the CRC occupies the
/// last `width` payload positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodeDocument", into = "CodeDocument")]
pub struct PolarCode {
    block_len: usize,
    stages: usize,
    info_set: Vec<usize>,
    is_info: Vec<bool>,
    construction: Construction,
    crc: Option<CrcConfig>,
}

impl PolarCode {
    /// Builds a code from an explicit information set.
    pub fn new(
        block_len: usize,
        info_set: Vec<usize>,
        construction: Construction,
        crc: Option<CrcConfig>,
    ) -> Result<Self> {
        if block_len < 2 || !block_len.is_power_of_two() {
            return Err(PolarError::InvalidBlockLength(block_len));
        }
        let mut is_info = vec![false; block_len];
        for &i in &info_set {
            if i >= block_len {
                return Err(PolarError::InvalidInfoSet(format!(
                    "index {i} out of range for N = {block_len}"
                )));
            }
            if is_info[i] {
                return Err(PolarError::InvalidInfoSet(format!("duplicate index {i}")));
            }
            is_info[i] = true;
        }
        let info_set: Vec<usize> = (0..block_len).filter(|&i| is_info[i]).collect();
        if let Some(cfg) = &crc {
            cfg.validate()?;
            if cfg.width() > info_set.len() {
                return Err(PolarError::InvalidCrc(format!(
                    "{}-bit CRC does not fit into k = {}",
                    cfg.width,
                    info_set.len()
                )));
            }
        }
        Ok(PolarCode {
            block_len,
            stages: block_len.trailing_zeros() as usize,
            info_set,
            is_info,
            construction,
            crc,
        })
    }

    /// Block length N.
    pub fn n(&self) -> usize {
        self.block_len
    }

    /// Number of factor-graph stages, log2(N).
    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.block_len as f64
    }

    /// Sorted information positions.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.block_len).filter(|&i| !self.is_info[i]).collect()
    }

    pub fn is_info(&self, index: usize) -> bool {
        self.is_info[index]
    }

    pub fn is_frozen(&self, index: usize) -> bool {
        !self.is_info[index]
    }

    /// Per-position mask, true on information positions.
    pub fn info_mask(&self) -> &[bool] {
        &self.is_info
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn crc(&self) -> Option<&CrcConfig> {
        self.crc.as_ref()
    }

    /// Same information set, with `crc` attached (or removed).
    pub fn with_crc(&self, crc: Option<CrcConfig>) -> Result<Self> {
        PolarCode::new(
            self.block_len,
            self.info_set.clone(),
            self.construction,
            crc,
        )
    }

    /// Number of data bits, i.e. k minus the CRC width.
    pub fn data_bits(&self) -> usize {
        self.k() - self.crc.map_or(0, |c| c.width())
    }

    /// Short human label, e.g. `P(64,32)` or `P_RM(128,64,8)`.
    pub fn label(&self) -> String {
        match self.construction {
            Construction::RmPolar { d, .. } => format!("P_RM({},{},{})", self.block_len, self.k(), d),
            _ => format!("P({},{})", self.block_len, self.k()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("code serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PolarError::InvalidConfig(e.to_string()))
    }
}

/// On-disk form of a [`PolarCode`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CodeDocument {
    #[serde(rename = "N")]
    block_len: usize,
    k: usize,
    construction: String,
    design_eps: Option<f64>,
    d: Option<u64>,
    info_set: Vec<usize>,
    crc: Option<CrcConfig>,
}

impl From<PolarCode> for CodeDocument {
    fn from(code: PolarCode) -> Self {
        let (design_eps, d) = match code.construction {
            Construction::Bhattacharyya { design_eps } => (Some(design_eps), None),
            Construction::RmPolar { design_eps, d } => (Some(design_eps), Some(d)),
            Construction::Custom => (None, None),
        };
        CodeDocument {
            block_len: code.block_len,
            k: code.k(),
            construction: code.construction.name().to_string(),
            design_eps,
            d,
            info_set: code.info_set,
            crc: code.crc,
        }
    }
}

impl TryFrom<CodeDocument> for PolarCode {
    type Error = PolarError;

    fn try_from(doc: CodeDocument) -> Result<Self> {
        let need_eps = || {
            doc.design_eps
                .ok_or_else(|| PolarError::InvalidConfig("missing design_eps".into()))
        };
        let construction = match doc.construction.as_str() {
            "bhattacharyya" => Construction::Bhattacharyya {
                design_eps: need_eps()?,
            },
            "rm_polar" => Construction::RmPolar {
                design_eps: need_eps()?,
                d: doc
                    .d
                    .ok_or_else(|| PolarError::InvalidConfig("missing d".into()))?,
            },
            "custom" => Construction::Custom,
            other => {
                return Err(PolarError::InvalidConfig(format!(
                    "unknown construction {other:?}"
                )))
            }
        };
        if doc.info_set.len() != doc.k {
            return Err(PolarError::InvalidInfoSet(format!(
                "k = {} but info_set has {} entries",
                doc.k,
                doc.info_set.len()
            )));
        }
        PolarCode::new(doc.block_len, doc.info_set, construction, doc.crc)
    }
}

fn stage_count(block_len: usize) -> Result<usize> {
    if block_len < 2 || !block_len.is_power_of_two() {
        return Err(PolarError::InvalidBlockLength(block_len));
    }
    Ok(block_len.trailing_zeros() as usize)
}

/// Bhattacharyya parameters of all 2^n synthesized channels of a BEC(ε).
///
/// The bits of index i, most significant first, select the branch taken at
/// each recursion step: 0 takes the degraded channel (2z - z^2), 1 the
/// upgraded one (z^2).
pub fn bhattacharyya_parameters(stages: usize, design_eps: f64) -> Result<Vec<f64>> {
    if !(design_eps > 0.0 && design_eps < 1.0) {
        return Err(PolarError::InvalidErasureProbability(design_eps));
    }
    let mut z = vec![design_eps];
    for _ in 0..stages {
        z = z
            .iter()
            .flat_map(|&v| [2.0 * v - v * v, v * v])
            .collect();
    }
    Ok(z)
}

/// Indices of the `k` smallest values among `candidates`, sorted ascending.
/// Equal values prefer the higher index.
fn most_reliable(z: &[f64], candidates: impl Iterator<Item = usize>, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = candidates.collect();
    order.sort_by(|&a, &b| match z[a].partial_cmp(&z[b]).unwrap_or(Ordering::Equal) {
        Ordering::Equal => b.cmp(&a),
        o => o,
    });
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Bhattacharyya (BEC) construction: A holds the `k` smallest Z-values.
pub fn construct_bhattacharyya(block_len: usize, k: usize, design_eps: f64) -> Result<PolarCode> {
    let stages = stage_count(block_len)?;
    if k > block_len {
        return Err(PolarError::InvalidDimension { k, n: block_len });
    }
    let z = bhattacharyya_parameters(stages, design_eps)?;
    let info = most_reliable(&z, 0..block_len, k);
    PolarCode::new(
        block_len,
        info,
        Construction::Bhattacharyya { design_eps },
        None,
    )
}

/// Hamming weight of row `index` of F^{⊗n}, which is 2^popcount(index).
pub fn row_weight(index: usize, stages: usize) -> Result<u64> {
    if stages >= usize::BITS as usize || index >= 1 << stages {
        return Err(PolarError::RowOutOfRange { index, stages });
    }
    Ok(1u64 << index.count_ones())
}

/// RM-polar construction: rows with weight <= `d` are frozen, then the `k`
/// smallest Z-values among the remaining rows carry information.
pub fn construct_rm_polar(
    block_len: usize,
    k: usize,
    d: u64,
    design_eps: f64,
) -> Result<PolarCode> {
    let stages = stage_count(block_len)?;
    if k > block_len {
        return Err(PolarError::InvalidDimension { k, n: block_len });
    }
    let z = bhattacharyya_parameters(stages, design_eps)?;
    let survivors: Vec<usize> = (0..block_len)
        .filter(|&i| (1u64 << i.count_ones()) > d)
        .collect();
    if survivors.len() < k {
        return Err(PolarError::InfeasibleRmPolar {
            k,
            max_k: survivors.len(),
        });
    }
    let info = most_reliable(&z, survivors.into_iter(), k);
    PolarCode::new(
        block_len,
        info,
        Construction::RmPolar { design_eps, d },
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Row i of F^{⊗n} built as an explicit Kronecker power.
    fn kron_rows(stages: usize) -> Vec<Vec<u8>> {
        let mut g = vec![vec![1u8]];
        for _ in 0..stages {
            let m = g.len();
            let mut next = vec![vec![0u8; 2 * m]; 2 * m];
            for r in 0..m {
                for c in 0..m {
                    // F = [1 0; 1 1]
                    next[r][c] = g[r][c];
                    next[m + r][c] = g[r][c];
                    next[m + r][m + c] = g[r][c];
                }
            }
            g = next;
        }
        g
    }

    #[test]
    fn z_values_by_hand() {
        assert_eq!(bhattacharyya_parameters(1, 0.5).unwrap(), vec![0.75, 0.25]);
        let z = bhattacharyya_parameters(2, 0.5).unwrap();
        for (a, b) in z.iter().zip([0.9375, 0.5625, 0.4375, 0.0625]) {
            assert!((a - b).abs() < 1e-12);
        }
        let tiny = bhattacharyya_parameters(2, 1e-12).unwrap();
        assert!(tiny.iter().all(|&v| v < 1e-11));
    }

    #[test]
    fn z_rejects_bad_eps() {
        for eps in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(bhattacharyya_parameters(3, eps).is_err());
        }
    }

    #[test]
    fn z_values_ordered_within_unit_interval() {
        let z = bhattacharyya_parameters(4, 0.3).unwrap();
        assert!(z.iter().all(|&v| v > 0.0 && v < 1.0));
        // deeper recursions round 2z - z^2 up to exactly 1.0
        let z = bhattacharyya_parameters(8, 0.3).unwrap();
        assert!(z.iter().all(|&v| v > 0.0 && v <= 1.0));
        let prev = bhattacharyya_parameters(7, 0.3).unwrap();
        for (i, &parent) in prev.iter().enumerate() {
            assert!(z[2 * i] >= parent && parent >= z[2 * i + 1]);
        }
    }

    #[test]
    fn bhattacharyya_examples() {
        assert_eq!(construct_bhattacharyya(4, 2, 0.5).unwrap().info_set(), &[2, 3]);
        assert_eq!(construct_bhattacharyya(2, 1, 0.5).unwrap().info_set(), &[1]);
        let full = construct_bhattacharyya(16, 16, 0.5).unwrap();
        assert_eq!(full.info_set(), (0..16).collect::<Vec<_>>().as_slice());
        assert!(construct_bhattacharyya(8, 0, 0.5).unwrap().info_set().is_empty());
        assert_eq!(
            construct_bhattacharyya(4, 5, 0.5),
            Err(PolarError::InvalidDimension { k: 5, n: 4 })
        );
        assert!(construct_bhattacharyya(12, 4, 0.5).is_err());
    }

    #[test]
    fn ties_prefer_higher_index() {
        let z = [0.1, 0.2, 0.2, 0.3];
        assert_eq!(most_reliable(&z, 0..4, 2), vec![0, 2]);
    }

    #[test]
    fn row_weight_matches_kronecker_rows() {
        for stages in 1..=6 {
            let rows = kron_rows(stages);
            for (i, row) in rows.iter().enumerate() {
                let weight = row.iter().filter(|&&b| b == 1).count() as u64;
                assert_eq!(row_weight(i, stages).unwrap(), weight, "n={stages} i={i}");
            }
        }
        let w: Vec<u64> = (0..8).map(|i| row_weight(i, 3).unwrap()).collect();
        assert_eq!(w, vec![1, 2, 2, 4, 2, 4, 4, 8]);
        assert_eq!(row_weight(0, 9).unwrap(), 1);
        assert_eq!(row_weight(511, 9).unwrap(), 512);
        assert!(row_weight(8, 3).is_err());
    }

    #[test]
    fn rm_polar_examples() {
        let code = construct_rm_polar(8, 4, 2, 0.5).unwrap();
        assert_eq!(code.info_set(), &[3, 5, 6, 7]);
        for k in 0..=8 {
            assert_eq!(
                construct_rm_polar(8, k, 0, 0.5).unwrap().info_set(),
                construct_bhattacharyya(8, k, 0.5).unwrap().info_set()
            );
        }
        assert_eq!(
            construct_rm_polar(8, 5, 2, 0.5),
            Err(PolarError::InfeasibleRmPolar { k: 5, max_k: 4 })
        );
        let big = construct_rm_polar(2048, 1024, 16, 0.5).unwrap();
        assert_eq!(big.k(), 1024);
        assert!(big.info_set().iter().all(|&i| row_weight(i, 11).unwrap() > 16));
        assert_eq!(big.label(), "P_RM(2048,1024,16)");
    }

    #[test]
    fn new_validates() {
        assert!(PolarCode::new(6, vec![], Construction::Custom, None).is_err());
        assert!(PolarCode::new(4, vec![4], Construction::Custom, None).is_err());
        assert!(PolarCode::new(4, vec![1, 1], Construction::Custom, None).is_err());
        assert!(PolarCode::new(4, vec![3], Construction::Custom, Some(CrcConfig::CRC16)).is_err());
        let code = PolarCode::new(4, vec![3, 1], Construction::Custom, None).unwrap();
        assert_eq!(code.info_set(), &[1, 3]);
        assert_eq!(code.frozen_set(), vec![0, 2]);
    }

    #[test]
    fn json_document() {
        let code = construct_rm_polar(8, 4, 2, 0.5).unwrap();
        let value: serde_json::Value = serde_json::from_str(&code.to_json()).unwrap();
        assert_eq!(value["N"], 8);
        assert_eq!(value["k"], 4);
        assert_eq!(value["construction"], "rm_polar");
        assert_eq!(value["design_eps"], 0.5);
        assert_eq!(value["d"], 2);
        assert_eq!(value["info_set"], serde_json::json!([3, 5, 6, 7]));
        assert!(value["crc"].is_null());
        assert_eq!(PolarCode::from_json(&code.to_json()).unwrap(), code);

        let with_crc = construct_bhattacharyya(64, 32, 0.5)
            .unwrap()
            .with_crc(Some(CrcConfig::CRC16))
            .unwrap();
        assert_eq!(PolarCode::from_json(&with_crc.to_json()).unwrap(), with_crc);

        let bad = r#"{"N":4,"k":2,"construction":"bhattacharyya","design_eps":0.5,"d":null,"info_set":[2],"crc":null}"#;
        assert!(PolarCode::from_json(bad).is_err());
    }
}
