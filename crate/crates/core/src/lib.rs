//! Polar codes with belief propagation list (BPL) decoding.
//!
//! BPL runs L independent belief-propagation decoders, each on a different
//! stage permutation of the polar factor graph, keeps the candidates that
//! satisfy x̂ = û·G, and returns the one closest to the channel output in
//! Euclidean distance. The crate also provides Bhattacharyya and RM-polar
//! constructions, SC/SCL(+CRC) baselines, a brute-force ML oracle, and a
//! reproducible Monte-Carlo AWGN simulator.
//!
//! Indexing is natural (not bit-reversed): x = u·F^{⊗n} with F = [1 0; 1 1],
//! and stage j of a factor graph couples rows i and i + 2^(π_j - 1).

pub mod bits;
pub mod bp;
pub mod bpl;
pub mod channel;
pub mod code;
pub mod crc;
pub mod encode;
pub mod error;
pub mod sc;
pub mod sim;

pub use bits::BitVector;
pub use bp::{
    boxplus, bp_decode, init_messages, pe_update, separations_from_permutation, BpConfig,
    BpDecoder, CheckNode, DecodeCandidate, MessageMemory, PeOutput, StagePermutation, StopRule,
    DEFAULT_CLIP, DEFAULT_MAX_ITERS, DEFAULT_MINSUM_SCALE,
};
pub use bpl::{
    bpl_decode, euclidean_select, select_permutations, select_permutations_from, BplConfig,
    BplDecoder, BplResult,
};
pub use channel::{awgn, bpsk_modulate, hard_slice, llr_from_channel, sigma_from_ebn0};
pub use code::{
    bhattacharyya_parameters, construct_bhattacharyya, construct_rm_polar, row_weight,
    Construction, PolarCode, DEFAULT_DESIGN_EPS,
};
pub use crc::{crc_append, crc_check, CrcConfig};
pub use encode::{assemble_u, encode, extract_info, g_matrix_check, reencode};
pub use error::{PolarError, Result};
pub use sc::{ml_decode_bruteforce, sc_decode, sc_f, sc_g, scl_decode, ScOutput, SclOutput};
pub use sim::{
    run_point, run_simulation, run_simulation_with_progress, write_csv, DecoderSpec, EbN0Sweep,
    SimConfig, SimStats,
};
