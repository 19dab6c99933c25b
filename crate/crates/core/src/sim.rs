//! Monte-Carlo BER/BLER simulation over BPSK/AWGN.
//!
//! Every frame draws its payload and noise from streams keyed by
//! (master seed, SNR index, frame index). Frames are decoded in fixed-size
//! batches on a worker pool and merged in frame order, and a point stops at
//! the exact frame where its stopping rule triggers, so results do not
//! depend on the number of worker threads.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::bits::BitVector;
use crate::bp::{BpConfig, BpDecoder, StagePermutation, DEFAULT_CLIP};
use crate::bpl::{BplConfig, BplDecoder};
use crate::channel::{awgn, bpsk_modulate, frame_seed, frame_streams, llr_from_channel, sigma_from_ebn0};
use crate::code::PolarCode;
use crate::crc::crc_append;
use crate::encode::{assemble_u, encode, extract_info};
use crate::error::{PolarError, Result};
use crate::sc::{sc_decode, scl_decode};

/// Frames decoded per parallel batch.
const BATCH: u64 = 128;

pub const DEFAULT_MAX_FRAMES: u64 = 1_000_000;
pub const DEFAULT_MIN_BLOCK_ERRORS: u64 = 100;

/// CSV header of [`write_csv`].
pub const CSV_HEADER: &str = "decoder,N,k,construction,list,iters_max,ebn0_db,frames,bit_errors,block_errors,ber,bler,avg_iters,pe_updates,valid_fraction";

#[derive(Debug, Clone, PartialEq)]
pub enum DecoderSpec {
    Sc,
    Scl { list: usize },
    SclCrc { list: usize },
    Bp { cfg: BpConfig, perm: Option<StagePermutation> },
    Bpl(BplConfig),
}

impl DecoderSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderSpec::Sc => "sc",
            DecoderSpec::Scl { .. } => "scl",
            DecoderSpec::SclCrc { .. } => "scl-crc",
            DecoderSpec::Bp { .. } => "bp",
            DecoderSpec::Bpl(_) => "bpl",
        }
    }

    pub fn list_size(&self) -> usize {
        match self {
            DecoderSpec::Sc | DecoderSpec::Bp { .. } => 1,
            DecoderSpec::Scl { list } | DecoderSpec::SclCrc { list } => *list,
            DecoderSpec::Bpl(cfg) => cfg.list_size,
        }
    }

    pub fn max_iters(&self) -> usize {
        match self {
            DecoderSpec::Bp { cfg, .. } => cfg.max_iters,
            DecoderSpec::Bpl(cfg) => cfg.max_iters,
            _ => 0,
        }
    }

    /// Channel LLR saturation used for this decoder.
    pub fn clip(&self) -> f64 {
        match self {
            DecoderSpec::Bp { cfg, .. } => cfg.clip,
            DecoderSpec::Bpl(cfg) => cfg.clip,
            _ => DEFAULT_CLIP,
        }
    }
}

/// Eb/N0 grid `start, start + step, ...` up to and including `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbN0Sweep {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl EbN0Sweep {
    pub fn single(ebn0_db: f64) -> Self {
        EbN0Sweep {
            start: ebn0_db,
            step: 1.0,
            stop: ebn0_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(PolarError::InvalidConfig(format!(
                "invalid Eb/N0 sweep {}:{}:{}",
                self.start, self.step, self.stop
            )));
        }
        if self.stop < self.start {
            return Err(PolarError::InvalidConfig(format!(
                "sweep stop {} below start {}",
                self.stop, self.start
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let v = self.start + i as f64 * self.step;
                // keep grid values free of accumulated binary noise
                (v * 1e9).round() / 1e9
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub code: PolarCode,
    pub decoder: DecoderSpec,
    pub sweep: EbN0Sweep,
    pub max_frames: u64,
    pub min_block_errors: u64,
    pub master_seed: u64,
    /// Send zero data bits instead of random payloads.
    pub all_zero: bool,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
}

impl SimConfig {
    pub fn new(code: PolarCode, decoder: DecoderSpec, sweep: EbN0Sweep) -> Self {
        SimConfig {
            code,
            decoder,
            sweep,
            max_frames: DEFAULT_MAX_FRAMES,
            min_block_errors: DEFAULT_MIN_BLOCK_ERRORS,
            master_seed: 0,
            all_zero: false,
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        if self.max_frames == 0 {
            return Err(PolarError::InvalidConfig("max_frames must be at least 1".into()));
        }
        if self.min_block_errors == 0 {
            return Err(PolarError::InvalidConfig(
                "min_block_errors must be at least 1".into(),
            ));
        }
        if self.code.k() == 0 {
            return Err(PolarError::ZeroRate);
        }
        Worker::new(&self.code, &self.decoder)?;
        match &self.decoder {
            DecoderSpec::SclCrc { .. } if self.code.crc().is_none() => Err(PolarError::MissingCrc),
            DecoderSpec::Scl { list } | DecoderSpec::SclCrc { list } if *list == 0 => Err(
                PolarError::InvalidConfig("list size must be at least 1".into()),
            ),
            DecoderSpec::Bp { perm: Some(p), .. } if p.stages() != self.code.stages() => {
                Err(PolarError::InvalidPermutation(format!(
                    "permutation has {} stages, code has {}",
                    p.stages(),
                    self.code.stages()
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Accumulated results of one Eb/N0 point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub ber: f64,
    pub bler: f64,
    pub avg_iterations: f64,
    /// BP/BPL: PE updates; SC/SCL: f/g evaluations.
    pub total_pe_updates: u64,
    /// Fraction of frames with a valid BP codeword (BP and BPL only).
    pub valid_fraction: Option<f64>,
}

/// Decoder state reused across frames on one worker.
enum Worker<'a> {
    Sc,
    Scl { list: usize, crc: bool },
    Bp(BpDecoder<'a>),
    Bpl(BplDecoder<'a>),
}

impl<'a> Worker<'a> {
    fn new(code: &'a PolarCode, spec: &DecoderSpec) -> Result<Self> {
        Ok(match spec {
            DecoderSpec::Sc => Worker::Sc,
            DecoderSpec::Scl { list } => Worker::Scl { list: *list, crc: false },
            DecoderSpec::SclCrc { list } => Worker::Scl { list: *list, crc: true },
            DecoderSpec::Bp { cfg, perm } => {
                let perm = perm.clone().unwrap_or_else(|| StagePermutation::identity(code.stages()));
                Worker::Bp(BpDecoder::new(code, perm, *cfg)?)
            }
            DecoderSpec::Bpl(cfg) => Worker::Bpl(BplDecoder::new(code, cfg)?),
        })
    }
}

/// What one decoded frame contributes to the accumulators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOutcome {
    pub bit_errors: u64,
    pub block_error: bool,
    /// Iterations per constituent BP decoder (0 for SC/SCL).
    pub iterations: f64,
    pub pe_updates: u64,
    pub valid: Option<bool>,
}

/// The payload a frame transmits: data bits (zero or random) plus the CRC if the code has one.
fn draw_payload<R: Rng>(code: &PolarCode, all_zero: bool, rng: &mut R) -> BitVector {
    let data_len = code.data_bits();
    let data = if all_zero {
        BitVector::zeros(data_len)
    } else {
        BitVector::from_bits((0..data_len).map(|_| rng.random::<bool>() as u8))
    };
    match code.crc() {
        Some(cfg) => crc_append(&data, cfg),
        None => data,
    }
}

fn run_frame(
    worker: &mut Worker<'_>,
    code: &PolarCode,
    sigma: f64,
    clip: f64,
    all_zero: bool,
    seed: u64,
) -> Result<FrameOutcome> {
    let (mut payload_rng, mut noise_rng) = frame_streams(seed);
    let payload = draw_payload(code, all_zero, &mut payload_rng);
    let x = encode(&assemble_u(&payload, code)?, code)?;
    let y = awgn(&bpsk_modulate(&x), sigma, &mut noise_rng);
    let llr = llr_from_channel(&y, sigma, clip);

    let (u_hat, iterations, pe_updates, valid) = match worker {
        Worker::Sc => {
            let out = sc_decode(&llr, code)?;
            (out.u_hat, 0.0, out.llr_updates, None)
        }
        Worker::Scl { list, crc } => {
            let out = scl_decode(&llr, code, *list, *crc)?;
            (out.u_hat, 0.0, out.llr_updates, None)
        }
        Worker::Bp(dec) => {
            let out = dec.decode(&llr)?;
            (out.u_hat, out.iterations as f64, out.pe_updates, Some(out.valid))
        }
        Worker::Bpl(dec) => {
            let out = dec.decode(&y, &llr)?;
            let per_decoder = out.iterations() as f64 / out.candidates.len() as f64;
            let pe = out.pe_updates();
            (out.u_hat, per_decoder, pe, Some(out.any_valid))
        }
    };
    let decoded = extract_info(&u_hat, code)?;
    let bit_errors = decoded.hamming_distance(&payload) as u64;
    Ok(FrameOutcome {
        bit_errors,
        block_error: bit_errors > 0,
        iterations,
        pe_updates,
        valid,
    })
}

/// Decodes frames `first..first + count` of one point, in frame order.
fn run_batch(
    cfg: &SimConfig,
    snr_index: u64,
    sigma: f64,
    first: u64,
    count: u64,
) -> Result<Vec<FrameOutcome>> {
    let clip = cfg.decoder.clip();
    (first..first + count)
        .into_par_iter()
        .map_init(
            || Worker::new(&cfg.code, &cfg.decoder),
            |worker, frame| {
                let worker = worker.as_mut().map_err(|e| e.clone())?;
                let seed = frame_seed(cfg.master_seed, snr_index, frame);
                run_frame(worker, &cfg.code, sigma, clip, cfg.all_zero, seed)
            },
        )
        .collect()
}

#[derive(Default)]
struct Accumulator {
    frames: u64,
    bit_errors: u64,
    block_errors: u64,
    iterations: f64,
    pe_updates: u64,
    valid: u64,
    has_valid: bool,
}

impl Accumulator {
    fn push(&mut self, o: &FrameOutcome) {
        self.frames += 1;
        self.bit_errors += o.bit_errors;
        self.block_errors += o.block_error as u64;
        self.iterations += o.iterations;
        self.pe_updates += o.pe_updates;
        if let Some(v) = o.valid {
            self.has_valid = true;
            self.valid += v as u64;
        }
    }

    fn finish(self, ebn0_db: f64, k: usize) -> SimStats {
        let frames = self.frames.max(1) as f64;
        SimStats {
            ebn0_db,
            frames: self.frames,
            bit_errors: self.bit_errors,
            block_errors: self.block_errors,
            ber: self.bit_errors as f64 / (frames * k as f64),
            bler: self.block_errors as f64 / frames,
            avg_iterations: self.iterations / frames,
            total_pe_updates: self.pe_updates,
            valid_fraction: self.has_valid.then(|| self.valid as f64 / frames),
        }
    }
}

/// Simulates one Eb/N0 point; `snr_index` selects the frame seeds.
pub fn run_point(cfg: &SimConfig, snr_index: u64, ebn0_db: f64) -> Result<SimStats> {
    let sigma = sigma_from_ebn0(ebn0_db, cfg.code.rate())?;
    let mut acc = Accumulator::default();
    let mut next = 0u64;
    'frames: while next < cfg.max_frames {
        let count = BATCH.min(cfg.max_frames - next);
        for outcome in run_batch(cfg, snr_index, sigma, next, count)? {
            acc.push(&outcome);
            if acc.block_errors >= cfg.min_block_errors {
                break 'frames;
            }
        }
        next += count;
    }
    Ok(acc.finish(ebn0_db, cfg.code.k()))
}

/// Runs the whole sweep, calling `progress` after each point.
pub fn run_simulation_with_progress(
    cfg: &SimConfig,
    mut progress: impl FnMut(&SimStats),
) -> Result<Vec<SimStats>> {
    cfg.validate()?;
    let pool = if cfg.threads == 0 {
        None
    } else {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| PolarError::InvalidConfig(format!("thread pool: {e}")))?,
        )
    };
    let mut stats = Vec::new();
    for (i, ebn0) in cfg.sweep.points().into_iter().enumerate() {
        let point = match &pool {
            Some(pool) => pool.install(|| run_point(cfg, i as u64, ebn0))?,
            None => run_point(cfg, i as u64, ebn0)?,
        };
        progress(&point);
        stats.push(point);
    }
    Ok(stats)
}

pub fn run_simulation(cfg: &SimConfig) -> Result<Vec<SimStats>> {
    run_simulation_with_progress(cfg, |_| {})
}

/// One CSV data row (no trailing newline).
pub fn csv_row(cfg: &SimConfig, s: &SimStats) -> String {
    let mut row = String::new();
    write!(
        row,
        "{},{},{},{},{},{},{},{},{},{},{:.6e},{:.6e},{:.4},{},",
        cfg.decoder.name(),
        cfg.code.n(),
        cfg.code.k(),
        cfg.code.construction().name(),
        cfg.decoder.list_size(),
        cfg.decoder.max_iters(),
        s.ebn0_db,
        s.frames,
        s.bit_errors,
        s.block_errors,
        s.ber,
        s.bler,
        s.avg_iterations,
        s.total_pe_updates,
    )
    .expect("string write");
    if let Some(v) = s.valid_fraction {
        write!(row, "{v:.6}").expect("string write");
    }
    row
}

/// Header plus one row per point of each (config, stats) run.
pub fn write_csv<'a>(runs: impl IntoIterator<Item = (&'a SimConfig, &'a [SimStats])>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (cfg, stats) in runs {
        for s in stats {
            out.push_str(&csv_row(cfg, s));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::construct_bhattacharyya;

    fn small_cfg(decoder: DecoderSpec) -> SimConfig {
        let code = construct_bhattacharyya(16, 8, 0.5).unwrap();
        let mut cfg = SimConfig::new(code, decoder, EbN0Sweep { start: 1.0, step: 1.0, stop: 3.0 });
        cfg.max_frames = 300;
        cfg.min_block_errors = 20;
        cfg.master_seed = 5;
        cfg
    }

    #[test]
    fn sweep_points() {
        let s = EbN0Sweep { start: 1.0, step: 0.25, stop: 2.0 };
        assert_eq!(s.points(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        let s = EbN0Sweep { start: 0.0, step: 0.1, stop: 0.3 };
        assert_eq!(s.points(), vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(EbN0Sweep::single(2.5).points(), vec![2.5]);
        assert!(EbN0Sweep { start: 1.0, step: 0.0, stop: 2.0 }.validate().is_err());
        assert!(EbN0Sweep { start: 3.0, step: 1.0, stop: 2.0 }.validate().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_cfg(DecoderSpec::Sc);
        cfg.max_frames = 0;
        assert!(run_simulation(&cfg).is_err());
        let mut cfg = small_cfg(DecoderSpec::Sc);
        cfg.min_block_errors = 0;
        assert!(run_simulation(&cfg).is_err());
        let cfg = small_cfg(DecoderSpec::SclCrc { list: 4 });
        assert_eq!(run_simulation(&cfg), Err(PolarError::MissingCrc));
    }

    #[test]
    fn stats_invariants() {
        for decoder in [
            DecoderSpec::Sc,
            DecoderSpec::Scl { list: 4 },
            DecoderSpec::Bp { cfg: BpConfig::default(), perm: None },
            DecoderSpec::Bpl(BplConfig { list_size: 4, ..BplConfig::default() }),
        ] {
            let cfg = small_cfg(decoder);
            for s in run_simulation(&cfg).unwrap() {
                assert!(s.frames >= 1 && s.frames <= 300);
                assert!(s.block_errors <= s.frames);
                assert!(s.bit_errors >= s.block_errors);
                assert!(s.bit_errors <= s.frames * 8);
                assert_eq!(s.bler, s.block_errors as f64 / s.frames as f64);
                assert_eq!(s.ber, s.bit_errors as f64 / (s.frames * 8) as f64);
                assert!(s.block_errors == 20 || s.frames == 300);
            }
        }
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let mut cfg = small_cfg(DecoderSpec::Bpl(BplConfig { list_size: 2, ..BplConfig::default() }));
        cfg.sweep = EbN0Sweep::single(300.0);
        cfg.max_frames = 50;
        let s = &run_simulation(&cfg).unwrap()[0];
        assert_eq!((s.bit_errors, s.block_errors, s.frames), (0, 0, 50));
        assert_eq!(s.valid_fraction, Some(1.0));
        assert_eq!(s.avg_iterations, 1.0);
    }

    #[test]
    fn csv_layout() {
        let cfg = small_cfg(DecoderSpec::Sc);
        let stats = SimStats {
            ebn0_db: 2.5,
            frames: 10,
            bit_errors: 3,
            block_errors: 1,
            ber: 3.0 / 80.0,
            bler: 0.1,
            avg_iterations: 0.0,
            total_pe_updates: 640,
            valid_fraction: None,
        };
        let text = write_csv([(&cfg, std::slice::from_ref(&stats))]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(
            lines[1],
            "sc,16,8,bhattacharyya,1,0,2.5,10,3,1,3.750000e-2,1.000000e-1,0.0000,640,"
        );
        assert_eq!(lines[1].split(',').count(), CSV_HEADER.split(',').count());
    }
}
