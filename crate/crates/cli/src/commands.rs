use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use polarium::{
    bhattacharyya_parameters, bp_decode, bpl_decode, construct_bhattacharyya, construct_rm_polar,
    crc_append, encode, assemble_u, extract_info, row_weight, run_simulation_with_progress,
    sc_decode, scl_decode, write_csv, BitVector, BpConfig, BplConfig, CheckNode, CrcConfig,
    DecoderSpec, PolarCode, PolarError, SimConfig, StagePermutation,
};

use crate::args::{
    CheckNodeName, CodeArgs, ConstructArgs, DecodeArgs, DecoderArgs, DecoderName, EncodeArgs,
    Method, OutputArgs, PlotArgs, SimulateArgs,
};
use crate::plot;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<PolarError> for CliError {
    fn from(e: PolarError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn load_code(args: &CodeArgs) -> CliResult<PolarCode> {
    let code = if let Some(path) = &args.code {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        PolarCode::from_json(&text)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?
    } else {
        let n = args.block_len.expect("required by clap");
        let k = args.k.expect("required by clap");
        match args.method() {
            Method::Bhattacharyya => {
                if args.d.is_some() {
                    return Err(CliError::Usage(
                        "--d only applies to --method rm-polar".into(),
                    ));
                }
                construct_bhattacharyya(n, k, args.design_eps())?
            }
            Method::RmPolar => {
                let d = args
                    .d
                    .ok_or_else(|| CliError::Usage("--method rm-polar needs --d".into()))?;
                construct_rm_polar(n, k, d, args.design_eps())?
            }
        }
    };
    if args.crc && code.crc().is_none() {
        Ok(code.with_crc(Some(CrcConfig::CRC16))?)
    } else {
        Ok(code)
    }
}

fn read_input(path: Option<&Path>) -> CliResult<String> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| io_err(p, e)),
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Runtime(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn check_output(out: &OutputArgs) -> CliResult<()> {
    match &out.out {
        Some(p) if p.exists() && !out.force => Err(CliError::Runtime(format!(
            "{} already exists (use --force to overwrite)",
            p.display()
        ))),
        _ => Ok(()),
    }
}

fn emit(out: &OutputArgs, content: &str) -> CliResult<()> {
    match &out.out {
        Some(p) => {
            check_output(out)?;
            fs::write(p, content).map_err(|e| io_err(p, e))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Runtime(format!("stdout: {e}")))
        }
    }
}

/// Non-blank lines with their 1-based line numbers.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn check_node(name: CheckNodeName) -> CheckNode {
    match name {
        CheckNodeName::Exact => CheckNode::Exact,
        CheckNodeName::Minsum => CheckNode::minsum(),
    }
}

fn decoder_spec(name: DecoderName, args: &DecoderArgs) -> CliResult<DecoderSpec> {
    if !(args.clip > 0.0) {
        return Err(CliError::Usage("--clip must be positive".into()));
    }
    let cn = check_node(args.cn);
    Ok(match name {
        DecoderName::Sc => DecoderSpec::Sc,
        DecoderName::Scl => DecoderSpec::Scl { list: args.list },
        DecoderName::SclCrc => DecoderSpec::SclCrc { list: args.list },
        DecoderName::Bp => DecoderSpec::Bp {
            cfg: BpConfig {
                max_iters: args.iters,
                clip: args.clip,
                check_node: cn,
                ..BpConfig::default()
            },
            perm: args.perm.clone(),
        },
        DecoderName::Bpl => DecoderSpec::Bpl(BplConfig {
            list_size: args.list,
            max_iters: args.iters,
            permutation_seed: args.perm_seed,
            clip: args.clip,
            check_node: cn,
        }),
    })
}

/// scl-crc needs a CRC; CRC-16 is attached when the code has none.
fn code_for(decoder: DecoderName, code: &PolarCode) -> CliResult<PolarCode> {
    if decoder == DecoderName::SclCrc && code.crc().is_none() {
        Ok(code.with_crc(Some(CrcConfig::CRC16))?)
    } else {
        Ok(code.clone())
    }
}

pub fn construct(args: &ConstructArgs) -> CliResult<()> {
    check_output(&args.output)?;
    let code = load_code(&args.code)?;
    if args.show_z {
        let eps = match code.construction() {
            polarium::Construction::Bhattacharyya { design_eps }
            | polarium::Construction::RmPolar { design_eps, .. } => design_eps,
            polarium::Construction::Custom => args.code.design_eps(),
        };
        let z = bhattacharyya_parameters(code.stages(), eps)?;
        let mut report = String::from("index\tz\tweight\trole\n");
        for (i, zi) in z.iter().enumerate() {
            let role = if code.is_info(i) { "info" } else { "frozen" };
            let w = row_weight(i, code.stages())?;
            writeln!(report, "{i}\t{zi:.12e}\t{w}\t{role}").expect("string write");
        }
        let info: Vec<String> = code.info_set().iter().map(|i| i.to_string()).collect();
        writeln!(report, "info set: {{{}}}", info.join(",")).expect("string write");
        eprint!("{report}");
    }
    let mut json = code.to_json();
    json.push('\n');
    emit(&args.output, &json)
}

pub fn encode_cmd(args: &EncodeArgs) -> CliResult<()> {
    check_output(&args.output)?;
    let code = load_code(&args.code)?;
    let text = read_input(args.input.as_deref())?;
    let mut out = String::new();
    for (line_no, line) in numbered_lines(&text) {
        let data: BitVector = line
            .parse()
            .map_err(|e| CliError::Runtime(format!("line {line_no}: {e}")))?;
        if data.len() != code.data_bits() {
            return Err(CliError::Runtime(format!(
                "line {line_no}: expected {} payload bits, got {}",
                code.data_bits(),
                data.len()
            )));
        }
        let payload = match code.crc() {
            Some(crc) => crc_append(&data, crc),
            None => data,
        };
        let u = assemble_u(&payload, &code)?;
        let x = encode(&u, &code)?;
        writeln!(out, "{x}").expect("string write");
    }
    emit(&args.output, &out)
}

fn parse_llr_line(line: &str, line_no: usize, n: usize) -> CliResult<Vec<f64>> {
    let llr = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| CliError::Runtime(format!("line {line_no}: invalid LLR {t:?}")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if llr.len() != n {
        return Err(CliError::Runtime(format!(
            "line {line_no}: expected {n} LLRs, got {}",
            llr.len()
        )));
    }
    Ok(llr)
}

pub fn decode_cmd(args: &DecodeArgs) -> CliResult<()> {
    check_output(&args.output)?;
    let code = code_for(args.decoder, &load_code(&args.code)?)?;
    let spec = decoder_spec(args.decoder, &args.dec)?;
    let text = read_input(args.input.as_deref())?;
    let mut out = String::from("line\tpayload\tu_hat\tx_hat\tvalid\tselected\n");
    for (line_no, line) in numbered_lines(&text) {
        let llr = parse_llr_line(line, line_no, code.n())?;
        let (u_hat, x_hat, valid, selected) = match &spec {
            DecoderSpec::Sc => {
                let o = sc_decode(&llr, &code)?;
                (o.u_hat, o.x_hat, "-".to_string(), "-".to_string())
            }
            DecoderSpec::Scl { list } | DecoderSpec::SclCrc { list } => {
                let o = scl_decode(&llr, &code, *list, args.decoder == DecoderName::SclCrc)?;
                let valid = o.crc_passed.map_or("-".to_string(), |v| v.to_string());
                (o.u_hat, o.x_hat, valid, "-".to_string())
            }
            DecoderSpec::Bp { cfg, perm } => {
                let perm = match perm {
                    Some(p) => p.clone(),
                    None => StagePermutation::identity(code.stages()),
                };
                let o = bp_decode(&llr, &code, &perm, cfg)?;
                (o.u_hat, o.x_hat, o.valid.to_string(), "0".to_string())
            }
            DecoderSpec::Bpl(cfg) => {
                // Euclidean ranking is unchanged by the positive factor relating LLRs to y.
                let o = bpl_decode(&llr, &llr, &code, cfg)?;
                (
                    o.u_hat,
                    o.x_hat,
                    o.any_valid.to_string(),
                    o.selected_index.to_string(),
                )
            }
        };
        let info = extract_info(&u_hat, &code)?;
        let payload = BitVector::from(info.as_slice()[..code.data_bits()].to_vec());
        writeln!(out, "{line_no}\t{payload}\t{u_hat}\t{x_hat}\t{valid}\t{selected}")
            .expect("string write");
    }
    emit(&args.output, &out)
}

/// Worker count from POLARIUM_THREADS; 0 or unset uses all cores.
fn thread_cap() -> CliResult<usize> {
    match std::env::var("POLARIUM_THREADS") {
        Ok(v) if !v.trim().is_empty() => v.trim().parse::<usize>().map_err(|_| {
            CliError::Usage(format!("POLARIUM_THREADS must be a non-negative integer, got {v:?}"))
        }),
        _ => Ok(0),
    }
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    check_output(&args.output)?;
    if args.decoder.is_empty() {
        return Err(CliError::Usage("no decoder given".into()));
    }
    let threads = thread_cap()?;
    let base = load_code(&args.code)?;
    let mut configs = Vec::new();
    for &name in &args.decoder {
        let mut cfg = SimConfig::new(
            code_for(name, &base)?,
            decoder_spec(name, &args.dec)?,
            args.ebn0,
        );
        cfg.max_frames = args.max_frames;
        cfg.min_block_errors = args.min_block_errors;
        cfg.master_seed = args.seed;
        cfg.all_zero = args.all_zero;
        cfg.threads = threads;
        cfg.validate()?;
        configs.push(cfg);
    }
    let mut results = Vec::new();
    for cfg in &configs {
        let label = format!("{} {}", cfg.decoder.name(), cfg.code.label());
        let stats = run_simulation_with_progress(cfg, |s| {
            if !args.quiet {
                eprintln!(
                    "{label} Eb/N0 {:.2} dB: frames {} block errors {} BER {:.3e} BLER {:.3e}",
                    s.ebn0_db, s.frames, s.block_errors, s.ber, s.bler
                );
            }
        })?;
        results.push(stats);
    }
    let csv = write_csv(configs.iter().zip(results.iter().map(|s| s.as_slice())));
    emit(&args.output, &csv)
}

pub fn plot_cmd(args: &PlotArgs) -> CliResult<()> {
    check_output(&args.output)?;
    let mut rows = Vec::new();
    for path in &args.inputs {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        rows.extend(
            plot::parse_csv(&text)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?,
        );
    }
    let svg = plot::render(&rows, args.metric, args.title.as_deref())
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(&args.output, &svg)
}
