//! Python bindings: `import polarium_py`.

use polarium as core;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: core::PolarError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bits_from(values: Vec<u8>) -> PyResult<core::BitVector> {
    if values.iter().any(|&b| b > 1) {
        return Err(PyValueError::new_err("bits must be 0 or 1"));
    }
    Ok(core::BitVector::from(values))
}

/// Bits as a Python list of ints (a `Vec<u8>` would become `bytes`).
fn to_list(bits: &[u8]) -> Vec<u32> {
    bits.iter().map(|&b| b as u32).collect()
}

fn check_node(name: &str) -> PyResult<core::CheckNode> {
    match name {
        "exact" => Ok(core::CheckNode::Exact),
        "minsum" => Ok(core::CheckNode::minsum()),
        other => Err(PyValueError::new_err(format!(
            "check_node must be 'exact' or 'minsum', got {other:?}"
        ))),
    }
}

#[pyclass(name = "PolarCode", module = "polarium_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPolarCode {
    inner: core::PolarCode,
}

#[pymethods]
impl PyPolarCode {
    /// Code from an explicit information set.
    #[new]
    fn new(n: usize, info_set: Vec<usize>) -> PyResult<Self> {
        let inner = core::PolarCode::new(n, info_set, core::Construction::Custom, None).map_err(err)?;
        Ok(PyPolarCode { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n, k, design_eps = core::DEFAULT_DESIGN_EPS))]
    fn bhattacharyya(n: usize, k: usize, design_eps: f64) -> PyResult<Self> {
        let inner = core::construct_bhattacharyya(n, k, design_eps).map_err(err)?;
        Ok(PyPolarCode { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n, k, d, design_eps = core::DEFAULT_DESIGN_EPS))]
    fn rm_polar(n: usize, k: usize, d: u64, design_eps: f64) -> PyResult<Self> {
        let inner = core::construct_rm_polar(n, k, d, design_eps).map_err(err)?;
        Ok(PyPolarCode { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = core::PolarCode::from_json(text).map_err(err)?;
        Ok(PyPolarCode { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// Copy of the code with CRC-16/CCITT on the last 16 information bits.
    fn with_crc16(&self) -> PyResult<Self> {
        let inner = self
            .inner
            .with_crc(Some(core::CrcConfig::CRC16))
            .map_err(err)?;
        Ok(PyPolarCode { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn stages(&self) -> usize {
        self.inner.stages()
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.inner.rate()
    }

    #[getter]
    fn data_bits(&self) -> usize {
        self.inner.data_bits()
    }

    #[getter]
    fn info_set(&self) -> Vec<usize> {
        self.inner.info_set().to_vec()
    }

    #[getter]
    fn frozen_set(&self) -> Vec<usize> {
        self.inner.frozen_set()
    }

    #[getter]
    fn construction(&self) -> &'static str {
        self.inner.construction().name()
    }

    #[getter]
    fn has_crc(&self) -> bool {
        self.inner.crc().is_some()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    /// Codeword for `data_bits` payload bits (the CRC is appended when present).
    fn encode(&self, payload: Vec<u8>) -> PyResult<Vec<u32>> {
        let data = bits_from(payload)?;
        if data.len() != self.inner.data_bits() {
            return Err(PyValueError::new_err(format!(
                "expected {} payload bits, got {}",
                self.inner.data_bits(),
                data.len()
            )));
        }
        let payload = match self.inner.crc() {
            Some(crc) => core::crc_append(&data, crc),
            None => data,
        };
        let u = core::assemble_u(&payload, &self.inner).map_err(err)?;
        Ok(to_list(&core::encode(&u, &self.inner).map_err(err)?))
    }

    /// Information bits of a full input word.
    fn extract_info(&self, u: Vec<u8>) -> PyResult<Vec<u32>> {
        let u = bits_from(u)?;
        Ok(to_list(&core::extract_info(&u, &self.inner).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("PolarCode({})", self.inner.label())
    }

    fn __eq__(&self, other: PyRef<'_, PyPolarCode>) -> bool {
        self.inner == other.inner
    }
}

/// Bhattacharyya parameters of the 2^stages synthesized channels.
#[pyfunction]
#[pyo3(signature = (stages, design_eps = core::DEFAULT_DESIGN_EPS))]
fn bhattacharyya_parameters(stages: usize, design_eps: f64) -> PyResult<Vec<f64>> {
    core::bhattacharyya_parameters(stages, design_eps).map_err(err)
}

/// x = u·F^{⊗n} over GF(2).
#[pyfunction]
fn polar_transform(u: Vec<u8>) -> PyResult<Vec<u32>> {
    if !u.len().is_power_of_two() {
        return Err(PyValueError::new_err("length must be a power of two"));
    }
    let mut x = bits_from(u)?.into_inner();
    core::encode::polar_transform(&mut x);
    Ok(to_list(&x))
}

#[pyfunction]
fn sigma_from_ebn0(ebn0_db: f64, rate: f64) -> PyResult<f64> {
    core::sigma_from_ebn0(ebn0_db, rate).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (y, sigma, clip = core::DEFAULT_CLIP))]
fn llr_from_channel(y: Vec<f64>, sigma: f64, clip: f64) -> Vec<f64> {
    core::llr_from_channel(&y, sigma, clip)
}

fn decoded<'py>(
    py: Python<'py>,
    code: &core::PolarCode,
    u_hat: &core::BitVector,
    x_hat: &core::BitVector,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let info = core::extract_info(u_hat, code).map_err(err)?;
    d.set_item("payload", to_list(&info.as_slice()[..code.data_bits()]))?;
    d.set_item("u_hat", to_list(u_hat))?;
    d.set_item("x_hat", to_list(x_hat))?;
    Ok(d)
}

#[pyfunction]
fn sc_decode<'py>(
    py: Python<'py>,
    llr: Vec<f64>,
    code: PyRef<'_, PyPolarCode>,
) -> PyResult<Bound<'py, PyDict>> {
    let o = core::sc_decode(&llr, &code.inner).map_err(err)?;
    let d = decoded(py, &code.inner, &o.u_hat, &o.x_hat)?;
    d.set_item("llr_updates", o.llr_updates)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (llr, code, list_size = 8, use_crc = false))]
fn scl_decode<'py>(
    py: Python<'py>,
    llr: Vec<f64>,
    code: PyRef<'_, PyPolarCode>,
    list_size: usize,
    use_crc: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let o = core::scl_decode(&llr, &code.inner, list_size, use_crc).map_err(err)?;
    let d = decoded(py, &code.inner, &o.u_hat, &o.x_hat)?;
    d.set_item("path_metric", o.path_metric)?;
    d.set_item("crc_passed", o.crc_passed)?;
    d.set_item("llr_updates", o.llr_updates)?;
    Ok(d)
}

/// One BP decoder; `perm` is a stage order such as [3, 2, 1] (identity by default).
#[pyfunction]
#[pyo3(signature = (llr, code, max_iters = core::DEFAULT_MAX_ITERS, perm = None, clip = core::DEFAULT_CLIP, check_node = "exact"))]
fn bp_decode<'py>(
    py: Python<'py>,
    llr: Vec<f64>,
    code: PyRef<'_, PyPolarCode>,
    max_iters: usize,
    perm: Option<Vec<usize>>,
    clip: f64,
    check_node: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let perm = match perm {
        Some(p) => core::StagePermutation::new(p).map_err(err)?,
        None => core::StagePermutation::identity(code.inner.stages()),
    };
    let cfg = core::BpConfig {
        max_iters,
        clip,
        check_node: self::check_node(check_node)?,
        ..core::BpConfig::default()
    };
    let o = core::bp_decode(&llr, &code.inner, &perm, &cfg).map_err(err)?;
    let d = decoded(py, &code.inner, &o.u_hat, &o.x_hat)?;
    d.set_item("valid", o.valid)?;
    d.set_item("iterations", o.iterations)?;
    d.set_item("pe_updates", o.pe_updates)?;
    Ok(d)
}

/// BPL decoding of channel output `y` with LLRs `llr`.
#[pyfunction]
#[pyo3(signature = (y, llr, code, list_size = 8, max_iters = core::DEFAULT_MAX_ITERS, perm_seed = 0, clip = core::DEFAULT_CLIP, check_node = "exact"))]
#[allow(clippy::too_many_arguments)]
fn bpl_decode<'py>(
    py: Python<'py>,
    y: Vec<f64>,
    llr: Vec<f64>,
    code: PyRef<'_, PyPolarCode>,
    list_size: usize,
    max_iters: usize,
    perm_seed: u64,
    clip: f64,
    check_node: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = core::BplConfig {
        list_size,
        max_iters,
        permutation_seed: perm_seed,
        clip,
        check_node: self::check_node(check_node)?,
    };
    let o = core::bpl_decode(&y, &llr, &code.inner, &cfg).map_err(err)?;
    let d = decoded(py, &code.inner, &o.u_hat, &o.x_hat)?;
    d.set_item("selected_index", o.selected_index)?;
    d.set_item("any_valid", o.any_valid)?;
    d.set_item("distances", o.distances.clone())?;
    d.set_item(
        "valid",
        o.candidates.iter().map(|c| c.valid).collect::<Vec<_>>(),
    )?;
    d.set_item("pe_updates", o.pe_updates())?;
    Ok(d)
}

/// Exhaustive ML decoding; returns (payload, codeword).
#[pyfunction]
fn ml_decode(y: Vec<f64>, code: PyRef<'_, PyPolarCode>) -> PyResult<(Vec<u32>, Vec<u32>)> {
    let (m, x) = core::ml_decode_bruteforce(&y, &code.inner).map_err(err)?;
    Ok((to_list(&m), to_list(&x)))
}

/// The default BPL stage orders, as lists of stage indices.
#[pyfunction]
#[pyo3(signature = (stages, list_size, seed = 0))]
fn select_permutations(stages: usize, list_size: usize, seed: u64) -> PyResult<Vec<Vec<usize>>> {
    Ok(core::select_permutations(stages, list_size, seed)
        .map_err(err)?
        .iter()
        .map(|p| p.pi().to_vec())
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn sim_config(
    code: &core::PolarCode,
    decoder: &str,
    ebn0: (f64, f64, f64),
    list_size: usize,
    max_iters: usize,
    max_frames: u64,
    min_block_errors: u64,
    seed: u64,
    perm_seed: u64,
    all_zero: bool,
    threads: usize,
) -> PyResult<core::SimConfig> {
    let mut code = code.clone();
    let spec = match decoder {
        "sc" => core::DecoderSpec::Sc,
        "scl" => core::DecoderSpec::Scl { list: list_size },
        "scl-crc" => {
            if code.crc().is_none() {
                code = code.with_crc(Some(core::CrcConfig::CRC16)).map_err(err)?;
            }
            core::DecoderSpec::SclCrc { list: list_size }
        }
        "bp" => core::DecoderSpec::Bp {
            cfg: core::BpConfig {
                max_iters,
                ..core::BpConfig::default()
            },
            perm: None,
        },
        "bpl" => core::DecoderSpec::Bpl(core::BplConfig {
            list_size,
            max_iters,
            permutation_seed: perm_seed,
            ..core::BplConfig::default()
        }),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown decoder {other:?} (sc, scl, scl-crc, bp, bpl)"
            )))
        }
    };
    let sweep = core::EbN0Sweep {
        start: ebn0.0,
        step: ebn0.1,
        stop: ebn0.2,
    };
    let mut cfg = core::SimConfig::new(code, spec, sweep);
    cfg.max_frames = max_frames;
    cfg.min_block_errors = min_block_errors;
    cfg.master_seed = seed;
    cfg.all_zero = all_zero;
    cfg.threads = threads;
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// Monte-Carlo sweep; returns the CSV text (header plus one row per point).
///
/// `ebn0` is (start, step, stop) in dB.
#[pyfunction]
#[pyo3(signature = (code, decoder = "bpl", ebn0 = (2.0, 1.0, 2.0), list_size = 8, max_iters = core::DEFAULT_MAX_ITERS, max_frames = 10_000, min_block_errors = 100, seed = 0, perm_seed = 0, all_zero = false, threads = 0))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    code: PyRef<'_, PyPolarCode>,
    decoder: &str,
    ebn0: (f64, f64, f64),
    list_size: usize,
    max_iters: usize,
    max_frames: u64,
    min_block_errors: u64,
    seed: u64,
    perm_seed: u64,
    all_zero: bool,
    threads: usize,
) -> PyResult<String> {
    let cfg = sim_config(
        &code.inner,
        decoder,
        ebn0,
        list_size,
        max_iters,
        max_frames,
        min_block_errors,
        seed,
        perm_seed,
        all_zero,
        threads,
    )?;
    let stats = py
        .detach(|| core::run_simulation(&cfg))
        .map_err(err)?;
    Ok(core::write_csv([(&cfg, stats.as_slice())]))
}

#[pymodule]
fn polarium_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolarCode>()?;
    m.add_function(wrap_pyfunction!(bhattacharyya_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(polar_transform, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_from_ebn0, m)?)?;
    m.add_function(wrap_pyfunction!(llr_from_channel, m)?)?;
    m.add_function(wrap_pyfunction!(sc_decode, m)?)?;
    m.add_function(wrap_pyfunction!(scl_decode, m)?)?;
    m.add_function(wrap_pyfunction!(bp_decode, m)?)?;
    m.add_function(wrap_pyfunction!(bpl_decode, m)?)?;
    m.add_function(wrap_pyfunction!(ml_decode, m)?)?;
    m.add_function(wrap_pyfunction!(select_permutations, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
