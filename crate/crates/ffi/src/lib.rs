//! C ABI over `sdlab`. Handles are opaque; every fallible function returns an
//! [`SdlabStatus`] and writes results through out-pointers.

use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;

use sdlab::probit::{
    bundled_pima, load_pima, run_pima_experiment, write_csv, ExperimentConfig, ExperimentRow, GPriorSpec, Method,
    ProbitData, ProbitTest,
};
use sdlab::sd::ChainConfig;
use sdlab::toy::{bf_closed, estimate_toy};
use sdlab::RngStream;

mod error;

pub use error::{sdlab_last_error_message, SdlabStatus};
use error::{guard, invalid, null_arg, FfiError};

pub const SDLAB_MASK_BRIDGE: u32 = 1 << 0;
pub const SDLAB_MASK_CHIB: u32 = 1 << 1;
pub const SDLAB_MASK_IS: u32 = 1 << 2;
pub const SDLAB_MASK_MR: u32 = 1 << 3;
pub const SDLAB_MASK_VW: u32 = 1 << 4;
pub const SDLAB_MASK_ALL: u32 = 0x1f;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdlabMethod {
    Bridge = 0,
    Chib = 1,
    Is = 2,
    Mr = 3,
    Vw = 4,
}

impl From<Method> for SdlabMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Bridge => SdlabMethod::Bridge,
            Method::Chib => SdlabMethod::Chib,
            Method::Is => SdlabMethod::Is,
            Method::Mr => SdlabMethod::Mr,
            Method::Vw => SdlabMethod::Vw,
        }
    }
}

fn methods_from_mask(mask: u32) -> Result<Vec<Method>, FfiError> {
    if mask == 0 || mask & !SDLAB_MASK_ALL != 0 {
        return Err(invalid(format!("invalid method mask {mask:#x}")));
    }
    Ok(Method::ALL
        .iter()
        .enumerate()
        .filter(|(bit, _)| mask & (1 << bit) != 0)
        .map(|(_, &m)| m)
        .collect())
}

/// Toy-model estimates at one observation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SdlabToyEstimate {
    pub closed_form: f64,
    pub mr: f64,
    pub mr_se: f64,
    pub vw: f64,
    pub vw_se: f64,
    pub ratio_forward: f64,
    pub ratio_reciprocal: f64,
    pub coherence_stat: f64,
}

/// Chain and replication settings for [`sdlab_experiment_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SdlabExperimentOptions {
    /// Iterations per chain, burn-in included.
    pub iters: usize,
    pub burnin: usize,
    pub replicas: usize,
    pub seed: u64,
    /// Bitwise OR of `SDLAB_MASK_*`.
    pub methods: u32,
    /// Worker threads; 0 means the library default.
    pub threads: usize,
}

/// One `(method, replica)` cell. Values are NaN when absent or when `ok` is false.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SdlabRow {
    pub method: SdlabMethod,
    pub replica: usize,
    pub seed: u64,
    pub iters: usize,
    pub burnin: usize,
    pub bf_estimate: f64,
    pub log_bf: f64,
    pub rb_term: f64,
    pub ratio_term: f64,
    pub coherence_stat: f64,
    pub ok: bool,
}

impl From<&ExperimentRow> for SdlabRow {
    fn from(r: &ExperimentRow) -> Self {
        let v = |o: Option<f64>| o.unwrap_or(f64::NAN);
        SdlabRow {
            method: r.method.into(),
            replica: r.replica,
            seed: r.seed,
            iters: r.iters,
            burnin: r.burnin,
            bf_estimate: v(r.bf_estimate),
            log_bf: v(r.log_bf),
            rb_term: v(r.rb_term),
            ratio_term: v(r.ratio_term),
            coherence_stat: v(r.coherence_stat),
            ok: r.is_ok(),
        }
    }
}

/// Opaque probit data set.
pub struct SdlabProbitData {
    inner: ProbitData,
}

/// Opaque table of experiment rows, sorted by (method, replica).
pub struct SdlabExperiment {
    rows: Vec<ExperimentRow>,
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(null_arg(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, FfiError> {
    // SAFETY: callers pass either NULL or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| null_arg(name))
}

fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, FfiError> {
    // SAFETY: callers pass either NULL or a live handle from this library.
    unsafe { p.as_ref() }.ok_or_else(|| null_arg(name))
}

/// Closed-form `B₀₁(x)` of the toy model.
#[no_mangle]
pub extern "C" fn sdlab_toy_bf_closed(x: f64, out: *mut f64) -> SdlabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if !x.is_finite() {
            return Err(invalid("x must be finite"));
        }
        *out = bf_closed(x);
        Ok(())
    })
}

/// MR and VW estimates plus the coherence statistic on the toy model.
#[no_mangle]
pub extern "C" fn sdlab_toy_estimate(
    x: f64,
    iters: usize,
    burnin: usize,
    seed: u64,
    out: *mut SdlabToyEstimate,
) -> SdlabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = estimate_toy(x, ChainConfig::new(iters, burnin)?, RngStream::new(seed, 0))?;
        *out = SdlabToyEstimate {
            closed_form: r.closed_form,
            mr: r.mr.estimate,
            mr_se: r.mr.standard_error(),
            vw: r.vw.estimate,
            vw_se: r.vw.standard_error(),
            ratio_forward: r.ratio_forward.value,
            ratio_reciprocal: r.ratio_reciprocal.value,
            coherence_stat: r.coherence.statistic,
        };
        Ok(())
    })
}

/// Loads a `type,glu,bp,ped` CSV. Free the handle with [`sdlab_probit_data_free`].
///
/// # Safety
/// `path` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn sdlab_probit_data_load(path: *const c_char, out: *mut *mut SdlabProbitData) -> SdlabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let data = load_pima(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(SdlabProbitData { inner: data }));
        Ok(())
    })
}

/// The Pima test partition shipped with the library.
#[no_mangle]
pub extern "C" fn sdlab_probit_data_bundled(out: *mut *mut SdlabProbitData) -> SdlabStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(SdlabProbitData { inner: bundled_pima() }));
        Ok(())
    })
}

/// Number of observations, or 0 for NULL.
#[no_mangle]
pub extern "C" fn sdlab_probit_data_rows(data: *const SdlabProbitData) -> usize {
    ref_arg(data, "data").map_or(0, |d| d.inner.n())
}

/// # Safety
/// `data` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn sdlab_probit_data_free(data: *mut SdlabProbitData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Runs the replicated comparison, testing the last data column under a
/// unit-information g-prior. Free the result with [`sdlab_experiment_free`].
#[no_mangle]
pub extern "C" fn sdlab_experiment_run(
    data: *const SdlabProbitData,
    options: *const SdlabExperimentOptions,
    out: *mut *mut SdlabExperiment,
) -> SdlabStatus {
    guard(|| {
        let data = ref_arg(data, "data")?;
        let opts = ref_arg(options, "options")?;
        let out = out_arg(out, "out")?;
        let spec = GPriorSpec::unit_information(&data.inner);
        let test = ProbitTest::new(data.inner.clone(), spec)?;
        let mut config = ExperimentConfig::new(
            ChainConfig::new(opts.iters, opts.burnin)?,
            opts.replicas,
            opts.seed,
            methods_from_mask(opts.methods)?,
        );
        config.threads = (opts.threads > 0).then_some(opts.threads);
        let rows = run_pima_experiment(&test, &config)?;
        *out = Box::into_raw(Box::new(SdlabExperiment { rows }));
        Ok(())
    })
}

/// Number of rows, or 0 for NULL.
#[no_mangle]
pub extern "C" fn sdlab_experiment_len(exp: *const SdlabExperiment) -> usize {
    ref_arg(exp, "experiment").map_or(0, |e| e.rows.len())
}

#[no_mangle]
pub extern "C" fn sdlab_experiment_row(exp: *const SdlabExperiment, index: usize, out: *mut SdlabRow) -> SdlabStatus {
    guard(|| {
        let exp = ref_arg(exp, "experiment")?;
        let out = out_arg(out, "out")?;
        let row = exp
            .rows
            .get(index)
            .ok_or_else(|| invalid(format!("row {index} out of range ({} rows)", exp.rows.len())))?;
        *out = row.into();
        Ok(())
    })
}

/// Writes the harness CSV to `path`.
///
/// # Safety
/// `path` must be NULL or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sdlab_experiment_write_csv(exp: *const SdlabExperiment, path: *const c_char) -> SdlabStatus {
    guard(|| {
        let exp = ref_arg(exp, "experiment")?;
        let path = str_arg(path, "path")?;
        let file = File::create(path).map_err(|e| sdlab::Error::Io {
            path: path.into(),
            source: e,
        })?;
        write_csv(&exp.rows, BufWriter::new(file))?;
        Ok(())
    })
}

/// The harness CSV as a new string; release it with [`sdlab_string_free`].
#[no_mangle]
pub extern "C" fn sdlab_experiment_to_csv(exp: *const SdlabExperiment, out: *mut *mut c_char) -> SdlabStatus {
    guard(|| {
        let exp = ref_arg(exp, "experiment")?;
        let out = out_arg(out, "out")?;
        let mut buf = Vec::new();
        write_csv(&exp.rows, &mut buf)?;
        *out = CString::new(buf)
            .map_err(|_| invalid("CSV contains a NUL byte"))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `exp` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn sdlab_experiment_free(exp: *mut SdlabExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn sdlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
