//! C interface to `dme-core`.
//!
//! Every function returns a [`DmeStatus`]; on failure the message is kept in
//! a thread-local slot readable with [`dme_last_error_message`]. Handles are
//! opaque and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dme_core::dme::{run_round, DmeConfig, Mode, RowsRule};
use dme_core::secagg::{AggregationRound, GroupVector};
use dme_core::{accounting, ddg, Error, Seed};

pub const DME_MODE_PROJECTED_DDG: u32 = 0;
pub const DME_MODE_PLAIN_DDG: u32 = 1;
pub const DME_MODE_CENTRAL_GAUSSIAN: u32 = 2;
pub const DME_MODE_PLAIN_MEAN: u32 = 3;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Infeasible = 3,
    Protocol = 4,
    Numerical = 5,
    Panic = 6,
}

/// Mirror of `dme_core::ddg::DdgParams`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmeDdgParams {
    pub c: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub beta: f64,
    pub modulus: u64,
    pub dim: usize,
}

impl From<ddg::DdgParams> for DmeDdgParams {
    fn from(p: ddg::DdgParams) -> Self {
        DmeDdgParams {
            c: p.c,
            gamma: p.gamma,
            sigma: p.sigma,
            beta: p.beta,
            modulus: p.modulus,
            dim: p.dim,
        }
    }
}

impl From<DmeDdgParams> for ddg::DdgParams {
    fn from(p: DmeDdgParams) -> Self {
        ddg::DdgParams {
            c: p.c,
            gamma: p.gamma,
            sigma: p.sigma,
            beta: p.beta,
            modulus: p.modulus,
            dim: p.dim,
        }
    }
}

/// Per-round figures. The epsilons are NaN for non-private modes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmeRoundSummary {
    pub m: usize,
    pub bits_per_client: u64,
    pub log2_modulus: u32,
    pub cdp_epsilon: f64,
    pub dp_epsilon: f64,
}

/// Opaque estimation config.
pub struct DmeConfigHandle(DmeConfig);

/// Opaque secure-aggregation accumulator.
pub struct DmeAggregator(AggregationRound);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DmeStatus {
    match e {
        Error::Infeasible(_) | Error::Degenerate(_) => DmeStatus::Infeasible,
        Error::Protocol(_) => DmeStatus::Protocol,
        Error::Numerical(_) => DmeStatus::Numerical,
        _ => DmeStatus::InvalidParameter,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DmeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DmeStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            DmeStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            DmeStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn param(msg: impl Into<String>) -> Fail {
    Fail::Core(Error::Parameter(msg.into()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dme_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the last error message on this thread, without the
/// terminating NUL; 0 when there is none.
#[no_mangle]
pub extern "C" fn dme_last_error_length() -> usize {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(0, |s| s.as_bytes().len()))
}

/// Copies the last error message into `buf` (truncated, always
/// NUL-terminated when `len > 0`) and returns the number of bytes written
/// before the NUL.
///
/// # Safety
/// `buf` must be valid for `len` bytes of writes, or null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn dme_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let bytes = slot.as_ref().map_or(&[][..], |s| s.as_bytes());
        let n = bytes.len().min(len - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Creates a config for `n` clients in dimension `d` with clip bound `c`
/// and per-round target `epsilon` (projected mode, automatic sketch size).
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn dme_config_new(
    n: usize,
    d: usize,
    c: f64,
    epsilon: f64,
    out: *mut *mut DmeConfigHandle,
) -> DmeStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let cfg = DmeConfig::new(n, d, c, epsilon);
        cfg.validate()?;
        *out = Box::into_raw(Box::new(DmeConfigHandle(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`dme_config_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dme_config_free(cfg: *mut DmeConfigHandle) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Selects one of the `DME_MODE_*` constants.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dme_config_set_mode(cfg: *mut DmeConfigHandle, mode: u32) -> DmeStatus {
    guard(|| {
        let cfg = as_mut(cfg, "cfg")?;
        cfg.0.mode = match mode {
            DME_MODE_PROJECTED_DDG => Mode::ProjectedDdg,
            DME_MODE_PLAIN_DDG => Mode::PlainDdg,
            DME_MODE_CENTRAL_GAUSSIAN => Mode::CentralGaussian,
            DME_MODE_PLAIN_MEAN => Mode::PlainMean,
            other => return Err(param(format!("unknown mode {other}"))),
        };
        Ok(())
    })
}

/// Sets the sketch dimension; 0 restores the automatic choice.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dme_config_set_sketch_dim(cfg: *mut DmeConfigHandle, m: usize) -> DmeStatus {
    guard(|| {
        let cfg = as_mut(cfg, "cfg")?;
        let mut next = cfg.0.clone();
        next.m = (m > 0).then_some(m);
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// Sets the number of sketch blocks.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dme_config_set_rows(cfg: *mut DmeConfigHandle, t: usize) -> DmeStatus {
    guard(|| {
        let cfg = as_mut(cfg, "cfg")?;
        let mut next = cfg.0.clone();
        next.rows = RowsRule::Fixed(t);
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// Sets the δ at which the approximate-DP epsilon is reported.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dme_config_set_delta(cfg: *mut DmeConfigHandle, delta: f64) -> DmeStatus {
    guard(|| {
        let cfg = as_mut(cfg, "cfg")?;
        let mut next = cfg.0.clone();
        next.delta = delta;
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dme_config_bits_per_client(cfg: *const DmeConfigHandle, out: *mut u64) -> DmeStatus {
    guard(|| {
        let cfg = as_ref(cfg, "cfg")?;
        let out = as_mut(out, "out")?;
        *out = cfg.0.bits_per_client()?;
        Ok(())
    })
}

/// Runs one round over `n_clients` row-major vectors of length `d` in `xs`,
/// writing the `d`-dimensional estimate to `estimate`.
///
/// # Safety
/// `xs` must hold `n_clients · d` doubles, `estimate` room for `d`, and
/// `summary` may be null.
#[no_mangle]
pub unsafe extern "C" fn dme_run_round(
    cfg: *const DmeConfigHandle,
    xs: *const f64,
    n_clients: usize,
    seed: u64,
    estimate: *mut f64,
    summary: *mut DmeRoundSummary,
) -> DmeStatus {
    guard(|| {
        let cfg = &as_ref(cfg, "cfg")?.0;
        let d = cfg.d;
        if n_clients != cfg.n {
            return Err(param(format!("config expects {} clients, got {n_clients}", cfg.n)));
        }
        let len = n_clients
            .checked_mul(d)
            .ok_or_else(|| param("n_clients · d overflows"))?;
        let data = slice(xs, len, "xs")?;
        let out = slice_mut(estimate, d, "estimate")?;
        let rows: Vec<Vec<f64>> = data.chunks(d.max(1)).map(<[f64]>::to_vec).collect();
        let (est, report) = run_round(&rows, cfg, Seed::new(seed))?;
        out.copy_from_slice(&est);
        if let Some(s) = summary.as_mut() {
            *s = DmeRoundSummary {
                m: report.m,
                bits_per_client: report.bits_per_client,
                log2_modulus: report.log2_modulus,
                cdp_epsilon: report.cdp_epsilon().unwrap_or(f64::NAN),
                dp_epsilon: report.dp_epsilon().unwrap_or(f64::NAN),
            };
        }
        Ok(())
    })
}

/// DDG parameters meeting concentrated-DP target `epsilon` for `n` clients
/// in (padded) dimension `d_pad`, with wraparound probability `delta_wrap`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dme_select_params(
    c: f64,
    n: usize,
    epsilon: f64,
    d_pad: usize,
    delta_wrap: f64,
    out: *mut DmeDdgParams,
) -> DmeStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = ddg::select_params(c, n, epsilon, d_pad, delta_wrap)?.into();
        Ok(())
    })
}

/// Concentrated-DP epsilon of `params` aggregated over `n` clients.
///
/// # Safety
/// `params` must be readable and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dme_ddg_epsilon(params: *const DmeDdgParams, n: usize, out: *mut f64) -> DmeStatus {
    guard(|| {
        let p: ddg::DdgParams = (*as_ref(params, "params")?).into();
        let out = as_mut(out, "out")?;
        *out = accounting::ddg_epsilon(&p, n)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn dme_aggregator_new(modulus: u64, dim: usize, out: *mut *mut DmeAggregator) -> DmeStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = Box::into_raw(Box::new(DmeAggregator(AggregationRound::new(modulus, dim)?)));
        Ok(())
    })
}

/// # Safety
/// `agg` must come from [`dme_aggregator_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dme_aggregator_free(agg: *mut DmeAggregator) {
    if !agg.is_null() {
        drop(Box::from_raw(agg));
    }
}

/// Adds one client message of `len` residues.
///
/// # Safety
/// `agg` must be a live handle and `residues` hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn dme_aggregator_absorb(agg: *mut DmeAggregator, residues: *const u64, len: usize) -> DmeStatus {
    guard(|| {
        let agg = &mut as_mut(agg, "agg")?.0;
        let msg = GroupVector::new(slice(residues, len, "residues")?.to_vec(), agg.modulus())?;
        agg.absorb(&msg)?;
        Ok(())
    })
}

/// # Safety
/// `agg` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn dme_aggregator_client_count(agg: *const DmeAggregator, out: *mut usize) -> DmeStatus {
    guard(|| {
        let agg = &as_ref(agg, "agg")?.0;
        *as_mut(out, "out")? = agg.client_count();
        Ok(())
    })
}

/// Writes the running sum; `len` must equal the aggregator dimension.
///
/// # Safety
/// `agg` must be a live handle and `out` hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn dme_aggregator_sum(agg: *const DmeAggregator, out: *mut u64, len: usize) -> DmeStatus {
    guard(|| {
        let agg = &as_ref(agg, "agg")?.0;
        if len != agg.dim() {
            return Err(param(format!(
                "output length {len} differs from dimension {}",
                agg.dim()
            )));
        }
        slice_mut(out, len, "out")?.copy_from_slice(agg.sum().residues());
        Ok(())
    })
}
