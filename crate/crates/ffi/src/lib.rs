//! C interface to the `mais` sampler.
//!
//! Targets, configurations and results are opaque handles created and freed
//! through this API. Every fallible function returns a [`MaisStatus`]; on
//! failure the message is available from [`mais_last_error_message`] on the
//! same thread. Enumerations are passed as plain integers so that an
//! out-of-range value from C is an error, not undefined behavior.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use mais::adaptation::{AdaptationKernel, RandomWalk};
use mais::samplers::{eval_budget, Initializer, LowerCovariance};
use mais::weighting::Partition;
use mais::{
    Algorithm, DenominatorScheme, Error, LogDensity, ProposalComponent, RunResult, SamplerConfig, TargetModel,
};

/// Status codes returned by the fallible functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaisStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    RuntimeError = 4,
    /// The requested quantity does not exist, e.g. `Z` of the MCMC baseline.
    Unavailable = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Values accepted by [`mais_config_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaisAlgorithm {
    StaticMis = 0,
    Rwis = 1,
    PopulationMais = 2,
    Gamis = 3,
    StandardPmc = 4,
    ParallelMh = 5,
}

/// Values accepted by [`mais_config_set_denominator`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaisDenominator {
    Standard = 0,
    Spatial = 1,
    Temporal = 2,
    Full = 3,
    /// Mixtures over blocks of consecutive iterations.
    TimeBlocks = 4,
}

/// Values accepted by [`mais_config_set_random_walk`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaisWalk {
    ParallelMh = 0,
    BlockMh = 1,
    MhWithinGibbs = 2,
}

/// A target density.
pub struct MaisTarget(Arc<TargetModel>);

/// A sampler configuration.
pub struct MaisConfig(SamplerConfig);

/// The output of one run.
pub struct MaisResult(RunResult);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: MaisStatus, msg: impl Into<String>) -> MaisStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> MaisStatus {
    let status = if e.is_config_error() {
        MaisStatus::ConfigError
    } else {
        MaisStatus::RuntimeError
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning a panic into [`MaisStatus::Panic`].
fn guard(f: impl FnOnce() -> MaisStatus) -> MaisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(MaisStatus::Panic, "internal panic"),
    }
}

fn guard_ptr<T>(f: impl FnOnce() -> Result<Box<T>, String>) -> *mut T {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(b)) => Box::into_raw(b),
        Ok(Err(msg)) => {
            set_error(msg);
            ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic");
            ptr::null_mut()
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if data.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(data, len))
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len` bytes) and returns the full message length plus one.
/// Call with `buf = NULL` to query the size.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mais_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Creates a registered target by name (see `mais-bench list-targets`).
/// `dim` is used by `mixture-hd` only; pass 0 elsewhere. Returns NULL on
/// error.
///
/// # Safety
/// `name` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mais_target_new(name: *const c_char, dim: usize) -> *mut MaisTarget {
    guard_ptr(|| {
        if name.is_null() {
            return Err("target name is NULL".into());
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| "target name is not UTF-8".to_string())?;
        let dim = (dim > 0).then_some(dim);
        let target = TargetModel::by_name(name, dim).map_err(|e| e.to_string())?;
        Ok(Box::new(MaisTarget(Arc::new(target))))
    })
}

/// # Safety
/// `target` must be NULL or a handle from [`mais_target_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mais_target_free(target: *mut MaisTarget) {
    if !target.is_null() {
        drop(Box::from_raw(target));
    }
}

/// Dimension of the target, 0 for a NULL handle.
///
/// # Safety
/// `target` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_target_dim(target: *const MaisTarget) -> usize {
    target.as_ref().map_or(0, |t| t.0.dim())
}

/// Unnormalized log-density at `x`.
///
/// # Safety
/// `target` must be a live handle, `x` must point to `len` doubles and `out`
/// to one writable double.
#[no_mangle]
pub unsafe extern "C" fn mais_target_log_density(
    target: *const MaisTarget,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> MaisStatus {
    guard(|| {
        let (Some(t), Some(x), false) = (target.as_ref(), slice(x, len), out.is_null()) else {
            return fail(MaisStatus::NullPointer, "NULL argument");
        };
        match t.0.log_target(x) {
            Ok(v) => {
                *out = v;
                MaisStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

fn algorithm(code: u32) -> Option<Algorithm> {
    Some(match code {
        0 => Algorithm::StaticMis,
        1 => Algorithm::Rwis,
        2 => Algorithm::PopulationMais,
        3 => Algorithm::Gamis,
        4 => Algorithm::StandardPmc,
        5 => Algorithm::ParallelMhBaseline,
        _ => return None,
    })
}

/// New configuration with `N` chains, `M` samples per chain and iteration,
/// and `T` iterations. Defaults: standard denominator, lower scale 1, means
/// uniform in `[-4, 4]^D`, seed 0. PMC starts with resampling adaptation,
/// the MCMC-driven algorithms with a parallel random walk of scale 1.
/// Returns NULL on error.
///
/// # Safety
/// `target` must be a live handle. The configuration keeps its own
/// reference, so the target may be freed afterwards.
#[no_mangle]
pub unsafe extern "C" fn mais_config_new(
    target: *const MaisTarget,
    algorithm_code: u32,
    n: usize,
    m: usize,
    t: usize,
) -> *mut MaisConfig {
    guard_ptr(|| {
        let target = target.as_ref().ok_or("target is NULL")?;
        let alg = algorithm(algorithm_code).ok_or_else(|| format!("unknown algorithm code {algorithm_code}"))?;
        let mut c = SamplerConfig::new(alg, target.0.clone(), n, m, t);
        c.adaptation = match alg {
            Algorithm::StaticMis => AdaptationKernel::None,
            Algorithm::StandardPmc => AdaptationKernel::PmcResample,
            _ => AdaptationKernel::ParallelMH {
                kernels: vec![RandomWalk::isotropic(c.dim(), 1.0).map_err(|e| e.to_string())?],
            },
        };
        Ok(Box::new(MaisConfig(c)))
    })
}

/// # Safety
/// `config` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_config_free(config: *mut MaisConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Sets the denominator. `width` is the block length for
/// `MAIS_DENOMINATOR_TIME_BLOCKS` and ignored otherwise.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_config_set_denominator(config: *mut MaisConfig, code: u32, width: usize) -> MaisStatus {
    guard(|| {
        let Some(c) = config.as_mut() else {
            return fail(MaisStatus::NullPointer, "config is NULL");
        };
        let c = &mut c.0;
        c.denominator = match code {
            0 => DenominatorScheme::Standard,
            1 => DenominatorScheme::Spatial,
            2 => DenominatorScheme::Temporal,
            3 => DenominatorScheme::Full,
            4 => match Partition::time_blocks(c.n, c.t, width) {
                Ok(p) => DenominatorScheme::Partition(p),
                Err(e) => return from_error(e),
            },
            _ => return fail(MaisStatus::InvalidArgument, format!("unknown denominator code {code}")),
        };
        MaisStatus::Ok
    })
}

/// Isotropic lower-level proposal scale `σ`.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_config_set_lower_sigma(config: *mut MaisConfig, sigma: f64) -> MaisStatus {
    guard(|| match config.as_mut() {
        None => fail(MaisStatus::NullPointer, "config is NULL"),
        Some(_) if !(sigma.is_finite() && sigma > 0.0) => {
            fail(MaisStatus::InvalidArgument, format!("sigma must be positive, got {sigma}"))
        }
        Some(c) => {
            c.0.lower = LowerCovariance::Isotropic(sigma);
            MaisStatus::Ok
        }
    })
}

/// Random-walk mean adaptation with isotropic scale `lambda`.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_config_set_random_walk(config: *mut MaisConfig, code: u32, lambda: f64) -> MaisStatus {
    guard(|| {
        let Some(c) = config.as_mut() else {
            return fail(MaisStatus::NullPointer, "config is NULL");
        };
        let kernels = match RandomWalk::isotropic(c.0.dim(), lambda) {
            Ok(k) => vec![k],
            Err(_) => return fail(MaisStatus::InvalidArgument, format!("lambda must be positive, got {lambda}")),
        };
        c.0.adaptation = match code {
            0 => AdaptationKernel::ParallelMH { kernels },
            1 => AdaptationKernel::BlockMH { kernels },
            2 => AdaptationKernel::MhWithinGibbs { kernels },
            _ => return fail(MaisStatus::InvalidArgument, format!("unknown random-walk code {code}")),
        };
        MaisStatus::Ok
    })
}

/// SMH mean adaptation with independent proposal `N(mean, sigma² I)`.
///
/// # Safety
/// `config` must be a live handle and `mean` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mais_config_set_smh(
    config: *mut MaisConfig,
    mean: *const f64,
    len: usize,
    sigma: f64,
) -> MaisStatus {
    guard(|| {
        let (Some(c), Some(mean)) = (config.as_mut(), slice(mean, len)) else {
            return fail(MaisStatus::NullPointer, "NULL argument");
        };
        match ProposalComponent::isotropic(mean.to_vec(), sigma) {
            Ok(proposal) => {
                c.0.adaptation = AdaptationKernel::Smh { proposal };
                MaisStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Initial means drawn uniformly in the cube `[lo, hi]^D`.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_config_set_init_box(config: *mut MaisConfig, lo: f64, hi: f64) -> MaisStatus {
    guard(|| match config.as_mut() {
        None => fail(MaisStatus::NullPointer, "config is NULL"),
        Some(_) if !(lo.is_finite() && hi.is_finite() && lo <= hi) => {
            fail(MaisStatus::InvalidArgument, "need finite lo <= hi")
        }
        Some(c) => {
            c.0.init = Initializer::cube(c.0.dim(), lo, hi);
            MaisStatus::Ok
        }
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_config_set_seed(config: *mut MaisConfig, seed: u64) -> MaisStatus {
    match config.as_mut() {
        None => fail(MaisStatus::NullPointer, "config is NULL"),
        Some(c) => {
            c.0.master_seed = seed;
            MaisStatus::Ok
        }
    }
}

/// Target evaluations the configured run will perform; 0 for NULL.
///
/// # Safety
/// `config` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_eval_budget(config: *const MaisConfig) -> u64 {
    config.as_ref().map_or(0, |c| eval_budget(&c.0))
}

/// Runs the sampler and stores a new result handle in `*out`.
///
/// # Safety
/// `config` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mais_run(config: *const MaisConfig, out: *mut *mut MaisResult) -> MaisStatus {
    guard(|| {
        let (Some(c), false) = (config.as_ref(), out.is_null()) else {
            return fail(MaisStatus::NullPointer, "NULL argument");
        };
        *out = ptr::null_mut();
        match mais::run(&c.0) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(MaisResult(r)));
                MaisStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_result_free(result: *mut MaisResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Length of the mean estimate; 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_result_dim(result: *const MaisResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.i_hat.len())
}

/// Copies the mean estimate into `out`, which holds `len` doubles.
///
/// # Safety
/// `result` must be a live handle and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mais_result_mean(result: *const MaisResult, out: *mut f64, len: usize) -> MaisStatus {
    guard(|| {
        let (Some(r), false) = (result.as_ref(), out.is_null()) else {
            return fail(MaisStatus::NullPointer, "NULL argument");
        };
        let v = &r.0.i_hat;
        if len < v.len() {
            return fail(MaisStatus::BufferTooSmall, format!("need {} doubles, got {len}", v.len()));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        MaisStatus::Ok
    })
}

/// Normalizing-constant estimate; `MAIS_STATUS_UNAVAILABLE` for the MCMC
/// baseline.
///
/// # Safety
/// `result` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mais_result_z(result: *const MaisResult, out: *mut f64) -> MaisStatus {
    let (Some(r), false) = (result.as_ref(), out.is_null()) else {
        return fail(MaisStatus::NullPointer, "NULL argument");
    };
    match r.0.z_hat {
        Some(z) => {
            *out = z;
            MaisStatus::Ok
        }
        None => fail(MaisStatus::Unavailable, "this algorithm does not estimate Z"),
    }
}

/// Target evaluations performed by the iterations; 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mais_result_eval_count(result: *const MaisResult) -> u64 {
    result.as_ref().map_or(0, |r| r.0.eval_count)
}

/// Overflow-safe `log Σ exp(values[i])`.
///
/// # Safety
/// `values` must point to `len` doubles and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn mais_log_sum_exp(values: *const f64, len: usize, out: *mut f64) -> MaisStatus {
    guard(|| {
        let (Some(v), false) = (slice(values, len), out.is_null()) else {
            return fail(MaisStatus::NullPointer, "NULL argument");
        };
        if v.is_empty() {
            return fail(MaisStatus::InvalidArgument, "empty input");
        }
        *out = mais::numeric::log_sum_exp(v);
        MaisStatus::Ok
    })
}
