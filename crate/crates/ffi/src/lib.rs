//! C ABI over the `bochner` library.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_*`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`BochnerStatus`]; on failure the message is available from
//! [`bochner_last_error`] on the same thread until the next failing call.
//! Panics are caught and reported as [`BochnerStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bochner::geometry::Exponents;
use bochner::harness::experiments::{phantom_volume, reconstruct};
use bochner::harness::{ExperimentConfig, PhantomKind, SolverKind};
use bochner::metrics::relative_error;
use bochner::phantoms::add_noise;
use bochner::radon::{DynamicRadon, Sinogram, Volume};
use bochner::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BochnerStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BochnerPhantom {
    Intensity = 0,
    Mass = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BochnerSolver {
    Temporal = 0,
    Landweber = 1,
    Dual = 2,
    DualStatic = 3,
    Fbp = 4,
}

/// Experiment configuration.
pub struct BochnerConfig(ExperimentConfig);

/// Time series of square images, `(t, y, x)` row-major.
pub struct BochnerVolume(Volume);

/// Dynamic sinogram, `(t, angle, offset)` row-major.
pub struct BochnerSinogram(Sinogram);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BochnerStatus {
    match err {
        Error::NumericalFailure { .. } => BochnerStatus::Numerical,
        Error::Config(_) | Error::Json(_) => BochnerStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Image(_) | Error::Format(_) => BochnerStatus::Io,
        _ => BochnerStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (BochnerStatus, String)>) -> BochnerStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BochnerStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {message}"));
            BochnerStatus::Panic
        }
    }
}

fn lib<T>(r: bochner::Result<T>) -> Result<T, (BochnerStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

/// Anything that goes wrong while building a configuration is a config error.
fn config<T>(r: bochner::Result<T>) -> Result<T, (BochnerStatus, String)> {
    r.map_err(|e| (BochnerStatus::Config, e.to_string()))
}

fn null(what: &str) -> (BochnerStatus, String) {
    (BochnerStatus::NullPointer, format!("{what} is null"))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, (BochnerStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (BochnerStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (BochnerStatus, String)> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len != src.len() {
        return Err((BochnerStatus::InvalidArgument, format!("buffer holds {len} values, need {}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, len);
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bochner_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bochner_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration of one of the two simulated experiments.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn bochner_config_preset(kind: BochnerPhantom, out: *mut *mut BochnerConfig) -> BochnerStatus {
    guard(|| {
        let kind = match kind {
            BochnerPhantom::Intensity => PhantomKind::Intensity,
            BochnerPhantom::Mass => PhantomKind::Mass,
        };
        put(out, BochnerConfig(ExperimentConfig::preset(kind)))
    })
}

/// Configuration from a JSON object overriding the preset it names.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` as in [`bochner_config_preset`].
#[no_mangle]
pub unsafe extern "C" fn bochner_config_from_json(json: *const c_char, out: *mut *mut BochnerConfig) -> BochnerStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (BochnerStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        put(out, BochnerConfig(config(ExperimentConfig::from_json(text))?))
    })
}

/// Selects the solver and its regularization parameters.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bochner_config_set_solver(
    cfg: *mut BochnerConfig,
    solver: BochnerSolver,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> BochnerStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("config"))?;
        let kind = match solver {
            BochnerSolver::Temporal => SolverKind::Temporal,
            BochnerSolver::Landweber => SolverKind::Landweber,
            BochnerSolver::Dual => SolverKind::Dual,
            BochnerSolver::DualStatic => SolverKind::DualStatic,
            BochnerSolver::Fbp => SolverKind::Fbp,
        };
        let mut next = cfg.0.clone();
        next.solver = kind;
        next.solver_config.alpha = alpha;
        next.solver_config.beta = beta;
        next.solver_config.gamma = gamma;
        config(next.validate())?;
        cfg.0 = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn bochner_config_free(cfg: *mut BochnerConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Volume from `n_time · size · size` values.
///
/// # Safety
/// `data` must point to that many readable values; `out` as above.
#[no_mangle]
pub unsafe extern "C" fn bochner_volume_new(
    n_time: usize,
    size: usize,
    horizon: f64,
    data: *const f64,
    out: *mut *mut BochnerVolume,
) -> BochnerStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let len = n_time
            .checked_mul(size)
            .and_then(|v| v.checked_mul(size))
            .ok_or_else(|| (BochnerStatus::InvalidArgument, "volume size overflows".to_string()))?;
        let values = std::slice::from_raw_parts(data, len).to_vec();
        put(out, BochnerVolume(lib(Volume::new(n_time, size, horizon, values))?))
    })
}

/// Ground-truth phantom of the configured experiment at `resolution`.
///
/// # Safety
/// `cfg` must be a live handle; `out` as above.
#[no_mangle]
pub unsafe extern "C" fn bochner_phantom(
    cfg: *const BochnerConfig,
    resolution: usize,
    out: *mut *mut BochnerVolume,
) -> BochnerStatus {
    guard(|| {
        let cfg = get(cfg, "config")?;
        put(out, BochnerVolume(lib(phantom_volume(&cfg.0, resolution))?))
    })
}

/// Writes the volume's frame count and image side length.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bochner_volume_dims(
    vol: *const BochnerVolume,
    n_time: *mut usize,
    size: *mut usize,
) -> BochnerStatus {
    guard(|| {
        let vol = get(vol, "volume")?;
        if n_time.is_null() || size.is_null() {
            return Err(null("output pointer"));
        }
        *n_time = vol.0.n_time;
        *size = vol.0.size;
        Ok(())
    })
}

/// Copies the values into `buf`, which must hold exactly `len` of them.
///
/// # Safety
/// `buf` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn bochner_volume_copy(vol: *const BochnerVolume, buf: *mut f64, len: usize) -> BochnerStatus {
    guard(|| copy_out(&get(vol, "volume")?.0.values, buf, len))
}

/// # Safety
/// `vol` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn bochner_volume_free(vol: *mut BochnerVolume) {
    if !vol.is_null() {
        drop(Box::from_raw(vol));
    }
}

/// Projects `vol` with the configured geometry and adds the configured
/// seeded noise. The noise norm goes to `delta` when it is not null.
///
/// # Safety
/// Handles must be live; `out` as above; `delta` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bochner_sinogram(
    cfg: *const BochnerConfig,
    vol: *const BochnerVolume,
    out: *mut *mut BochnerSinogram,
    delta: *mut f64,
) -> BochnerStatus {
    guard(|| {
        let cfg = &get(cfg, "config")?.0;
        let vol = &get(vol, "volume")?.0;
        let op = lib(DynamicRadon::new(&cfg.geometry, vol.size))?;
        let clean = lib(op.forward(vol))?;
        let (noisy, d) = lib(add_noise(&clean, cfg.noise.std, cfg.noise.seed, Exponents::uniform(2.0)))?;
        if !delta.is_null() {
            *delta = d;
        }
        put(out, BochnerSinogram(noisy))
    })
}

/// Number of samples in the sinogram.
///
/// # Safety
/// `sino` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn bochner_sinogram_len(sino: *const BochnerSinogram, len: *mut usize) -> BochnerStatus {
    guard(|| {
        let sino = get(sino, "sinogram")?;
        if len.is_null() {
            return Err(null("output pointer"));
        }
        *len = sino.0.values.len();
        Ok(())
    })
}

/// # Safety
/// `buf` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn bochner_sinogram_copy(sino: *const BochnerSinogram, buf: *mut f64, len: usize) -> BochnerStatus {
    guard(|| copy_out(&get(sino, "sinogram")?.0.values, buf, len))
}

/// # Safety
/// `sino` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn bochner_sinogram_free(sino: *mut BochnerSinogram) {
    if !sino.is_null() {
        drop(Box::from_raw(sino));
    }
}

/// Runs the configured solver on the configured reconstruction grid.
///
/// # Safety
/// Handles must be live; `out` as above; `iterations` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bochner_reconstruct(
    cfg: *const BochnerConfig,
    sino: *const BochnerSinogram,
    out: *mut *mut BochnerVolume,
    iterations: *mut usize,
) -> BochnerStatus {
    guard(|| {
        let cfg = &get(cfg, "config")?.0;
        let sino = &get(sino, "sinogram")?.0;
        let op = lib(DynamicRadon::new(&sino.geometry, cfg.reconstruction_resolution))?;
        let reco = lib(reconstruct(&op, sino, cfg.solver, &cfg.spaces, &cfg.solver_config, &cfg.noise))?;
        if !iterations.is_null() {
            *iterations = reco.iterations();
        }
        put(out, BochnerVolume(reco.volume))
    })
}

/// Relative `L²` error of `reco` against `truth` in percent. Both volumes
/// must share the grid.
///
/// # Safety
/// Handles must be live and `error` writable.
#[no_mangle]
pub unsafe extern "C" fn bochner_relative_error(
    reco: *const BochnerVolume,
    truth: *const BochnerVolume,
    error: *mut f64,
) -> BochnerStatus {
    guard(|| {
        let reco = &get(reco, "reconstruction")?.0;
        let truth = &get(truth, "truth")?.0;
        if error.is_null() {
            return Err(null("output pointer"));
        }
        *error = lib(relative_error(reco, truth, Exponents::uniform(2.0)))?;
        Ok(())
    })
}
