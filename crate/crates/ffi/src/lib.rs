//! C ABI over `wppan-core`.
//!
//! Objects are opaque handles created by `*_new`/`*_from_*` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`WppanStatus`]; on failure a message is kept per thread and can be read
//! with [`wppan_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wppan_core::allocator::{self, AllocationProblem};
use wppan_core::experiments::{self, Strategy, TrialResult};
use wppan_core::harvest::{harvested_power, EhParams};
use wppan_core::{Error, HarvestMatrix, SystemConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WppanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    InvalidArgument = 3,
    SolverFailure = 4,
    Io = 5,
    Panic = 6,
}

/// Simulation strategy.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WppanMode {
    Search = 0,
    Greedy = 1,
    Naive = 2,
    Miso = 3,
}

/// Decode a `WppanMode` passed as a plain integer, so that out-of-range
/// values from C are rejected rather than undefined.
fn strategy(mode: u32) -> Option<Strategy> {
    [
        (WppanMode::Search, Strategy::Search),
        (WppanMode::Greedy, Strategy::Greedy),
        (WppanMode::Naive, Strategy::Naive),
        (WppanMode::Miso, Strategy::Miso),
    ]
    .into_iter()
    .find(|(m, _)| *m as u32 == mode)
    .map(|(_, s)| s)
}

/// Opaque system configuration.
pub struct WppanConfig(SystemConfig);

/// Opaque outcome of one simulated trial.
pub struct WppanTrialResult(TrialResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> WppanStatus {
    match e {
        Error::InvalidConfig(_) | Error::ConfigParse(_) | Error::EnumerationTooLarge { .. } => {
            WppanStatus::InvalidConfig
        }
        Error::NonConvergence { .. } => WppanStatus::SolverFailure,
        Error::Io { .. } => WppanStatus::Io,
        _ => WppanStatus::InvalidArgument,
    }
}

/// Run `f`, recording its error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (WppanStatus, String)>) -> WppanStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WppanStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            WppanStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (WppanStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (WppanStatus, String) {
    (WppanStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (WppanStatus, String) {
    (WppanStatus::InvalidArgument, msg.into())
}

unsafe fn config_mut<'a>(cfg: *mut WppanConfig) -> Result<&'a mut SystemConfig, (WppanStatus, String)> {
    cfg.as_mut().map(|c| &mut c.0).ok_or_else(|| null("config"))
}

unsafe fn trial_ref<'a>(result: *const WppanTrialResult) -> Result<&'a TrialResult, (WppanStatus, String)> {
    result.as_ref().map(|r| &r.0).ok_or_else(|| null("result"))
}

/// Copy `src` into the caller's buffer `out` of capacity `len`.
unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, len: usize) -> Result<(), (WppanStatus, String)> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < src.len() {
        return Err(invalid(format!(
            "output buffer holds {len} values, {} needed",
            src.len()
        )));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wppan_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wppan_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Configuration with the reference scenario defaults. Never null.
#[no_mangle]
pub extern "C" fn wppan_config_new_default() -> *mut WppanConfig {
    Box::into_raw(Box::new(WppanConfig(SystemConfig::reference_scenario())))
}

/// Parse and validate a JSON configuration. Fields left out keep their
/// defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wppan_config_from_json(json: *const c_char, out: *mut *mut WppanConfig) -> WppanStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| invalid(format!("json is not UTF-8: {e}")))?;
        let cfg = SystemConfig::from_json_str(text).map_err(core_err)?;
        cfg.validate().map_err(core_err)?;
        *out = Box::into_raw(Box::new(WppanConfig(cfg)));
        Ok(())
    })
}

/// Serialize a configuration to JSON. Release the string with
/// [`wppan_string_free`].
///
/// # Safety
/// `cfg` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wppan_config_to_json(cfg: *const WppanConfig, out: *mut *mut c_char) -> WppanStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = CString::new(cfg.0.to_json_pretty()).map_err(|e| invalid(e.to_string()))?;
        *out = json.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn wppan_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `cfg` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wppan_config_free(cfg: *mut WppanConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Apply `edit` and keep it only if the configuration stays valid.
unsafe fn edit_config(cfg: *mut WppanConfig, edit: impl FnOnce(&mut SystemConfig)) -> WppanStatus {
    guard(|| {
        let cfg = config_mut(cfg)?;
        let mut next = cfg.clone();
        edit(&mut next);
        next.validate().map_err(core_err)?;
        *cfg = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn wppan_config_set_num_users(cfg: *mut WppanConfig, users: usize) -> WppanStatus {
    edit_config(cfg, |c| c.num_users = users)
}

/// # Safety
/// `cfg` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn wppan_config_set_num_antennas(cfg: *mut WppanConfig, antennas: usize) -> WppanStatus {
    edit_config(cfg, |c| c.num_antennas = antennas)
}

/// # Safety
/// `cfg` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn wppan_config_set_p0_dbm(cfg: *mut WppanConfig, dbm: f64) -> WppanStatus {
    edit_config(cfg, |c| c.set_p0_dbm(dbm))
}

/// Waveguide attenuation in dB/m.
///
/// # Safety
/// `cfg` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn wppan_config_set_waveguide_loss(cfg: *mut WppanConfig, db_per_m: f64) -> WppanStatus {
    edit_config(cfg, |c| c.waveguide_loss = db_per_m)
}

/// # Safety
/// `cfg` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn wppan_config_set_rician_k(cfg: *mut WppanConfig, k: f64) -> WppanStatus {
    edit_config(cfg, |c| c.rician_k = k)
}

/// # Safety
/// `cfg` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn wppan_config_set_seed(cfg: *mut WppanConfig, seed: u64) -> WppanStatus {
    edit_config(cfg, |c| c.rng_seed = seed)
}

/// Simulate trial `trial` with `mode`, one of the `WppanMode` values. A trial whose solver did not converge
/// still yields a result, flagged by [`wppan_trial_failed`].
///
/// # Safety
/// `cfg` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wppan_run_trial(
    cfg: *const WppanConfig,
    trial: u64,
    mode: u32,
    out: *mut *mut WppanTrialResult,
) -> WppanStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mode = strategy(mode).ok_or_else(|| invalid(format!("unknown mode {mode}")))?;
        let result = experiments::run_trial(&cfg.0, trial, mode).map_err(core_err)?;
        *out = Box::into_raw(Box::new(WppanTrialResult(result)));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wppan_trial_free(result: *mut WppanTrialResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Minimum user rate in bit/s/Hz, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wppan_trial_min_rate(result: *const WppanTrialResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.min_rate)
}

/// True when the solver stopped before converging; null handles count as
/// failed.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wppan_trial_failed(result: *const WppanTrialResult) -> bool {
    result.as_ref().is_none_or(|r| r.0.failed())
}

/// Number of users, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wppan_trial_num_users(result: *const WppanTrialResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.rates.len())
}

/// Number of downlink slots with nonzero duration, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wppan_trial_num_downlink_slots(result: *const WppanTrialResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.downlink_counts.len())
}

/// Copy the per-user rates into `out`, which holds `len` values.
///
/// # Safety
/// `result` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wppan_trial_rates(result: *const WppanTrialResult, out: *mut f64, len: usize) -> WppanStatus {
    guard(|| copy_out(&trial_ref(result)?.rates, out, len))
}

/// Active-antenna counts and durations of the used downlink slots.
///
/// # Safety
/// `result` must be a live handle; both buffers must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn wppan_trial_downlink(
    result: *const WppanTrialResult,
    counts: *mut usize,
    durations: *mut f64,
    len: usize,
) -> WppanStatus {
    guard(|| {
        let r = trial_ref(result)?;
        copy_out(&r.downlink_counts, counts, len)?;
        copy_out(&r.downlink_durations, durations, len)
    })
}

/// Active-antenna counts and durations of the used uplink slots.
///
/// # Safety
/// `result` must be a live handle; both buffers must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn wppan_trial_uplink(
    result: *const WppanTrialResult,
    counts: *mut usize,
    durations: *mut f64,
    len: usize,
) -> WppanStatus {
    guard(|| {
        let r = trial_ref(result)?;
        copy_out(&r.uplink_counts, counts, len)?;
        copy_out(&r.uplink_durations, durations, len)
    })
}

/// Number of used uplink slots, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wppan_trial_num_uplink_slots(result: *const WppanTrialResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.uplink_counts.len())
}

/// Solve the max-min timeslot allocation for a given harvest matrix.
///
/// `harvest` is row-major `users x slots` (harvested power in W),
/// `uplink_gains` holds `users` composite uplink gains. On success the
/// durations are written to `tau_d` (`slots` values) and `tau_u` (`users`
/// values) and the achieved min-rate to `min_rate`. On non-convergence the
/// best schedule found is still written and `WPPAN_STATUS_SOLVER_FAILURE` is
/// returned.
///
/// # Safety
/// All pointers must be valid for the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn wppan_solve_allocation(
    harvest: *const f64,
    users: usize,
    slots: usize,
    uplink_gains: *const f64,
    frame: f64,
    tau_d: *mut f64,
    tau_u: *mut f64,
    min_rate: *mut f64,
) -> WppanStatus {
    guard(|| {
        if harvest.is_null() || uplink_gains.is_null() || tau_d.is_null() || tau_u.is_null() || min_rate.is_null() {
            return Err(null("argument"));
        }
        if users == 0 || slots == 0 {
            return Err(invalid("users and slots must be positive"));
        }
        let cells = users.checked_mul(slots).ok_or_else(|| invalid("matrix too large"))?;
        let flat = std::slice::from_raw_parts(harvest, cells);
        let rows = flat.chunks(slots).map(<[f64]>::to_vec).collect();
        let gains = std::slice::from_raw_parts(uplink_gains, users).to_vec();
        let problem = HarvestMatrix::from_rows(rows)
            .and_then(|h| AllocationProblem::new(h, gains, frame))
            .map_err(core_err)?;
        let (schedule, failure) = match allocator::solve(&problem, &Default::default()) {
            Ok(s) => (s, None),
            Err(Error::NonConvergence { best, .. }) => {
                let msg = format!("solver did not converge; best min-rate {:e}", best.min_rate);
                (*best, Some(msg))
            }
            Err(e) => return Err(core_err(e)),
        };
        ptr::copy_nonoverlapping(schedule.tau_d.as_ptr(), tau_d, slots);
        ptr::copy_nonoverlapping(schedule.tau_u.as_ptr(), tau_u, users);
        *min_rate = schedule.min_rate;
        match failure {
            None => Ok(()),
            Some(msg) => Err((WppanStatus::SolverFailure, msg)),
        }
    })
}

/// Output of the sigmoid harvester for input power `p_in` (W).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wppan_harvested_power(p_in: f64, p_max: f64, a: f64, b: f64, out: *mut f64) -> WppanStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = EhParams { p_max_w: p_max, a, b };
        params.validate().map_err(core_err)?;
        *out = harvested_power(p_in, &params).map_err(core_err)?;
        Ok(())
    })
}

/// Harvester parameters of the default configuration.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wppan_default_harvester(p_max: *mut f64, a: *mut f64, b: *mut f64) -> WppanStatus {
    guard(|| {
        if p_max.is_null() || a.is_null() || b.is_null() {
            return Err(null("argument"));
        }
        let d = EhParams::default();
        *p_max = d.p_max_w;
        *a = d.a;
        *b = d.b;
        Ok(())
    })
}
