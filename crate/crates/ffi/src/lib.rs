//! C ABI over the `stratsim` engines.
//!
//! Handles are opaque and owned by the caller; release them with
//! [`stratsim_instance_free`]. Every fallible call returns a [`StratsimStatus`]
//! and, on failure, stores a message readable through [`stratsim_last_error`]
//! on the calling thread. Strings returned by the library must be released
//! with [`stratsim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stratsim::cli::commands::played_strategy;
use stratsim::cli::config::ExperimentConfig;
use stratsim::cli::scenario_config;
use stratsim::model::GameInstance;
use stratsim::simulator::{self, SimConfig};
use stratsim::stability::stable_set;
use stratsim::strategize::solve_strategic;
use stratsim::trust::trust_audit;
use stratsim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidInput = 4,
    Engine = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque instance handle: the resolved configuration and its game.
pub struct StratsimInstance {
    config: ExperimentConfig,
    game: GameInstance,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StratsimTrustReport {
    pub strategic_value: f64,
    pub naive_value: f64,
    pub strategization_gap: f64,
    pub kappa: f64,
    pub strategic_candidate: usize,
    /// 1 when the gap is non-positive and kappa reaches the configured kappa0.
    pub trustworthy: u8,
}

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

fn status_of(err: &Error) -> StratsimStatus {
    match err {
        Error::Config(_) => StratsimStatus::Config,
        Error::Dimension(_) | Error::InvalidProbability(_) | Error::InvalidParameter(_) => StratsimStatus::InvalidInput,
        _ => StratsimStatus::Engine,
    }
}

/// Runs `f`, converting errors and panics into a status plus the thread's last error.
fn guard<F: FnOnce() -> Result<(), (StratsimStatus, String)>>(f: F) -> StratsimStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StratsimStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            StratsimStatus::Panic
        }
    }
}

fn engine<T>(r: stratsim::Result<T>) -> Result<T, (StratsimStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, (StratsimStatus, String)> {
    if p.is_null() {
        return Err((StratsimStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (StratsimStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a>(h: *const StratsimInstance) -> Result<&'a StratsimInstance, (StratsimStatus, String)> {
    h.as_ref().ok_or((StratsimStatus::NullPointer, "null instance handle".to_string()))
}

fn nonnull<T>(p: *mut T, what: &str) -> Result<(), (StratsimStatus, String)> {
    if p.is_null() {
        Err((StratsimStatus::NullPointer, format!("null {what} pointer")))
    } else {
        Ok(())
    }
}

fn build(config: ExperimentConfig) -> Result<*mut StratsimInstance, (StratsimStatus, String)> {
    engine(config.validate())?;
    let game = engine(config.build_instance())?;
    Ok(Box::into_raw(Box::new(StratsimInstance { config, game })))
}

/// Copies `values` into a caller buffer, always reporting the required length.
unsafe fn copy_out<T: Copy>(values: &[T], buf: *mut T, capacity: usize, out_len: *mut usize) -> Result<(), (StratsimStatus, String)> {
    nonnull(out_len, "length")?;
    *out_len = values.len();
    if values.len() > capacity {
        return Err((StratsimStatus::BufferTooSmall, format!("need {} entries, buffer holds {capacity}", values.len())));
    }
    if !values.is_empty() {
        nonnull(buf, "buffer")?;
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    Ok(())
}

/// Creates an instance from a built-in scenario name with default settings.
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stratsim_instance_from_scenario(name: *const c_char, out: *mut *mut StratsimInstance) -> StratsimStatus {
    guard(|| {
        nonnull(out, "output")?;
        *out = ptr::null_mut();
        let name = read_str(name)?;
        *out = build(scenario_config(name))?;
        Ok(())
    })
}

/// Creates an instance from the text of a TOML experiment config.
///
/// # Safety
/// `toml` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stratsim_instance_from_config(toml: *const c_char, out: *mut *mut StratsimInstance) -> StratsimStatus {
    guard(|| {
        nonnull(out, "output")?;
        *out = ptr::null_mut();
        let text = read_str(toml)?;
        *out = build(engine(ExperimentConfig::from_toml_str(text))?)?;
        Ok(())
    })
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `inst` must come from one of the constructors and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn stratsim_instance_free(inst: *mut StratsimInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of models in the instance's hypothesis class, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stratsim_instance_n_models(inst: *const StratsimInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.game.class.len())
}

/// Writes the indices of the stable set for the configured user strategy.
/// `out_len` always receives the required length.
///
/// # Safety
/// `inst` must be a live handle, `out_ids` must hold `capacity` entries, `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stratsim_stable_set(
    inst: *const StratsimInstance,
    out_ids: *mut usize,
    capacity: usize,
    out_len: *mut usize,
) -> StratsimStatus {
    guard(|| {
        let h = handle(inst)?;
        let (q, _) = engine(played_strategy(&h.config, &h.game))?;
        let res = engine(stable_set(&q, &h.game.algorithm, &h.game.class, &h.config.engine.dominance()))?;
        copy_out(&res.survivors, out_ids, capacity, out_len)
    })
}

/// Solves for the strategic user and returns the solution as a JSON string.
///
/// # Safety
/// `inst` must be a live handle and `out_json` a valid pointer. Free the result with
/// [`stratsim_string_free`].
#[no_mangle]
pub unsafe extern "C" fn stratsim_solve_json(inst: *const StratsimInstance, out_json: *mut *mut c_char) -> StratsimStatus {
    guard(|| {
        nonnull(out_json, "output")?;
        *out_json = ptr::null_mut();
        let h = handle(inst)?;
        let user = engine(h.config.user_params())?;
        let sol = engine(solve_strategic(&h.game, &user, &h.config.engine.dominance()))?;
        let json = serde_json::to_string(&sol).map_err(|e| (StratsimStatus::Engine, e.to_string()))?;
        *out_json = CString::new(json).map_err(|e| (StratsimStatus::Engine, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Fills `out` with the strategization gap and trust measure.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stratsim_trust_audit(inst: *const StratsimInstance, out: *mut StratsimTrustReport) -> StratsimStatus {
    guard(|| {
        nonnull(out, "output")?;
        let h = handle(inst)?;
        let user = engine(h.config.user_params())?;
        let r = engine(trust_audit(&h.game, &user, &h.config.engine.dominance()))?;
        *out = StratsimTrustReport {
            strategic_value: r.strategic_value,
            naive_value: r.naive_value,
            strategization_gap: r.strategization_gap,
            kappa: r.kappa,
            strategic_candidate: r.strategic_candidate,
            trustworthy: r.trustworthy_at(h.config.trust.kappa0) as u8,
        };
        Ok(())
    })
}

/// Simulates `horizon` steps with `seed` and writes the final belief.
/// `out_len` always receives the number of models.
///
/// # Safety
/// `inst` must be a live handle, `out_belief` must hold `capacity` entries, `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stratsim_simulate(
    inst: *const StratsimInstance,
    seed: u64,
    horizon: usize,
    out_belief: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> StratsimStatus {
    guard(|| {
        let h = handle(inst)?;
        let (q, _) = engine(played_strategy(&h.config, &h.game))?;
        let mut sc = SimConfig::new(h.game.clone(), horizon, seed);
        sc.belief_floor = h.config.engine.belief_floor;
        let traj = engine(simulator::run(&sc, &q))?;
        copy_out(traj.final_belief.weights(), out_belief, capacity, out_len)
    })
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn stratsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn stratsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
