//! C ABI for the qwalk simulator.
//!
//! States and noise sources are opaque heap handles. Every fallible call
//! returns a [`QwalkStatus`]; the text of the most recent error on the
//! calling thread is available from [`qwalk_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qwalk::baselines::{classical_distribution, decoherent_step, DecoherenceConfig};
use qwalk::{hadamard_coin, noisy_coin, Error, InitialCondition, NoiseConfig, RunStream, WalkerState};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QwalkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotNormalized = 3,
    CapacityExceeded = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// `(|0>|R> + i|0>|L>) / sqrt(2)`.
pub const QWALK_INIT_SYMMETRIC: u32 = 0;
/// `|0>|R>`.
pub const QWALK_INIT_RIGHT: u32 = 1;

/// Walker amplitudes on `-t_max..=t_max`.
pub struct QwalkState {
    inner: WalkerState,
}

/// Noise level plus the random stream of one trajectory.
pub struct QwalkNoise {
    config: NoiseConfig,
    stream: RunStream,
}

/// Measured-coin channel plus the random stream of one trajectory.
pub struct QwalkDecoherence {
    config: DecoherenceConfig,
    stream: RunStream,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: QwalkStatus, msg: impl Into<String>) -> QwalkStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> QwalkStatus {
    let status = match e {
        Error::InitNotNormalized { .. } => QwalkStatus::NotNormalized,
        Error::CapacityExceeded { .. } => QwalkStatus::CapacityExceeded,
        _ => QwalkStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> QwalkStatus) -> QwalkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(QwalkStatus::Panic, "internal panic"),
    }
}

fn init_from(kind: u32) -> Result<InitialCondition, QwalkStatus> {
    match kind {
        QWALK_INIT_SYMMETRIC => Ok(InitialCondition::SymmetricOrigin),
        QWALK_INIT_RIGHT => Ok(InitialCondition::RightOrigin),
        k => Err(fail(QwalkStatus::InvalidArgument, format!("unknown initial condition {k}"))),
    }
}

fn store<T>(out: *mut *mut T, value: T) -> QwalkStatus {
    // SAFETY: callers checked `out` for null.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    QwalkStatus::Ok
}

fn new_state(init: InitialCondition, t_max: usize, out: *mut *mut QwalkState) -> QwalkStatus {
    if out.is_null() {
        return fail(QwalkStatus::NullPointer, "null output handle");
    }
    match WalkerState::new(init, t_max) {
        Ok(inner) => store(out, QwalkState { inner }),
        Err(e) => from_error(e),
    }
}

/// Message for the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qwalk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// New state at `t = 0` from one of the `QWALK_INIT_*` constants.
#[no_mangle]
pub extern "C" fn qwalk_state_new(init: u32, t_max: usize, out: *mut *mut QwalkState) -> QwalkStatus {
    guard(|| match init_from(init) {
        Ok(init) => new_state(init, t_max, out),
        Err(s) => s,
    })
}

/// New state with chirality amplitudes `(r_re + i r_im, l_re + i l_im)` at the origin.
#[no_mangle]
pub extern "C" fn qwalk_state_new_custom(
    r_re: f64,
    r_im: f64,
    l_re: f64,
    l_im: f64,
    t_max: usize,
    out: *mut *mut QwalkState,
) -> QwalkStatus {
    guard(|| {
        let init = InitialCondition::CustomOrigin {
            r: Complex64::new(r_re, r_im),
            l: Complex64::new(l_re, l_im),
        };
        new_state(init, t_max, out)
    })
}

/// Releases a state. Null is ignored.
///
/// # Safety
/// `state` must come from `qwalk_state_new*` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qwalk_state_free(state: *mut QwalkState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// One step with the plain Hadamard coin.
///
/// # Safety
/// `state` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qwalk_state_step(state: *mut QwalkState) -> QwalkStatus {
    guard(|| {
        let Some(s) = (unsafe { state.as_mut() }) else {
            return fail(QwalkStatus::NullPointer, "null state");
        };
        s.inner.step(&hadamard_coin()).map_or_else(from_error, |_| QwalkStatus::Ok)
    })
}

/// One step with a freshly drawn noisy coin.
///
/// # Safety
/// `state` and `noise` must be live handles or null.
#[no_mangle]
pub unsafe extern "C" fn qwalk_state_step_noisy(state: *mut QwalkState, noise: *mut QwalkNoise) -> QwalkStatus {
    guard(|| {
        let (Some(s), Some(n)) = (unsafe { state.as_mut() }, unsafe { noise.as_mut() }) else {
            return fail(QwalkStatus::NullPointer, "null state or noise handle");
        };
        let coin = noisy_coin(&mut n.stream, &n.config);
        s.inner.step(&coin).map_or_else(from_error, |_| QwalkStatus::Ok)
    })
}

/// One Hadamard step followed by a possible chirality measurement.
///
/// # Safety
/// `state` and `channel` must be live handles or null.
#[no_mangle]
pub unsafe extern "C" fn qwalk_state_step_decoherent(
    state: *mut QwalkState,
    channel: *mut QwalkDecoherence,
) -> QwalkStatus {
    guard(|| {
        let (Some(s), Some(d)) = (unsafe { state.as_mut() }, unsafe { channel.as_mut() }) else {
            return fail(QwalkStatus::NullPointer, "null state or channel handle");
        };
        decoherent_step(&mut s.inner, &mut d.stream, &d.config).map_or_else(from_error, |_| QwalkStatus::Ok)
    })
}

/// Current time step, or 0 for a null handle.
///
/// # Safety
/// `state` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qwalk_state_time(state: *const QwalkState) -> usize {
    unsafe { state.as_ref() }.map_or(0, |s| s.inner.t())
}

/// Number of lattice sites, `2 t_max + 1`, or 0 for a null handle.
///
/// # Safety
/// `state` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qwalk_state_width(state: *const QwalkState) -> usize {
    unsafe { state.as_ref() }.map_or(0, |s| 2 * s.inner.t_max() + 1)
}

/// Squared norm of the state.
///
/// # Safety
/// `state` must be a live handle or null; `out` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn qwalk_state_norm_sqr(state: *const QwalkState, out: *mut f64) -> QwalkStatus {
    guard(|| {
        let (Some(s), Some(o)) = (unsafe { state.as_ref() }, unsafe { out.as_mut() }) else {
            return fail(QwalkStatus::NullPointer, "null state or output");
        };
        *o = s.inner.norm_sqr();
        QwalkStatus::Ok
    })
}

/// First and second moments of the position distribution.
///
/// # Safety
/// `state` must be a live handle or null; `mean` and `second` writable or null.
#[no_mangle]
pub unsafe extern "C" fn qwalk_state_moments(
    state: *const QwalkState,
    mean: *mut f64,
    second: *mut f64,
) -> QwalkStatus {
    guard(|| {
        let (Some(s), Some(m), Some(q)) = (unsafe { state.as_ref() }, unsafe { mean.as_mut() }, unsafe {
            second.as_mut()
        }) else {
            return fail(QwalkStatus::NullPointer, "null state or output");
        };
        (*m, *q) = s.inner.moments();
        QwalkStatus::Ok
    })
}

/// Writes `P(n)` for `n = -t_max..=t_max` into `buf[n + t_max]`.
/// `len` must be at least `qwalk_state_width`.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qwalk_state_distribution(state: *const QwalkState, buf: *mut f64, len: usize) -> QwalkStatus {
    guard(|| {
        let Some(s) = (unsafe { state.as_ref() }) else {
            return fail(QwalkStatus::NullPointer, "null state");
        };
        let snap = s.inner.distribution();
        copy_out(snap.probs(), buf, len)
    })
}

/// Copies the chirality amplitudes as interleaved `(re, im)` pairs: `r` and
/// `l` each receive `2 * width` doubles.
///
/// # Safety
/// `r` and `l` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qwalk_state_amplitudes(
    state: *const QwalkState,
    r: *mut f64,
    l: *mut f64,
    len: usize,
) -> QwalkStatus {
    guard(|| {
        let Some(s) = (unsafe { state.as_ref() }) else {
            return fail(QwalkStatus::NullPointer, "null state");
        };
        let (ar, al) = s.inner.amplitudes();
        let flat = |a: &[Complex64]| a.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>();
        match copy_out(&flat(ar), r, len) {
            QwalkStatus::Ok => copy_out(&flat(al), l, len),
            other => other,
        }
    })
}

fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> QwalkStatus {
    if buf.is_null() {
        return fail(QwalkStatus::NullPointer, "null buffer");
    }
    if len < src.len() {
        return fail(
            QwalkStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", src.len()),
        );
    }
    // SAFETY: the caller guarantees `len` writable doubles at `buf`.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    QwalkStatus::Ok
}

/// Noise source with standard deviation `alpha` for run `run_index` of the
/// ensemble keyed by `seed`.
#[no_mangle]
pub extern "C" fn qwalk_noise_new(alpha: f64, seed: u64, run_index: u64, out: *mut *mut QwalkNoise) -> QwalkStatus {
    guard(|| {
        if out.is_null() {
            return fail(QwalkStatus::NullPointer, "null output handle");
        }
        match NoiseConfig::new(alpha, seed) {
            Ok(config) => {
                let stream = config.run_stream(run_index);
                store(out, QwalkNoise { config, stream })
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a noise source. Null is ignored.
///
/// # Safety
/// `noise` must come from `qwalk_noise_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qwalk_noise_free(noise: *mut QwalkNoise) {
    if !noise.is_null() {
        drop(unsafe { Box::from_raw(noise) });
    }
}

/// Measured-coin channel with measurement probability `p` for run
/// `run_index` of the ensemble keyed by `seed`.
#[no_mangle]
pub extern "C" fn qwalk_decoherence_new(
    p: f64,
    seed: u64,
    run_index: u64,
    out: *mut *mut QwalkDecoherence,
) -> QwalkStatus {
    guard(|| {
        if out.is_null() {
            return fail(QwalkStatus::NullPointer, "null output handle");
        }
        match DecoherenceConfig::new(p) {
            Ok(config) => {
                let stream = qwalk::derive_run_stream(seed, run_index);
                store(out, QwalkDecoherence { config, stream })
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a channel. Null is ignored.
///
/// # Safety
/// `channel` must come from `qwalk_decoherence_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qwalk_decoherence_free(channel: *mut QwalkDecoherence) {
    if !channel.is_null() {
        drop(unsafe { Box::from_raw(channel) });
    }
}

/// Exact classical walk distribution at time `t`: writes `P(n)` for
/// `n = -t..=t` into `buf[n + t]`, so `len >= 2 t + 1`.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qwalk_classical_distribution(t: usize, buf: *mut f64, len: usize) -> QwalkStatus {
    guard(|| copy_out(classical_distribution(t).probs(), buf, len))
}
