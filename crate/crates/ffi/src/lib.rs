//! C interface to `raggio-kit`.
//!
//! Algebras and states are opaque handles created by `rk_*` constructors and
//! released with the matching `_free` function. Every fallible call returns
//! an [`RkStatus`]; on failure a message is available from
//! [`rk_last_error_message`] on the calling thread. Strings returned through
//! `char **` out-parameters are owned by the caller and released with
//! [`rk_string_free`]. Optional out-parameters may be null.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use raggio_kit::algebra::FdAlgebra;
use raggio_kit::bell;
use raggio_kit::entanglement::{self, SeparabilityVerdict};
use raggio_kit::error::Error;
use raggio_kit::formats;
use raggio_kit::harness::{self, HarnessConfig};
use raggio_kit::linalg::CMat;
use raggio_kit::states::{self, State};

use rand_chacha::rand_core::SeedableRng;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RkStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed JSON or algebra shorthand.
    Parse = 3,
    /// Input violates a mathematical precondition (not a state, bad weights, ...).
    InvalidInput = 4,
    /// Algebras or shapes do not fit together.
    Mismatch = 5,
    /// Requested problem exceeds the dimension cap.
    ResourceLimit = 6,
    /// Output buffer too small; the required length was written.
    BufferTooSmall = 7,
    /// Internal failure caught at the boundary.
    Panic = 8,
}

/// Separability verdict tags.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RkVerdict {
    Separable = 0,
    EntangledPure = 1,
    EntangledPpt = 2,
    Undetermined = 3,
}

/// Opaque finite-dimensional C*-algebra.
pub struct RkAlgebra(FdAlgebra);

/// Opaque state on an algebra.
pub struct RkState(State);

enum Failure {
    Status(RkStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn status_of(e: &Error) -> RkStatus {
    match e {
        Error::Parse(_) | Error::Json(_) => RkStatus::Parse,
        Error::AlgebraMismatch { .. }
        | Error::ShapeMismatch(_)
        | Error::UnsupportedShape(_)
        | Error::MissingFactorization(_) => RkStatus::Mismatch,
        Error::ResourceLimit { .. } => RkStatus::ResourceLimit,
        _ => RkStatus::InvalidInput,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> RkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RkStatus::Ok,
        Ok(Err(Failure::Status(code, msg))) => {
            set_last_error(msg);
            code
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal error".into());
            set_last_error(format!("panic: {msg}"));
            RkStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure::Status(RkStatus::NullPointer, format!("{name} is null"))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(RkStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write<T>(p: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(value);
    Ok(())
}

unsafe fn write_optional<T>(p: *mut T, value: impl FnOnce() -> T) {
    if !p.is_null() {
        p.write(value());
    }
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

fn json_string<T: serde::Serialize>(x: &T) -> *mut c_char {
    c_string(serde_json::to_string(x).expect("serializable"))
}

fn boxed<T>(x: T) -> *mut T {
    Box::into_raw(Box::new(x))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn rk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses algebra shorthand such as `M2`, `D3`, `M2+D1` or `M2xD2`.
///
/// # Safety
/// `shorthand` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_algebra_parse(shorthand: *const c_char, out: *mut *mut RkAlgebra) -> RkStatus {
    guard(|| {
        let alg: FdAlgebra = text(shorthand, "shorthand")?.parse()?;
        write(out, boxed(RkAlgebra(alg)), "out")
    })
}

/// Tensor product `a ⊗ b`, keeping the factorization.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_algebra_tensor(
    a: *const RkAlgebra,
    b: *const RkAlgebra,
    out: *mut *mut RkAlgebra,
) -> RkStatus {
    guard(|| {
        let t = FdAlgebra::tensor(&borrow(a, "a")?.0, &borrow(b, "b")?.0);
        write(out, boxed(RkAlgebra(t)), "out")
    })
}

/// # Safety
/// `alg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rk_algebra_free(alg: *mut RkAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// Total Hilbert space dimension `Σ n_k`.
///
/// # Safety
/// `alg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_algebra_total_dim(alg: *const RkAlgebra, out: *mut usize) -> RkStatus {
    guard(|| write(out, borrow(alg, "alg")?.0.total_dim(), "out"))
}

/// # Safety
/// `alg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_algebra_is_commutative(alg: *const RkAlgebra, out: *mut bool) -> RkStatus {
    guard(|| write(out, borrow(alg, "alg")?.0.is_commutative(), "out"))
}

/// Shorthand form of the algebra.
///
/// # Safety
/// `alg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_algebra_to_string(alg: *const RkAlgebra, out: *mut *mut c_char) -> RkStatus {
    guard(|| write(out, c_string(borrow(alg, "alg")?.0.to_string()), "out"))
}

/// Reads a state from JSON: `{"algebra", "entries"}` for a density matrix or
/// `{"algebra", "psi"}` for a unit vector.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_state_from_json(json: *const c_char, out: *mut *mut RkState) -> RkStatus {
    guard(|| {
        let s = formats::read_any_state(text(json, "json")?)?;
        write(out, boxed(RkState(s)), "out")
    })
}

/// Builds a state from a dense block-diagonal density matrix given as
/// `2·N·N` doubles, row-major, real and imaginary parts interleaved.
///
/// # Safety
/// `entries` must point to `len` readable doubles; `alg` must be a live
/// handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_state_from_dense(
    alg: *const RkAlgebra,
    entries: *const f64,
    len: usize,
    out: *mut *mut RkState,
) -> RkStatus {
    guard(|| {
        let alg = &borrow(alg, "alg")?.0;
        if entries.is_null() {
            return Err(null("entries"));
        }
        let n = alg.total_dim();
        if len != 2 * n * n {
            return Err(Error::ShapeMismatch(format!("expected {} doubles, got {len}", 2 * n * n)).into());
        }
        let raw = std::slice::from_raw_parts(entries, len);
        let rho = CMat::from_fn(n, n, |r, c| {
            let k = 2 * (r * n + c);
            num_complex::Complex64::new(raw[k], raw[k + 1])
        });
        let s = State::from_dense(alg, &rho)?;
        write(out, boxed(RkState(s)), "out")
    })
}

/// Normalized trace on `alg`.
///
/// # Safety
/// `alg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_state_maximally_mixed(alg: *const RkAlgebra, out: *mut *mut RkState) -> RkStatus {
    guard(|| {
        let s = State::maximally_mixed(&borrow(alg, "alg")?.0);
        write(out, boxed(RkState(s)), "out")
    })
}

/// The singlet vector state on `M2 ⊗ M2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_state_singlet(out: *mut *mut RkState) -> RkStatus {
    guard(|| write(out, boxed(RkState(states::singlet().to_state())), "out"))
}

/// Werner state `p |singlet⟩⟨singlet| + (1 − p) 1/4`, `p ∈ [0, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_state_werner(p: f64, out: *mut *mut RkState) -> RkStatus {
    guard(|| write(out, boxed(RkState(states::werner(p)?)), "out"))
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rk_state_free(s: *mut RkState) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// JSON form `{"algebra", "entries"}`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_state_to_json(s: *const RkState, out: *mut *mut c_char) -> RkStatus {
    guard(|| write(out, json_string(&formats::state_to_json(&borrow(s, "state")?.0)), "out"))
}

/// Total dimension of the state's algebra.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_state_dim(s: *const RkState, out: *mut usize) -> RkStatus {
    guard(|| write(out, borrow(s, "state")?.0.owner().total_dim(), "out"))
}

/// `Tr ρ²`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_state_purity(s: *const RkState, out: *mut f64) -> RkStatus {
    guard(|| write(out, borrow(s, "state")?.0.purity(), "out"))
}

/// Diagonal of the density matrix (Born probabilities in the standard
/// basis) into `buf`. The dimension is written to `written` (if non-null)
/// even when `len` is too small.
///
/// # Safety
/// `buf` must point to `len` writable doubles; `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rk_state_probabilities(
    s: *const RkState,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> RkStatus {
    guard(|| {
        let p = borrow(s, "state")?.0.diagonal_probabilities();
        write_optional(written, || p.len());
        if len < p.len() {
            return Err(Failure::Status(
                RkStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", p.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::slice::from_raw_parts_mut(buf, p.len()).copy_from_slice(&p);
        Ok(())
    })
}

/// Smallest eigenvalue of the partial transpose on the second factor.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_ppt_min_eigenvalue(s: *const RkState, out: *mut f64) -> RkStatus {
    guard(|| write(out, entanglement::ppt_check(&borrow(s, "state")?.0)?, "out"))
}

/// Separability test with an iteration budget and seed. The verdict JSON
/// (tag and certificate) goes to `json` when non-null.
///
/// # Safety
/// `s` must be a live handle; `verdict` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_separability(
    s: *const RkState,
    budget: usize,
    seed: u64,
    verdict: *mut RkVerdict,
    json: *mut *mut c_char,
) -> RkStatus {
    guard(|| {
        let state = &borrow(s, "state")?.0;
        if verdict.is_null() {
            return Err(null("verdict"));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v = entanglement::separability_test(state, budget, &mut rng)?;
        let tag = match &v {
            SeparabilityVerdict::Separable(_) => RkVerdict::Separable,
            SeparabilityVerdict::EntangledPure { .. } => RkVerdict::EntangledPure,
            SeparabilityVerdict::EntangledPpt { .. } => RkVerdict::EntangledPpt,
            SeparabilityVerdict::Undetermined { .. } => RkVerdict::Undetermined,
        };
        write(verdict, tag, "verdict")?;
        write_optional(json, || json_string(&formats::verdict_to_json(&v)));
        Ok(())
    })
}

/// See-saw CHSH maximization; full result JSON to `json` when non-null.
///
/// # Safety
/// `s` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_chsh_optimize(
    s: *const RkState,
    restarts: usize,
    seed: u64,
    value: *mut f64,
    json: *mut *mut c_char,
) -> RkStatus {
    guard(|| {
        let state = &borrow(s, "state")?.0;
        if value.is_null() {
            return Err(null("value"));
        }
        let r = bell::chsh_optimize(state, restarts, seed)?;
        write(value, r.value, "value")?;
        write_optional(json, || json_string(&formats::chsh_result_to_json(&r)));
        Ok(())
    })
}

/// Closed-form two-qubit CHSH maximum.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_horodecki_two_qubit(s: *const RkState, out: *mut f64) -> RkStatus {
    guard(|| write(out, bell::horodecki_two_qubit(&borrow(s, "state")?.0)?, "out"))
}

/// Sampled consistency check for the pair `a ⊗ b` with default budget,
/// restarts and dimension cap. The report JSON goes to `json` when non-null.
///
/// # Safety
/// `a` and `b` must be NUL-terminated strings; `consistent` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_raggio_check(
    a: *const c_char,
    b: *const c_char,
    samples: usize,
    seed: u64,
    threads: usize,
    consistent: *mut bool,
    json: *mut *mut c_char,
) -> RkStatus {
    guard(|| {
        let a: FdAlgebra = text(a, "a")?.parse()?;
        let b: FdAlgebra = text(b, "b")?.parse()?;
        if consistent.is_null() {
            return Err(null("consistent"));
        }
        let config = HarnessConfig {
            threads: threads.max(1),
            ..HarnessConfig::default()
        };
        let report = harness::verify_equivalence(&a, &b, samples, seed, &config)?;
        write(consistent, report.is_consistent(), "consistent")?;
        write_optional(json, || json_string(&report));
        Ok(())
    })
}
