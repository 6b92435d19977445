//! C ABI for the fwss solvers. Instances travel as opaque handles, reports
//! as JSON strings allocated here and released with [`fwss_string_free`],
//! and every entry point returns a status code. Panics never cross the
//! boundary; they surface as `FWSS_STATUS_PANIC`.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fwss::brute::brute_force;
use fwss::instance::{densities, gen_instance, is_solution};
use fwss::kset::{solve_kset, solve_kset_parallel, KsetConfig, SolveMode, ValidationMode};
use fwss::ss4::{solve_mitm2, solve_ss4, DivisionSource, SearchLimits};
use fwss::{Error, Instance, RngHandle};

/// Status code returned by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FwssStatus {
    /// Call succeeded; for solvers, a solution was found and verified.
    Ok = 0,
    /// Call succeeded but no solution exists within the search's guarantee.
    NoSolution = 1,
    /// Malformed input: bad JSON, bad parameters, length mismatches.
    InputError = 2,
    /// An enumeration cap or iteration budget was exceeded.
    ResourceError = 3,
    /// A required pointer argument was null.
    NullPointer = 4,
    /// A string argument was not valid UTF-8.
    Utf8Error = 5,
    /// Internal panic; the call had no effect.
    Panic = 6,
}

/// Which subsets fill the k-set oracle's lists.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FwssMode {
    FixedWeight = 0,
    Unrestricted = 1,
}

/// Opaque problem instance.
pub struct FwssInstance {
    inner: Instance,
}

fn status_of(err: &Error) -> FwssStatus {
    match err.exit_code() {
        2 => FwssStatus::InputError,
        _ => FwssStatus::ResourceError,
    }
}

fn write_string(out: *mut *mut c_char, text: String) -> FwssStatus {
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            FwssStatus::Ok
        }
        Err(_) => FwssStatus::InputError,
    }
}

fn guarded(body: impl FnOnce() -> FwssStatus) -> FwssStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(FwssStatus::Panic)
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, FwssStatus> {
    if ptr.is_null() {
        return Err(FwssStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| FwssStatus::Utf8Error)
}

/// Parses an instance from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer; on
/// `Ok` the caller owns the handle and must release it with
/// [`fwss_instance_free`].
#[no_mangle]
pub unsafe extern "C" fn fwss_instance_from_json(
    json: *const c_char,
    out: *mut *mut FwssInstance,
) -> FwssStatus {
    guarded(|| {
        if out.is_null() {
            return FwssStatus::NullPointer;
        }
        let text = match read_str(json) {
            Ok(text) => text,
            Err(status) => return status,
        };
        match Instance::from_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(FwssInstance { inner }));
                FwssStatus::Ok
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Draws a fresh instance; see the library's generator for the exact
/// distribution.
///
/// # Safety
/// `out` must be valid; the returned handle is owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn fwss_instance_generate(
    n: u64,
    ell: u64,
    density: f64,
    seed: u64,
    planted: bool,
    out: *mut *mut FwssInstance,
) -> FwssStatus {
    guarded(|| {
        if out.is_null() {
            return FwssStatus::NullPointer;
        }
        match gen_instance(n as usize, ell as usize, density, RngHandle::new(seed), planted) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(FwssInstance { inner }));
                FwssStatus::Ok
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Releases a handle returned by the constructors. Null is a no-op.
///
/// # Safety
/// `ptr` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fwss_instance_free(ptr: *mut FwssInstance) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

/// Number of weights.
///
/// # Safety
/// `ptr` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fwss_instance_n(ptr: *const FwssInstance) -> u64 {
    ptr.as_ref().map_or(0, |h| h.inner.n() as u64)
}

/// Prescribed solution weight.
///
/// # Safety
/// `ptr` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fwss_instance_ell(ptr: *const FwssInstance) -> u64 {
    ptr.as_ref().map_or(0, |h| h.inner.ell() as u64)
}

/// Serializes the instance to JSON.
///
/// # Safety
/// `ptr` must be a live handle and `out` valid; the string is released with
/// [`fwss_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fwss_instance_to_json(
    ptr: *const FwssInstance,
    out: *mut *mut c_char,
) -> FwssStatus {
    guarded(|| {
        let (Some(handle), false) = (ptr.as_ref(), out.is_null()) else {
            return FwssStatus::NullPointer;
        };
        write_string(out, handle.inner.to_json())
    })
}

/// Density statistics as JSON; pass `m = 0` to omit the modular fields.
///
/// # Safety
/// `ptr` must be a live handle and `out` valid; free the string with
/// [`fwss_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fwss_densities_json(
    ptr: *const FwssInstance,
    m: u64,
    out: *mut *mut c_char,
) -> FwssStatus {
    guarded(|| {
        let (Some(handle), false) = (ptr.as_ref(), out.is_null()) else {
            return FwssStatus::NullPointer;
        };
        match densities(&handle.inner, (m != 0).then_some(m)) {
            Ok(report) => write_string(out, serde_json::to_string(&report).expect("serializable")),
            Err(err) => status_of(&err),
        }
    })
}

/// Checks a '0'/'1' solution string: `Ok` when it solves the instance,
/// `NoSolution` when it does not.
///
/// # Safety
/// `ptr` must be a live handle and `bits` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fwss_verify(
    ptr: *const FwssInstance,
    bits: *const c_char,
) -> FwssStatus {
    guarded(|| {
        let Some(handle) = ptr.as_ref() else {
            return FwssStatus::NullPointer;
        };
        let text = match read_str(bits) {
            Ok(text) => text,
            Err(status) => return status,
        };
        let x = match text.parse() {
            Ok(x) => x,
            Err(_) => return FwssStatus::InputError,
        };
        match is_solution(&handle.inner, &x) {
            Ok(true) => FwssStatus::Ok,
            Ok(false) => FwssStatus::NoSolution,
            Err(err) => status_of(&err),
        }
    })
}

fn report_status<T: serde::Serialize>(
    result: Result<(Option<T>, String), Error>,
    out: *mut *mut c_char,
) -> FwssStatus {
    match result {
        Ok((solution, json)) => {
            let status = if solution.is_some() {
                FwssStatus::Ok
            } else {
                FwssStatus::NoSolution
            };
            match write_string(out, json) {
                FwssStatus::Ok => status,
                other => other,
            }
        }
        Err(err) => status_of(&err),
    }
}

/// Exhaustive search. Writes a JSON report either way; `Ok` means a
/// solution was found.
///
/// # Safety
/// `ptr` must be a live handle and `out` valid; free the report with
/// [`fwss_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fwss_solve_brute(
    ptr: *const FwssInstance,
    out: *mut *mut c_char,
) -> FwssStatus {
    guarded(|| {
        let (Some(handle), false) = (ptr.as_ref(), out.is_null()) else {
            return FwssStatus::NullPointer;
        };
        let result = brute_force(&handle.inner).map(|solution| {
            let json = serde_json::json!({
                "algorithm": "brute",
                "n": handle.inner.n(),
                "ell": handle.inner.ell(),
                "solution": solution,
            })
            .to_string();
            (solution, json)
        });
        report_status(result, out)
    })
}

unsafe fn solve_mitm_common(
    ptr: *const FwssInstance,
    four_tables: bool,
    random_divisions: bool,
    seed: u64,
    max_divisions: u64,
    out: *mut *mut c_char,
) -> FwssStatus {
    let (Some(handle), false) = (ptr.as_ref(), out.is_null()) else {
        return FwssStatus::NullPointer;
    };
    let source = if random_divisions {
        DivisionSource::Random(RngHandle::new(seed))
    } else {
        DivisionSource::Deterministic
    };
    let limits = SearchLimits {
        max_divisions: (max_divisions != 0).then_some(max_divisions),
    };
    let run = if four_tables {
        solve_ss4(&handle.inner, source, limits)
    } else {
        solve_mitm2(&handle.inner, source, limits)
    };
    let result = run.map(|report| {
        let json = serde_json::to_string(&report).expect("serializable");
        (report.solution, json)
    });
    report_status(result, out)
}

/// Two-table meet-in-the-middle. `max_divisions = 0` means no explicit cap.
///
/// # Safety
/// As [`fwss_solve_brute`].
#[no_mangle]
pub unsafe extern "C" fn fwss_solve_mitm2(
    ptr: *const FwssInstance,
    random_divisions: bool,
    seed: u64,
    max_divisions: u64,
    out: *mut *mut c_char,
) -> FwssStatus {
    guarded(|| solve_mitm_common(ptr, false, random_divisions, seed, max_divisions, out))
}

/// Schroeppel-Shamir four-table search. `max_divisions = 0` means no
/// explicit cap.
///
/// # Safety
/// As [`fwss_solve_brute`].
#[no_mangle]
pub unsafe extern "C" fn fwss_solve_ss4(
    ptr: *const FwssInstance,
    random_divisions: bool,
    seed: u64,
    max_divisions: u64,
    out: *mut *mut c_char,
) -> FwssStatus {
    guarded(|| solve_mitm_common(ptr, true, random_divisions, seed, max_divisions, out))
}

/// The randomized modular k-set driver. `max_iterations = 0` selects the
/// adaptive budget; `workers > 1` runs the parallel variant.
///
/// # Safety
/// As [`fwss_solve_brute`].
#[no_mangle]
pub unsafe extern "C" fn fwss_solve_kset(
    ptr: *const FwssInstance,
    k: u64,
    m: u64,
    alpha: u32,
    max_iterations: u64,
    mode: FwssMode,
    strict_validation: bool,
    workers: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> FwssStatus {
    guarded(|| {
        let (Some(handle), false) = (ptr.as_ref(), out.is_null()) else {
            return FwssStatus::NullPointer;
        };
        let mut config = KsetConfig::new(k as usize, m);
        config.alpha = alpha;
        config.max_iterations = (max_iterations != 0).then_some(max_iterations);
        config.mode = match mode {
            FwssMode::FixedWeight => SolveMode::FixedWeight,
            FwssMode::Unrestricted => SolveMode::Unrestricted,
        };
        config.validation_mode = if strict_validation {
            ValidationMode::Strict
        } else {
            ValidationMode::Experimental
        };
        config.workers = workers.max(1) as usize;
        config.allow_short_lists = true;
        let handle_rng = RngHandle::new(seed);
        let run = if config.workers > 1 {
            solve_kset_parallel(&handle.inner, &config, handle_rng)
        } else {
            solve_kset(&handle.inner, &config, handle_rng)
        };
        let result = run.map(|report| {
            let json = serde_json::to_string(&report).expect("serializable");
            (report.solution, json)
        });
        report_status(result, out)
    })
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `ptr` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fwss_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn make(json: &str) -> *mut FwssInstance {
        let c = CString::new(json).unwrap();
        let mut out: *mut FwssInstance = ptr::null_mut();
        let status = unsafe { fwss_instance_from_json(c.as_ptr(), &mut out) };
        assert_eq!(status, FwssStatus::Ok);
        out
    }

    fn take_string(ptr: *mut c_char) -> String {
        assert!(!ptr.is_null());
        let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_owned();
        unsafe { fwss_string_free(ptr) };
        text
    }

    #[test]
    fn round_trip_and_getters() {
        let handle = make(r#"{"n":4,"ell":2,"t":"3","a":["1","2","3","4"]}"#);
        unsafe {
            assert_eq!(fwss_instance_n(handle), 4);
            assert_eq!(fwss_instance_ell(handle), 2);
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(fwss_instance_to_json(handle, &mut out), FwssStatus::Ok);
            let json = take_string(out);
            assert!(json.contains("\"t\":\"3\""));
            fwss_instance_free(handle);
        }
    }

    #[test]
    fn null_and_garbage_inputs() {
        let mut out: *mut FwssInstance = ptr::null_mut();
        unsafe {
            assert_eq!(
                fwss_instance_from_json(ptr::null(), &mut out),
                FwssStatus::NullPointer
            );
            let bad = CString::new("{\"n\": 1}").unwrap();
            assert_eq!(
                fwss_instance_from_json(bad.as_ptr(), &mut out),
                FwssStatus::InputError
            );
            let junk = CString::new("not json").unwrap();
            assert_eq!(
                fwss_instance_from_json(junk.as_ptr(), &mut out),
                FwssStatus::InputError
            );
            fwss_instance_free(ptr::null_mut()); // no-op
        }
    }

    #[test]
    fn verify_distinguishes_solutions() {
        let handle = make(r#"{"n":4,"ell":2,"t":"3","a":["1","2","3","4"]}"#);
        unsafe {
            let good = CString::new("1100").unwrap();
            assert_eq!(fwss_verify(handle, good.as_ptr()), FwssStatus::Ok);
            let bad = CString::new("1010").unwrap();
            assert_eq!(fwss_verify(handle, bad.as_ptr()), FwssStatus::NoSolution);
            let short = CString::new("11").unwrap();
            assert_eq!(fwss_verify(handle, short.as_ptr()), FwssStatus::InputError);
            fwss_instance_free(handle);
        }
    }

    #[test]
    fn solvers_report_json() {
        let handle = make(r#"{"n":4,"ell":2,"t":"3","a":["1","2","3","4"]}"#);
        unsafe {
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(fwss_solve_brute(handle, &mut out), FwssStatus::Ok);
            let report = take_string(out);
            assert!(report.contains("\"solution\":\"1100\""), "{report}");

            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(fwss_solve_mitm2(handle, false, 0, 0, &mut out), FwssStatus::Ok);
            let report = take_string(out);
            assert!(report.contains("\"algorithm\":\"mitm2\""));
            fwss_instance_free(handle);
        }
    }

    #[test]
    fn no_solution_status_from_solvers() {
        let handle = make(r#"{"n":4,"ell":2,"t":"100","a":["1","2","3","4"]}"#);
        unsafe {
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(
                fwss_solve_ss4(handle, false, 0, 0, &mut out),
                FwssStatus::NoSolution
            );
            let report = take_string(out);
            assert!(report.contains("\"solution\":null"));
            fwss_instance_free(handle);
        }
    }

    #[test]
    fn generation_and_kset_solve() {
        let mut handle: *mut FwssInstance = ptr::null_mut();
        unsafe {
            assert_eq!(
                fwss_instance_generate(16, 8, 0.9, 7, true, &mut handle),
                FwssStatus::Ok
            );
            let mut out: *mut c_char = ptr::null_mut();
            let status = fwss_solve_kset(
                handle,
                4,
                1 << 10,
                1,
                0,
                FwssMode::FixedWeight,
                false,
                1,
                3,
                &mut out,
            );
            assert_eq!(status, FwssStatus::Ok);
            let report = take_string(out);
            assert!(report.contains("\"oracle_successes\""));
            fwss_instance_free(handle);
        }
    }
}
