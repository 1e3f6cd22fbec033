//! C interface to the linkselect solver.
//!
//! Instances and solutions are opaque heap handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns
//! an [`LsStatus`]; on failure the message is available from
//! [`ls_last_error`] until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use linkselect::lp_bound::{preprocess_oversized, solve_lp};
use linkselect::model::{parse_instance, Decision, DecisionSolution, Direction, Instance};
use linkselect::{oracle, search, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    Usage = 1,
    Parse = 2,
    SizeLimit = 3,
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsDirection {
    LeftToRight = 0,
    RightToLeft = 1,
}

pub struct LsInstance {
    inner: Instance,
}

pub struct LsSolution {
    inner: DecisionSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> LsStatus {
    match err.exit_code() {
        1 => LsStatus::Usage,
        2 => LsStatus::Parse,
        3 => LsStatus::SizeLimit,
        _ => LsStatus::Internal,
    }
}

/// Runs `f`, recording errors and turning panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), Error>) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LsStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside linkselect".into());
            LsStatus::Internal
        }
    }
}

fn null_arg(name: &str) -> Error {
    Error::InvalidInput(format!("`{name}` is null"))
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses an instance from NUL-terminated text in the `wps v1` format.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_instance_parse(text: *const c_char, out: *mut *mut LsInstance) -> LsStatus {
    guard(|| {
        if text.is_null() {
            return Err(null_arg("text"));
        }
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| Error::Parse { line: 1, message: "input is not UTF-8".into() })?;
        let inner = parse_instance(s)?;
        *out = Box::into_raw(Box::new(LsInstance { inner }));
        Ok(())
    })
}

/// Creates an empty instance with rejection cost `f * x + m`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_instance_new(f: f64, m: f64, out: *mut *mut LsInstance) -> LsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let inner = Instance::empty(f, m)?;
        *out = Box::into_raw(Box::new(LsInstance { inner }));
        Ok(())
    })
}

/// Appends a packet.
///
/// # Safety
/// `instance` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ls_instance_push(instance: *mut LsInstance, direction: LsDirection, weight: f64) -> LsStatus {
    guard(|| {
        let inst = instance.as_mut().ok_or_else(|| null_arg("instance"))?;
        let d = match direction {
            LsDirection::LeftToRight => Direction::LeftToRight,
            LsDirection::RightToLeft => Direction::RightToLeft,
        };
        let packets = inst
            .inner
            .packets()
            .iter()
            .map(|p| (p.direction, p.weight))
            .chain(std::iter::once((d, weight)));
        inst.inner = Instance::new(inst.inner.f(), inst.inner.m(), packets)?;
        Ok(())
    })
}

/// Number of packets; 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_instance_len(instance: *const LsInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.len())
}

/// # Safety
/// `instance` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ls_instance_free(instance: *mut LsInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Approximate solve with capacity search granularity `epsilon`.
///
/// # Safety
/// `instance` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_solve(instance: *const LsInstance, epsilon: f64, out: *mut *mut LsSolution) -> LsStatus {
    guard(|| {
        let inst = instance.as_ref().ok_or_else(|| null_arg("instance"))?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let inner = search::solve(&inst.inner, epsilon)?.best;
        *out = Box::into_raw(Box::new(LsSolution { inner }));
        Ok(())
    })
}

/// Exact optimum by enumeration; fails with `SizeLimit` above `limit`
/// packets.
///
/// # Safety
/// `instance` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_exact(instance: *const LsInstance, limit: usize, out: *mut *mut LsSolution) -> LsStatus {
    guard(|| {
        let inst = instance.as_ref().ok_or_else(|| null_arg("instance"))?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let r = oracle::exact_opt(&inst.inner, limit)?;
        let inner = DecisionSolution {
            capacity: r.capacity_cost,
            initial_left: r.initial_left,
            decisions: r.decisions,
            cost: linkselect::model::CostBreakdown::new(r.capacity_cost, r.rejection_cost),
        };
        *out = Box::into_raw(Box::new(LsSolution { inner }));
        Ok(())
    })
}

/// Fractional lower bound on the rejection cost at `capacity`, including
/// packets too heavy to ever fit.
///
/// # Safety
/// `instance` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ls_lp_bound(instance: *const LsInstance, capacity: f64, out: *mut f64) -> LsStatus {
    guard(|| {
        let inst = instance.as_ref().ok_or_else(|| null_arg("instance"))?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        if !(capacity.is_finite() && capacity >= 0.0) {
            return Err(Error::InvalidInput(format!("capacity must be non-negative, got {capacity}")));
        }
        let pre = preprocess_oversized(&inst.inner, capacity);
        *out = solve_lp(&pre.sub_instance, capacity)?.objective + pre.forced_cost;
        Ok(())
    })
}

fn with_solution(sol: *const LsSolution, f: impl FnOnce(&DecisionSolution) -> f64) -> f64 {
    // SAFETY: the accessors require null or a live handle.
    unsafe { sol.as_ref() }.map_or(f64::NAN, |s| f(&s.inner))
}

/// Total cost; NaN for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_solution_total(solution: *const LsSolution) -> f64 {
    with_solution(solution, |s| s.cost.total)
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_solution_capacity_cost(solution: *const LsSolution) -> f64 {
    with_solution(solution, |s| s.cost.capacity_cost)
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_solution_rejection_cost(solution: *const LsSolution) -> f64 {
    with_solution(solution, |s| s.cost.rejection_cost)
}

/// Capacity placed at the left end before the first packet.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_solution_initial_left(solution: *const LsSolution) -> f64 {
    with_solution(solution, |s| s.initial_left)
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_solution_len(solution: *const LsSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.decisions.len())
}

/// 1 if packet `index` (0-based) is accepted, 0 if rejected, -1 if out of
/// range or the handle is null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_solution_decision(solution: *const LsSolution, index: usize) -> i32 {
    match solution.as_ref().and_then(|s| s.inner.decisions.get(index)) {
        Some(Decision::Accept) => 1,
        Some(Decision::Reject) => 0,
        None => -1,
    }
}

/// # Safety
/// `solution` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ls_solution_free(solution: *mut LsSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}
