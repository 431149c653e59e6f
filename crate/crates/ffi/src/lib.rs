//! C interface to the `roesser` crate.
//!
//! Objects are opaque handles created by `*_new`/`*_from_json` functions and released
//! with the matching `*_free`. Every fallible call returns a `RoesserStatus`; on failure
//! the message is available from `roesser_last_error_message` until the next call on
//! the same thread. Strings returned by the library are freed with `roesser_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use roesser::lmi::{feasibility_report, mu_and_tau, recover_gains, SynthesisSolution};
use roesser::matrixcore::SYNTHESIS_MARGIN;
use roesser::model::{generate_dwell_switching, SwitchPattern, SwitchedModel};
use roesser::simulator::{simulate, EnergySeries, GridExtents};
use roesser::synthesis::{certify, solve, FeasibilityProblem};
use roesser::Error;

/// Result of a call. The first four values match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoesserStatus {
    Ok = 0,
    /// Infeasible problem, failed check or dwell-time violation.
    Verification = 1,
    /// Malformed input or argument.
    Input = 2,
    /// Singular block, blowup or solver breakdown.
    Numerical = 3,
    NullPointer = 4,
    /// Output buffer too small.
    BufferTooSmall = 5,
    Panic = 6,
}

/// A validated plant.
pub struct RoesserModel(SwitchedModel);

/// Barred synthesis variables with recovered gains.
pub struct RoesserSolution(SynthesisSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> RoesserStatus {
    match e.exit_code() {
        1 => RoesserStatus::Verification,
        2 => RoesserStatus::Input,
        _ => RoesserStatus::Numerical,
    }
}

/// Run `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (RoesserStatus, String)>) -> RoesserStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RoesserStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            RoesserStatus::Panic
        }
    }
}

fn lib<T>(r: roesser::Result<T>) -> Result<T, (RoesserStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (RoesserStatus, String) {
    (RoesserStatus::NullPointer, format!("{name} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (RoesserStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    // SAFETY: caller passes a nul-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| (RoesserStatus::Input, format!("{name} is not valid UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, name: &str) -> Result<&'a T, (RoesserStatus, String)> {
    // SAFETY: caller passes a handle obtained from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| null(name))
}

fn out_ptr<T>(p: *mut T, name: &str) -> Result<(), (RoesserStatus, String)> {
    if p.is_null() {
        Err(null(name))
    } else {
        Ok(())
    }
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Message of the last failed call on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn roesser_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn roesser_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parse and validate a model from JSON.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn roesser_model_from_json(json: *const c_char, out: *mut *mut RoesserModel) -> RoesserStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let text = unsafe { str_arg(json, "json") }?;
        let m = lib(SwitchedModel::from_json_str(text))?;
        unsafe { *out = Box::into_raw(Box::new(RoesserModel(m))) };
        Ok(())
    })
}

/// The bundled two-mode example.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn roesser_model_paper_example(out: *mut *mut RoesserModel) -> RoesserStatus {
    guard(|| {
        out_ptr(out, "out")?;
        unsafe { *out = Box::into_raw(Box::new(RoesserModel(SwitchedModel::paper_example()))) };
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library (or be NULL) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn roesser_model_free(m: *mut RoesserModel) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Number of modes, 0 for NULL.
///
/// # Safety
/// `m` must be a model handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn roesser_model_n_modes(m: *const RoesserModel) -> usize {
    unsafe { m.as_ref() }.map_or(0, |m| m.0.n_modes())
}

/// Parse a solution from JSON.
///
/// # Safety
/// `json` nul-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn roesser_solution_from_json(json: *const c_char, out: *mut *mut RoesserSolution) -> RoesserStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let text = unsafe { str_arg(json, "json") }?;
        let s = lib(SynthesisSolution::from_json_str(text))?;
        unsafe { *out = Box::into_raw(Box::new(RoesserSolution(s))) };
        Ok(())
    })
}

/// Serialize a solution; free the result with `roesser_string_free`.
///
/// # Safety
/// `s` a solution handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn roesser_solution_to_json(s: *const RoesserSolution, out: *mut *mut c_char) -> RoesserStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let s = unsafe { obj(s, "solution") }?;
        let text = lib(s.0.to_json_string())?;
        unsafe { *out = to_c_string(text) };
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library (or be NULL) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn roesser_solution_free(s: *mut RoesserSolution) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Solve the synthesis inequalities at fixed α, δ, ε (same δ, ε for all modes).
/// `best_t` (may be NULL) receives the smallest worst eigenvalue reached; on
/// infeasibility the status is `Verification` and `*out` is left untouched.
///
/// # Safety
/// `model` a model handle; `out` valid; `best_t` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn roesser_synthesize(
    model: *const RoesserModel,
    alpha: f64,
    delta: f64,
    epsilon: f64,
    out: *mut *mut RoesserSolution,
    best_t: *mut f64,
) -> RoesserStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let m = unsafe { obj(model, "model") }?;
        let p = lib(FeasibilityProblem::new(m.0.clone(), alpha, delta, epsilon))?;
        let o = lib(solve(&p))?;
        if !best_t.is_null() {
            unsafe { *best_t = o.best_t };
        }
        let s = lib(o.require())?;
        unsafe { *out = Box::into_raw(Box::new(RoesserSolution(s))) };
        Ok(())
    })
}

/// Check the synthesis inequalities at `margin` (≤ 0 selects the default 1e-7).
///
/// # Safety
/// Handles valid; `pass`, `worst_slack` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn roesser_verify(
    model: *const RoesserModel,
    solution: *const RoesserSolution,
    margin: f64,
    pass: *mut bool,
    worst_slack: *mut f64,
) -> RoesserStatus {
    guard(|| {
        let m = unsafe { obj(model, "model") }?;
        let s = unsafe { obj(solution, "solution") }?;
        let margin = if margin > 0.0 { margin } else { SYNTHESIS_MARGIN };
        lib(s.0.validate(m.0.dims.n1, m.0.dims.n2, m.0.dims.nu, m.0.n_modes()))?;
        let r = lib(feasibility_report(&s.0, &m.0, margin))?;
        if !pass.is_null() {
            unsafe { *pass = r.pass };
        }
        if !worst_slack.is_null() {
            unsafe { *worst_slack = r.worst_slack() };
        }
        Ok(())
    })
}

/// Consolidated certificate; `report_json` (may be NULL) receives the full report.
///
/// # Safety
/// Handles valid; `pass`, `report_json` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn roesser_certify(
    model: *const RoesserModel,
    solution: *const RoesserSolution,
    pass: *mut bool,
    report_json: *mut *mut c_char,
) -> RoesserStatus {
    guard(|| {
        let m = unsafe { obj(model, "model") }?;
        let s = unsafe { obj(solution, "solution") }?;
        lib(s.0.validate(m.0.dims.n1, m.0.dims.n2, m.0.dims.nu, m.0.n_modes()))?;
        let r = lib(certify(&s.0, &m.0))?;
        if !pass.is_null() {
            unsafe { *pass = r.pass };
        }
        if !report_json.is_null() {
            let text = serde_json::to_string(&r).map_err(|e| (RoesserStatus::Numerical, e.to_string()))?;
            unsafe { *report_json = to_c_string(text) };
        }
        Ok(())
    })
}

/// Copy K of `mode` (0-based) row-major into `buf`; `rows`, `cols` receive its shape.
///
/// # Safety
/// `solution` valid; `buf` holds `len` doubles (may be NULL when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn roesser_solution_gain(
    solution: *const RoesserSolution,
    mode: usize,
    buf: *mut f64,
    len: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> RoesserStatus {
    guard(|| {
        let s = unsafe { obj(solution, "solution") }?;
        let gains = lib(recover_gains(&s.0))?;
        let k = gains
            .get(mode)
            .ok_or_else(|| (RoesserStatus::Input, format!("mode {mode} out of range")))?;
        if !rows.is_null() {
            unsafe { *rows = k.rows() };
        }
        if !cols.is_null() {
            unsafe { *cols = k.cols() };
        }
        let data = k.as_slice();
        if len < data.len() || buf.is_null() {
            return Err((RoesserStatus::BufferTooSmall, format!("need {} doubles", data.len())));
        }
        unsafe { ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len()) };
        Ok(())
    })
}

/// Switching constant μ and minimal average dwell time τ_a* at `alpha`.
///
/// # Safety
/// `solution` valid; `mu`, `tau_star` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn roesser_mu_tau(solution: *const RoesserSolution, alpha: f64, mu: *mut f64, tau_star: *mut f64) -> RoesserStatus {
    guard(|| {
        out_ptr(mu, "mu")?;
        out_ptr(tau_star, "tau_star")?;
        let s = unsafe { obj(solution, "solution") }?;
        let (m, t) = lib(mu_and_tau(&s.0, alpha))?;
        unsafe {
            *mu = m;
            *tau_star = t;
        }
        Ok(())
    })
}

/// Simulate on an (imax+1)×(jmax+1) grid with round-robin switching of average dwell
/// time `tau_a` and write the per-diagonal energies to `buf` (imax + jmax + 1 values).
/// A NULL `solution` simulates the open loop.
///
/// # Safety
/// `model` valid; `solution` valid or NULL; `buf` holds `len` doubles; `written` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn roesser_simulate_energy(
    model: *const RoesserModel,
    solution: *const RoesserSolution,
    tau_a: f64,
    n0: f64,
    imax: i64,
    jmax: i64,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> RoesserStatus {
    guard(|| {
        let m = unsafe { obj(model, "model") }?;
        if imax < 1 || jmax < 1 {
            return Err((RoesserStatus::Input, "grid extents must be positive".into()));
        }
        let ext = GridExtents::new(imax, jmax);
        let sw = lib(generate_dwell_switching(m.0.n_modes(), tau_a, n0, ext.max_diagonal(), &SwitchPattern::RoundRobin))?;
        let gains = match unsafe { solution.as_ref() } {
            Some(s) => Some(lib(recover_gains(&s.0))?),
            None => None,
        };
        let grid = lib(simulate(&m.0, &sw, gains.as_deref(), ext))?;
        let series = EnergySeries::from_grid(&grid);
        if !written.is_null() {
            unsafe { *written = series.energy.len() };
        }
        if len < series.energy.len() || buf.is_null() {
            return Err((RoesserStatus::BufferTooSmall, format!("need {} doubles", series.energy.len())));
        }
        unsafe { ptr::copy_nonoverlapping(series.energy.as_ptr(), buf, series.energy.len()) };
        Ok(())
    })
}
