//! C ABI over `fsi_decay`.
//!
//! Every entry point returns an [`FsiStatus`]; results travel through out
//! pointers. Objects are opaque handles released with their `_free`
//! function. Strings returned to the caller are owned by the caller and
//! released with [`fsi_string_free`]. On failure, [`fsi_last_error`] gives a
//! message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fsi_decay::exponents::{evaluate_exponents, reference_weights};
use fsi_decay::feasibility::{check_point, compile_requirements, weights_point, Requirements};
use fsi_decay::lemma::{find_admissible_lambda, LemmaShape};
use fsi_decay::minplus::WeightVector;
use fsi_decay::sim::{self, SimConfig, SimState, System};
use fsi_decay::{report, Error, Rational};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FsiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    /// The question has no answer, e.g. no admissible λ.
    NoSolution = 5,
    Numerical = 6,
    Io = 7,
    Internal = 8,
    Panic = 9,
}

/// Parsed weight vector `(c_id, c_T, c_dt, c_Tdt, c_TT, c_dtt)`.
pub struct FsiWeights(WeightVector);

/// Simulator state and its factored step operator.
pub struct FsiSimulation {
    config: SimConfig,
    system: System,
    x: Vec<f64>,
    steps: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FsiStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) | Error::Json(_) => FsiStatus::Parse,
            Error::EmptyExpression(_)
            | Error::InvalidParameter(_)
            | Error::UndeclaredVariable { .. }
            | Error::Config(_)
            | Error::NonMonotone { .. } => FsiStatus::InvalidArgument,
            Error::NoAdmissibleLambda { .. } | Error::UndefinedFit(_) => FsiStatus::NoSolution,
            Error::SingularSystem { .. } | Error::SolverBreakdown { .. } | Error::NonFinite { .. } => {
                FsiStatus::Numerical
            }
            Error::Io(_) => FsiStatus::Io,
            _ => FsiStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FsiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FsiStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(p) => {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            set_last_error(&format!("panic: {}", msg.unwrap_or_default()));
            FsiStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FsiStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(FsiStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn rational_arg(p: *const c_char, what: &str) -> Result<Rational, Failure> {
    str_arg(p, what)?.parse::<Rational>().map_err(|e| Failure(FsiStatus::Parse, format!("{what}: {e}")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn owned(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Crate version and expression-ledger hash, as a static string.
#[no_mangle]
pub extern "C" fn fsi_version() -> *const c_char {
    static TEXT: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    TEXT.get_or_init(|| CString::new(fsi_decay::cli::version_text()).unwrap()).as_ptr()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn fsi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn fsi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse `len` weights (integer, `p/q` or decimal strings).
///
/// # Safety
/// `values` must point to `len` valid C strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsi_weights_parse(
    values: *const *const c_char,
    len: usize,
    out: *mut *mut FsiWeights,
) -> FsiStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if values.is_null() {
            return Err(null("values"));
        }
        let items = (0..len).map(|i| str_arg(*values.add(i), "weight")).collect::<Result<Vec<_>, _>>()?;
        let w = WeightVector::parse_list(&items)?;
        *out = Box::into_raw(Box::new(FsiWeights(w)));
        Ok(())
    })
}

/// The reference weight vector `(5, 5/3, 20/3, 17/3, 0, 25/3)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsi_weights_reference(out: *mut *mut FsiWeights) -> FsiStatus {
    guard(|| {
        *out_ptr(out, "out")? = Box::into_raw(Box::new(FsiWeights(reference_weights())));
        Ok(())
    })
}

/// # Safety
/// `w` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn fsi_weights_free(w: *mut FsiWeights) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// α, κ, ε as exact `p/q` strings.
///
/// # Safety
/// `w` must be a valid handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsi_exponents(
    w: *const FsiWeights,
    alpha: *mut *mut c_char,
    kappa: *mut *mut c_char,
    epsilon: *mut *mut c_char,
) -> FsiStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("weights"))?;
        let (alpha, kappa, epsilon) = (out_ptr(alpha, "alpha")?, out_ptr(kappa, "kappa")?, out_ptr(epsilon, "epsilon")?);
        let t = evaluate_exponents(&w.0);
        *alpha = owned(t.alpha.to_string());
        *kappa = owned(t.kappa.to_string());
        *epsilon = owned(t.epsilon.to_string());
        Ok(())
    })
}

/// Whether every compiled requirement holds at `w`. `report` may be NULL;
/// otherwise it receives the JSON report.
///
/// # Safety
/// `w` must be a valid handle; `feasible` must be writable; `report` NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fsi_verify_weights(
    w: *const FsiWeights,
    feasible: *mut bool,
    report: *mut *mut c_char,
) -> FsiStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("weights"))?;
        let feasible = out_ptr(feasible, "feasible")?;
        let sys = compile_requirements(&Requirements::default());
        *feasible = check_point(&sys, &weights_point(&sys, &w.0, None)).feasible;
        if let Some(r) = report.as_mut() {
            *r = owned(report::verify_weights_report(&w.0).0.render());
        }
        Ok(())
    })
}

/// Exponent `k` of the largest admissible `λ = 2^{-k}`. Returns
/// `NoSolution` when none exists for `k ≤ 64`.
///
/// # Safety
/// String arguments must be valid C strings; `exponent` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsi_lemma_find_lambda(
    c: *const c_char,
    gamma: *const c_char,
    alpha: *const c_char,
    beta: *const c_char,
    kappa: *const c_char,
    exponent: *mut u32,
) -> FsiStatus {
    guard(|| {
        let exponent = out_ptr(exponent, "exponent")?;
        let shape = LemmaShape::with_default_ctilde(
            rational_arg(c, "C")?,
            rational_arg(gamma, "gamma")?,
            rational_arg(alpha, "alpha")?,
            rational_arg(beta, "beta")?,
            rational_arg(kappa, "kappa")?,
        )?;
        *exponent = find_admissible_lambda(&shape)?.exponent;
        Ok(())
    })
}

/// Start a simulation. `config_json` may be NULL for the default config.
///
/// # Safety
/// `config_json` must be NULL or a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsi_sim_new(config_json: *const c_char, out: *mut *mut FsiSimulation) -> FsiStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let config = if config_json.is_null() {
            SimConfig::default()
        } else {
            SimConfig::from_json(str_arg(config_json, "config_json")?)?
        };
        config.validate()?;
        let system = System::from_config(&config)?;
        let mut x = SimState::from_profile(system.layout, config.profile).pack(system.layout);
        if config.coupling == sim::Coupling::ClampedInterface {
            let l = system.layout;
            for i in [l.v_index(l.n_f), l.w_index(l.n_f)].into_iter().flatten() {
                x[i] = 0.0;
            }
        }
        *out = Box::into_raw(Box::new(FsiSimulation { config, system, x, steps: 0 }));
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn fsi_sim_free(s: *mut FsiSimulation) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Advance by `n` time steps.
///
/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn fsi_sim_step(s: *mut FsiSimulation, n: u64) -> FsiStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(|| null("simulation"))?;
        for _ in 0..n {
            let next = s.system.step_vec(&s.x);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::SolverBreakdown { step: s.steps as usize }.into());
            }
            s.x = next;
            s.steps += 1;
        }
        Ok(())
    })
}

/// Current time, energy `E_id` and dissipation `D`. Any out pointer may be
/// NULL.
///
/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn fsi_sim_observe(
    s: *const FsiSimulation,
    time: *mut f64,
    energy: *mut f64,
    dissipation: *mut f64,
) -> FsiStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("simulation"))?;
        if let Some(t) = time.as_mut() {
            *t = s.steps as f64 * s.config.dt;
        }
        if let Some(e) = energy.as_mut() {
            *e = s.system.energy(&s.x);
        }
        if let Some(d) = dissipation.as_mut() {
            *d = s.system.dissipation(&s.x);
        }
        Ok(())
    })
}

/// Number of packed unknowns.
///
/// # Safety
/// `s` must be a valid handle; `dim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsi_sim_dim(s: *const FsiSimulation, dim: *mut usize) -> FsiStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("simulation"))?;
        *out_ptr(dim, "dim")? = s.x.len();
        Ok(())
    })
}

/// Copy the packed unknowns into `buf`, which holds `len` doubles; `len`
/// must equal [`fsi_sim_dim`].
///
/// # Safety
/// `s` must be a valid handle; `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fsi_sim_state(s: *const FsiSimulation, buf: *mut f64, len: usize) -> FsiStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("simulation"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len != s.x.len() {
            return Err(Failure(FsiStatus::InvalidArgument, format!("buffer holds {len}, state has {}", s.x.len())));
        }
        ptr::copy_nonoverlapping(s.x.as_ptr(), buf, len);
        Ok(())
    })
}

/// Run a whole simulation and return the JSON report the CLI prints.
///
/// # Safety
/// `config_json` must be NULL or a valid C string; `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsi_sim_run_report(config_json: *const c_char, report: *mut *mut c_char) -> FsiStatus {
    guard(|| {
        let out = out_ptr(report, "report")?;
        let config = if config_json.is_null() {
            SimConfig::default()
        } else {
            SimConfig::from_json(str_arg(config_json, "config_json")?)?
        };
        let trace = sim::run(&config)?;
        let summary = sim::summarize(&config, &trace)?;
        *out = owned(report::simulate_report(&config, &summary).0.render());
        Ok(())
    })
}
