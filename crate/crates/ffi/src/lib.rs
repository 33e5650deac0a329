//! C ABI over the `logsp` library.
//!
//! Every function returns a [`LogspStatus`]. On failure the message is kept in
//! a thread-local slot readable with [`logsp_last_error`]. Fields and solve
//! reports are opaque handles released with their `_free` functions.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use logsp::constants;
use logsp::fiber::FiberScalars;
use logsp::regime::{regime_classify, RegimeTag};
use logsp::solvers::{self, Method, SolveError, SolveReport, SolverConfig};
use logsp::{Branch, EnergyBreakdown, Error, Evaluator, Field, Grid, Params, ProfileSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogspStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotConverged = 3,
    RegimeRefusal = 4,
    Io = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogspRegime {
    GlobalMin = 0,
    GlobalMinMassCritical = 1,
    LocalMinPlusMountainPass = 2,
    NoCriticalPoint = 3,
    LambdaEmpty = 4,
    MaxOnLambda = 5,
    TwoCriticalPointsOnLambda = 6,
    OpenUnknown = 7,
}

impl From<RegimeTag> for LogspRegime {
    fn from(tag: RegimeTag) -> Self {
        match tag {
            RegimeTag::GlobalMin => LogspRegime::GlobalMin,
            RegimeTag::GlobalMinMassCritical => LogspRegime::GlobalMinMassCritical,
            RegimeTag::LocalMinPlusMountainPass => LogspRegime::LocalMinPlusMountainPass,
            RegimeTag::NoCriticalPoint => LogspRegime::NoCriticalPoint,
            RegimeTag::LambdaEmpty => LogspRegime::LambdaEmpty,
            RegimeTag::MaxOnLambda => LogspRegime::MaxOnLambda,
            RegimeTag::TwoCriticalPointsOnLambda => LogspRegime::TwoCriticalPointsOnLambda,
            RegimeTag::OpenUnknown => LogspRegime::OpenUnknown,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogspMethod {
    GlobalMinimize = 0,
    LocalMinimizeCapped = 1,
    LambdaBranchMinimize = 2,
    LambdaMaximize = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogspBranch {
    Plus = 0,
    Minus = 1,
    Zero = 2,
}

impl From<LogspBranch> for Branch {
    fn from(b: LogspBranch) -> Self {
        match b {
            LogspBranch::Plus => Branch::Plus,
            LogspBranch::Minus => Branch::Minus,
            LogspBranch::Zero => Branch::Zero,
        }
    }
}

impl From<Branch> for LogspBranch {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Plus => LogspBranch::Plus,
            Branch::Minus => LogspBranch::Minus,
            Branch::Zero => LogspBranch::Zero,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogspParams {
    pub gamma: f64,
    pub a: f64,
    pub p: f64,
    pub c: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogspEnergy {
    pub kinetic: f64,
    pub pnorm: f64,
    pub interaction: f64,
    pub v1: f64,
    pub v2: f64,
    pub energy: f64,
    pub mass: f64,
}

impl From<&EnergyBreakdown> for LogspEnergy {
    fn from(e: &EnergyBreakdown) -> Self {
        LogspEnergy {
            kinetic: e.kinetic,
            pnorm: e.pnorm,
            interaction: e.interaction,
            v1: e.v1,
            v2: e.v2,
            energy: e.energy,
            mass: e.mass,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogspResiduals {
    pub lambda: f64,
    pub q_residual: f64,
    pub pohozaev_residual: f64,
    pub el_residual: f64,
    pub iters: u64,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogspFiberPoint {
    pub s: f64,
    pub branch: LogspBranch,
    pub g: f64,
    pub gpp: f64,
}

/// Opaque sampled field.
pub struct LogspField(Field);

/// Opaque solve report.
pub struct LogspReport(SolveReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(LogspStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io(_) => LogspStatus::Io,
            Error::BoundaryLeak { .. } | Error::Bracketing(_) | Error::Shooting(_) => LogspStatus::Internal,
            _ => LogspStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Core(e) => e.into(),
            SolveError::Regime { .. } | SolveError::InitOutsideV { .. } => Failure(LogspStatus::RegimeRefusal, e.to_string()),
            _ => Failure(LogspStatus::NotConverged, e.to_string()),
        }
    }
}

fn null() -> Failure {
    Failure(LogspStatus::NullPointer, "null pointer argument".into())
}

/// Runs `f`, converting errors and panics into a status and the last-error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LogspStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LogspStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            LogspStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn params_in(p: *const LogspParams) -> Result<Params, Failure> {
    let p = p.as_ref().ok_or_else(null)?;
    Ok(Params::new(p.gamma, p.a, p.p, p.c)?)
}

unsafe fn path_in(path: *const c_char) -> Result<String, Failure> {
    if path.is_null() {
        return Err(null());
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(LogspStatus::InvalidArgument, "path is not UTF-8".into()))
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn logsp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a regime tag.
#[no_mangle]
pub extern "C" fn logsp_regime_name(tag: LogspRegime) -> *const c_char {
    let s: &'static CStr = match tag {
        LogspRegime::GlobalMin => c"GlobalMin",
        LogspRegime::GlobalMinMassCritical => c"GlobalMinMassCritical",
        LogspRegime::LocalMinPlusMountainPass => c"LocalMinPlusMountainPass",
        LogspRegime::NoCriticalPoint => c"NoCriticalPoint",
        LogspRegime::LambdaEmpty => c"LambdaEmpty",
        LogspRegime::MaxOnLambda => c"MaxOnLambda",
        LogspRegime::TwoCriticalPointsOnLambda => c"TwoCriticalPointsOnLambda",
        LogspRegime::OpenUnknown => c"OpenUnknown",
    };
    s.as_ptr()
}

/// Gagliardo–Nirenberg constant for exponent `p`.
///
/// # Safety
/// `kgn` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_kgn(p: f64, kgn: *mut f64) -> LogspStatus {
    guard(|| {
        let k = out(kgn)?;
        *k = constants::kgn_cached(p)?.kgn;
        Ok(())
    })
}

/// # Safety
/// `params` must be null or point to a valid struct; `tag` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_classify(params: *const LogspParams, tag: *mut LogspRegime) -> LogspStatus {
    guard(|| {
        let params = params_in(params)?;
        let tag = out(tag)?;
        let sharp = constants::SharpConstants::estimate(params.p)?;
        *tag = regime_classify(&params, &sharp)?.tag.into();
        Ok(())
    })
}

/// Fiber critical points for scalars `A`, `C`, `V`. Writes up to `cap` points
/// and the total count.
///
/// # Safety
/// `points` must be valid for `cap` writes (or null when `cap` is 0); `count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_fiber_points(
    params: *const LogspParams,
    kinetic: f64,
    pnorm: f64,
    interaction: f64,
    points: *mut LogspFiberPoint,
    cap: usize,
    count: *mut usize,
) -> LogspStatus {
    guard(|| {
        let params = params_in(params)?;
        let count = out(count)?;
        if cap > 0 && points.is_null() {
            return Err(null());
        }
        let found = FiberScalars::new(kinetic, pnorm, interaction, params)?.critical_points()?;
        *count = found.len();
        for (k, bp) in found.iter().take(cap).enumerate() {
            *points.add(k) = LogspFiberPoint { s: bp.s, branch: bp.branch.into(), g: bp.g, gpp: bp.gpp };
        }
        Ok(())
    })
}

/// Gaussian `exp(-r²/(2σ²))` of mass `mass` on an `n × n` grid of side `extent`.
///
/// # Safety
/// `field` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_field_gaussian(
    n: usize,
    extent: f64,
    sigma: f64,
    mass: f64,
    field: *mut *mut LogspField,
) -> LogspStatus {
    guard(|| {
        let slot = out(field)?;
        let grid = Grid::new(n, extent)?;
        let u = logsp::discretize(&ProfileSpec::gaussian(sigma, mass), &grid)?;
        *slot = Box::into_raw(Box::new(LogspField(u)));
        Ok(())
    })
}

/// Reads an LPF1 file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `field` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_field_load(path: *const c_char, field: *mut *mut LogspField) -> LogspStatus {
    guard(|| {
        let path = path_in(path)?;
        let slot = out(field)?;
        *slot = Box::into_raw(Box::new(LogspField(logsp::lpf::load(path)?)));
        Ok(())
    })
}

/// Writes an LPF1 file.
///
/// # Safety
/// `field` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn logsp_field_save(field: *const LogspField, path: *const c_char) -> LogspStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(null)?;
        logsp::lpf::save(path_in(path)?, &f.0)?;
        Ok(())
    })
}

/// Grid resolution and extent of a field.
///
/// # Safety
/// `field` must be a live handle; `n` and `extent` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_field_grid(field: *const LogspField, n: *mut usize, extent: *mut f64) -> LogspStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(null)?;
        *out(n)? = f.0.grid().n();
        *out(extent)? = f.0.grid().extent();
        Ok(())
    })
}

/// Copies the `n²` row-major samples into `values`, which holds `len` doubles.
///
/// # Safety
/// `field` must be a live handle; `values` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_field_values(field: *const LogspField, values: *mut f64, len: usize) -> LogspStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(null)?;
        let src = f.0.values();
        if values.is_null() {
            return Err(null());
        }
        if len < src.len() {
            return Err(Failure(LogspStatus::InvalidArgument, format!("buffer holds {len} values, field has {}", src.len())));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), values, src.len());
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn logsp_field_free(field: *mut LogspField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Energy functionals of a field.
///
/// # Safety
/// `field` must be a live handle; `params` valid; `energy` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_energy(field: *const LogspField, params: *const LogspParams, energy: *mut LogspEnergy) -> LogspStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(null)?;
        let params = params_in(params)?;
        let e = out(energy)?;
        *e = (&Evaluator::new(f.0.grid()).energy(&f.0, &params)?).into();
        Ok(())
    })
}

/// Solves from a Gaussian of width 1 on an `n × n` grid of side `extent`.
/// On `NotConverged` the partial report is still returned through `report`.
///
/// # Safety
/// `params` must be valid; `report` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_solve(
    params: *const LogspParams,
    n: usize,
    extent: f64,
    method: LogspMethod,
    branch: LogspBranch,
    seed: u64,
    report: *mut *mut LogspReport,
) -> LogspStatus {
    guard(|| {
        let params = params_in(params)?;
        let slot = out(report)?;
        *slot = ptr::null_mut();
        let grid = Grid::new(n, extent)?;
        let method = match method {
            LogspMethod::GlobalMinimize => Method::GlobalMinimize,
            LogspMethod::LocalMinimizeCapped => Method::LocalMinimizeCapped,
            LogspMethod::LambdaBranchMinimize => Method::LambdaBranchMinimize(branch.into()),
            LogspMethod::LambdaMaximize => Method::LambdaMaximize(branch.into()),
        };
        let config = SolverConfig { seed, ..SolverConfig::default() };
        match solvers::solve(method, &params, &grid, &config, &ProfileSpec::gaussian(1.0, params.c)) {
            Ok(r) => {
                *slot = Box::into_raw(Box::new(LogspReport(r)));
                Ok(())
            }
            Err(e) => {
                if let Some(r) = e.report() {
                    *slot = Box::into_raw(Box::new(LogspReport(r.clone())));
                }
                Err(e.into())
            }
        }
    })
}

/// # Safety
/// `report` must be a live handle; `energy` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_report_energy(report: *const LogspReport, energy: *mut LogspEnergy) -> LogspStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(null)?;
        *out(energy)? = (&r.0.breakdown).into();
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle; `residuals` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_report_residuals(report: *const LogspReport, residuals: *mut LogspResiduals) -> LogspStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(null)?.0;
        *out(residuals)? = LogspResiduals {
            lambda: r.lambda,
            q_residual: r.q_residual,
            pohozaev_residual: r.pohozaev_residual,
            el_residual: r.el_residual,
            iters: r.iters as u64,
            converged: r.converged,
        };
        Ok(())
    })
}

/// Copies the report's field into a new handle.
///
/// # Safety
/// `report` must be a live handle; `field` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn logsp_report_field(report: *const LogspReport, field: *mut *mut LogspField) -> LogspStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(null)?;
        *out(field)? = Box::into_raw(Box::new(LogspField(r.0.field.clone())));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn logsp_report_free(report: *mut LogspReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
