//! C ABI for bellsim.
//!
//! Every fallible call returns a `BellsimStatus`; results come back through
//! out-pointers. On failure, `bellsim_last_error()` describes what went wrong
//! on the calling thread. Handles are opaque and must be released with their
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bellsim::engine::{self, CorrelationEstimate, CurvePoint, ExperimentConfig, ModelConfig, Protocol, RunParams};
use bellsim::inequalities::{chsh_from_model, ChshSettings};
use bellsim::models::program::{program_overall, ThreeOptions};
use bellsim::models::quantum::{qm_correlation, Particle};
use bellsim::oracle::{quadrature_correlation, QuadratureSpec};
use bellsim::{Angle, Aperture, ApertureModel, Pairing};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// No double passes were counted, so the correlation is undefined.
    Undefined = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellsimPairing {
    HeadToToe = 0,
    BackToBack = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellsimParticle {
    SpinHalf = 0,
    Photon = 1,
}

/// Post-selected correlation estimate. When `defined` is false, `e`, `rate`
/// and `std_error` are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellsimEstimate {
    pub n_pairs: u64,
    pub n_coincident: u64,
    pub n_same: u64,
    pub n_diff: u64,
    pub e: f64,
    pub rate: f64,
    pub std_error: f64,
    pub defined: bool,
}

/// Run size and randomness. `shards == 0` selects the default.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BellsimRunParams {
    pub pairs: u64,
    pub seed: u64,
    pub shards: u32,
}

/// Opaque aperture model.
pub struct BellsimModel(ApertureModel);

/// Opaque correlation curve.
pub struct BellsimCurve(Vec<CurvePoint>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Fail(BellsimStatus, String);

impl From<bellsim::Error> for Fail {
    fn from(e: bellsim::Error) -> Self {
        Fail(BellsimStatus::InvalidArgument, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(BellsimStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, turning errors and panics into a status plus a thread-local message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BellsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BellsimStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BellsimStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

fn angle(deg: f64) -> Result<Angle, Fail> {
    Ok(Angle::new(deg)?)
}

fn params(p: BellsimRunParams) -> RunParams {
    RunParams {
        pairs: p.pairs,
        seed: p.seed,
        shards: if p.shards == 0 { engine::DEFAULT_SHARDS } else { p.shards },
    }
}

fn config(model: &ApertureModel, protocol: Protocol, p: BellsimRunParams) -> Result<ExperimentConfig, Fail> {
    let p = params(p);
    let cfg = ExperimentConfig::new(ModelConfig::Aperture(*model), protocol)
        .with_pairs(p.pairs)
        .with_seed(p.seed)
        .with_shards(p.shards);
    cfg.validate()?;
    Ok(cfg)
}

impl From<CorrelationEstimate> for BellsimEstimate {
    fn from(e: CorrelationEstimate) -> Self {
        BellsimEstimate {
            n_pairs: e.n_pairs,
            n_coincident: e.n_coincident,
            n_same: e.n_same,
            n_diff: e.n_diff,
            e: e.e.unwrap_or(f64::NAN),
            rate: e.rate.unwrap_or(f64::NAN),
            std_error: e.stderr.unwrap_or(f64::NAN),
            defined: e.is_defined(),
        }
    }
}

impl From<BellsimPairing> for Pairing {
    fn from(p: BellsimPairing) -> Self {
        match p {
            BellsimPairing::HeadToToe => Pairing::HeadToToe,
            BellsimPairing::BackToBack => Pairing::BackToBack,
        }
    }
}

impl From<BellsimParticle> for Particle {
    fn from(p: BellsimParticle) -> Self {
        match p {
            BellsimParticle::SpinHalf => Particle::SpinHalf,
            BellsimParticle::Photon => Particle::Photon,
        }
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bellsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bellsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a model from an aperture spec: `figure-eight`, `rose`,
/// `circle:<d>` or `slit:<eps>`.
///
/// # Safety
/// `aperture` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_model_new(
    aperture: *const c_char,
    pairing: BellsimPairing,
    out: *mut *mut BellsimModel,
) -> BellsimStatus {
    guard(|| {
        if aperture.is_null() {
            return Err(null("aperture"));
        }
        let spec = CStr::from_ptr(aperture)
            .to_str()
            .map_err(|_| Fail(BellsimStatus::InvalidArgument, "aperture is not UTF-8".into()))?;
        let aperture: Aperture = spec.parse()?;
        let model = Box::new(BellsimModel(ApertureModel::new(aperture, pairing.into())));
        write(out, Box::into_raw(model), "out")
    })
}

/// # Safety
/// `model` must come from `bellsim_model_new` and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bellsim_model_free(model: *mut BellsimModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Pass probability of a knife misaligned by `misalignment_deg` from the axis.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_clearance(
    model: *const BellsimModel,
    misalignment_deg: f64,
    out: *mut f64,
) -> BellsimStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write(out, m.0.aperture.clearance(angle(misalignment_deg)?), "out")
    })
}

/// Monte Carlo estimate at one pair of target settings. Returns
/// `UNDEFINED` (with `out` still filled) if no pair passed both sides.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_run_fixed(
    model: *const BellsimModel,
    left_deg: f64,
    right_deg: f64,
    params: BellsimRunParams,
    out: *mut BellsimEstimate,
) -> BellsimStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let protocol = Protocol::Fixed { left: angle(left_deg)?, right: angle(right_deg)? };
        let est = engine::run_fixed(&config(&m.0, protocol, params)?)?;
        write(out, est.into(), "out")?;
        if est.is_defined() {
            Ok(())
        } else {
            Err(Fail(BellsimStatus::Undefined, "no coincidences".into()))
        }
    })
}

/// Sweeps the right target over `start..=end` by `step` with the left at 0°.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_run_sweep(
    model: *const BellsimModel,
    start_deg: f64,
    end_deg: f64,
    step_deg: f64,
    params: BellsimRunParams,
    out: *mut *mut BellsimCurve,
) -> BellsimStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let protocol = Protocol::Sweep { start: start_deg, end: end_deg, step: step_deg };
        let curve = engine::run_sweep(&config(&m.0, protocol, params)?)?;
        write(out, Box::into_raw(Box::new(BellsimCurve(curve))), "out")
    })
}

/// Number of points in a curve; 0 for null.
///
/// # Safety
/// `curve` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bellsim_curve_len(curve: *const BellsimCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Point `index` of a curve.
///
/// # Safety
/// `curve` must be a live handle; `theta_deg` and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_curve_get(
    curve: *const BellsimCurve,
    index: usize,
    theta_deg: *mut f64,
    out: *mut BellsimEstimate,
) -> BellsimStatus {
    guard(|| {
        let c = deref(curve, "curve")?;
        let p = c.0.get(index).ok_or_else(|| {
            Fail(BellsimStatus::InvalidArgument, format!("index {index} out of range (len {})", c.0.len()))
        })?;
        write(theta_deg, p.theta, "theta_deg")?;
        write(out, p.estimate.into(), "out")
    })
}

/// # Safety
/// `curve` must come from `bellsim_run_sweep` and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bellsim_curve_free(curve: *mut BellsimCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Deterministic correlation at separation `theta_deg` by quadrature over the
/// hidden angle. `rho_steps == 0` selects the default grid.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_quadrature_correlation(
    model: *const BellsimModel,
    theta_deg: f64,
    rho_steps: usize,
    out: *mut f64,
) -> BellsimStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let spec = if rho_steps == 0 { QuadratureSpec::default() } else { QuadratureSpec::new(rho_steps)? };
        match quadrature_correlation(&m.0, angle(theta_deg)?, spec)? {
            Some(e) => write(out, e, "out"),
            None => {
                write(out, f64::NAN, "out")?;
                Err(Fail(BellsimStatus::Undefined, "zero double-pass weight".into()))
            }
        }
    })
}

/// CHSH statistic from four Monte Carlo runs at settings `a1, b1 | c2, d2`.
///
/// # Safety
/// `model` must be a live handle; `s` and `std_error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_chsh(
    model: *const BellsimModel,
    a1_deg: f64,
    b1_deg: f64,
    c2_deg: f64,
    d2_deg: f64,
    params: BellsimRunParams,
    s: *mut f64,
    std_error: *mut f64,
) -> BellsimStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let settings = ChshSettings::new(a1_deg, b1_deg, c2_deg, d2_deg)?;
        let est = chsh_from_model(&m.0, &settings, self::params(params))?;
        write(s, est.s.unwrap_or(f64::NAN), "s")?;
        write(std_error, est.stderr.unwrap_or(f64::NAN), "std_error")?;
        if est.s.is_some() {
            Ok(())
        } else {
            Err(Fail(BellsimStatus::Undefined, "a CHSH term had no coincidences".into()))
        }
    })
}

/// Quantum correlation at separation `theta_deg`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_qm_correlation(
    particle: BellsimParticle,
    theta_deg: f64,
    out: *mut f64,
) -> BellsimStatus {
    guard(|| write(out, qm_correlation(particle.into(), angle(theta_deg)?), "out"))
}

/// Exact overall match probability of the instruction-set model for three
/// distinct settings, as a reduced fraction.
///
/// # Safety
/// `numerator` and `denominator` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bellsim_program_overall(
    o1_deg: f64,
    o2_deg: f64,
    o3_deg: f64,
    numerator: *mut u64,
    denominator: *mut u64,
) -> BellsimStatus {
    guard(|| {
        let r = program_overall(&ThreeOptions::new([o1_deg, o2_deg, o3_deg])?);
        write(numerator, *r.numer(), "numerator")?;
        write(denominator, *r.denom(), "denominator")
    })
}
