//! C interface to the `qiup` simulator.
//!
//! Scenarios and simulated frames live behind opaque handles that the caller
//! releases with the matching `*_free` function. Every function returns a
//! [`QiupStatus`]; on failure a description is available from
//! [`qiup_last_error`] on the same thread until the next failing call.
//! Panics never cross the boundary; they surface as `QIUP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qiup::camera::ImageFrame;
use qiup::fit::{self, VisibilityFit};
use qiup::pipeline::{self, Experiment, Roi, Scenario};
use qiup::qcore::{self, ObjectResponse};
use qiup::scenarios::{build_scenario, Preset};
use qiup::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QiupStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    OutOfRange = 3,
    InvalidScenario = 4,
    Numerical = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Output port of the second beam splitter.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QiupPort {
    G = 0,
    H = 1,
}

/// Result of a fringe fit, `A + B·cos(φ − φ0)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QiupFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub visibility: f64,
    pub offset_se: f64,
    pub amplitude_se: f64,
    pub phase_se: f64,
    pub visibility_se: f64,
    /// Nonzero when the fitted visibility exceeds 1.
    pub unphysical: i32,
}

impl From<VisibilityFit> for QiupFit {
    fn from(f: VisibilityFit) -> Self {
        Self {
            offset: f.offset,
            amplitude: f.amplitude,
            phase: f.phase,
            visibility: f.visibility,
            offset_se: f.offset_se,
            amplitude_se: f.amplitude_se,
            phase_se: f.phase_se,
            visibility_se: f.visibility_se,
            unphysical: i32::from(f.unphysical),
        }
    }
}

/// Opaque scenario handle.
pub struct QiupScenario {
    inner: Scenario,
}

/// Opaque pair of simulated frames (G and H).
pub struct QiupFrames {
    g: ImageFrame,
    h: ImageFrame,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(QiupStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::OutOfRange(_) | Error::ShapeMismatch { .. } | Error::WavelengthOutOfTable { .. } => {
                QiupStatus::OutOfRange
            }
            Error::NotNormalized(_) | Error::RankDeficient => QiupStatus::Numerical,
            Error::UnknownPreset(_) | Error::UnknownMaterial(_) | Error::InvalidScenario(_) => {
                QiupStatus::InvalidScenario
            }
            Error::Pgm(_) | Error::Read { .. } | Error::Write { .. } | Error::Json { .. } => QiupStatus::Io,
        };
        Failure(code, e.to_string())
    }
}

fn fail(code: QiupStatus, msg: impl Into<String>) -> Failure {
    Failure(code, msg.into())
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QiupStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QiupStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_last_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {msg}"));
            QiupStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(QiupStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(QiupStatus::InvalidUtf8, "string argument is not valid UTF-8"))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(QiupStatus::NullPointer, "null output pointer"))
}

unsafe fn scenario<'a>(p: *const QiupScenario) -> Result<&'a Scenario, Failure> {
    p.as_ref()
        .map(|s| &s.inner)
        .ok_or_else(|| fail(QiupStatus::NullPointer, "null scenario handle"))
}

unsafe fn scenario_mut<'a>(p: *mut QiupScenario) -> Result<&'a mut Scenario, Failure> {
    p.as_mut()
        .map(|s| &mut s.inner)
        .ok_or_else(|| fail(QiupStatus::NullPointer, "null scenario handle"))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, need: usize) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(fail(QiupStatus::NullPointer, "null buffer"));
    }
    if len < need {
        return Err(fail(
            QiupStatus::BufferTooSmall,
            format!("buffer holds {len} elements, {need} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(fail(QiupStatus::NullPointer, "null buffer"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qiup_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qiup_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a scenario from a preset name such as `"silicon_cat"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out_handle` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_from_preset(name: *const c_char, out_handle: *mut *mut QiupScenario) -> QiupStatus {
    guard(|| {
        let slot = out(out_handle)?;
        *slot = ptr::null_mut();
        let preset: Preset = text(name)?.parse()?;
        *slot = Box::into_raw(Box::new(QiupScenario {
            inner: build_scenario(preset),
        }));
        Ok(())
    })
}

/// Parses and validates a scenario JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_handle` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_from_json(json: *const c_char, out_handle: *mut *mut QiupScenario) -> QiupStatus {
    guard(|| {
        let slot = out(out_handle)?;
        *slot = ptr::null_mut();
        let s: Scenario = serde_json::from_str(text(json)?)
            .map_err(|e| fail(QiupStatus::InvalidScenario, format!("invalid scenario JSON: {e}")))?;
        s.validate()?;
        *slot = Box::into_raw(Box::new(QiupScenario { inner: s }));
        Ok(())
    })
}

/// Writes the scenario as JSON into `buf` (NUL-terminated). `needed`
/// receives the required size including the terminator; pass a null `buf`
/// to query it.
///
/// # Safety
/// `handle` must come from this library; `buf` must hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_to_json(
    handle: *const QiupScenario,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> QiupStatus {
    guard(|| {
        let json = scenario(handle)?.to_json();
        let size = json.len() + 1;
        *out(needed)? = size;
        if buf.is_null() {
            return Ok(());
        }
        let dst = slice_mut(buf.cast::<u8>(), cap, size)?;
        dst[..json.len()].copy_from_slice(json.as_bytes());
        dst[json.len()] = 0;
        Ok(())
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `handle` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_free(handle: *mut QiupScenario) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Camera grid size.
///
/// # Safety
/// `handle` must come from this library; `rows` and `cols` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_shape(handle: *const QiupScenario, rows: *mut usize, cols: *mut usize) -> QiupStatus {
    guard(|| {
        let s = scenario(handle)?;
        *out(rows)? = s.geometry.rows;
        *out(cols)? = s.geometry.cols;
        Ok(())
    })
}

/// Effective visibility `v0 × mismatch envelope`.
///
/// # Safety
/// `handle` must come from this library; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_effective_visibility(handle: *const QiupScenario, value: *mut f64) -> QiupStatus {
    guard(|| {
        *out(value)? = scenario(handle)?.effective_visibility();
        Ok(())
    })
}

unsafe fn update(handle: *mut QiupScenario, apply: impl FnOnce(&mut Scenario)) -> QiupStatus {
    guard(|| {
        let s = scenario_mut(handle)?;
        let mut next = s.clone();
        apply(&mut next);
        next.validate()?;
        *s = next;
        Ok(())
    })
}

/// Sets the camera random seed.
///
/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_set_seed(handle: *mut QiupScenario, seed: u64) -> QiupStatus {
    update(handle, |s| s.camera.rng_seed = seed)
}

/// Nonzero selects exact expectations instead of random draws.
///
/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_set_noiseless(handle: *mut QiupScenario, noiseless: i32) -> QiupStatus {
    update(handle, |s| s.camera.noiseless = noiseless != 0)
}

/// Nonzero blocks the idler between the crystals.
///
/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_set_blocked(handle: *mut QiupScenario, blocked: i32) -> QiupStatus {
    update(handle, |s| s.idler_blocked = blocked != 0)
}

/// Pump phase in radians.
///
/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_set_pump_phase(handle: *mut QiupScenario, radians: f64) -> QiupStatus {
    update(handle, |s| s.pump_phase_rad = radians)
}

/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_set_setup_visibility(handle: *mut QiupScenario, v0: f64) -> QiupStatus {
    update(handle, |s| s.setup_visibility = v0)
}

/// Arm-length mismatch in mm.
///
/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_set_path_mismatch(handle: *mut QiupScenario, mm: f64) -> QiupStatus {
    update(handle, |s| s.path_mismatch_mm = mm)
}

/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_set_pump_power(handle: *mut QiupScenario, mw: f64) -> QiupStatus {
    update(handle, |s| s.pump_power_mw = mw)
}

/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_set_idler_efficiency(handle: *mut QiupScenario, eta: f64) -> QiupStatus {
    update(handle, |s| s.idler_detector_efficiency = eta)
}

/// Peak photons per pixel per exposure at the reference pump power.
///
/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qiup_scenario_set_peak_photons(handle: *mut QiupScenario, photons: f64) -> QiupStatus {
    update(handle, |s| s.peak_photons_per_pixel = photons)
}

/// Simulates the G and H frames at the scenario's pump phase.
///
/// # Safety
/// `handle` must come from this library; `out_frames` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qiup_simulate(handle: *const QiupScenario, out_frames: *mut *mut QiupFrames) -> QiupStatus {
    guard(|| {
        let slot = out(out_frames)?;
        *slot = ptr::null_mut();
        let (g, h) = pipeline::simulate_outputs(scenario(handle)?)?;
        *slot = Box::into_raw(Box::new(QiupFrames { g, h }));
        Ok(())
    })
}

/// Copies one output frame into `buf` (row-major, `rows × cols` counts).
///
/// # Safety
/// `frames` must come from [`qiup_simulate`]; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn qiup_frames_copy(frames: *const QiupFrames, port: QiupPort, buf: *mut u32, len: usize) -> QiupStatus {
    guard(|| {
        let f = frames
            .as_ref()
            .ok_or_else(|| fail(QiupStatus::NullPointer, "null frames handle"))?;
        let frame = match port {
            QiupPort::G => &f.g,
            QiupPort::H => &f.h,
        };
        let src = frame.counts.as_slice();
        slice_mut(buf, len, src.len())?.copy_from_slice(src);
        Ok(())
    })
}

/// Frame size.
///
/// # Safety
/// `frames` must come from [`qiup_simulate`]; `rows` and `cols` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qiup_frames_shape(frames: *const QiupFrames, rows: *mut usize, cols: *mut usize) -> QiupStatus {
    guard(|| {
        let f = frames
            .as_ref()
            .ok_or_else(|| fail(QiupStatus::NullPointer, "null frames handle"))?;
        let (r, c) = f.g.counts.shape();
        *out(rows)? = r;
        *out(cols)? = c;
        Ok(())
    })
}

/// Releases frames. Null is ignored.
///
/// # Safety
/// `frames` must come from [`qiup_simulate`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qiup_frames_free(frames: *mut QiupFrames) {
    if !frames.is_null() {
        drop(Box::from_raw(frames));
    }
}

/// Mean counts at G and H for pump phase `phi`, written row-major into `g`
/// and `h`, each holding `len` values.
///
/// # Safety
/// `handle` must come from this library; `g` and `h` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn qiup_expected_frames(
    handle: *const QiupScenario,
    phi: f64,
    g: *mut f64,
    h: *mut f64,
    len: usize,
) -> QiupStatus {
    guard(|| {
        let exp = Experiment::new(scenario(handle)?)?;
        let (mg, mh) = exp.expected_frames(phi)?;
        slice_mut(g, len, mg.len())?.copy_from_slice(mg.as_slice());
        slice_mut(h, len, mh.len())?.copy_from_slice(mh.as_slice());
        Ok(())
    })
}

/// Pump-phase scan over the default region of interest. `phis` and `counts`
/// receive `steps` values each.
///
/// # Safety
/// `handle` must come from this library; both buffers must hold `steps` values.
#[no_mangle]
pub unsafe extern "C" fn qiup_phase_scan(
    handle: *const QiupScenario,
    steps: usize,
    cycles: f64,
    phis: *mut f64,
    counts: *mut f64,
) -> QiupStatus {
    guard(|| {
        let s = scenario(handle)?;
        let exp = Experiment::new(s)?;
        let data = pipeline::phase_scan(&exp, steps, cycles, &Roi::default_for(s))?;
        let p = slice_mut(phis, steps, steps)?;
        let c = slice_mut(counts, steps, steps)?;
        for (k, pt) in data.points.iter().enumerate() {
            p[k] = pt.phi_rad;
            c[k] = pt.counts;
        }
        Ok(())
    })
}

/// Output probabilities `½[1 ± v0·T·cos(γi − γs + φ)]`.
///
/// # Safety
/// `p_g` and `p_h` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qiup_closed_form(
    transmittance: f64,
    gamma_idler: f64,
    gamma_signal: f64,
    pump_phase: f64,
    setup_visibility: f64,
    p_g: *mut f64,
    p_h: *mut f64,
) -> QiupStatus {
    guard(|| {
        let p = qcore::closed_form_probabilities(transmittance, gamma_idler, gamma_signal, pump_phase, setup_visibility)?;
        *out(p_g)? = p.p_g;
        *out(p_h)? = p.p_h;
        Ok(())
    })
}

/// Output probabilities from the full state with the idler traced out.
///
/// # Safety
/// `p_g` and `p_h` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qiup_detection_probabilities(
    transmittance: f64,
    gamma: f64,
    pump_phase: f64,
    blocked: i32,
    p_g: *mut f64,
    p_h: *mut f64,
) -> QiupStatus {
    guard(|| {
        let obj = ObjectResponse::new(transmittance, gamma)?;
        let state = if blocked != 0 {
            qcore::build_blocked_state(obj, pump_phase)
        } else {
            qcore::build_joint_state(obj, pump_phase)
        };
        let p = qcore::detection_probabilities(&state)?;
        *out(p_g)? = p.p_g;
        *out(p_h)? = p.p_h;
        Ok(())
    })
}

/// Etch depth in nm that produces `phase` radians at `wavelength_nm` for a
/// built-in material (`"silica"`, `"silicon"`) or a JSON index-table file.
///
/// # Safety
/// `material` must be a NUL-terminated string; `depth_nm` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qiup_design_etch(
    material: *const c_char,
    phase: f64,
    wavelength_nm: f64,
    depth_nm: *mut f64,
) -> QiupStatus {
    guard(|| {
        let d = qiup::cli::cmd_design_etch(text(material)?, phase, wavelength_nm)?;
        *out(depth_nm)? = d.depth_nm;
        Ok(())
    })
}

/// Least-squares fringe fit of `n` samples.
///
/// # Safety
/// `phis` and `values` must hold `n` values; `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qiup_fit_fringe(phis: *const f64, values: *const f64, n: usize, result: *mut QiupFit) -> QiupStatus {
    guard(|| {
        let f = fit::fit_sinusoid(slice(phis, n)?, slice(values, n)?)?;
        *out(result)? = f.into();
        Ok(())
    })
}
