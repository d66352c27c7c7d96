//! C ABI for planforge.
//!
//! Every fallible function returns a [`PfStatus`]; on failure the message is
//! available from [`pf_last_error`] on the same thread. Plans are opaque
//! [`PfFloorPlan`] handles released with [`pf_plan_free`]. Panics never cross
//! the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use planforge::assemble::{point_in_boundary, Containment};
use planforge::metrics::{self, Raster};
use planforge::pipeline::{self, Config};
use planforge::synth::{self, FloorSpec};
use planforge::{backproject, plan_io, svg, BoundaryPolygon, CameraIntrinsics, Error, FloorPlan, SceneScale, Vec2};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    Ok = 0,
    /// Bad input files, formats or field values.
    InputError = 1,
    /// The geometric pipeline could not produce a plan.
    PipelineError = 2,
    NullArgument = 3,
    /// Index or buffer capacity out of range.
    OutOfRange = 4,
    /// Internal panic caught at the boundary.
    Panic = 5,
}

/// Opaque reconstructed floor plan.
pub struct PfFloorPlan {
    plan: FloorPlan,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PfOptions {
    pub seed: u64,
    /// Boundary alignment distance, m.
    pub snap_dist: f64,
    /// Near-collinear merge angle, degrees.
    pub snap_angle_deg: f64,
    /// Cap on edge points per capture.
    pub max_points: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PfIntrinsics {
    pub f: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: &Error) -> PfStatus {
    set_error(&e.to_string());
    if e.is_input_error() {
        PfStatus::InputError
    } else {
        PfStatus::PipelineError
    }
}

fn guard(f: impl FnOnce() -> PfStatus) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            PfStatus::Panic
        }
    }
}

fn null(what: &str) -> PfStatus {
    set_error(&format!("{what} is null"));
    PfStatus::NullArgument
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, PfStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error(&format!("{what} is not valid UTF-8"));
            Err(PfStatus::InputError)
        }
    }
}

/// Message of the last failure on this thread. Valid until the next call
/// into this library from the same thread. Never null.
#[no_mangle]
pub extern "C" fn pf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn pf_options_default() -> PfOptions {
    let c = Config::default();
    PfOptions {
        seed: c.seed,
        snap_dist: c.snap_dist,
        snap_angle_deg: c.snap_angle_deg,
        max_points: c.max_points as u64,
    }
}

/// Reconstructs the manifest at `manifest_path`. `options` may be null for
/// defaults. On success `*out` owns a new plan.
///
/// # Safety
/// `manifest_path` must be a NUL-terminated string, `options` null or valid,
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_reconstruct(
    manifest_path: *const c_char,
    options: *const PfOptions,
    out: *mut *mut PfFloorPlan,
) -> PfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        let path = match path_arg(manifest_path, "manifest_path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let o = if options.is_null() { pf_options_default() } else { *options };
        let cfg = Config {
            seed: o.seed,
            snap_dist: o.snap_dist,
            snap_angle_deg: o.snap_angle_deg,
            max_points: o.max_points as usize,
            ..Config::default()
        };
        match pipeline::reconstruct_path(&path, &cfg) {
            Ok(rec) => {
                *out = Box::into_raw(Box::new(PfFloorPlan { plan: rec.plan }));
                PfStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Loads a plan file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_plan_load(path: *const c_char, out: *mut *mut PfFloorPlan) -> PfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        let path = match path_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match plan_io::read_plan(&path) {
            Ok(plan) => {
                *out = Box::into_raw(Box::new(PfFloorPlan { plan }));
                PfStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes the plan file format.
///
/// # Safety
/// `plan` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pf_plan_save(plan: *const PfFloorPlan, path: *const c_char) -> PfStatus {
    guard(|| {
        let Some(p) = plan.as_ref() else { return null("plan") };
        let path = match path_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match plan_io::write_plan(&p.plan, &path) {
            Ok(()) => PfStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Renders the plan as SVG into `path`.
///
/// # Safety
/// `plan` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pf_plan_render_svg(plan: *const PfFloorPlan, path: *const c_char) -> PfStatus {
    guard(|| {
        let Some(p) = plan.as_ref() else { return null("plan") };
        let path = match path_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match std::fs::write(&path, svg::render_svg(&p.plan)) {
            Ok(()) => PfStatus::Ok,
            Err(e) => {
                set_error(&format!("cannot write {}: {e}", path.display()));
                PfStatus::InputError
            }
        }
    })
}

/// Number of rooms; 0 for a null plan.
///
/// # Safety
/// `plan` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn pf_plan_room_count(plan: *const PfFloorPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.plan.rooms.len())
}

/// Number of door placements; 0 for a null plan.
///
/// # Safety
/// `plan` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn pf_plan_door_count(plan: *const PfFloorPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.plan.doors.len())
}

/// Area of room `index` (rooms are sorted by id), m^2.
///
/// # Safety
/// `plan` must come from this library and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_plan_room_area(plan: *const PfFloorPlan, index: usize, out: *mut f64) -> PfStatus {
    guard(|| {
        let Some(p) = plan.as_ref() else { return null("plan") };
        if out.is_null() {
            return null("out");
        }
        match p.plan.rooms.get(index) {
            Some(r) => {
                *out = r.area();
                PfStatus::Ok
            }
            None => {
                set_error(&format!("room index {index} out of range"));
                PfStatus::OutOfRange
            }
        }
    })
}

/// Copies room `index`'s id, NUL-terminated, into `buf`. `*len` receives the
/// id length without the terminator; when `capacity <= len` nothing is
/// copied and `OutOfRange` is returned.
///
/// # Safety
/// `plan` must come from this library; `buf` must hold `capacity` bytes;
/// `len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_plan_room_id(
    plan: *const PfFloorPlan,
    index: usize,
    buf: *mut c_char,
    capacity: usize,
    len: *mut usize,
) -> PfStatus {
    guard(|| {
        let Some(p) = plan.as_ref() else { return null("plan") };
        if len.is_null() {
            return null("len");
        }
        let Some(r) = p.plan.rooms.get(index) else {
            set_error(&format!("room index {index} out of range"));
            return PfStatus::OutOfRange;
        };
        let bytes = r.id.as_bytes();
        *len = bytes.len();
        if buf.is_null() || capacity <= bytes.len() {
            set_error("buffer too small");
            return PfStatus::OutOfRange;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
        *buf.add(bytes.len()) = 0;
        PfStatus::Ok
    })
}

/// Copies room `index`'s vertices as interleaved x, y pairs into `xy`
/// (`capacity` pairs). `*count` receives the vertex count; when it exceeds
/// `capacity` nothing is copied and `OutOfRange` is returned.
///
/// # Safety
/// `plan` must come from this library; `xy` must hold `2 * capacity`
/// doubles; `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_plan_room_vertices(
    plan: *const PfFloorPlan,
    index: usize,
    xy: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> PfStatus {
    guard(|| {
        let Some(p) = plan.as_ref() else { return null("plan") };
        if count.is_null() {
            return null("count");
        }
        let Some(r) = p.plan.rooms.get(index) else {
            set_error(&format!("room index {index} out of range"));
            return PfStatus::OutOfRange;
        };
        *count = r.vertices.len();
        if xy.is_null() || capacity < r.vertices.len() {
            set_error("buffer too small");
            return PfStatus::OutOfRange;
        }
        for (i, v) in r.vertices.iter().enumerate() {
            *xy.add(2 * i) = v.x;
            *xy.add(2 * i + 1) = v.y;
        }
        PfStatus::Ok
    })
}

/// Releases a plan. Null is ignored.
///
/// # Safety
/// `plan` must be null or an unreleased plan from this library.
#[no_mangle]
pub unsafe extern "C" fn pf_plan_free(plan: *mut PfFloorPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Generates a synthetic dataset from a floor-spec file.
///
/// # Safety
/// Both paths must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pf_synth_generate(spec_path: *const c_char, out_dir: *const c_char) -> PfStatus {
    guard(|| {
        let spec = match path_arg(spec_path, "spec_path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let out = match path_arg(out_dir, "out_dir") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let run = || -> planforge::Result<()> {
            let floor: FloorSpec = plan_io::read_json(&spec)?;
            synth::generate(&floor, &synth::default_intrinsics(), SceneScale::new(synth::DEFAULT_SCALE)?, &out)?;
            Ok(())
        };
        match run() {
            Ok(()) => PfStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// PSNR in dB for a mean squared error; +infinity when `mse` is 0.
#[no_mangle]
pub extern "C" fn pf_psnr_from_mse(mse: f64, max: f64) -> f64 {
    metrics::psnr_from_mse(mse, max)
}

/// Global SSIM of two `width * height` images with dynamic range `range`.
///
/// # Safety
/// `x` and `y` must each hold `width * height` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_ssim(
    x: *const f64,
    y: *const f64,
    width: u32,
    height: u32,
    range: f64,
    out: *mut f64,
) -> PfStatus {
    guard(|| {
        if x.is_null() || y.is_null() || out.is_null() {
            return null("argument");
        }
        let n = width as usize * height as usize;
        let a = std::slice::from_raw_parts(x, n).to_vec();
        let b = std::slice::from_raw_parts(y, n).to_vec();
        let r = Raster::new(width, height, a)
            .and_then(|ra| Raster::new(width, height, b).and_then(|rb| metrics::ssim(&ra, &rb, range)));
        match r {
            Ok(v) => {
                *out = v;
                PfStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Mean absolute percentage error of `n` values against ground truth.
///
/// # Safety
/// `values` and `gt` must each hold `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_mape(values: *const f64, gt: *const f64, n: usize, out: *mut f64) -> PfStatus {
    guard(|| {
        if values.is_null() || gt.is_null() || out.is_null() {
            return null("argument");
        }
        let v = std::slice::from_raw_parts(values, n);
        let g = std::slice::from_raw_parts(gt, n);
        match metrics::mape(v, g) {
            Ok(m) => {
                *out = m;
                PfStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// 1 when (`px`, `py`) is inside or on the polygon of `n` interleaved
/// vertices, 0 outside, -1 on bad arguments.
///
/// # Safety
/// `xy` must hold `2 * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn pf_point_in_polygon(px: f64, py: f64, xy: *const f64, n: usize) -> c_int {
    if xy.is_null() || n < 3 {
        set_error("polygon needs at least 3 vertices");
        return -1;
    }
    let raw = std::slice::from_raw_parts(xy, 2 * n);
    let poly = BoundaryPolygon { vertices: raw.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect() };
    match point_in_boundary(Vec2::new(px, py), &poly) {
        Containment::Inside => 1,
        Containment::Outside => 0,
    }
}

/// Camera-frame point (m) for pixel (`u`, `v`) with raw depth `d`.
///
/// # Safety
/// `intr` must be valid and `out_xyz` must hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn pf_backproject(
    u: f64,
    v: f64,
    d: f64,
    intr: *const PfIntrinsics,
    scale: f64,
    out_xyz: *mut f64,
) -> PfStatus {
    guard(|| {
        let Some(i) = intr.as_ref() else { return null("intr") };
        if out_xyz.is_null() {
            return null("out_xyz");
        }
        let intr = CameraIntrinsics { f: i.f, cx: i.cx, cy: i.cy, width: i.width, height: i.height };
        let r = intr
            .validate()
            .and_then(|_| SceneScale::new(scale))
            .and_then(|s| backproject::backproject_pixel(u, v, d, &intr, s));
        match r {
            Ok(p) => {
                *out_xyz = p.x;
                *out_xyz.add(1) = p.y;
                *out_xyz.add(2) = p.z;
                PfStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
