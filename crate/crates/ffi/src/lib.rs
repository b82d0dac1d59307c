//! C ABI over `dht-rcm`.
//!
//! Every fallible call returns an [`RcmStatus`] and writes its result
//! through an out-pointer, which is left untouched on failure. Handles are
//! opaque; release them with the matching `*_free` function.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dht_rcm::analytic::{routability, DenominatorMode, PhaseFailureModel};
use dht_rcm::scalability::{classify, Verdict};
use dht_rcm::sim::{build_overlay, estimate_routability, route, FailurePattern, Overlay, RouteOutcome, SimSeeds};
use dht_rcm::{GeometryKind, GeometrySpec, RcmError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateDenominator = 3,
    TooLarge = 4,
    SimulationFailed = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcmGeometryKind {
    Tree = 0,
    Hypercube = 1,
    Xor = 2,
    Ring = 3,
    Symphony = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcmDenominator {
    Paper = 0,
    Exact = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcmVerdict {
    Scalable = 0,
    Unscalable = 1,
}

/// Monte Carlo summary.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RcmSimResult {
    pub routable_fraction: f64,
    pub std_error: f64,
    pub hop_cap_hits: u64,
    pub redrawn_trials: u32,
}

/// Opaque geometry handle.
pub struct RcmGeometry {
    spec: GeometrySpec,
}

/// Opaque overlay handle.
pub struct RcmOverlay {
    overlay: Overlay,
}

impl From<RcmGeometryKind> for GeometryKind {
    fn from(k: RcmGeometryKind) -> Self {
        match k {
            RcmGeometryKind::Tree => GeometryKind::Tree,
            RcmGeometryKind::Hypercube => GeometryKind::Hypercube,
            RcmGeometryKind::Xor => GeometryKind::Xor,
            RcmGeometryKind::Ring => GeometryKind::Ring,
            RcmGeometryKind::Symphony => GeometryKind::Symphony,
        }
    }
}

fn status_of(err: &RcmError) -> RcmStatus {
    match err {
        RcmError::DegenerateDenominator { .. } => RcmStatus::DegenerateDenominator,
        RcmError::SimulationTooLarge { .. } => RcmStatus::TooLarge,
        RcmError::TooFewSurvivors { .. } => RcmStatus::SimulationFailed,
        _ => RcmStatus::InvalidArgument,
    }
}

/// Runs `f`, mapping library errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), RcmStatus>>(f: F) -> RcmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RcmStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => RcmStatus::Panic,
    }
}

fn lift<T>(r: dht_rcm::Result<T>) -> Result<T, RcmStatus> {
    r.map_err(|e| status_of(&e))
}

/// # Safety
/// `ptr` must be null or valid for a read of `T`.
unsafe fn borrow<'a, T>(ptr: *const T) -> Result<&'a T, RcmStatus> {
    ptr.as_ref().ok_or(RcmStatus::NullPointer)
}

/// # Safety
/// `ptr` must be null or valid for a write of `T`.
unsafe fn write<T>(ptr: *mut T, value: T) -> Result<(), RcmStatus> {
    if ptr.is_null() {
        return Err(RcmStatus::NullPointer);
    }
    ptr.write(value);
    Ok(())
}

/// Static, NUL-terminated description of `status`.
#[no_mangle]
pub extern "C" fn rcm_status_message(status: RcmStatus) -> *const c_char {
    let msg: &'static CStr = match status {
        RcmStatus::Ok => c"ok",
        RcmStatus::NullPointer => c"null pointer argument",
        RcmStatus::InvalidArgument => c"invalid argument",
        RcmStatus::DegenerateDenominator => c"expected survivor count too small for the denominator",
        RcmStatus::TooLarge => c"overlay too large to simulate",
        RcmStatus::SimulationFailed => c"simulation could not draw enough survivors",
        RcmStatus::Panic => c"internal error",
    };
    msg.as_ptr()
}

/// Library version as a static, NUL-terminated string.
#[no_mangle]
pub extern "C" fn rcm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a geometry handle. `k_n` and `k_s` only matter for Symphony.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rcm_geometry_new(
    kind: RcmGeometryKind,
    d: u32,
    k_n: u32,
    k_s: u32,
    out: *mut *mut RcmGeometry,
) -> RcmStatus {
    guard(|| {
        if out.is_null() {
            return Err(RcmStatus::NullPointer);
        }
        let spec = lift(GeometrySpec::with_symphony_degree(kind.into(), d, k_n, k_s))?;
        write(out, Box::into_raw(Box::new(RcmGeometry { spec })))
    })
}

/// # Safety
/// `geometry` must be null or a handle from [`rcm_geometry_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rcm_geometry_free(geometry: *mut RcmGeometry) {
    if !geometry.is_null() {
        drop(Box::from_raw(geometry));
    }
}

/// Model routability at failure probability `q`.
///
/// # Safety
/// `geometry` must be a live handle; `out` valid for an f64 write.
#[no_mangle]
pub unsafe extern "C" fn rcm_routability(
    geometry: *const RcmGeometry,
    q: f64,
    denominator: RcmDenominator,
    out: *mut f64,
) -> RcmStatus {
    guard(|| {
        let g = borrow(geometry)?;
        let mode = match denominator {
            RcmDenominator::Paper => DenominatorMode::PaperPN,
            RcmDenominator::Exact => DenominatorMode::ExactSurvivors,
        };
        let r = lift(routability(&g.spec, q, mode))?;
        write(out, r.routability)
    })
}

/// Per-phase failure probability `Q(m)`, `1 <= m <= d`.
///
/// # Safety
/// `geometry` must be a live handle; `out` valid for an f64 write.
#[no_mangle]
pub unsafe extern "C" fn rcm_phase_failure(
    geometry: *const RcmGeometry,
    q: f64,
    m: u32,
    out: *mut f64,
) -> RcmStatus {
    guard(|| {
        let g = borrow(geometry)?;
        let model = lift(PhaseFailureModel::new(g.spec, q))?;
        write(out, lift(model.phase_failure(m))?)
    })
}

/// Probability that a route needing `h` hops survives, `h >= 1`.
///
/// # Safety
/// `geometry` must be a live handle; `out` valid for an f64 write.
#[no_mangle]
pub unsafe extern "C" fn rcm_path_success(
    geometry: *const RcmGeometry,
    q: f64,
    h: u32,
    out: *mut f64,
) -> RcmStatus {
    guard(|| {
        let g = borrow(geometry)?;
        let model = lift(PhaseFailureModel::new(g.spec, q))?;
        write(out, lift(model.path_success(h))?)
    })
}

/// Scalability verdict at `0 < q < 1` and the estimated limit of the path
/// success probability (0 for unscalable geometries).
///
/// # Safety
/// `geometry` must be a live handle; `verdict` and `limit` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rcm_classify(
    geometry: *const RcmGeometry,
    q: f64,
    verdict: *mut RcmVerdict,
    limit: *mut f64,
) -> RcmStatus {
    guard(|| {
        let g = borrow(geometry)?;
        if verdict.is_null() || limit.is_null() {
            return Err(RcmStatus::NullPointer);
        }
        let v = lift(classify(&g.spec, q))?;
        write(
            verdict,
            match v.verdict {
                Verdict::Scalable => RcmVerdict::Scalable,
                Verdict::Unscalable => RcmVerdict::Unscalable,
            },
        )?;
        write(limit, v.limit_estimate)
    })
}

/// Monte Carlo routability; `seed` is split into build, failure and pair
/// seeds exactly as the command-line tool does.
///
/// # Safety
/// `geometry` must be a live handle; `out` valid for an [`RcmSimResult`] write.
#[no_mangle]
pub unsafe extern "C" fn rcm_simulate(
    geometry: *const RcmGeometry,
    q: f64,
    trials: u32,
    pairs_per_trial: u32,
    seed: u64,
    out: *mut RcmSimResult,
) -> RcmStatus {
    guard(|| {
        let g = borrow(geometry)?;
        if out.is_null() {
            return Err(RcmStatus::NullPointer);
        }
        let s = lift(estimate_routability(&g.spec, q, trials, pairs_per_trial, SimSeeds::from_master(seed)))?;
        write(
            out,
            RcmSimResult {
                routable_fraction: s.routable_fraction,
                std_error: s.std_error,
                hop_cap_hits: s.hop_cap_hits,
                redrawn_trials: s.redrawn_trials,
            },
        )
    })
}

/// Builds a fully populated overlay (`d <= 20`).
///
/// # Safety
/// `geometry` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rcm_overlay_build(
    geometry: *const RcmGeometry,
    build_seed: u64,
    out: *mut *mut RcmOverlay,
) -> RcmStatus {
    guard(|| {
        let g = borrow(geometry)?;
        if out.is_null() {
            return Err(RcmStatus::NullPointer);
        }
        let overlay = lift(build_overlay(&g.spec, build_seed))?;
        write(out, Box::into_raw(Box::new(RcmOverlay { overlay })))
    })
}

/// # Safety
/// `overlay` must be null or a handle from [`rcm_overlay_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rcm_overlay_free(overlay: *mut RcmOverlay) {
    if !overlay.is_null() {
        drop(Box::from_raw(overlay));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `overlay` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rcm_overlay_node_count(overlay: *const RcmOverlay) -> u32 {
    overlay.as_ref().map_or(0, |o| o.overlay.node_count())
}

/// Copies up to `capacity` neighbours of `node` into `buf` and writes the
/// full neighbour count to `len`. Pass `buf = NULL, capacity = 0` to query
/// the count.
///
/// # Safety
/// `overlay` must be a live handle; `buf` valid for `capacity` u32 writes
/// unless `capacity` is 0; `len` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rcm_overlay_neighbors(
    overlay: *const RcmOverlay,
    node: u32,
    buf: *mut u32,
    capacity: usize,
    len: *mut usize,
) -> RcmStatus {
    guard(|| {
        let o = &borrow(overlay)?.overlay;
        if len.is_null() || (capacity > 0 && buf.is_null()) {
            return Err(RcmStatus::NullPointer);
        }
        if node >= o.node_count() {
            return Err(RcmStatus::InvalidArgument);
        }
        let neighbors = o.neighbors(node);
        let n = neighbors.len().min(capacity);
        if n > 0 {
            std::ptr::copy_nonoverlapping(neighbors.as_ptr(), buf, n);
        }
        write(len, neighbors.len())
    })
}

/// Routes `src -> dst` with the nodes in `dead[0..dead_len]` failed.
/// Writes whether the message arrived and the hops taken.
///
/// # Safety
/// `overlay` must be a live handle; `dead` valid for `dead_len` reads (may
/// be null when `dead_len` is 0); `delivered` and `hops` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rcm_route(
    overlay: *const RcmOverlay,
    dead: *const u32,
    dead_len: usize,
    src: u32,
    dst: u32,
    delivered: *mut bool,
    hops: *mut u32,
) -> RcmStatus {
    guard(|| {
        let o = &borrow(overlay)?.overlay;
        if delivered.is_null() || hops.is_null() || (dead_len > 0 && dead.is_null()) {
            return Err(RcmStatus::NullPointer);
        }
        let dead = if dead_len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(dead, dead_len)
        };
        let pattern = lift(FailurePattern::with_dead(o.node_count(), dead))?;
        let (ok, n) = match lift(route(o, &pattern, src, dst))? {
            RouteOutcome::Delivered { hops } => (true, hops),
            RouteOutcome::Failed { hops, .. } => (false, hops),
        };
        write(delivered, ok)?;
        write(hops, n)
    })
}
