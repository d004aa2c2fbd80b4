//! C ABI over `collocate`.
//!
//! Objects cross the boundary as opaque handles created by `clc_*_new`-style
//! constructors and released with the matching `clc_*_free`. Every fallible
//! call returns a [`ClcStatus`]; on failure the message is kept per thread and
//! can be copied out with [`clc_last_error`]. Panics are caught at the
//! boundary and reported as [`ClcStatus::Panic`].
//!
//! Enumerated arguments are passed as `uint32_t` so that an out-of-range value
//! from C is an error rather than undefined behaviour; the accepted values are
//! the discriminants of [`ClcFamily`], [`ClcDensity`], [`ClcIndexSetKind`] and
//! [`ClcSampler`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use collocate::design::{cs_preconditioner, ls_weights, DesignMatrix};
use collocate::index_sets::IndexSet;
use collocate::interpolation::{
    lebesgue_constant, loi_factorize_with, loi_interpolate, LebesgueWeight, LoiFactorization, DEFAULT_MAX_DEGREE,
};
use collocate::least_squares::{solve_ls, solve_weighted_ls, Surrogate};
use collocate::mesh::{weil_points, weil_points_interior, NodalArray, Provenance, Sampler};
use collocate::poly_basis::{Density, Family, TensorBasis};
use collocate::sparse::{solve, BpProblem, SolverOptions};
use collocate::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    OutsideSupport = 4,
    RankDeficient = 5,
    NotPrime = 6,
    DuplicatePoints = 7,
    BufferTooSmall = 8,
    Io = 9,
    Parse = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClcFamily {
    Chebyshev = 0,
    Legendre = 1,
    Hermite = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClcDensity {
    Uniform = 0,
    Chebyshev = 1,
    Gaussian = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClcIndexSetKind {
    Tensor = 0,
    TotalDegree = 1,
    HyperbolicCross = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClcSampler {
    McUniform = 0,
    McChebyshev = 1,
    McGaussian = 2,
    Weil = 3,
    GaussSubsample = 4,
}

/// Opaque set of multi-indices.
pub struct ClcIndexSet(Arc<IndexSet>);

/// Opaque point set.
pub struct ClcMesh(NodalArray);

/// Opaque polynomial surrogate.
pub struct ClcSurrogate(Surrogate);

/// Opaque least orthogonal interpolation factorization.
pub struct ClcLoi(LoiFactorization);

#[derive(Debug)]
struct Failure {
    status: ClcStatus,
    message: String,
}

impl Failure {
    fn new(status: ClcStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) | Error::CardinalityOverflow { .. } | Error::Underdetermined { .. } => {
                ClcStatus::InvalidArgument
            }
            Error::DimensionMismatch { .. } => ClcStatus::DimensionMismatch,
            Error::OutsideSupport { .. }
            | Error::RowOutsideSupport { .. }
            | Error::BoundaryPoint { .. }
            | Error::SingularDensity { .. } => ClcStatus::OutsideSupport,
            Error::RankDeficient { .. } => ClcStatus::RankDeficient,
            Error::NotPrime(_) => ClcStatus::NotPrime,
            Error::DuplicatePoints(..) => ClcStatus::DuplicatePoints,
            Error::Io(_) => ClcStatus::Io,
            Error::Parse(_) | Error::Json(_) | Error::Csv(_) => ClcStatus::Parse,
        };
        Failure::new(status, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn record(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Outcome) -> ClcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ClcStatus::Ok,
        Ok(Err(failure)) => {
            record(failure.message);
            failure.status
        }
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_owned());
            record(format!("panic: {text}"));
            ClcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .ok_or_else(|| Failure::new(ClcStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::new(ClcStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn copy_out<T: Copy>(src: &[T], dst: *mut T, len: usize, what: &str) -> Outcome {
    if len < src.len() {
        return Err(Failure::new(
            ClcStatus::BufferTooSmall,
            format!("{what} needs {} entries, buffer holds {len}", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if dst.is_null() {
        return Err(Failure::new(ClcStatus::NullPointer, format!("{what} is null")));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(Failure::new(ClcStatus::NullPointer, "output handle pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn release<T>(ptr: *mut T) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

fn invalid(what: &str, value: u32) -> Failure {
    Failure::new(ClcStatus::InvalidArgument, format!("{value} is not a valid {what}"))
}

fn family(v: u32) -> Result<Family, Failure> {
    match v {
        0 => Ok(Family::Chebyshev),
        1 => Ok(Family::Legendre),
        2 => Ok(Family::Hermite),
        _ => Err(invalid("family", v)),
    }
}

fn density(v: u32) -> Result<Density, Failure> {
    match v {
        0 => Ok(Density::Uniform),
        1 => Ok(Density::Chebyshev),
        2 => Ok(Density::Gaussian),
        _ => Err(invalid("density", v)),
    }
}

fn sampler(v: u32) -> Result<Sampler, Failure> {
    match v {
        0 => Ok(Sampler::McUniform),
        1 => Ok(Sampler::McChebyshev),
        2 => Ok(Sampler::McGaussian),
        3 => Ok(Sampler::Weil),
        4 => Ok(Sampler::GaussSubsample),
        _ => Err(invalid("sampler", v)),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn clc_version() -> *const c_char {
    const VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// always NUL-terminated when `len > 0`). Returns the full message length
/// plus one, so a call with `len = 0` sizes the buffer. Returns 0 if no call
/// on this thread has failed.
#[no_mangle]
pub unsafe extern "C" fn clc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if msg.is_empty() {
            return 0;
        }
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len() + 1
    })
}

// ------------------------------------------------------------ index sets

/// Builds a tensor, total-degree or hyperbolic-cross set.
#[no_mangle]
pub unsafe extern "C" fn clc_index_set_new(
    kind: u32,
    dimension: usize,
    degree: u32,
    out: *mut *mut ClcIndexSet,
) -> ClcStatus {
    guard(|| {
        let set = match kind {
            0 => IndexSet::tensor(dimension, degree)?,
            1 => IndexSet::total_degree(dimension, degree)?,
            2 => IndexSet::hyperbolic_cross(dimension, degree)?,
            _ => return Err(invalid("index set kind", kind)),
        };
        emit(out, ClcIndexSet(Arc::new(set)))
    })
}

/// Number of multi-indices; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn clc_index_set_len(set: *const ClcIndexSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn clc_index_set_dimension(set: *const ClcIndexSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.dimension())
}

/// Writes the `i`-th multi-index (in the set's canonical order) to `degrees`,
/// which must hold `dimension` entries.
#[no_mangle]
pub unsafe extern "C" fn clc_index_set_get(
    set: *const ClcIndexSet,
    i: usize,
    degrees: *mut u32,
    len: usize,
) -> ClcStatus {
    guard(|| {
        let set = deref(set, "index set")?;
        let alpha = set.0.get(i).ok_or_else(|| {
            Failure::new(ClcStatus::InvalidArgument, format!("index {i} out of range for {} entries", set.0.len()))
        })?;
        copy_out(alpha.degrees(), degrees, len, "multi-index")
    })
}

#[no_mangle]
pub unsafe extern "C" fn clc_index_set_free(set: *mut ClcIndexSet) {
    release(set);
}

// ---------------------------------------------------------------- meshes

/// Wraps `count` row-major points of `dimension` coordinates.
#[no_mangle]
pub unsafe extern "C" fn clc_mesh_from_points(
    dimension: usize,
    points: *const f64,
    count: usize,
    out: *mut *mut ClcMesh,
) -> ClcStatus {
    guard(|| {
        let flat = slice(points, dimension.saturating_mul(count), "points")?;
        let mesh = NodalArray::new(dimension, flat.to_vec(), Provenance::named("external"))?;
        emit(out, ClcMesh(mesh))
    })
}

/// Draws `count` points with a sampler. `candidate_degree` is the per-axis
/// grid degree for Gauss subsampling and is ignored otherwise.
#[no_mangle]
pub unsafe extern "C" fn clc_mesh_sample(
    sampler_kind: u32,
    count: usize,
    dimension: usize,
    seed: u64,
    candidate_degree: u32,
    out: *mut *mut ClcMesh,
) -> ClcStatus {
    guard(|| {
        let mesh = sampler(sampler_kind)?.generate(count, dimension, seed, candidate_degree)?;
        emit(out, ClcMesh(mesh))
    })
}

/// Weil points for a prime seed; `interior` skips the corner point `j = 0`.
#[no_mangle]
pub unsafe extern "C" fn clc_mesh_weil(prime: u64, dimension: usize, interior: bool, out: *mut *mut ClcMesh) -> ClcStatus {
    guard(|| {
        let mesh = if interior {
            weil_points_interior(prime, dimension)?
        } else {
            weil_points(prime, dimension)?
        };
        emit(out, ClcMesh(mesh))
    })
}

#[no_mangle]
pub unsafe extern "C" fn clc_mesh_count(mesh: *const ClcMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.count())
}

#[no_mangle]
pub unsafe extern "C" fn clc_mesh_dimension(mesh: *const ClcMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.dimension())
}

/// Copies the row-major coordinates; `len` must be at least `count * dimension`.
#[no_mangle]
pub unsafe extern "C" fn clc_mesh_points(mesh: *const ClcMesh, out: *mut f64, len: usize) -> ClcStatus {
    guard(|| copy_out(deref(mesh, "mesh")?.0.as_flat(), out, len, "points"))
}

#[no_mangle]
pub unsafe extern "C" fn clc_mesh_free(mesh: *mut ClcMesh) {
    release(mesh);
}

// ------------------------------------------------------------ surrogates

unsafe fn design(mesh: *const ClcMesh, set: *const ClcIndexSet, family_kind: u32) -> Result<DesignMatrix, Failure> {
    let mesh = deref(mesh, "mesh")?;
    let set = deref(set, "index set")?;
    let basis = TensorBasis::isotropic(family(family_kind)?, Arc::clone(&set.0));
    Ok(DesignMatrix::assemble(&mesh.0, &basis)?)
}

/// Least-squares fit of `values` (one per mesh point) in an isotropic basis.
#[no_mangle]
pub unsafe extern "C" fn clc_least_squares(
    mesh: *const ClcMesh,
    set: *const ClcIndexSet,
    family_kind: u32,
    values: *const f64,
    len: usize,
    out: *mut *mut ClcSurrogate,
) -> ClcStatus {
    guard(|| {
        let a = design(mesh, set, family_kind)?;
        let fit = solve_ls(&a, slice(values, len, "values")?)?;
        emit(out, ClcSurrogate(fit.surrogate))
    })
}

/// Least squares with Christoffel-type weights for the target `density`.
#[no_mangle]
pub unsafe extern "C" fn clc_weighted_least_squares(
    mesh: *const ClcMesh,
    set: *const ClcIndexSet,
    family_kind: u32,
    density_kind: u32,
    values: *const f64,
    len: usize,
    out: *mut *mut ClcSurrogate,
) -> ClcStatus {
    guard(|| {
        let a = design(mesh, set, family_kind)?;
        let w = ls_weights(a.mesh(), density(density_kind)?)?;
        let fit = solve_weighted_ls(&a, slice(values, len, "values")?, &w)?;
        emit(out, ClcSurrogate(fit.surrogate))
    })
}

/// ℓ1 recovery with residual budget `epsilon` (0 for exact interpolation).
/// `preconditioned` rescales rows for Chebyshev-distributed meshes. The
/// solver's convergence flag is written to `converged` when it is non-null;
/// the surrogate is returned either way.
#[no_mangle]
pub unsafe extern "C" fn clc_sparse_recover(
    mesh: *const ClcMesh,
    set: *const ClcIndexSet,
    family_kind: u32,
    values: *const f64,
    len: usize,
    epsilon: f64,
    preconditioned: bool,
    converged: *mut bool,
    out: *mut *mut ClcSurrogate,
) -> ClcStatus {
    guard(|| {
        let a = design(mesh, set, family_kind)?;
        let mut problem = BpProblem::from_design(&a, slice(values, len, "values")?.to_vec(), epsilon)?;
        if preconditioned {
            problem = problem.with_preconditioner(cs_preconditioner(a.mesh())?)?;
        }
        let result = solve(&problem, &SolverOptions::default());
        if let Some(flag) = converged.as_mut() {
            *flag = result.converged;
        }
        emit(out, ClcSurrogate(Surrogate::new(a.basis().clone(), result.coefficients)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn clc_surrogate_len(s: *const ClcSurrogate) -> usize {
    s.as_ref().map_or(0, |s| s.0.coefficients().len())
}

#[no_mangle]
pub unsafe extern "C" fn clc_surrogate_dimension(s: *const ClcSurrogate) -> usize {
    s.as_ref().map_or(0, |s| s.0.basis().dimension())
}

/// Copies the coefficients, ordered like the index set.
#[no_mangle]
pub unsafe extern "C" fn clc_surrogate_coefficients(s: *const ClcSurrogate, out: *mut f64, len: usize) -> ClcStatus {
    guard(|| copy_out(deref(s, "surrogate")?.0.coefficients(), out, len, "coefficients"))
}

/// Evaluates at `count` row-major points, writing `count` values.
#[no_mangle]
pub unsafe extern "C" fn clc_surrogate_eval(
    s: *const ClcSurrogate,
    points: *const f64,
    count: usize,
    out: *mut f64,
) -> ClcStatus {
    guard(|| {
        let s = &deref(s, "surrogate")?.0;
        let d = s.basis().dimension();
        let flat = slice(points, d.saturating_mul(count), "points")?;
        let values = flat
            .chunks_exact(d.max(1))
            .take(count)
            .map(|z| s.eval(z))
            .collect::<collocate::Result<Vec<f64>>>()?;
        copy_out(&values, out, count, "values")
    })
}

#[no_mangle]
pub unsafe extern "C" fn clc_surrogate_free(s: *mut ClcSurrogate) {
    release(s);
}

// ------------------------------------------------------------------- LOI

/// Least orthogonal interpolation factorization of a mesh. A `max_degree`
/// of 0 selects the default cap.
#[no_mangle]
pub unsafe extern "C" fn clc_loi_factorize(
    mesh: *const ClcMesh,
    density_kind: u32,
    max_degree: u32,
    out: *mut *mut ClcLoi,
) -> ClcStatus {
    guard(|| {
        let mesh = deref(mesh, "mesh")?;
        let cap = if max_degree == 0 { DEFAULT_MAX_DEGREE } else { max_degree };
        let fact = loi_factorize_with(&mesh.0, density(density_kind)?, cap)?;
        emit(out, ClcLoi(fact))
    })
}

/// Polynomial degree of the interpolation space; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn clc_loi_degree(loi: *const ClcLoi) -> u32 {
    loi.as_ref().map_or(0, |l| l.0.degree())
}

/// Interpolates `values` given at the factorized mesh.
#[no_mangle]
pub unsafe extern "C" fn clc_loi_interpolate(
    loi: *const ClcLoi,
    values: *const f64,
    len: usize,
    out: *mut *mut ClcSurrogate,
) -> ClcStatus {
    guard(|| {
        let loi = deref(loi, "factorization")?;
        let s = loi_interpolate(&loi.0, slice(values, len, "values")?)?;
        emit(out, ClcSurrogate(s))
    })
}

/// Lebesgue constant estimated as a maximum over the candidate points.
/// `weighted` uses the factorization's density as the weight `ρ` in
/// `max_z ρ(z) Σ_m |ℓ_m(z)| / ρ(z_m)`; otherwise `ρ ≡ 1`.
#[no_mangle]
pub unsafe extern "C" fn clc_loi_lebesgue(
    loi: *const ClcLoi,
    candidates: *const ClcMesh,
    weighted: bool,
    out: *mut f64,
) -> ClcStatus {
    guard(|| {
        let loi = deref(loi, "factorization")?;
        let candidates = deref(candidates, "candidates")?;
        let weight = if weighted {
            LebesgueWeight::Density(loi.0.density())
        } else {
            LebesgueWeight::Unit
        };
        let estimate = lebesgue_constant(&loi.0, weight, &candidates.0)?;
        copy_out(&[estimate.value], out, 1, "output")
    })
}

#[no_mangle]
pub unsafe extern "C" fn clc_loi_free(loi: *mut ClcLoi) {
    release(loi);
}
