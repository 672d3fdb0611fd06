//! C interface to `orlicz-core`.
//!
//! Every function returns an [`OrliczStatus`]; results go through out-pointers.
//! On failure the message is available from [`orlicz_last_error`] until the
//! next failing call on the same thread. Every handle returned through an
//! out-pointer is released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use orlicz_core::certify::{check_characterization, CertifyOptions};
use orlicz_core::grid::{modular, Grid, GridFunction};
use orlicz_core::phi::{dyadic_jumps, make_linear_then_convex_phi, make_power_phi, make_staircase_phi, PhiFunction};
use orlicz_core::solver::{solve, SolverConfig};
use orlicz_core::subspace::Subspace;
use orlicz_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrliczStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Precondition = 3,
    NonFinite = 4,
    BufferTooSmall = 5,
    Io = 6,
    Panic = 7,
}

pub struct OrliczPhi {
    inner: PhiFunction,
}

pub struct OrliczGrid {
    inner: Arc<Grid>,
}

pub struct OrliczSubspace {
    inner: Subspace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> OrliczStatus {
    match err {
        Error::InvalidParameter { .. } | Error::DimensionMismatch { .. } | Error::GridMismatch => {
            OrliczStatus::InvalidArgument
        }
        Error::DependentBasis { .. } => OrliczStatus::InvalidArgument,
        Error::Precondition(_) | Error::UndefinedLeftDerivative => OrliczStatus::Precondition,
        Error::NonFinite { .. } => OrliczStatus::NonFinite,
        _ => OrliczStatus::Io,
    }
}

struct Fail(OrliczStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> OrliczStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => OrliczStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OrliczStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(OrliczStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(OrliczStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    get(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn grid_function(grid: &Arc<Grid>, values: *const f64, len: usize) -> Result<GridFunction, Fail> {
    Ok(GridFunction::new(grid.clone(), slice(values, len, "values")?.to_vec())?)
}

fn boxed<T>(slot: &mut *mut T, value: T) {
    *slot = Box::into_raw(Box::new(value));
}

/// Message for the last failing call on this thread. Empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn orlicz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// `Φ(x) = x^p`, `p ≥ 1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn orlicz_phi_power(p: f64, out: *mut *mut OrliczPhi) -> OrliczStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        boxed(slot, OrliczPhi { inner: make_power_phi(p)? });
        Ok(())
    })
}

/// Affine with slope `k` on `[0, c]`, then `k x + (x − c)^p / p`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn orlicz_phi_linear_then_convex(
    k: f64,
    c: f64,
    p: f64,
    out: *mut *mut OrliczPhi,
) -> OrliczStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        boxed(
            slot,
            OrliczPhi {
                inner: make_linear_then_convex_phi(k, c, p)?,
            },
        );
        Ok(())
    })
}

/// Adds jumps of size `size` at `2⁻¹, …, 2⁻ⁿ` to the generator of `base`.
///
/// # Safety
/// `base` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn orlicz_phi_staircase(
    base: *const OrliczPhi,
    n_jumps: usize,
    size: f64,
    out: *mut *mut OrliczPhi,
) -> OrliczStatus {
    guard(|| {
        let base = get(base, "base")?;
        let slot = self::out(out, "out")?;
        let inner = make_staircase_phi(base.inner.generator(), &dyadic_jumps(n_jumps, size))?;
        boxed(slot, OrliczPhi { inner });
        Ok(())
    })
}

/// # Safety
/// `phi` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn orlicz_phi_free(phi: *mut OrliczPhi) {
    if !phi.is_null() {
        drop(Box::from_raw(phi));
    }
}

/// # Safety
/// `phi` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn orlicz_phi_value(phi: *const OrliczPhi, x: f64, out: *mut f64) -> OrliczStatus {
    guard(|| {
        let phi = get(phi, "phi")?;
        if !(x >= 0.0) {
            return Err(Fail(OrliczStatus::InvalidArgument, format!("x must be >= 0, got {x}")));
        }
        *self::out(out, "out")? = phi.inner.value(x);
        Ok(())
    })
}

/// Right derivative `φ⁺(x)`.
///
/// # Safety
/// `phi` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn orlicz_phi_right(phi: *const OrliczPhi, x: f64, out: *mut f64) -> OrliczStatus {
    guard(|| {
        let phi = get(phi, "phi")?;
        *self::out(out, "out")? = phi.inner.phi_right(x)?;
        Ok(())
    })
}

/// Left derivative `φ⁻(x)`; fails with `Precondition` at `x = 0`.
///
/// # Safety
/// `phi` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn orlicz_phi_left(phi: *const OrliczPhi, x: f64, out: *mut f64) -> OrliczStatus {
    guard(|| {
        let phi = get(phi, "phi")?;
        *self::out(out, "out")? = phi.inner.phi_left(x)?;
        Ok(())
    })
}

/// Midpoint grid on `[a, b]` with equality band `equality_tol > 0`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn orlicz_grid_uniform(
    a: f64,
    b: f64,
    n_nodes: usize,
    equality_tol: f64,
    out: *mut *mut OrliczGrid,
) -> OrliczStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        boxed(
            slot,
            OrliczGrid {
                inner: Grid::uniform(a, b, n_nodes, equality_tol)?,
            },
        );
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn orlicz_grid_free(grid: *mut OrliczGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn orlicz_grid_len(grid: *const OrliczGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.len())
}

/// Copies the nodes into `buf`, which must hold `orlicz_grid_len` values.
///
/// # Safety
/// `grid` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_grid_nodes(grid: *const OrliczGrid, buf: *mut f64, len: usize) -> OrliczStatus {
    guard(|| {
        let nodes = get(grid, "grid")?.inner.nodes();
        if len < nodes.len() {
            return Err(Fail(
                OrliczStatus::BufferTooSmall,
                format!("need {} values, buffer holds {len}", nodes.len()),
            ));
        }
        out(buf, "buf")?;
        std::slice::from_raw_parts_mut(buf, nodes.len()).copy_from_slice(nodes);
        Ok(())
    })
}

/// `span{1, x, …, x^(n−1)}` on `grid`.
///
/// # Safety
/// `grid` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn orlicz_subspace_monomial(
    grid: *const OrliczGrid,
    n: usize,
    out: *mut *mut OrliczSubspace,
) -> OrliczStatus {
    guard(|| {
        let grid = get(grid, "grid")?;
        let slot = self::out(out, "out")?;
        boxed(
            slot,
            OrliczSubspace {
                inner: Subspace::monomial(&grid.inner, n)?,
            },
        );
        Ok(())
    })
}

/// Piecewise-linear hats on strictly increasing `knots`.
///
/// # Safety
/// `grid` must be a live handle, `knots` valid for `n_knots` reads and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn orlicz_subspace_hat(
    grid: *const OrliczGrid,
    knots: *const f64,
    n_knots: usize,
    out: *mut *mut OrliczSubspace,
) -> OrliczStatus {
    guard(|| {
        let grid = get(grid, "grid")?;
        let knots = slice(knots, n_knots, "knots")?;
        let slot = self::out(out, "out")?;
        boxed(
            slot,
            OrliczSubspace {
                inner: Subspace::hat(&grid.inner, knots)?,
            },
        );
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn orlicz_subspace_free(s: *mut OrliczSubspace) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn orlicz_subspace_dim(s: *const OrliczSubspace) -> usize {
    s.as_ref().map_or(0, |s| s.inner.dim())
}

/// `Σ wᵢ Φ(|gᵢ|)` for node values `g`.
///
/// # Safety
/// Handles must be live, `values` valid for `len` reads, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn orlicz_modular(
    phi: *const OrliczPhi,
    grid: *const OrliczGrid,
    values: *const f64,
    len: usize,
    out: *mut f64,
) -> OrliczStatus {
    guard(|| {
        let phi = get(phi, "phi")?;
        let g = grid_function(&get(grid, "grid")?.inner, values, len)?;
        *self::out(out, "out")? = modular(&phi.inner, &g);
        Ok(())
    })
}

/// Best approximation of `f` from `s` with default solver settings and the
/// given seed. `coeffs` must hold `orlicz_subspace_dim(s)` values.
///
/// # Safety
/// Handles must be live; `f` valid for `len` reads; `coeffs` valid for
/// `coeffs_len` writes; `modular_value` and `converged` valid or null.
#[no_mangle]
pub unsafe extern "C" fn orlicz_solve(
    phi: *const OrliczPhi,
    s: *const OrliczSubspace,
    f: *const f64,
    len: usize,
    seed: u64,
    coeffs: *mut f64,
    coeffs_len: usize,
    modular_value: *mut f64,
    converged: *mut bool,
) -> OrliczStatus {
    guard(|| {
        let phi = get(phi, "phi")?;
        let s = &get(s, "s")?.inner;
        let f = grid_function(s.grid(), f, len)?;
        if coeffs_len < s.dim() {
            return Err(Fail(
                OrliczStatus::BufferTooSmall,
                format!("need {} coefficients, buffer holds {coeffs_len}", s.dim()),
            ));
        }
        out(coeffs, "coeffs")?;
        let cfg = SolverConfig {
            rng_seed: seed,
            ..SolverConfig::default()
        };
        let sol = solve(&f, s, &phi.inner, &cfg)?;
        std::slice::from_raw_parts_mut(coeffs, sol.coeffs.len()).copy_from_slice(&sol.coeffs);
        if let Some(m) = modular_value.as_mut() {
            *m = sol.modular_value;
        }
        if let Some(c) = converged.as_mut() {
            *c = sol.converged;
        }
        Ok(())
    })
}

/// Checks the characterization at `P = Σ coeffs_j δ_j`. A nonpositive `tol`
/// selects the default `10⁻⁴·(1 + modular)`.
///
/// # Safety
/// Handles must be live; `f` valid for `len` reads; `coeffs` valid for
/// `n_coeffs` reads; `verdict` valid; `min_margin` valid or null.
#[no_mangle]
pub unsafe extern "C" fn orlicz_certify(
    phi: *const OrliczPhi,
    s: *const OrliczSubspace,
    f: *const f64,
    len: usize,
    coeffs: *const f64,
    n_coeffs: usize,
    tol: f64,
    seed: u64,
    verdict: *mut bool,
    min_margin: *mut f64,
) -> OrliczStatus {
    guard(|| {
        let phi = get(phi, "phi")?;
        let s = &get(s, "s")?.inner;
        let f = grid_function(s.grid(), f, len)?;
        let p = s.evaluate(slice(coeffs, n_coeffs, "coeffs")?)?;
        let verdict = out(verdict, "verdict")?;
        let opts = CertifyOptions {
            tol: (tol > 0.0).then_some(tol),
            seed,
            ..CertifyOptions::default()
        };
        let cert = check_characterization(&f, &p, s, &phi.inner, &opts)?;
        *verdict = cert.verdict;
        if let Some(m) = min_margin.as_mut() {
            *m = cert.min_margin();
        }
        Ok(())
    })
}
