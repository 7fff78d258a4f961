//! C ABI for the geometry and verification library.
//!
//! Conventions: every function that can fail returns an `HvStatus` and
//! writes its result through an out pointer, touched only on `HV_OK`.
//! Handles are opaque; a point-set handle keeps its geometry alive, so
//! geometry handles may be freed in any order relative to the sets built
//! from them.  A human-readable message for the most recent failure on the
//! current thread is available via `hv_last_error`.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::sync::Arc;

use num_traits::ToPrimitive;

use hermivar::code::{CharVector, Code, Membership};
use hermivar::error::Error;
use hermivar::field::Field;
use hermivar::geometry::{Geometry, PointId, PointSet};
use hermivar::hermitian::{
    canonical_cone, fit_hermitian_form, hermitian_size, singular_size, HermitianForm,
};
use hermivar::spectra::{
    check_line_residue, quasi_hermitian_check, singular_quasi_hermitian_check, unital_check,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HvStatus {
    HvOk = 0,
    HvNullArgument = 1,
    HvInvalidParameter = 2,
    HvResourceLimit = 3,
    HvGeometryMismatch = 4,
    HvIntegrity = 5,
    HvMalformed = 6,
    HvIo = 7,
    HvOverflow = 8,
    HvInternal = 9,
}

/// Opaque handle: a projective geometry PG(r, p^h).
pub struct HvGeometry {
    inner: Arc<Geometry>,
}

/// Opaque handle: a set of points in one geometry.
pub struct HvPointSet {
    g: Arc<Geometry>,
    set: PointSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn remember(e: &Error) -> HvStatus {
    LAST_ERROR.with(|slot| {
        let mut buf = slot.borrow_mut();
        buf.clear();
        buf.extend_from_slice(e.to_string().as_bytes());
        buf.push(0);
    });
    match e {
        Error::InvalidParameter(_) | Error::DivideByZero => HvStatus::HvInvalidParameter,
        Error::ResourceLimit(_) => HvStatus::HvResourceLimit,
        Error::GeometryMismatch(_) => HvStatus::HvGeometryMismatch,
        Error::Integrity(_) => HvStatus::HvIntegrity,
        Error::Malformed(_) => HvStatus::HvMalformed,
        Error::Io(_) => HvStatus::HvIo,
        Error::CounterexampleFound(_) => HvStatus::HvInternal,
    }
}

fn remember_text(text: &str, status: HvStatus) -> HvStatus {
    LAST_ERROR.with(|slot| {
        let mut buf = slot.borrow_mut();
        buf.clear();
        buf.extend_from_slice(text.as_bytes());
        buf.push(0);
    });
    status
}

/// Copy the most recent error message on this thread into `buf` as a
/// NUL-terminated string, truncating to `cap` bytes.  Returns the full
/// message length including the terminator; call with a null `buf` to size
/// the buffer.  Returns 0 when no error has occurred yet.
///
/// # Safety
/// `buf` must be null or valid for `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hv_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        if msg.is_empty() {
            return 0;
        }
        if !buf.is_null() && cap > 0 {
            let n = cap.min(msg.len());
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            // guarantee termination even when truncated
            *buf.add(n - 1) = 0;
        }
        msg.len()
    })
}

unsafe fn write_out<T>(out: *mut T, value: T) -> HvStatus {
    if out.is_null() {
        return remember_text("null out pointer", HvStatus::HvNullArgument);
    }
    out.write(value);
    HvStatus::HvOk
}

/// Build PG(r, p^h) and hand back an owned handle.
///
/// # Safety
/// `out` must be valid for one pointer write.  The handle must be released
/// with `hv_geometry_free`.
#[no_mangle]
pub unsafe extern "C" fn hv_geometry_build(
    p: u64,
    h: u32,
    r: u32,
    out: *mut *mut HvGeometry,
) -> HvStatus {
    if out.is_null() {
        return remember_text("null out pointer", HvStatus::HvNullArgument);
    }
    let field = match Field::build(p, h) {
        Ok(f) => Arc::new(f),
        Err(e) => return remember(&e),
    };
    match Geometry::build(field, r) {
        Ok(g) => write_out(
            out,
            Box::into_raw(Box::new(HvGeometry { inner: Arc::new(g) })),
        ),
        Err(e) => remember(&e),
    }
}

/// Release a geometry handle.  Null is a no-op.
///
/// # Safety
/// `g` must be null or a handle from `hv_geometry_build` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hv_geometry_free(g: *mut HvGeometry) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live geometry handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_geometry_point_count(
    g: *const HvGeometry,
    out: *mut u32,
) -> HvStatus {
    let Some(g) = g.as_ref() else {
        return remember_text("null geometry", HvStatus::HvNullArgument);
    };
    write_out(out, g.inner.point_count())
}

/// # Safety
/// `g` must be a live geometry handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_geometry_hyperplane_count(
    g: *const HvGeometry,
    out: *mut u32,
) -> HvStatus {
    let Some(g) = g.as_ref() else {
        return remember_text("null geometry", HvStatus::HvNullArgument);
    };
    write_out(out, g.inner.hyperplane_count())
}

unsafe fn new_set(g: &HvGeometry, set: PointSet, out: *mut *mut HvPointSet) -> HvStatus {
    write_out(
        out,
        Box::into_raw(Box::new(HvPointSet {
            g: Arc::clone(&g.inner),
            set,
        })),
    )
}

/// The nonsingular variety of the identity form.  Requires the field order
/// to be a square.
///
/// # Safety
/// `g` must be a live geometry handle; `out` valid for one pointer write.
/// The handle must be released with `hv_point_set_free`.
#[no_mangle]
pub unsafe extern "C" fn hv_hermitian_variety(
    g: *const HvGeometry,
    out: *mut *mut HvPointSet,
) -> HvStatus {
    let Some(g) = g.as_ref() else {
        return remember_text("null geometry", HvStatus::HvNullArgument);
    };
    let form = match HermitianForm::identity(&g.inner) {
        Ok(f) => f,
        Err(e) => return remember(&e),
    };
    match form.variety(&g.inner) {
        Ok(set) => new_set(g, set, out),
        Err(e) => remember(&e),
    }
}

/// Cone with a vertex of dimension `d` over a nonsingular variety in a
/// complementary subspace; requires d <= r - 3.
///
/// # Safety
/// As for `hv_hermitian_variety`.
#[no_mangle]
pub unsafe extern "C" fn hv_cone(
    g: *const HvGeometry,
    d: u32,
    out: *mut *mut HvPointSet,
) -> HvStatus {
    let Some(g) = g.as_ref() else {
        return remember_text("null geometry", HvStatus::HvNullArgument);
    };
    match canonical_cone(&g.inner, d) {
        Ok(set) => new_set(g, set, out),
        Err(e) => remember(&e),
    }
}

/// Build a set from point ids (duplicates collapse).
///
/// # Safety
/// `g` live; `ids` valid for `len` reads (null only when `len` is 0);
/// `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn hv_point_set_from_ids(
    g: *const HvGeometry,
    ids: *const u32,
    len: usize,
    out: *mut *mut HvPointSet,
) -> HvStatus {
    let Some(g) = g.as_ref() else {
        return remember_text("null geometry", HvStatus::HvNullArgument);
    };
    if ids.is_null() && len > 0 {
        return remember_text("null id buffer", HvStatus::HvNullArgument);
    }
    let members: Vec<PointId> = std::slice::from_raw_parts(ids, len)
        .iter()
        .map(|&i| PointId(i))
        .collect();
    match PointSet::from_members(&g.inner, &members) {
        Ok(set) => new_set(g, set, out),
        Err(e) => remember(&e),
    }
}

/// Release a point-set handle.  Null is a no-op.
///
/// # Safety
/// `s` must be null or an unfreed point-set handle.
#[no_mangle]
pub unsafe extern "C" fn hv_point_set_free(s: *mut HvPointSet) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_point_set_len(s: *const HvPointSet, out: *mut usize) -> HvStatus {
    let Some(s) = s.as_ref() else {
        return remember_text("null point set", HvStatus::HvNullArgument);
    };
    write_out(out, s.set.len())
}

/// Copy the member ids, ascending, into `buf`.  Returns the member count
/// through `written`; when `buf` is too small nothing is copied and the
/// call reports the needed capacity through `written` with
/// `HV_INVALID_PARAMETER`.  A null `buf` with `cap` 0 sizes the set.
///
/// # Safety
/// `s` live; `buf` valid for `cap` writes or null with `cap` 0; `written`
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_point_set_members(
    s: *const HvPointSet,
    buf: *mut u32,
    cap: usize,
    written: *mut usize,
) -> HvStatus {
    let Some(s) = s.as_ref() else {
        return remember_text("null point set", HvStatus::HvNullArgument);
    };
    if written.is_null() {
        return remember_text("null count pointer", HvStatus::HvNullArgument);
    }
    let n = s.set.len();
    written.write(n);
    if buf.is_null() && cap == 0 {
        return HvStatus::HvOk;
    }
    if buf.is_null() {
        return remember_text("null member buffer", HvStatus::HvNullArgument);
    }
    if cap < n {
        return remember_text("member buffer too small", HvStatus::HvInvalidParameter);
    }
    for (slot, id) in (0..n).zip(s.set.member_ids()) {
        buf.add(slot).write(*id);
    }
    HvStatus::HvOk
}

/// Same size and hyperplane intersection numbers as the nonsingular
/// variety of this geometry.
///
/// # Safety
/// `s` live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_quasi_hermitian_check(
    s: *const HvPointSet,
    out: *mut bool,
) -> HvStatus {
    let Some(s) = s.as_ref() else {
        return remember_text("null point set", HvStatus::HvNullArgument);
    };
    match quasi_hermitian_check(&s.g, &s.set) {
        Ok(v) => write_out(out, v.passes()),
        Err(e) => remember(&e),
    }
}

/// Same, against the cone with vertex dimension `d`.
///
/// # Safety
/// `s` live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_singular_quasi_hermitian_check(
    s: *const HvPointSet,
    d: u32,
    out: *mut bool,
) -> HvStatus {
    let Some(s) = s.as_ref() else {
        return remember_text("null point set", HvStatus::HvNullArgument);
    };
    match singular_quasi_hermitian_check(&s.g, &s.set, d) {
        Ok(v) => write_out(out, v.passes()),
        Err(e) => remember(&e),
    }
}

/// q^3 + 1 points in a plane, every line meeting in 1 or q + 1 of them.
///
/// # Safety
/// `s` live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_unital_check(s: *const HvPointSet, out: *mut bool) -> HvStatus {
    let Some(s) = s.as_ref() else {
        return remember_text("null point set", HvStatus::HvNullArgument);
    };
    match unital_check(&s.g, &s.set) {
        Ok(v) => write_out(out, v),
        Err(e) => remember(&e),
    }
}

/// True when every line meets the set in 1 mod p points.
///
/// # Safety
/// `s` live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_line_residue_check(
    s: *const HvPointSet,
    out: *mut bool,
) -> HvStatus {
    let Some(s) = s.as_ref() else {
        return remember_text("null point set", HvStatus::HvNullArgument);
    };
    match check_line_residue(&s.g, &s.set) {
        Ok(v) => write_out(out, v.is_none()),
        Err(e) => remember(&e),
    }
}

/// Whether the characteristic vector lies in the span of the hyperplane
/// vectors over F_p.  Eliminates the incidence matrix on every call.
///
/// # Safety
/// `s` live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_code_member(s: *const HvPointSet, out: *mut bool) -> HvStatus {
    let Some(s) = s.as_ref() else {
        return remember_text("null point set", HvStatus::HvNullArgument);
    };
    let code = match Code::new(Arc::clone(&s.g)) {
        Ok(c) => c,
        Err(e) => return remember(&e),
    };
    let v = match CharVector::characteristic(&s.g, &s.set) {
        Ok(v) => v,
        Err(e) => return remember(&e),
    };
    match code.member(&v) {
        Ok(Membership::Member(_)) => write_out(out, true),
        Ok(Membership::NotMember(_)) => write_out(out, false),
        Err(e) => remember(&e),
    }
}

/// Whether some nondegenerate conjugate-symmetric form has exactly this
/// zero set.
///
/// # Safety
/// `s` live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_fits_hermitian_form(
    s: *const HvPointSet,
    out: *mut bool,
) -> HvStatus {
    let Some(s) = s.as_ref() else {
        return remember_text("null point set", HvStatus::HvNullArgument);
    };
    match fit_hermitian_form(&s.g, &s.set) {
        Ok(found) => write_out(out, found.is_some()),
        Err(e) => remember(&e),
    }
}

/// Rank of the point-hyperplane incidence matrix over F_p.
///
/// # Safety
/// `g` live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_incidence_rank(g: *const HvGeometry, out: *mut u64) -> HvStatus {
    let Some(g) = g.as_ref() else {
        return remember_text("null geometry", HvStatus::HvNullArgument);
    };
    match hermivar::code::rank_fp(&g.inner) {
        Ok(rank) => write_out(out, rank as u64),
        Err(e) => remember(&e),
    }
}

/// Point count of the nonsingular variety in PG(r, q^2), by closed form.
/// Overflow is reported when the exact value exceeds 64 bits.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_hermitian_size(r: u32, q: u64, out: *mut u64) -> HvStatus {
    match hermitian_size(r, q) {
        Ok(n) => match n.to_u64() {
            Some(v) => write_out(out, v),
            None => remember_text("size exceeds 64 bits", HvStatus::HvOverflow),
        },
        Err(e) => remember(&e),
    }
}

/// Point count of the cone with vertex dimension `d`, by closed form.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hv_singular_size(r: u32, q: u64, d: u32, out: *mut u64) -> HvStatus {
    match singular_size(r, q, d) {
        Ok(n) => match n.to_u64() {
            Some(v) => write_out(out, v),
            None => remember_text("size exceeds 64 bits", HvStatus::HvOverflow),
        },
        Err(e) => remember(&e),
    }
}
