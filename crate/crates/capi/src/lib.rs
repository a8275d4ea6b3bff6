//! C ABI over the polygroupoid library: opaque handles, integer status
//! codes, and caller-freed strings. The header is generated by cbindgen at
//! build time into `include/polygroupoid.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use polygroupoid::axioms::{AxiomFamily, CheckOptions};
use polygroupoid::core::Polygroupoid;
use polygroupoid::error::Error;
use polygroupoid::filling::DEFAULT_FAMILY_BUDGET;
use polygroupoid::group::{GroupElement, GroupSpec};
use polygroupoid::recovery::{canonical_spine, recover_group};
use polygroupoid::standard::build_standard;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum PgxStatus {
    Ok = 0,
    /// Malformed input data.
    Structural = 1,
    /// A configured bound was exceeded.
    Capacity = 2,
    /// A horn had no filler.
    Unfillable = 3,
    /// An operation precondition does not hold.
    Precondition = 4,
    /// Text input could not be parsed.
    Parse = 5,
    /// A required pointer argument was null.
    NullArgument = 6,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 7,
}

/// Opaque structure handle.
pub struct PgxStructure {
    inner: Polygroupoid,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> PgxStatus {
    match err {
        Error::Structural(_) => PgxStatus::Structural,
        Error::Capacity { .. } => PgxStatus::Capacity,
        Error::Unfillable(_) => PgxStatus::Unfillable,
        Error::Precondition(_) => PgxStatus::Precondition,
        Error::Parse { .. } => PgxStatus::Parse,
    }
}

fn fail(err: Error) -> PgxStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, PgxStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(PgxStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        PgxStatus::InvalidUtf8
    })
}

fn give_string(out: *mut *mut c_char, text: String) -> PgxStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            PgxStatus::Ok
        }
        Err(_) => {
            set_error("string contains an interior NUL byte");
            PgxStatus::Structural
        }
    }
}

/// The message of the most recent error on this thread, as a new string the
/// caller must release with `pgx_string_free`. Returns null if none.
#[no_mangle]
pub extern "C" fn pgx_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        if msg.is_empty() {
            ptr::null_mut()
        } else {
            CString::new(msg.clone())
                .map(CString::into_raw)
                .unwrap_or(ptr::null_mut())
        }
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by this library and not yet
/// freed, or null.
#[no_mangle]
pub unsafe extern "C" fn pgx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a structure handle.
///
/// # Safety
/// `h` must be a handle previously returned by this library and not yet
/// freed, or null.
#[no_mangle]
pub unsafe extern "C" fn pgx_structure_free(h: *mut PgxStructure) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Build the standard model `H_{G,n}` with `vertices` vertices.
///
/// # Safety
/// `group_spec` must be a valid NUL-terminated string (e.g. "2x2") and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pgx_build_standard(
    n: usize,
    group_spec: *const c_char,
    vertices: usize,
    out: *mut *mut PgxStructure,
) -> PgxStatus {
    if out.is_null() {
        set_error("null output argument");
        return PgxStatus::NullArgument;
    }
    let spec_text = match read_str(group_spec) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let result = GroupSpec::parse(spec_text).and_then(|g| build_standard(n, g, vertices));
    match result {
        Ok(pg) => {
            *out = Box::into_raw(Box::new(PgxStructure { inner: pg }));
            PgxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Parse a pgx document.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pgx_parse(text: *const c_char, out: *mut *mut PgxStructure) -> PgxStatus {
    if out.is_null() {
        set_error("null output argument");
        return PgxStatus::NullArgument;
    }
    let text = match read_str(text) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match polygroupoid::pgx::parse(text) {
        Ok(pg) => {
            *out = Box::into_raw(Box::new(PgxStructure { inner: pg }));
            PgxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Serialize a structure into the pgx text form; the caller frees the
/// string with `pgx_string_free`.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pgx_serialize(h: *const PgxStructure, out: *mut *mut c_char) -> PgxStatus {
    if h.is_null() || out.is_null() {
        set_error("null argument");
        return PgxStatus::NullArgument;
    }
    give_string(out, polygroupoid::pgx::serialize(&(*h).inner))
}

/// Arity of the structure.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgx_arity(h: *const PgxStructure) -> usize {
    if h.is_null() {
        return 0;
    }
    (*h).inner.n()
}

/// Vertex count.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgx_vertex_count(h: *const PgxStructure) -> usize {
    if h.is_null() {
        return 0;
    }
    (*h).inner.vertex_count()
}

/// Order of the declared acting group.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgx_group_order(h: *const PgxStructure) -> u64 {
    if h.is_null() {
        return 0;
    }
    (*h).inner.group().order()
}

/// Run every applicable axiom family exhaustively; `out_all_pass` receives
/// the verdict and `out_report` a human-readable summary (caller-freed).
///
/// # Safety
/// `h` must be a live handle; `out_all_pass` and `out_report` valid
/// pointers.
#[no_mangle]
pub unsafe extern "C" fn pgx_check_axioms(
    h: *const PgxStructure,
    out_all_pass: *mut bool,
    out_report: *mut *mut c_char,
) -> PgxStatus {
    if h.is_null() || out_all_pass.is_null() || out_report.is_null() {
        set_error("null argument");
        return PgxStatus::NullArgument;
    }
    let pg = &(*h).inner;
    let families: Vec<AxiomFamily> = AxiomFamily::ALL
        .into_iter()
        .filter(|f| *f != AxiomFamily::RegularAction || pg.has_action())
        .collect();
    match pg.check_axioms(&families, &CheckOptions::default()) {
        Ok(report) => {
            *out_all_pass = report.all_pass();
            let mut text = String::new();
            for v in &report.verdicts {
                text.push_str(&format!(
                    "{} {} {}\n",
                    v.family.name(),
                    if v.pass { "pass" } else { "fail" },
                    v.checked
                ));
            }
            give_string(out_report, text)
        }
        Err(e) => fail(e),
    }
}

/// The structure defect (certifying constancy); the element is written as a
/// comma-joined residue string the caller frees.
///
/// # Safety
/// `h` must be a live handle and `out_defect` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pgx_structure_defect(
    h: *const PgxStructure,
    out_defect: *mut *mut c_char,
) -> PgxStatus {
    if h.is_null() || out_defect.is_null() {
        set_error("null argument");
        return PgxStatus::NullArgument;
    }
    match polygroupoid::filling::structure_defect(&(*h).inner, DEFAULT_FAMILY_BUDGET) {
        Ok(d) => give_string(out_defect, d.to_string()),
        Err(e) => fail(e),
    }
}

/// Twist `Q` by the group element written as comma-joined residues.
///
/// # Safety
/// `h` must be a live handle, `g` a valid string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pgx_twist(
    h: *const PgxStructure,
    g: *const c_char,
    out: *mut *mut PgxStructure,
) -> PgxStatus {
    if h.is_null() || out.is_null() {
        set_error("null argument");
        return PgxStatus::NullArgument;
    }
    let g_text = match read_str(g) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let pg = &(*h).inner;
    let result =
        GroupElement::parse(pg.group(), g_text).and_then(|g| polygroupoid::filling::twist(pg, &g));
    match result {
        Ok(t) => {
            *out = Box::into_raw(Box::new(PgxStructure { inner: t }));
            PgxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Star-based isomorphism test.
///
/// # Safety
/// `a` and `b` must be live handles and `out_isomorphic` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pgx_is_isomorphic(
    a: *const PgxStructure,
    b: *const PgxStructure,
    out_isomorphic: *mut bool,
) -> PgxStatus {
    if a.is_null() || b.is_null() || out_isomorphic.is_null() {
        set_error("null argument");
        return PgxStatus::NullArgument;
    }
    match polygroupoid::star::is_isomorphic(&(*a).inner, &(*b).inner) {
        Ok(map) => {
            *out_isomorphic = map.is_some();
            PgxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Automorphism census: the group order and whether generation verified it.
///
/// # Safety
/// `h` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pgx_automorphism_order(
    h: *const PgxStructure,
    bound: u64,
    out_order: *mut u64,
    out_verified: *mut bool,
) -> PgxStatus {
    if h.is_null() || out_order.is_null() || out_verified.is_null() {
        set_error("null argument");
        return PgxStatus::NullArgument;
    }
    match polygroupoid::star::automorphism_census(&(*h).inner, bound as u128) {
        Ok(report) => {
            *out_order = report.order.min(u64::MAX as u128) as u64;
            *out_verified = report.verified();
            PgxStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Order of the group recovered from Q alone at the canonical fiber.
///
/// # Safety
/// `h` must be a live handle and `out_order` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pgx_recovered_group_order(
    h: *const PgxStructure,
    out_order: *mut u64,
) -> PgxStatus {
    if h.is_null() || out_order.is_null() {
        set_error("null argument");
        return PgxStatus::NullArgument;
    }
    let pg = &(*h).inner;
    match recover_group(pg, &canonical_spine(pg)) {
        Ok(rec) => {
            *out_order = rec.order() as u64;
            PgxStatus::Ok
        }
        Err(e) => fail(e),
    }
}
