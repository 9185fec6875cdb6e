//! C ABI over the primecantor library: opaque handles, integer status codes,
//! and a thread-local last-error message. The header is generated by cbindgen
//! at build time into `include/primecantor.h`.

use primecantor::cramer;
use primecantor::dimension;
use primecantor::primes::{self, PrimeTable};
use primecantor::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    InvalidArgument = 1,
    OutOfRange = 2,
    NumericFailure = 3,
    ResourceCap = 4,
    InternalError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PcStatus {
    match err {
        Error::Domain(_) | Error::Parse(_) => PcStatus::InvalidArgument,
        Error::OutOfRange(_) => PcStatus::OutOfRange,
        Error::Numeric(_) => PcStatus::NumericFailure,
        Error::ResourceCap(_) => PcStatus::ResourceCap,
        Error::Io(_) => PcStatus::InternalError,
    }
}

fn fail(err: Error) -> PcStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

/// Opaque sieve handle.
pub struct PcPrimeTable {
    inner: PrimeTable,
}

/// One windowed gap record.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PcGapRecord {
    pub n: u64,
    pub p_n: u64,
    pub d_n: u64,
    pub window_min: u64,
    pub normalized: f64,
}

/// Conformal-dimension result with its bisection bracket.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PcDeltaResult {
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
    pub tail_bound: f64,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread; NULL when none.
/// The pointer is valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Sieve the primes in [2, limit] into a new table.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_sieve(limit: u64, out: *mut *mut PcPrimeTable) -> PcStatus {
    if out.is_null() {
        set_error("out pointer is NULL".into());
        return PcStatus::InvalidArgument;
    }
    match primes::sieve(limit) {
        Ok(t) => {
            *out = Box::into_raw(Box::new(PcPrimeTable { inner: t }));
            PcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Release a table created by `pc_sieve`. NULL is a no-op.
///
/// # Safety
/// `table` must be a pointer returned by `pc_sieve` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn pc_prime_table_free(table: *mut PcPrimeTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

unsafe fn table_ref<'a>(table: *const PcPrimeTable) -> Option<&'a PrimeTable> {
    table.as_ref().map(|t| &t.inner)
}

/// Number of primes in the table (π of the limit).
///
/// # Safety
/// `table` must be a live handle from `pc_sieve`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_prime_count(table: *const PcPrimeTable, out: *mut u64) -> PcStatus {
    let (Some(t), false) = (table_ref(table), out.is_null()) else {
        set_error("NULL argument".into());
        return PcStatus::InvalidArgument;
    };
    *out = t.len() as u64;
    PcStatus::Ok
}

/// Count of primes ≤ x.
///
/// # Safety
/// As `pc_prime_count`.
#[no_mangle]
pub unsafe extern "C" fn pc_prime_rank(
    table: *const PcPrimeTable,
    x: u64,
    out: *mut u64,
) -> PcStatus {
    let (Some(t), false) = (table_ref(table), out.is_null()) else {
        set_error("NULL argument".into());
        return PcStatus::InvalidArgument;
    };
    *out = t.rank(x) as u64;
    PcStatus::Ok
}

/// i-th prime, 1-based.
///
/// # Safety
/// As `pc_prime_count`.
#[no_mangle]
pub unsafe extern "C" fn pc_prime_select(
    table: *const PcPrimeTable,
    i: u64,
    out: *mut u64,
) -> PcStatus {
    let (Some(t), false) = (table_ref(table), out.is_null()) else {
        set_error("NULL argument".into());
        return PcStatus::InvalidArgument;
    };
    match t.select(i as usize) {
        Some(p) => {
            *out = p;
            PcStatus::Ok
        }
        None => {
            set_error(format!("index {i} out of range (1..={})", t.len()));
            PcStatus::OutOfRange
        }
    }
}

/// #{p prime : |p − a| ≤ x}, closed ball.
///
/// # Safety
/// As `pc_prime_count`.
#[no_mangle]
pub unsafe extern "C" fn pc_window_count(
    table: *const PcPrimeTable,
    a: u64,
    x: f64,
    out: *mut u64,
) -> PcStatus {
    let (Some(t), false) = (table_ref(table), out.is_null()) else {
        set_error("NULL argument".into());
        return PcStatus::InvalidArgument;
    };
    match t.window_count(a, x) {
        Ok(c) => {
            *out = c;
            PcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Final running-maximum record of min(d_n,…,d_{n+k−1})/ln²(p_n) over the
/// table, starting at prime index `start_n` (0 selects the default start).
///
/// # Safety
/// As `pc_prime_count`; `out` must point to a writable `PcGapRecord`.
#[no_mangle]
pub unsafe extern "C" fn pc_rk_final(
    table: *const PcPrimeTable,
    k: u32,
    start_n: u64,
    out: *mut PcGapRecord,
) -> PcStatus {
    let (Some(t), false) = (table_ref(table), out.is_null()) else {
        set_error("NULL argument".into());
        return PcStatus::InvalidArgument;
    };
    let start = if start_n == 0 {
        primes::DEFAULT_RECORD_START
    } else {
        start_n as usize
    };
    match primes::rk_records_from(t, k as usize, start) {
        Ok(records) => match records.last() {
            Some(r) => {
                *out = PcGapRecord {
                    n: r.n as u64,
                    p_n: r.p_n,
                    d_n: r.d_n,
                    window_min: r.window_min,
                    normalized: r.normalized,
                };
                PcStatus::Ok
            }
            None => {
                set_error("table too small to hold any record".into());
                PcStatus::OutOfRange
            }
        },
        Err(e) => fail(e),
    }
}

/// Final record on one random-model sample (seeded, reproducible).
///
/// # Safety
/// `out` must point to a writable `PcGapRecord`.
#[no_mangle]
pub unsafe extern "C" fn pc_cramer_rk_final(
    limit: u64,
    seed: u64,
    k: u32,
    out: *mut PcGapRecord,
) -> PcStatus {
    if out.is_null() {
        set_error("out pointer is NULL".into());
        return PcStatus::InvalidArgument;
    }
    let run = || -> primecantor::Result<Option<PcGapRecord>> {
        let set = cramer::simulate(limit, seed)?;
        let records = cramer::rk_on_model(&set, k as usize)?;
        Ok(records.last().map(|r| PcGapRecord {
            n: r.n as u64,
            p_n: r.p_n,
            d_n: r.d_n,
            window_min: r.window_min,
            normalized: r.normalized,
        }))
    };
    match run() {
        Ok(Some(r)) => {
            *out = r;
            PcStatus::Ok
        }
        Ok(None) => {
            set_error("sample too small to hold any record".into());
            PcStatus::OutOfRange
        }
        Err(e) => fail(e),
    }
}

/// Conformal dimension of the prime alphabet truncated at `trunc`, bisected
/// to `tol`.
///
/// # Safety
/// `out` must point to a writable `PcDeltaResult`.
#[no_mangle]
pub unsafe extern "C" fn pc_delta_primes(
    trunc: u64,
    tol: f64,
    out: *mut PcDeltaResult,
) -> PcStatus {
    if out.is_null() {
        set_error("out pointer is NULL".into());
        return PcStatus::InvalidArgument;
    }
    let run = || -> primecantor::Result<PcDeltaResult> {
        let alphabet = primecantor::alphabet::TruncatedAlphabet::primes(trunc)?;
        let rep = dimension::conformal_dimension(&alphabet, tol)?;
        Ok(PcDeltaResult {
            delta: rep.delta,
            lower: rep.bracket.0,
            upper: rep.bracket.1,
            tail_bound: rep.tail_bound,
        })
    };
    match run() {
        Ok(r) => {
            *out = r;
            PcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_and_queries_through_the_abi() {
        unsafe {
            let mut table: *mut PcPrimeTable = std::ptr::null_mut();
            assert_eq!(pc_sieve(10_000, &mut table), PcStatus::Ok);
            let mut count = 0u64;
            assert_eq!(pc_prime_count(table, &mut count), PcStatus::Ok);
            assert_eq!(count, 1229);
            let mut p = 0u64;
            assert_eq!(pc_prime_select(table, 1, &mut p), PcStatus::Ok);
            assert_eq!(p, 2);
            let mut rank = 0u64;
            assert_eq!(pc_prime_rank(table, 97, &mut rank), PcStatus::Ok);
            assert_eq!(rank, 25);
            let mut wc = 0u64;
            assert_eq!(pc_window_count(table, 100, 3.0, &mut wc), PcStatus::Ok);
            assert_eq!(wc, 3);
            // out-of-range window reports through the status + message
            assert_eq!(
                pc_window_count(table, 9_999, 100.0, &mut wc),
                PcStatus::OutOfRange
            );
            let msg = pc_last_error_message();
            assert!(!msg.is_null());
            pc_prime_table_free(table);
        }
    }

    #[test]
    fn records_and_model_through_the_abi() {
        unsafe {
            let mut table: *mut PcPrimeTable = std::ptr::null_mut();
            assert_eq!(pc_sieve(1_000_000, &mut table), PcStatus::Ok);
            let mut rec = PcGapRecord {
                n: 0,
                p_n: 0,
                d_n: 0,
                window_min: 0,
                normalized: 0.0,
            };
            assert_eq!(pc_rk_final(table, 1, 0, &mut rec), PcStatus::Ok);
            assert_eq!(rec.p_n, 370_261);
            pc_prime_table_free(table);

            assert_eq!(pc_cramer_rk_final(100_000, 7, 1, &mut rec), PcStatus::Ok);
            assert!(rec.normalized > 0.0);
            // determinism across calls
            let mut rec2 = rec;
            assert_eq!(pc_cramer_rk_final(100_000, 7, 1, &mut rec2), PcStatus::Ok);
            assert_eq!(rec.normalized, rec2.normalized);
        }
    }

    #[test]
    fn delta_through_the_abi() {
        unsafe {
            let mut r = PcDeltaResult {
                delta: 0.0,
                lower: 0.0,
                upper: 0.0,
                tail_bound: 0.0,
            };
            assert_eq!(pc_delta_primes(2_000, 1e-4, &mut r), PcStatus::Ok);
            assert!(r.lower <= r.delta && r.delta <= r.upper);
            assert!((r.delta - 0.6685).abs() < 0.01, "delta {}", r.delta);
            assert_eq!(pc_delta_primes(0, 1e-4, &mut r), PcStatus::InvalidArgument);
        }
    }

    #[test]
    fn version_and_null_handling() {
        unsafe {
            let v = std::ffi::CStr::from_ptr(pc_version());
            assert!(!v.to_str().unwrap().is_empty());
            assert_eq!(
                pc_sieve(100, std::ptr::null_mut()),
                PcStatus::InvalidArgument
            );
            let mut x = 0u64;
            assert_eq!(
                pc_prime_count(std::ptr::null(), &mut x),
                PcStatus::InvalidArgument
            );
            pc_prime_table_free(std::ptr::null_mut());
        }
    }
}
