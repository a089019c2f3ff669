//! C ABI for the fvlab source-coding laboratory.
//!
//! Distributions are opaque handles created with [`fv_dist_new`] and released
//! with [`fv_dist_free`]. Every function returns an [`FvStatus`]; outputs go
//! through pointers that are written only on `FV_STATUS_OK`. Panics are
//! caught at the boundary and surfaced as `FV_STATUS_INTERNAL`.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fvlab::asymptotics::{predicted_rate, RateVariant};
use fvlab::converse::{kraft_lp_optimal, KraftProfile};
use fvlab::gaussian::{q, q_inv};
use fvlab::rates::code_rate_bits;
use fvlab::typeset::TypeSet;
use fvlab::universal::one_bit_gap;
use fvlab::{CodeKind, Dist};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FvStatus {
    FvStatusOk = 0,
    FvStatusNullPointer = 1,
    FvStatusInvalidDistribution = 2,
    FvStatusInvalidEpsilon = 3,
    FvStatusUnsupported = 4,
    FvStatusTooLarge = 5,
    FvStatusDomain = 6,
    FvStatusInternal = 7,
}

/// Code families exposed through the ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FvCode {
    FvCodeOptimal = 0,
    FvCodeTypeSize = 1,
    FvCodeTwoStageFv = 2,
    FvCodeTwoStageFf = 3,
    FvCodeInterleave = 4,
}

/// Rate-expansion variants for the three-term prediction.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FvRateVariant {
    FvRateOptimal = 0,
    FvRateTypeSize = 1,
    FvRateTwoStage = 2,
}

/// Opaque handle around a validated source distribution.
pub struct FvDist {
    inner: Dist,
}

fn status_of(err: &fvlab::Error) -> FvStatus {
    use fvlab::Error::*;
    match err {
        InvalidDistribution(_) | InvalidAlphabet(_) => FvStatus::FvStatusInvalidDistribution,
        InvalidEpsilon(_) => FvStatus::FvStatusInvalidEpsilon,
        Unsupported(_) => FvStatus::FvStatusUnsupported,
        TooLarge(_) => FvStatus::FvStatusTooLarge,
        _ => FvStatus::FvStatusDomain,
    }
}

fn guarded(body: impl FnOnce() -> FvStatus) -> FvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(_) => FvStatus::FvStatusInternal,
    }
}

/// Human-readable name of a status code; a static string, do not free.
#[no_mangle]
pub extern "C" fn fv_status_name(status: FvStatus) -> *const c_char {
    let s: &'static CStr = match status {
        FvStatus::FvStatusOk => c"ok",
        FvStatus::FvStatusNullPointer => c"null pointer argument",
        FvStatus::FvStatusInvalidDistribution => c"invalid distribution",
        FvStatus::FvStatusInvalidEpsilon => c"epsilon outside (0, 1)",
        FvStatus::FvStatusUnsupported => c"unsupported operation",
        FvStatus::FvStatusTooLarge => c"instance too large",
        FvStatus::FvStatusDomain => c"argument out of domain",
        FvStatus::FvStatusInternal => c"internal error",
    };
    s.as_ptr()
}

/// Library version; a static string, do not free.
#[no_mangle]
pub extern "C" fn fv_version() -> *const c_char {
    static VERSION: &CStr = c"0.1.0";
    VERSION.as_ptr()
}

/// Validates and stores a probability vector of length m. On success writes
/// a handle the caller must release with fv_dist_free.
///
/// # Safety
/// `probs` must point to `m` readable doubles and `out` to a writable slot.
#[no_mangle]
pub unsafe extern "C" fn fv_dist_new(
    probs: *const f64,
    m: usize,
    out: *mut *mut FvDist,
) -> FvStatus {
    if probs.is_null() || out.is_null() || m == 0 {
        return FvStatus::FvStatusNullPointer;
    }
    let slice = unsafe { std::slice::from_raw_parts(probs, m) };
    guarded(|| match Dist::new(slice.to_vec()) {
        Ok(d) => {
            let handle = Box::new(FvDist { inner: d });
            unsafe { *out = Box::into_raw(handle) };
            FvStatus::FvStatusOk
        }
        Err(e) => status_of(&e),
    })
}

/// Releases a handle returned by fv_dist_new. Null is a no-op.
///
/// # Safety
/// `dist` must be a pointer from fv_dist_new, released at most once.
#[no_mangle]
pub unsafe extern "C" fn fv_dist_free(dist: *mut FvDist) {
    if !dist.is_null() {
        drop(unsafe { Box::from_raw(dist) });
    }
}

/// Entropy of the distribution, in bits.
///
/// # Safety
/// `dist` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_entropy(dist: *const FvDist, out: *mut f64) -> FvStatus {
    if dist.is_null() || out.is_null() {
        return FvStatus::FvStatusNullPointer;
    }
    guarded(|| {
        unsafe { *out = (*dist).inner.entropy() };
        FvStatus::FvStatusOk
    })
}

/// Varentropy of the distribution, in bits squared.
///
/// # Safety
/// `dist` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_varentropy(dist: *const FvDist, out: *mut f64) -> FvStatus {
    if dist.is_null() || out.is_null() {
        return FvStatus::FvStatusNullPointer;
    }
    guarded(|| {
        unsafe { *out = (*dist).inner.varentropy() };
        FvStatus::FvStatusOk
    })
}

/// Standard normal upper tail Q(x).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_q(x: f64, out: *mut f64) -> FvStatus {
    if out.is_null() {
        return FvStatus::FvStatusNullPointer;
    }
    guarded(|| {
        unsafe { *out = q(x) };
        FvStatus::FvStatusOk
    })
}

/// Inverse of the standard normal upper tail on (0, 1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_q_inv(p: f64, out: *mut f64) -> FvStatus {
    if out.is_null() {
        return FvStatus::FvStatusNullPointer;
    }
    guarded(|| match q_inv(p) {
        Ok(v) => {
            unsafe { *out = v };
            FvStatus::FvStatusOk
        }
        Err(e) => status_of(&e),
    })
}

/// Exact epsilon-rate of the chosen code at blocklength n: the bit count
/// and the rate in bits per symbol.
///
/// # Safety
/// `dist` must be a live handle; `out_bits` and `out_rate` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_code_rate(
    code: FvCode,
    n: u32,
    dist: *const FvDist,
    eps: f64,
    out_bits: *mut u64,
    out_rate: *mut f64,
) -> FvStatus {
    if dist.is_null() || out_bits.is_null() || out_rate.is_null() {
        return FvStatus::FvStatusNullPointer;
    }
    guarded(|| {
        let kind = match code {
            FvCode::FvCodeOptimal => CodeKind::Optimal,
            FvCode::FvCodeTypeSize => CodeKind::TypeSize,
            FvCode::FvCodeTwoStageFv => CodeKind::TwoStageFv,
            FvCode::FvCodeTwoStageFf => CodeKind::TwoStageFf,
            FvCode::FvCodeInterleave => CodeKind::Interleave,
        };
        let p = unsafe { &(*dist).inner };
        let ts = match TypeSet::enumerate(n, p.len()) {
            Ok(ts) => ts,
            Err(e) => return status_of(&e),
        };
        match code_rate_bits(kind, &ts, p, eps) {
            Ok(r) => {
                unsafe {
                    *out_bits = r.bits;
                    *out_rate = r.rate;
                }
                FvStatus::FvStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Bit counts of the binary interleaved code and of the optimal code; the
/// former never exceeds the latter plus one.
///
/// # Safety
/// `dist` must be a live handle; `out_nr` and `out_nr_star` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_one_bit_gap(
    n: u32,
    dist: *const FvDist,
    eps: f64,
    out_nr: *mut u64,
    out_nr_star: *mut u64,
) -> FvStatus {
    if dist.is_null() || out_nr.is_null() || out_nr_star.is_null() {
        return FvStatus::FvStatusNullPointer;
    }
    guarded(|| {
        let p = unsafe { &(*dist).inner };
        let ts = match TypeSet::enumerate(n, p.len()) {
            Ok(ts) => ts,
            Err(e) => return status_of(&e),
        };
        match one_bit_gap(&ts, p, eps) {
            Ok((nr, nr_star)) => {
                unsafe {
                    *out_nr = nr;
                    *out_nr_star = nr_star;
                }
                FvStatus::FvStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Three-term rate prediction H + sqrt(V/n) Qinv(eps) + c log2(n)/n for the
/// chosen code family.
///
/// # Safety
/// `dist` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fv_predicted_rate(
    variant: FvRateVariant,
    n: u32,
    dist: *const FvDist,
    eps: f64,
    out: *mut f64,
) -> FvStatus {
    if dist.is_null() || out.is_null() {
        return FvStatus::FvStatusNullPointer;
    }
    guarded(|| {
        let v = match variant {
            FvRateVariant::FvRateOptimal => RateVariant::Optimal,
            FvRateVariant::FvRateTypeSize => RateVariant::TypeSize,
            FvRateVariant::FvRateTwoStage => RateVariant::TwoStage,
        };
        match predicted_rate(unsafe { &(*dist).inner }, n, eps, v) {
            Ok(r) => {
                unsafe { *out = r };
                FvStatus::FvStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Closed-form optimum of the Kraft length-allocation program for a strictly
/// increasing ladder of codeword lengths.
///
/// # Safety
/// `levels` must point to `len` readable u32 values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn fv_kraft_lp_optimal(
    levels: *const u32,
    len: usize,
    out: *mut f64,
) -> FvStatus {
    if levels.is_null() || out.is_null() || len == 0 {
        return FvStatus::FvStatusNullPointer;
    }
    let slice = unsafe { std::slice::from_raw_parts(levels, len) };
    guarded(|| match KraftProfile::new(slice.to_vec()) {
        Ok(profile) => {
            unsafe { *out = kraft_lp_optimal(&profile) };
            FvStatus::FvStatusOk
        }
        Err(e) => status_of(&e),
    })
}
