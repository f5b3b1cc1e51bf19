// SPDX-License-Identifier: Apache-2.0

//! C ABI over the `sqnl` crate.
//!
//! Every function returns an [`SqnlStatus`] and writes results through out
//! pointers. Generators and LSTM cells are opaque handles created by a `_new`
//! function and released with the matching `_free`. A description of the
//! most recent failure on the calling thread is available from
//! [`sqnl_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sqnl::closedform::{gated_exact, GatedParams};
use sqnl::floatfamily::{activate, derivative, ActivationKind};
use sqnl::generator::{eval, map_all};
use sqnl::nn::{LstmCellFixed, LstmFixture};
use sqnl::resources::{gate_cost, Block};
use sqnl::{Error, GeneratorConfig, GeneratorMode, Word};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqnlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Unsupported = 4,
    DimensionMismatch = 5,
    ParseError = 6,
    BufferTooSmall = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqnlMode {
    Symmetric = 0,
    LogSqnl = 1,
    Asymmetric = 2,
    Gated = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqnlActivation {
    Sqnl = 0,
    SqLogSig = 1,
    Sqlu = 2,
    SqSoftmax = 3,
    SqSqish = 4,
    SqReu = 5,
}

impl From<SqnlActivation> for ActivationKind {
    fn from(a: SqnlActivation) -> Self {
        match a {
            SqnlActivation::Sqnl => ActivationKind::Sqnl,
            SqnlActivation::SqLogSig => ActivationKind::SqLogSig,
            SqnlActivation::Sqlu => ActivationKind::Sqlu,
            SqnlActivation::SqSoftmax => ActivationKind::SqSoftmax,
            SqnlActivation::SqSqish => ActivationKind::SqSqish,
            SqnlActivation::SqReu => ActivationKind::SqReu,
        }
    }
}

/// Opaque generator handle.
pub struct SqnlGenerator {
    config: GeneratorConfig,
}

/// Opaque fixed-point LSTM cell handle.
pub struct SqnlLstm {
    cell: LstmCellFixed,
    input_size: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> SqnlStatus {
    match err {
        Error::ValueOutOfRange { .. }
        | Error::AlphaOutOfRange { .. }
        | Error::ScaleOutOfRange { .. }
        | Error::InvalidSequenceLength { .. }
        | Error::InvalidWidth(_) => SqnlStatus::OutOfRange,
        Error::UnsupportedMode { .. } | Error::UnsupportedWidth { .. } => SqnlStatus::Unsupported,
        Error::DimensionMismatch { .. } | Error::WidthMismatch { .. } => {
            SqnlStatus::DimensionMismatch
        }
        Error::Parse(_) | Error::GoldenSchema { .. } => SqnlStatus::ParseError,
        Error::Io(_) => SqnlStatus::Internal,
        _ => SqnlStatus::InvalidArgument,
    }
}

struct Failure(SqnlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SqnlStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SqnlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            SqnlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SqnlStatus::Internal
        }
    }
}

/// Static description of a status code. Never null.
#[no_mangle]
pub extern "C" fn sqnl_status_message(status: SqnlStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SqnlStatus::Ok => c"ok",
        SqnlStatus::NullPointer => c"null pointer argument",
        SqnlStatus::InvalidArgument => c"invalid argument",
        SqnlStatus::OutOfRange => c"value out of range",
        SqnlStatus::Unsupported => c"unsupported configuration",
        SqnlStatus::DimensionMismatch => c"dimension mismatch",
        SqnlStatus::ParseError => c"parse error",
        SqnlStatus::BufferTooSmall => c"output buffer too small",
        SqnlStatus::Internal => c"internal error",
    };
    s.as_ptr()
}

/// Detail of the last failure on this thread, empty after a success. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn sqnl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a generator. `alpha` is only read in asymmetric mode.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sqnl_generator_new(
    width: u32,
    len: u64,
    mode: SqnlMode,
    alpha: i64,
    out: *mut *mut SqnlGenerator,
) -> SqnlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mode = match mode {
            SqnlMode::Symmetric => GeneratorMode::Symmetric,
            SqnlMode::LogSqnl => GeneratorMode::LogSqnl,
            SqnlMode::Asymmetric => GeneratorMode::Asymmetric { alpha },
            SqnlMode::Gated => GeneratorMode::Gated,
        };
        let config = GeneratorConfig::new(width, len, mode)?;
        *out = Box::into_raw(Box::new(SqnlGenerator { config }));
        Ok(())
    })
}

/// # Safety
/// `gen` must be null or a handle from [`sqnl_generator_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sqnl_generator_free(gen: *mut SqnlGenerator) {
    if !gen.is_null() {
        drop(Box::from_raw(gen));
    }
}

fn scale(has_c: bool, c: i64) -> Option<i64> {
    has_c.then_some(c)
}

/// Evaluates one input. `c_scale` is used only when `has_c` is true, which is
/// required in gated mode and rejected otherwise.
///
/// # Safety
/// `gen` must be a live handle and `out` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sqnl_generator_eval(
    gen: *const SqnlGenerator,
    n: i64,
    has_c: bool,
    c_scale: i64,
    out: *mut i64,
) -> SqnlStatus {
    guard(|| {
        let gen = gen.as_ref().ok_or_else(|| null("generator"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let word = Word::new(n, gen.config.width())?;
        *out = eval(word, &gen.config, scale(has_c, c_scale))?.value();
        Ok(())
    })
}

/// Writes the outputs for every input from `-2^(R-1)` upwards into `buf`.
/// `written` receives the number of entries (`2^R`); when `capacity` is too
/// small nothing is copied and `written` holds the required size.
///
/// # Safety
/// `gen` must be a live handle, `buf` must hold `capacity` writable `i64`s
/// (or be null when `capacity` is 0) and `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sqnl_generator_map(
    gen: *const SqnlGenerator,
    has_c: bool,
    c_scale: i64,
    buf: *mut i64,
    capacity: usize,
    written: *mut usize,
) -> SqnlStatus {
    guard(|| {
        let gen = gen.as_ref().ok_or_else(|| null("generator"))?;
        if written.is_null() {
            return Err(null("written"));
        }
        let table = map_all(&gen.config, scale(has_c, c_scale))?;
        let outputs = table.outputs();
        *written = outputs.len();
        if capacity < outputs.len() {
            return Err(Failure(
                SqnlStatus::BufferTooSmall,
                format!("need {} entries, got {capacity}", outputs.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(outputs.as_ptr(), buf, outputs.len());
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sqnl_activate(kind: SqnlActivation, x: f64, out: *mut f64) -> SqnlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = activate(kind.into(), x)?;
        Ok(())
    })
}

/// Right-hand derivative at knees.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sqnl_derivative(
    kind: SqnlActivation,
    x: f64,
    out: *mut f64,
) -> SqnlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = derivative(kind.into(), x)?;
        Ok(())
    })
}

/// Gate count of one block, e.g. `"adder"` or `"lut_two_sided"`.
///
/// # Safety
/// `kind` must be a NUL-terminated string and `out` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sqnl_gate_cost(
    kind: *const c_char,
    width: u32,
    out: *mut u64,
) -> SqnlStatus {
    guard(|| {
        if kind.is_null() {
            return Err(null("kind"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = CStr::from_ptr(kind)
            .to_str()
            .map_err(|e| Failure(SqnlStatus::InvalidArgument, e.to_string()))?;
        *out = gate_cost(Block::from_kind(kind, width)?)?;
        Ok(())
    })
}

/// Exact closed-form gated value as a reduced fraction `num / den`.
///
/// # Safety
/// `num` and `den` must be valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn sqnl_gated_exact(
    width: u32,
    c_scale: i64,
    n: i64,
    num: *mut i64,
    den: *mut i64,
) -> SqnlStatus {
    guard(|| {
        if num.is_null() || den.is_null() {
            return Err(null("num/den"));
        }
        let params = GatedParams::new(width, c_scale)?;
        Word::new(n, width)?;
        let r = gated_exact(n, &params);
        let to_i64 = |v: i128| {
            i64::try_from(v)
                .map_err(|_| Failure(SqnlStatus::OutOfRange, "fraction overflows".into()))
        };
        *num = to_i64(*r.numer())?;
        *den = to_i64(*r.denom())?;
        Ok(())
    })
}

/// Builds a fixed-point LSTM cell, with zero state, from a JSON weight
/// fixture.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sqnl_lstm_from_json(
    json: *const c_char,
    out: *mut *mut SqnlLstm,
) -> SqnlStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(SqnlStatus::ParseError, e.to_string()))?;
        let fixture = LstmFixture::from_json(text)?;
        let cell = LstmCellFixed::from_fixture(&fixture)?;
        *out = Box::into_raw(Box::new(SqnlLstm {
            cell,
            input_size: fixture.input_size,
        }));
        Ok(())
    })
}

/// Advances the cell by one step. `hidden` receives the new hidden state and
/// `cell` (optional, may be null) the new cell state; both hold
/// `hidden_len` entries.
///
/// # Safety
/// `lstm` must be a live handle, `x` must point to `x_len` readable values and
/// `hidden` (and `cell` when non-null) to `hidden_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn sqnl_lstm_step(
    lstm: *mut SqnlLstm,
    x: *const i64,
    x_len: usize,
    hidden: *mut i64,
    cell: *mut i64,
    hidden_len: usize,
) -> SqnlStatus {
    guard(|| {
        let lstm = lstm.as_mut().ok_or_else(|| null("lstm"))?;
        if x.is_null() && x_len > 0 {
            return Err(null("x"));
        }
        if hidden.is_null() {
            return Err(null("hidden"));
        }
        if x_len != lstm.input_size {
            return Err(Error::DimensionMismatch {
                context: "cell input",
                expected: lstm.input_size,
                actual: x_len,
            }
            .into());
        }
        let units = lstm.cell.hidden().len();
        if hidden_len != units {
            return Err(Error::DimensionMismatch {
                context: "hidden buffer",
                expected: units,
                actual: hidden_len,
            }
            .into());
        }
        let width = lstm.cell.width();
        let input = if x_len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(x, x_len)
                .iter()
                .map(|&v| Word::new(v, width))
                .collect::<Result<Vec<_>, _>>()?
        };
        let (h, c) = lstm.cell.step(&input)?;
        for (k, w) in h.iter().enumerate() {
            *hidden.add(k) = w.value();
        }
        if !cell.is_null() {
            for (k, w) in c.iter().enumerate() {
                *cell.add(k) = w.value();
            }
        }
        Ok(())
    })
}

/// # Safety
/// `lstm` must be null or a handle from [`sqnl_lstm_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sqnl_lstm_free(lstm: *mut SqnlLstm) {
    if !lstm.is_null() {
        drop(Box::from_raw(lstm));
    }
}
