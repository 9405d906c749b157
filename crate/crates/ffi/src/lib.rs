//! C ABI over the engine. Handles are opaque; every call returns an
//! `IcnStatus` and leaves a message for `icn_last_error_message` on failure.
//! Strings handed out must be released with `icn_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use icn_core::canonical;
use icn_core::ingest::{Lexicon, Utterance};
use icn_core::session::{open_session, Session, SessionConfig};
use icn_core::Error;

/// Result code of every exported call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcnStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Input = 3,
    Config = 4,
    Conflict = 5,
    Invariant = 6,
    Io = 7,
    Panic = 8,
}

/// Parsed lexicon; share it between sessions.
pub struct IcnLexicon(Arc<Lexicon>);

/// One analysis session.
pub struct IcnSession(Session);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> IcnStatus {
    match e {
        Error::Config(_) => IcnStatus::Config,
        Error::StaleUtterance { .. } | Error::TimeRegression { .. } => IcnStatus::Conflict,
        Error::Invariant(_) | Error::DetailingCycle { .. } | Error::ReplayDivergence { .. } => IcnStatus::Invariant,
        Error::Io(_) => IcnStatus::Io,
        _ => IcnStatus::Input,
    }
}

fn guard(f: impl FnOnce() -> Result<(), IcnStatus>) -> IcnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IcnStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            IcnStatus::Panic
        }
    }
}

fn fail(e: Error) -> IcnStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, IcnStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(IcnStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        IcnStatus::InvalidUtf8
    })
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), IcnStatus> {
    if out.is_null() {
        set_error("null output argument");
        return Err(IcnStatus::NullArgument);
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), IcnStatus> {
    if out.is_null() {
        set_error("null output argument");
        return Err(IcnStatus::NullArgument);
    }
    *out = CString::new(s).map_err(|_| IcnStatus::Input)?.into_raw();
    Ok(())
}

unsafe fn session_ref<'a>(s: *const IcnSession) -> Result<&'a IcnSession, IcnStatus> {
    s.as_ref().ok_or_else(|| {
        set_error("null session");
        IcnStatus::NullArgument
    })
}

/// Parse lexicon text. On success `*out` owns a handle for `icn_lexicon_free`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn icn_lexicon_load(text: *const c_char, out: *mut *mut IcnLexicon) -> IcnStatus {
    guard(|| {
        let text = read_str(text)?;
        let lex = Lexicon::parse(text).map_err(fail)?;
        write_out(out, IcnLexicon(Arc::new(lex)))
    })
}

/// # Safety
/// `lex` must come from `icn_lexicon_load` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn icn_lexicon_free(lex: *mut IcnLexicon) {
    if !lex.is_null() {
        drop(Box::from_raw(lex));
    }
}

/// Open a session. `config_toml` may be null for defaults.
///
/// # Safety
/// Pointers must be valid; `problem` and `config_toml` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn icn_session_open(
    lex: *const IcnLexicon,
    problem: *const c_char,
    config_toml: *const c_char,
    out: *mut *mut IcnSession,
) -> IcnStatus {
    guard(|| {
        let lex = lex.as_ref().ok_or_else(|| {
            set_error("null lexicon");
            IcnStatus::NullArgument
        })?;
        let problem = read_str(problem)?;
        let config = if config_toml.is_null() {
            SessionConfig::default()
        } else {
            SessionConfig::parse(read_str(config_toml)?).map_err(fail)?
        };
        let session = open_session(config, Arc::clone(&lex.0), problem).map_err(fail)?;
        write_out(out, IcnSession(session))
    })
}

/// Process one utterance given as JSON (`id`, `speaker`, `t_ms`, `text`, optional `triples`).
/// On success `*events_out`, if not null, receives the batch as JSON.
///
/// # Safety
/// Pointers must be valid; `utterance_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn icn_session_process_json(
    session: *mut IcnSession,
    utterance_json: *const c_char,
    events_out: *mut *mut c_char,
) -> IcnStatus {
    guard(|| {
        let session = session.as_mut().ok_or_else(|| {
            set_error("null session");
            IcnStatus::NullArgument
        })?;
        let text = read_str(utterance_json)?;
        let u: Utterance = serde_json::from_str(text).map_err(|e| fail(e.into()))?;
        let batch = session.0.process_utterance(&u).map_err(fail)?;
        if events_out.is_null() {
            return Ok(());
        }
        write_string(events_out, canonical::to_string(&batch).map_err(fail)?)
    })
}

/// Canonical snapshot JSON.
///
/// # Safety
/// `session` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn icn_session_snapshot_json(session: *const IcnSession, out: *mut *mut c_char) -> IcnStatus {
    guard(|| write_string(out, session_ref(session)?.0.snapshot().to_json()))
}

/// Canonical metrics report JSON.
///
/// # Safety
/// `session` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn icn_session_metrics_json(session: *const IcnSession, out: *mut *mut c_char) -> IcnStatus {
    guard(|| {
        let s = session_ref(session)?;
        write_string(out, canonical::to_string_pretty(s.0.metrics()).map_err(fail)?)
    })
}

/// # Safety
/// `session` must come from `icn_session_open` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn icn_session_free(session: *mut IcnSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn icn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn icn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}
