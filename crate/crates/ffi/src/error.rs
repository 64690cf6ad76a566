use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sdlab::Error;

/// Result of every fallible call. On anything but `SDLAB_STATUS_OK`,
/// `sdlab_last_error_message` describes the failure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Numeric = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

pub(crate) fn set_last_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

pub(crate) fn status_for(e: &Error) -> SdlabStatus {
    match e {
        Error::Io { .. } | Error::Input(_) => SdlabStatus::Io,
        Error::Parameter(_) | Error::Usage(_) => SdlabStatus::InvalidArgument,
        Error::Domain(_) | Error::Numeric(_) | Error::NotSpd(_) => SdlabStatus::Numeric,
    }
}

pub(crate) struct FfiError(pub SdlabStatus, pub String);

impl From<Error> for FfiError {
    fn from(e: Error) -> Self {
        FfiError(status_for(&e), e.to_string())
    }
}

pub(crate) fn null_arg(name: &str) -> FfiError {
    FfiError(SdlabStatus::NullPointer, format!("{name} is NULL"))
}

pub(crate) fn invalid(msg: impl Into<String>) -> FfiError {
    FfiError(SdlabStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status plus last-error message.
pub(crate) fn guard<F>(f: F) -> SdlabStatus
where
    F: FnOnce() -> Result<(), FfiError>,
{
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdlabStatus::Ok,
        Ok(Err(FfiError(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SdlabStatus::Panic
        }
    }
}

/// Message for the most recent failure on the calling thread, or NULL.
/// The pointer stays valid until the next `sdlab_*` call on this thread.
#[no_mangle]
pub extern "C" fn sdlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}
