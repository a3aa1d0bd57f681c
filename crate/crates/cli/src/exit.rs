//! Process exit codes and the error type that carries them.

use std::fmt;

use chargeq_core::Error;

pub const OK: i32 = 0;
pub const VERIFICATION: i32 = 1;
pub const CONFIG: i32 = 2;
pub const RESOURCE: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        let path = path.into();
        let path = if path.is_empty() || path == "." {
            "<root>".to_string()
        } else {
            path
        };
        Self::new(CONFIG, format!("config error at `{path}`: {}", message.into()))
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self::new(VERIFICATION, message)
    }

    pub fn io(e: impl fmt::Display) -> Self {
        Self::new(CONFIG, format!("i/o error: {e}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Resource { .. } => RESOURCE,
            Error::Config { .. } | Error::Domain(_) | Error::Contract(_) => CONFIG,
            Error::Calibration { .. } | Error::Numerical(_) => VERIFICATION,
        };
        Self::new(code, e.to_string())
    }
}
