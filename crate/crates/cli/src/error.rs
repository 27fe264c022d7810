use std::fmt;
use std::path::Path;

use qwalk_core::Error;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;
pub const EXIT_IO: u8 = 4;

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        CliError { code: EXIT_DOMAIN, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { code: EXIT_IO, message: message.into() }
    }

    /// Wraps a core error raised while reading `path`.
    pub fn reading(path: &Path, err: Error) -> Self {
        match err {
            Error::Io(e) => CliError::input(format!("{}: {e}", path.display())),
            e if e.is_input_error() => CliError::input(format!("{}: {e}", path.display())),
            e => CliError::from(e).context(&path.display().to_string()),
        }
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Parse { .. } | Error::Format(_) => EXIT_INPUT,
            Error::Io(_) => EXIT_IO,
            _ => EXIT_DOMAIN,
        };
        CliError { code, message: err.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
