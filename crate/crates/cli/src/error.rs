use std::fmt;

use serde::Serialize;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Config or input data violates its schema.
    Schema(String),
    /// A physics routine or fit failed.
    Physics(String),
    Io(String),
}

#[derive(Serialize)]
struct Report<'a> {
    error: &'a str,
    message: &'a str,
    exit_code: i32,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::Physics(_) => "physics",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Schema(m) | CliError::Physics(m) | CliError::Io(m) => m,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Report {
            error: self.kind(),
            message: self.message(),
            exit_code: self.exit_code(),
        })
        .expect("plain strings serialize")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

impl From<xtalk_core::Error> for CliError {
    fn from(e: xtalk_core::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else if e.is_input() {
            CliError::Schema(e.to_string())
        } else {
            CliError::Physics(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Schema(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
