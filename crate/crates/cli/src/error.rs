use std::fmt;
use std::path::Path;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad input, configuration or data; exit code 2.
    Input { kind: String, msg: String },
    /// Anything else; exit code 3.
    Internal { kind: String, msg: String },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn input(kind: &str, msg: impl Into<String>) -> Self {
        CliError::Input {
            kind: kind.to_string(),
            msg: msg.into(),
        }
    }

    pub fn internal(kind: &str, msg: impl Into<String>) -> Self {
        CliError::Internal {
            kind: kind.to_string(),
            msg: msg.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => EXIT_INPUT,
            CliError::Internal { .. } => EXIT_INTERNAL,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::input("io", format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    /// `error: kind=<kind> msg=<single line>`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Input { kind, msg } | CliError::Internal { kind, msg } => (kind, msg),
        };
        let flat: String = msg.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error: kind={kind} msg={flat}")
    }
}

impl From<popdisc_core::Error> for CliError {
    fn from(e: popdisc_core::Error) -> Self {
        CliError::input(e.kind(), e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::input("csv", e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_line_is_single_line() {
        let e = CliError::input("parse", "line 3:\n  bad   json");
        assert_eq!(e.to_string(), "error: kind=parse msg=line 3: bad json");
        assert_eq!(e.exit_code(), 2);
        assert_eq!(CliError::internal("panic", "x").exit_code(), 3);
    }

    #[test]
    fn core_errors_are_input_errors() {
        let e: CliError = popdisc_core::Error::EmptyCorpus.into();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().starts_with("error: kind=empty_corpus "));
    }
}
