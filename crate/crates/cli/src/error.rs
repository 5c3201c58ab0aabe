use std::fmt;

use ensemble_aqc::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Guard(String),
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Guard(_) => 4,
            CliError::Computation(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Guard(_) => "guard",
            CliError::Computation(_) => "computation",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Guard(m) | CliError::Computation(m) => m,
        }
    }
}

/// `eaqc: error: kind=<kind> msg=<json string>` on one line.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = serde_json::to_string(self.message()).unwrap_or_else(|_| "\"\"".into());
        write!(f, "eaqc: error: kind={} msg={msg}", self.kind())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::GuardExceeded { .. } => CliError::Guard(msg),
            Error::Malformed(_)
            | Error::Shape(_)
            | Error::Asymmetric { .. }
            | Error::NonzeroDiagonal { .. }
            | Error::NonFinite(_)
            | Error::InvalidArgument(_) => CliError::Config(msg),
            Error::DegenerateGround { .. } | Error::NoConvergence(_) | Error::Integration(_) => {
                CliError::Computation(msg)
            }
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line_format() {
        let e = CliError::Config("bad \"tau\"\nvalue".into());
        let line = e.to_string();
        assert_eq!(line, r#"eaqc: error: kind=config msg="bad \"tau\"\nvalue""#);
        assert!(!line.contains('\n'));
    }

    #[test]
    fn core_errors_map_to_codes() {
        let guard = Error::GuardExceeded { what: "dim", value: 5, limit: 4 };
        assert_eq!(CliError::from(guard).exit_code(), 4);
        assert_eq!(CliError::from(Error::Malformed("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Integration("x".into())).exit_code(), 5);
    }
}
