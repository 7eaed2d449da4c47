use std::fmt;
use std::process::ExitCode;

use hankel_lab::LabError;

/// Failures surfaced to the shell: configuration problems exit with 2, numerical ones with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Domain(_) | LabError::InvalidArgument(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        let config: CliError = LabError::InvalidArgument("x".into()).into();
        assert!(matches!(config, CliError::Config(_)));
        let numerical: CliError = LabError::NotConverged("x".into()).into();
        assert!(matches!(numerical, CliError::Numerical(_)));
        assert_eq!(numerical.exit_code(), ExitCode::from(3));
        assert_eq!(config.exit_code(), ExitCode::from(2));
    }
}
