use loqe_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// Errors that describe the input are configuration errors; the rest arise
/// while computing.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidTruncation(_)
            | CoreError::DimensionGuard { .. }
            | CoreError::CutoffMismatch { .. }
            | CoreError::ModeOutOfRange { .. }
            | CoreError::InvalidModeSet(_)
            | CoreError::InvalidTransmissivity(_)
            | CoreError::LengthMismatch { .. }
            | CoreError::NotUnitary { .. }
            | CoreError::InvalidState(_)
            | CoreError::InvalidEffect(_)
            | CoreError::InvalidParameter(_) => CliError::Config(e.to_string()),
            CoreError::NonInvertible
            | CoreError::NumericallySingular(_)
            | CoreError::ImpossibleOutcome(_)
            | CoreError::Infeasible(_)
            | CoreError::TruncationInexact => CliError::Numerical(e),
        }
    }
}
