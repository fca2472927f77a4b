use qwires_core::Verdict;

/// Failures with their process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed arguments or input files.
    #[error("input error: {0}")]
    Input(String),
    /// The computation ran but a verified property does not hold.
    #[error("verification failed: {0}")]
    Failed(String),
    /// A classified tensor is not a wire.
    #[error("not a wire: {}", .0.as_str())]
    NotAWire(Verdict),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::NotAWire(v) => verdict_exit_code(*v),
        }
    }
}

/// `0` for wires; a distinct code for every other verdict.
pub fn verdict_exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Wire => 0,
        Verdict::NotGapped => 3,
        Verdict::NotUnital => 4,
        Verdict::Degenerate => 5,
        Verdict::ChoiRankExceeded => 6,
    }
}

impl From<qwires_core::Error> for CliError {
    fn from(e: qwires_core::Error) -> Self {
        use qwires_core::Error as E;
        match e {
            E::InvalidArgument(_)
            | E::NotNormalized { .. }
            | E::NotUnitary { .. }
            | E::TooLarge { .. } => CliError::Input(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}
