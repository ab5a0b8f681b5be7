use std::fmt;
use std::path::Path;

/// Failures after argument parsing, each tied to an exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad combination of arguments or an unknown name; exit 2.
    Usage(String),
    /// The engine rejected the inputs; exit 1.
    Domain(scaling_horizon::Error),
    /// Unreadable or malformed input file, or an output failure; exit 1.
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Input(_) => 1,
        }
    }

    pub fn json(path: &Path, err: &serde_json::Error) -> Self {
        CliError::Input(format!("{}: malformed JSON: {err}", path.display()))
    }

    pub fn io(path: &Path, err: &std::io::Error) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) => f.write_str(m),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<scaling_horizon::Error> for CliError {
    fn from(e: scaling_horizon::Error) -> Self {
        CliError::Domain(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
