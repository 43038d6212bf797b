use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model domain error: {param} = {value} ({reason})")]
    ModelDomain {
        param: String,
        value: f64,
        reason: &'static str,
    },

    #[error("client {client}: contribution {value} exceeds capacity {capacity}")]
    CapacityExceeded { client: usize, value: u64, capacity: u64 },

    #[error("length mismatch: expected {expected} entries for {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("client index {index} out of range for {count} clients")]
    ClientIndex { index: usize, count: usize },

    #[error("Shapley enumeration over {clients} clients exceeds the coalition cap of {cap}")]
    CoalitionCap { clients: usize, cap: usize },

    #[error("invalid value for {path}: {message}")]
    Invalid { path: String, message: String },

    #[error("underdetermined fit: {0}")]
    Underdetermined(String),

    #[error("ill-conditioned least-squares system: {0}")]
    Conditioning(String),

    #[error("degenerate regressor: {0}")]
    DegenerateRegressor(String),

    #[error("cannot flip labels with {classes} class(es) at rate {epsilon}")]
    ImpossibleFlip { classes: usize, epsilon: f64 },

    #[error("config error at {path}{}: {message}", line_suffix(.line))]
    Config {
        path: String,
        line: Option<usize>,
        message: String,
    },

    #[error("sample file {path}: {message}")]
    Format { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn line_suffix(line: &Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

impl Error {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
