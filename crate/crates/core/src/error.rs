use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// Setting or mechanism parameters that cannot describe a valid instance.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed input: bad JSON shape, out-of-range values, wrong setting.
    #[error("invalid input: {0}")]
    Input(String),
    /// A profile or outcome that violates the feasibility constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// A search that would exceed the configured budget.
    #[error("budget exceeded: {what} needs {estimate} steps, limit is {limit}")]
    Budget {
        what: String,
        estimate: u128,
        limit: u128,
    },
    /// A call that violates an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn budget(what: impl Into<String>, estimate: u128, limit: u128) -> Self {
        Error::Budget {
            what: what.into(),
            estimate,
            limit,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Usage(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::Config(_) | Error::Infeasible(_) => 3,
            Error::Budget { .. } => 4,
        }
    }
}
