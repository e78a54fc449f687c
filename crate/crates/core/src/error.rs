use thiserror::Error;

/// Errors raised by the simulator and the audits.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter block violates a structural invariant (grid size, cutoff, ranges).
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data is unusable (non-finite samples, zero field where a ratio is taken).
    #[error("input error: {0}")]
    Input(String),
    /// The requested computation is refused because its cost is out of bounds.
    #[error("cost error: {0}")]
    Cost(String),
    /// A time integration produced non-finite values.
    #[error("instability at step {step} (dt = {dt:e}){context}")]
    Instability {
        step: usize,
        dt: f64,
        context: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Attach a context suffix to an instability error (e.g. the stage index).
    pub fn with_context(self, ctx: impl AsRef<str>) -> Self {
        match self {
            Error::Instability { step, dt, context } => Error::Instability {
                step,
                dt,
                context: format!("{context}; {}", ctx.as_ref()),
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
