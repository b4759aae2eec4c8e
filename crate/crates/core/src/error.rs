use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input sequence")]
    EmptySequence,

    #[error("empty parameter grid")]
    EmptyGrid,

    #[error("measurement strength eta = {eta} outside [0, 1]")]
    EtaOutOfRange { eta: f64 },

    /// Per-step strength `eta = 4c/N` exceeds one for a physical protocol.
    #[error("invalid regime: eta = 4c/N = {eta} > 1 at N = {n_steps}, c = {c}")]
    InvalidEta { n_steps: usize, c: f64, eta: f64 },

    #[error("stability values missing; run a noise ensemble first")]
    MissingStability,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
