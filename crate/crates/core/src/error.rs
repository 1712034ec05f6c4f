use thiserror::Error;

use crate::fock::Mode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode {0} is not an input of the linear map")]
    UnknownMode(Mode),

    #[error("at most {max} photons are supported, got {got}")]
    CapacityExceeded { max: usize, got: usize },

    #[error("photon form is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("parameter outside the closed-form domain: {0}")]
    DomainError(String),

    #[error("Fisher information {0} is not positive; resolution is undefined")]
    ZeroInformation(f64),

    #[error("no interior minimum of the resolution over alpha in [{lo}, {hi}]")]
    NoMinimum { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
