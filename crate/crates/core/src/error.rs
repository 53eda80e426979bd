use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("invalid aperture: {0}")]
    InvalidAperture(String),

    #[error("pitch fraction {0} is outside [0, 1]")]
    PitchOutOfRange(f64),

    #[error("setting {0}° is not one of the configured options")]
    UnknownSetting(f64),

    #[error("unknown restaurant chain `{0}`")]
    UnknownChain(String),

    #[error("theta {0}° is outside [0°, 180°]")]
    ThetaOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed scenario: {0}")]
    Scenario(String),

    #[error("cannot plot an empty series")]
    EmptySeries,

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
