use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("wavelength {wavelength} nm outside index table range [{min}, {max}] nm")]
    WavelengthOutOfTable { wavelength: f64, min: f64, max: f64 },

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("unknown material '{0}'")]
    UnknownMaterial(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }

    pub(crate) fn scenario(msg: impl Into<String>) -> Self {
        Error::InvalidScenario(msg.into())
    }
}
