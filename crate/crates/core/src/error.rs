use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("x = {x} is outside the terrain span [{min}, {max}]")]
    OutOfRange { x: f64, min: f64, max: f64 },

    #[error("index {index} out of range for {len} voxels")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("shape parse error: {0}")]
    ShapeParse(String),

    #[error("simulation diverged at step {step}")]
    SimulationDiverged { step: u64 },

    #[error("genotype length mismatch: expected {expected}, found {found}")]
    GenotypeLength { expected: usize, found: usize },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("plan error in {path}: {message}")]
    Plan { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
