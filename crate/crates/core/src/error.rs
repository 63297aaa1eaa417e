use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate lattice: volume {0:e} is not positive")]
    DegenerateLattice(f64),

    #[error("invalid lattice parameters: {0}")]
    InvalidLatticeParams(String),

    #[error("non-finite coordinate at atom {atom}, axis {axis}")]
    NonFiniteCoordinate { atom: usize, axis: usize },

    #[error("crystal must contain at least one atom")]
    EmptyCrystal,

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("unknown element: {0}")]
    UnknownElement(String),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("invalid noise schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("Niggli reduction did not converge within {0} iterations")]
    NiggliNotConverged(usize),

    #[error("score field returned a non-finite value at level {level}, step {step}")]
    NonFiniteScore { level: usize, step: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
