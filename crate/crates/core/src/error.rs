use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("invalid stratum: {0}")]
    InvalidStratum(String),
    #[error("codimension {codim} out of range {min}..={max}")]
    CodimOutOfRange { codim: usize, min: usize, max: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(String),
    #[error("matrix is numerically singular (smallest singular value {sigma_min:.3e}, largest {sigma_max:.3e})")]
    Singular { sigma_min: f64, sigma_max: f64 },
    #[error("matrix function evaluation inaccurate: residual {residual:.3e}, condition estimate {condition:.3e}")]
    Inaccurate { residual: f64, condition: f64 },
    #[error("Taylor series for an atomic block did not converge after {terms} terms")]
    SeriesDiverged { terms: usize },
    #[error("fundamental domain base {0} not allowed here: must lie in (-1, 0]")]
    InvalidDomain(f64),

    #[error("malformed object: {0}")]
    Malformed(String),
    #[error("object fails its axioms ({count} violations, first: {first})")]
    InvalidObject { count: usize, first: String },
    #[error("subspace not invariant under {generator}: residual {residual:.3e}")]
    NotInvariant { generator: String, residual: f64 },
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("monodromies do not commute: residual {residual:.3e} between directions {first} and {second}")]
    NonCommuting { first: usize, second: usize, residual: f64 },
    #[error("objects are not comparable: {0}")]
    Incompatible(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("randomized search inconclusive: {0}")]
    Inconclusive(String),
    #[error("operation requires a nonzero object")]
    ZeroObject,
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
