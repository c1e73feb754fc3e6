use thiserror::Error;

/// Everything that can go wrong while configuring, running, or replaying a
/// simulation. Numerical failures carry enough context to act on (which
/// face, which step, how far from the tolerance); file errors carry the path.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "permeability lost positivity: min(alpha + beta*C) = {min:.6e} at {axis} face ({i}, {j})"
    )]
    SingularPermeability {
        min: f64,
        axis: char,
        i: usize,
        j: usize,
    },

    #[error(
        "momentum solve stalled at relative residual {residual:.3e} after {iters} iterations (tol {tol:.1e})"
    )]
    NoConvergence {
        iters: u64,
        residual: f64,
        tol: f64,
    },

    #[error("dt = {dt:.6e} exceeds the stability bound {dt_max:.6e}; reduce dt or set run.cfl_override")]
    CflViolation { dt: f64, dt_max: f64 },

    #[error("state became non-finite at step {step}")]
    NonFinite { step: u64 },

    #[error("line {line}: unknown config key `{key}`")]
    UnknownKey { key: String, line: usize },

    #[error("line {line}: expected `section.key = value`, got `{text}`")]
    BadConfigLine { line: usize, text: String },

    #[error("config key `{key}`: expected {expected}, got `{got}`")]
    TypeMismatch {
        key: String,
        expected: &'static str,
        got: String,
    },

    #[error("config key `{key}`: {rule}")]
    ConstraintViolation { key: String, rule: String },

    #[error("{path}: not a snapshot file (bad magic)")]
    BadMagic { path: String },

    #[error("{path}: snapshot payload disagrees with header: {detail}")]
    SizeMismatch { path: String, detail: String },

    #[error("{path}: snapshot payload contains non-finite values")]
    NonFinitePayload { path: String },

    #[error("{path}: snapshot payload invalid: {detail}")]
    BadPayload { path: String, detail: String },

    #[error("{path}:{line}: malformed timeseries row: {detail}")]
    MalformedTimeseries {
        path: String,
        line: usize,
        detail: String,
    },

    #[error("diagnostics series is empty")]
    EmptySeries,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wraps an I/O error with the path it happened on.
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Error {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
