use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The distance matrix breaks a metric axiom; the triple names a witness.
    #[error("triangle inequality violated: d({i},{k}) = {direct} > d({i},{j}) + d({j},{k}) = {via}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        via: f64,
    },
    #[error("distance matrix is not a metric: {0}")]
    NotMetric(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("atom index {index} out of range for a space with {atoms} atoms")]
    InvalidAtom { index: usize, atoms: usize },
    #[error("function has {got} values but the space has {expected} atoms")]
    LengthMismatch { expected: usize, got: usize },
    /// `L^{∞,q}` with finite `q` only contains the zero function.
    #[error("function is not in L^(inf,{q}): only the zero function is admissible")]
    NotInSpace { q: f64 },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
