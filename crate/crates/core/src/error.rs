use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty point set")]
    EmptyInput,
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid flat: {0}")]
    InvalidFlat(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("genericity failure: {0}")]
    GenericityFailure(String),
    #[error("vertical input has no dual under the chosen duality: {0}")]
    Vertical(String),
    #[error("point does not lie on the plane")]
    NotOnPlane,
    #[error("enumeration cap exceeded: {size} tuples > cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("invalid index {0}")]
    InvalidIndex(usize),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("cross-copy interaction detected: {0}")]
    Interaction(String),
    #[error("not enough distinct cone directions: requested {requested}, found {found}")]
    NotEnoughDirections { requested: usize, found: usize },
    #[error("fit needs at least two usable rows, got {0}")]
    InsufficientData(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
