use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing property: {0}")]
    MissingProperty(String),
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("insufficient neighbors: got {got}, need {need}")]
    InsufficientNeighbors { got: usize, need: usize },
    #[error("degenerate neighborhood")]
    DegenerateNeighborhood,
    #[error("vector is not unit length")]
    NonUnitVector,
    #[error("empty roof set")]
    EmptyRoofSet,
    #[error("label length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("coordinate frame mismatch: \"{0}\" vs \"{1}\"")]
    CrsMismatch(String, String),
    #[error("missing georeference")]
    MissingGeoreference,
    #[error("degenerate correspondences")]
    DegenerateCorrespondences,
    #[error("no correspondences within the distance threshold")]
    NoCorrespondences,
    #[error("empty ground border")]
    EmptyBorder,
    #[error("scene spec: {0}")]
    Spec(String),
    #[error("config: {0}")]
    Config(String),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
}

pub type Result<T> = std::result::Result<T, Error>;
