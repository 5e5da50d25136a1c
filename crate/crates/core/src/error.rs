use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("pole: {0}")]
    Pole(String),

    #[error("invalid Moebius coefficients: {0}")]
    InvalidMoebius(String),

    #[error("coincident points")]
    CoincidentPoints,

    #[error("evaluation point lies on the singular orbit of the source")]
    SingularOrbit,

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("divergent series: exponent {s} must exceed lattice rank {k}")]
    Divergent { s: f64, k: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid manifold: {0}")]
    InvalidManifold(String),

    #[error("invalid finite-difference scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("surface is not symmetric under the reflection")]
    AsymmetricSurface,

    #[error("map vanishes on the integration contour")]
    ZeroOnContour,

    #[error("order integral {value} is not close to an integer")]
    NonInteger { value: f64 },
}
