use thiserror::Error;

/// Errors surfaced by the library. The CLI maps `InvalidParams`-like variants
/// to exit code 2 and numerical failures to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("point outside domain: {0}")]
    PointOutsideDomain(String),
    #[error("zero-weight point (x lies on the singular set)")]
    ZeroWeightPoint,
    #[error("derivative order {requested} exceeds supported order {max}")]
    OrderExceeded { requested: usize, max: usize },
    #[error("evaluation at a singular point: {0}")]
    SingularPoint(String),
    #[error("mixed integrability without an applicable rule: {0}")]
    MixedIntegrability(String),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("unknown suite: {0}")]
    SuiteUnknown(String),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
}

pub type Result<T> = std::result::Result<T, Error>;
