use thiserror::Error;

use crate::quat::QuatError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension n = {0} is too small, need n >= 2")]
    DimensionTooSmall(usize),
    #[error("the zero vector has no projection")]
    ZeroVector,
    #[error("positive vector: its projection lies outside the closure of the space")]
    PositiveVector,
    #[error("projection is undefined: last coordinate vanishes but the middle ones do not")]
    IllDefinedProjection,
    #[error("expected a boundary point")]
    NotBoundary,
    #[error("expected an interior point")]
    NotInterior,
    #[error("point lies outside the closure of the space")]
    ExteriorPoint,
    #[error("points must be pairwise distinct")]
    CoincidentPoints,
    #[error("Hermitian product vanishes")]
    ZeroInnerProduct,
    #[error("matrix does not preserve the Hermitian form")]
    NotIsometry,
    #[error("point does not lie on the geodesic")]
    NotOnGeodesic,
    #[error("not in the moduli space: {0}")]
    NotInModuliSpace(String),
    #[error("expected {expected} points, found {found}")]
    WrongPointCount { expected: usize, found: usize },
    #[error(transparent)]
    Quat(#[from] QuatError),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
