//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Vertex list does not describe a simple polygon with distinct vertices.
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    /// A vertex coincides with the barycenter, so its radial coordinate is ill-defined.
    #[error("degenerate radius: {0}")]
    DegenerateRadius(String),
    /// The operation is only defined for a restricted input class.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// The three window vertices of a symmetrization step are collinear.
    #[error("degenerate symmetrization window: {0}")]
    DegenerateTriangle(String),
    /// A symmetrization step would break simplicity or convexity.
    #[error("symmetrization step rejected: {0}")]
    StepRejected(String),
    /// A scalar argument lies outside the admissible range.
    #[error("domain error: {0}")]
    DomainError(String),
    /// The input shape has collapsed below meaningful resolution.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Sparse factorization or linear solve failed.
    #[error("solver error: {0}")]
    SolverError(String),
    /// An iteration hit its budget before reaching the requested tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// A boundary segment does not match any edge of the mesh boundary.
    #[error("frame mismatch: {0}")]
    FrameMismatch(String),
    /// The bubble energy has no stationary scale for these parameters.
    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),
    /// Mesh resolution cannot certify the requested accuracy on this input.
    #[error("accuracy warning: {0}")]
    AccuracyWarning(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
