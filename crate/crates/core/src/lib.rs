//! Spectral geometry of polygons: first Dirichlet eigenvalues by finite
//! elements, a partial Steiner symmetrization flow with exact area bookkeeping,
//! closed-form eigenvalue shape derivatives along the flow, and the deficit,
//! stability, and bubble-energy computations built on top of them.

pub mod bubble;
pub mod error;
pub mod geometry;
pub mod fem;
pub mod manifold;
pub mod io;
pub mod shape_derivatives;
pub mod spectra;
pub mod stability;
pub mod symmetrize;

pub use error::{Error, Result};
pub use geometry::{ManifoldPoint, Point, Polygon};
