//! Zeta-regularized determinants ("heights") of Dirichlet Laplacians on
//! bordered surfaces, and the discrete uniformization maps between
//! constant-curvature and flat representatives of a conformal class.
//!
//! All numerical code is generic over [`Real`]; the aliases at the crate
//! root fix the scalar to `f64`, which is what the accuracy targets assume.

pub mod collar_heights;
pub mod error;
pub mod geometry;
pub mod scalar;
pub mod special;
pub mod spectral_zeta;
pub mod sturm_liouville;
pub mod uniformization;
pub mod verify;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use scalar::Real;

pub type WeightedInterval = geometry::WeightedInterval<f64>;
pub type CollarCylinder = geometry::CollarCylinder<f64>;
pub type HalfCollar = geometry::HalfCollar<f64>;
pub type FlatCylinder = geometry::FlatCylinder<f64>;
pub type Profile = geometry::Profile<f64>;
pub type TraceCoefficients = geometry::TraceCoefficients<f64>;
pub type MetricSurface = geometry::MetricSurface<f64>;
