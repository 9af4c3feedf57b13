//! Domains: weighted intervals, flat and hyperbolic cylinders, triangulated
//! surfaces, and the curvature formulas relating conformal metrics.

mod cylinder;
mod interval;
pub mod mesh;
pub mod mesh_io;
pub mod meshgen;
mod profile;

pub use cylinder::{
    angle_from_liouville, collar_zero_mode_coefficients, liouville_coordinate,
    standard_collar_width, standard_subcollar, standard_subcollar_of, CollarCylinder,
    FlatCylinder, HalfCollar, Subcollar, SubcollarKind,
};
pub use interval::WeightedInterval;
pub use mesh::MetricSurface;
pub use profile::{Profile, ScalarFn};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Small-time heat trace coefficients, `θ(t) ≈ c1/t + c2/√t + c3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceCoefficients<T: Real> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
}

impl<T: Real> TraceCoefficients<T> {
    /// `c1 = Area/4π`, `c2 = −L/(8√π)`, `c3 = (∫K + ∫k)/12π` for a smooth
    /// surface with smooth boundary. By Gauss–Bonnet `c3 = χ/6`.
    pub fn from_invariants(area: T, boundary_length: T, total_k: T, total_geodesic: T) -> Self {
        let pi = T::pi();
        Self {
            c1: area / (T::lit(4.0) * pi),
            c2: -boundary_length / (T::lit(8.0) * pi.sqrt()),
            c3: (total_k + total_geodesic) / (T::lit(12.0) * pi),
        }
    }

    /// Coefficients of a 1-D Dirichlet trace on an interval of weighted
    /// length `length`: `length/√(4πt) − 1/2`.
    pub fn interval(length: T) -> Self {
        Self {
            c1: T::zero(),
            c2: length / (T::lit(4.0) * T::pi()).sqrt(),
            c3: -T::half(),
        }
    }

    pub fn eval(&self, t: T) -> T {
        self.c1 / t + self.c2 / t.sqrt() + self.c3
    }
}

/// Quantities entering the small-time expansion.
pub trait TraceAsymptotics<T: Real> {
    fn trace_asymptotics(&self) -> TraceCoefficients<T>;
}

impl<T: Real> TraceAsymptotics<T> for CollarCylinder<T> {
    fn trace_asymptotics(&self) -> TraceCoefficients<T> {
        self.trace_coefficients()
    }
}

impl<T: Real> TraceAsymptotics<T> for FlatCylinder<T> {
    fn trace_asymptotics(&self) -> TraceCoefficients<T> {
        self.trace_coefficients()
    }
}

impl<T: Real> TraceAsymptotics<T> for WeightedInterval<T> {
    fn trace_asymptotics(&self) -> TraceCoefficients<T> {
        TraceCoefficients::interval(self.weighted_length())
    }
}
