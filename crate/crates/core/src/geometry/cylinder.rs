use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{Profile, TraceCoefficients};
use crate::scalar::Real;
use crate::special::integrate;

const SINGULAR_MARGIN: f64 = 1e-12;

fn check_angular_range<T: Real>(a: T, b: T) -> Result<()> {
    let pi = T::pi();
    let margin = T::lit(SINGULAR_MARGIN);
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(domain(format!("need A < B, got A = {:?}, B = {:?}", a, b)));
    }
    if a <= margin || b >= pi - margin {
        return Err(domain(format!(
            "angular interval [{:?}, {:?}] touches the singular set {{0, π}}",
            a, b
        )));
    }
    Ok(())
}

/// Hyperbolic cylinder `[0,l] × [A,B]`, `u` periodic, metric
/// `(du² + dv²)/sin² v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarCylinder<T: Real> {
    pub l: T,
    pub a: T,
    pub b: T,
}

impl<T: Real> CollarCylinder<T> {
    pub fn new(l: T, a: T, b: T) -> Result<Self> {
        if !(l > T::zero()) || !l.is_finite() {
            return Err(domain(format!("circumference must be positive, got {:?}", l)));
        }
        check_angular_range(a, b)?;
        Ok(Self { l, a, b })
    }

    /// `l (cot A − cot B)`.
    pub fn area(&self) -> T {
        self.l * (self.a.cot() - self.b.cot())
    }

    pub fn boundary_length(&self) -> T {
        self.l * (self.a.csc() + self.b.csc())
    }

    /// Geodesic curvature of the boundary circles `v = A` and `v = B`.
    pub fn boundary_curvatures(&self) -> (T, T) {
        (self.a.cos(), -self.b.cos())
    }

    pub fn total_gauss_curvature(&self) -> T {
        -self.area()
    }

    pub fn total_geodesic_curvature(&self) -> T {
        let (ka, kb) = self.boundary_curvatures();
        self.l * (ka * self.a.csc() + kb * self.b.csc())
    }

    /// Length of the Liouville coordinate `x = log tan(v/2)` across `[A, B]`.
    pub fn liouville_length(&self) -> T {
        liouville_coordinate(self.b) - liouville_coordinate(self.a)
    }

    /// The same cylinder seen as `e^{2ψ}(du² + dv²)` with `ψ = −log sin v`.
    pub fn as_flat_with_factor(&self) -> FlatCylinder<T> {
        FlatCylinder {
            l: self.l,
            a: self.a,
            b: self.b,
            psi: Some(Profile::neg_log_sin()),
        }
    }

    /// Mirror image under `v ↦ π − v`, an isometry of the collar metric.
    pub fn reflected(&self) -> Self {
        Self {
            l: self.l,
            a: T::pi() - self.b,
            b: T::pi() - self.a,
        }
    }

    pub fn trace_coefficients(&self) -> TraceCoefficients<T> {
        TraceCoefficients::from_invariants(
            self.area(),
            self.boundary_length(),
            self.total_gauss_curvature(),
            self.total_geodesic_curvature(),
        )
    }
}

/// `x = log tan(v/2)`; satisfies `dx = dv / sin v` and `cosh x = 1/sin v`.
pub fn liouville_coordinate<T: Real>(v: T) -> T {
    (v * T::half()).tan().ln()
}

/// Inverse of [`liouville_coordinate`].
pub fn angle_from_liouville<T: Real>(x: T) -> T {
    T::two() * x.exp().atan()
}

/// The half `0 ≤ u ≤ l/2` of a collar; four right-angle corners.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfCollar<T: Real> {
    pub base: CollarCylinder<T>,
}

impl<T: Real> HalfCollar<T> {
    pub fn new(l: T, a: T, b: T) -> Result<Self> {
        Ok(Self {
            base: CollarCylinder::new(l, a, b)?,
        })
    }

    pub fn area(&self) -> T {
        self.base.area() * T::half()
    }

    /// Two boundary arcs `v = A, B` of length `l/(2 sin v)` plus two
    /// geodesic sides `u = 0, l/2` of length `∫ dv / sin v`.
    pub fn perimeter(&self) -> T {
        self.base.boundary_length() * T::half() + T::two() * self.base.liouville_length()
    }

    /// Small-time coefficients forced by splitting the collar trace into its
    /// zero mode and two copies of the half collar. The corners contribute
    /// through the constant term only.
    pub fn identity_trace_coefficients(&self) -> TraceCoefficients<T> {
        let full = self.base.trace_coefficients();
        let zero_mode = collar_zero_mode_coefficients(&self.base);
        TraceCoefficients {
            c1: (full.c1 - zero_mode.c1) * T::half(),
            c2: (full.c2 - zero_mode.c2) * T::half(),
            c3: (full.c3 - zero_mode.c3) * T::half(),
        }
    }
}

/// Coefficients of the `m = 0` mode trace, `Tr e^{-t Δ_l(0)}` on `[A, B]`:
/// `(1/√(4πt)) ∫ dv/sin v − 1/2`. Written with the 2-D layout, so `c1 = 0`.
pub fn collar_zero_mode_coefficients<T: Real>(c: &CollarCylinder<T>) -> TraceCoefficients<T> {
    TraceCoefficients {
        c1: T::zero(),
        c2: c.liouville_length() / (T::lit(4.0) * T::pi()).sqrt(),
        c3: -T::half(),
    }
}

/// Flat cylinder `[0,l] × [A,B]` with optional conformal factor `ψ(v)`, metric
/// `e^{2ψ(v)} (du² + dv²)`.
#[derive(Clone, Debug)]
pub struct FlatCylinder<T: Real> {
    pub l: T,
    pub a: T,
    pub b: T,
    pub psi: Option<Profile<T>>,
}

impl<T: Real> FlatCylinder<T> {
    pub fn new(l: T, a: T, b: T) -> Result<Self> {
        if !(l > T::zero()) || !(a < b) || !l.is_finite() || !a.is_finite() || !b.is_finite() {
            return Err(domain("flat cylinder needs l > 0 and A < B"));
        }
        Ok(Self { l, a, b, psi: None })
    }

    pub fn with_factor(mut self, psi: Profile<T>) -> Result<Self> {
        for i in 0..=32 {
            let v = self.a + (self.b - self.a) * T::of(i) / T::lit(32.0);
            if !psi.value(v).is_finite() {
                return Err(domain(format!("conformal factor not finite at v = {:?}", v)));
            }
        }
        self.psi = Some(psi);
        Ok(self)
    }

    pub fn height_length(&self) -> T {
        self.b - self.a
    }

    /// Scales the flat metric by `λ²` (no conformal factor allowed).
    pub fn scaled(&self, lambda: T) -> Result<Self> {
        if self.psi.is_some() {
            return Err(domain("scaling is defined here for the bare flat cylinder"));
        }
        Self::new(self.l * lambda, self.a * lambda, self.b * lambda)
    }

    fn psi(&self) -> Profile<T> {
        self.psi.clone().unwrap_or_else(Profile::zero)
    }

    /// Metric density `e^{2ψ(v)}`.
    pub fn metric_factor(&self, v: T) -> T {
        (T::two() * self.psi().value(v)).exp()
    }

    /// `K = e^{-2ψ}(Δ₀ψ + K₀)` with `K₀ = 0` and `Δ₀ψ = −ψ''`.
    pub fn gauss_curvature(&self, v: T) -> T {
        let psi = self.psi();
        (-T::two() * psi.value(v)).exp() * (-psi.second_derivative(v))
    }

    /// `k = e^{-ψ}(k₀ + ∂ₙψ)` on the circles `v = A` (outer normal `−∂_v`)
    /// and `v = B` (outer normal `+∂_v`).
    pub fn boundary_curvatures(&self) -> (T, T) {
        let psi = self.psi();
        let ka = (-psi.value(self.a)).exp() * (-psi.derivative(self.a));
        let kb = (-psi.value(self.b)).exp() * psi.derivative(self.b);
        (ka, kb)
    }

    /// Outer normal derivatives `∂ₙψ` at `v = A` and `v = B` (flat metric).
    pub fn normal_derivatives(&self) -> (T, T) {
        let psi = self.psi();
        (-psi.derivative(self.a), psi.derivative(self.b))
    }

    pub fn area(&self) -> T {
        let psi = self.psi();
        self.l * integrate(|v| (T::two() * psi.value(v)).exp(), self.a, self.b, 64, 12)
    }

    pub fn boundary_length(&self) -> T {
        let psi = self.psi();
        self.l * (psi.value(self.a).exp() + psi.value(self.b).exp())
    }

    pub fn total_gauss_curvature(&self) -> T {
        let psi = self.psi();
        -self.l * (psi.derivative(self.b) - psi.derivative(self.a))
    }

    pub fn total_geodesic_curvature(&self) -> T {
        let (na, nb) = self.normal_derivatives();
        self.l * (na + nb)
    }

    pub fn trace_coefficients(&self) -> TraceCoefficients<T> {
        TraceCoefficients::from_invariants(
            self.area(),
            self.boundary_length(),
            self.total_gauss_curvature(),
            self.total_geodesic_curvature(),
        )
    }
}

/// Half-width `sinh⁻¹(1/sinh(l/2))` of the standard collar about a closed
/// geodesic of length `l`.
pub fn standard_collar_width<T: Real>(l: T) -> Result<T> {
    if !(l > T::zero()) || !l.is_finite() {
        return Err(domain(format!("geodesic length must be positive, got {:?}", l)));
    }
    Ok((T::one() / (l * T::half()).sinh()).asinh())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubcollarKind {
    /// Geodesic disjoint from the boundary: `C^{l,[2l, π−2l]}`.
    TypeI,
    /// Geodesic lying in the boundary: `C^{l,[2l, π/2]}`.
    TypeII,
    /// Geodesic crossing the boundary: half of `C^{l,[2l, π−2l]}`.
    TypeIII,
}

impl SubcollarKind {
    pub fn label(&self) -> &'static str {
        match self {
            SubcollarKind::TypeI => "SC_I",
            SubcollarKind::TypeII => "SC_II",
            SubcollarKind::TypeIII => "SC_III",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "SC_I" | "I" | "1" => Some(Self::TypeI),
            "SC_II" | "II" | "2" => Some(Self::TypeII),
            "SC_III" | "III" | "3" => Some(Self::TypeIII),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Subcollar<T: Real> {
    Cylinder(CollarCylinder<T>),
    Half(HalfCollar<T>),
}

/// The standard subcollar `{2l ≤ v ≤ π − 2l}` of a geodesic of length `l`.
pub fn standard_subcollar<T: Real>(l: T) -> Result<CollarCylinder<T>> {
    if !(l > T::zero()) || l >= T::pi() * T::lit(0.25) {
        return Err(domain(format!("standard subcollar needs 0 < l < π/4, got {:?}", l)));
    }
    CollarCylinder::new(l, T::two() * l, T::pi() - T::two() * l)
}

pub fn standard_subcollar_of<T: Real>(kind: SubcollarKind, l: T) -> Result<Subcollar<T>> {
    let full = standard_subcollar(l)?;
    Ok(match kind {
        SubcollarKind::TypeI => Subcollar::Cylinder(full),
        SubcollarKind::TypeII => {
            Subcollar::Cylinder(CollarCylinder::new(l, full.a, T::pi() * T::half())?)
        }
        SubcollarKind::TypeIII => Subcollar::Half(HalfCollar { base: full }),
    })
}
