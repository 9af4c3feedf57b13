//! The Polyakov–Alvarez formula for the change of height under a conformal
//! change of metric `σ = e^{2ψ} σ₀`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{FlatCylinder, MetricSurface};
use crate::scalar::Real;
use crate::special::integrate_adaptive;

/// The four integrals of the formula, all with respect to `σ₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyakovAlvarezTerms<T: Real> {
    /// `½ ∫ |∇₀ψ|² dA₀`.
    pub dirichlet: T,
    /// `∫ K₀ ψ dA₀`.
    pub gauss: T,
    /// `∫ k₀ ψ ds₀`.
    pub geodesic: T,
    /// `∫ ∂ₙψ ds₀` (outer normal).
    pub normal: T,
}

impl<T: Real> PolyakovAlvarezTerms<T> {
    /// `h(e^{2ψ}σ₀) − h(σ₀) = (1/6π)(½∫|∇ψ|² + ∫K₀ψ + ∫k₀ψ) + (1/4π)∫∂ₙψ`.
    pub fn shift(&self) -> T {
        let pi = T::pi();
        (self.dirichlet + self.gauss + self.geodesic) / (T::lit(6.0) * pi) + self.normal / (T::lit(4.0) * pi)
    }
}

/// `h(e^{2ψ}σ₀)` from `h(σ₀)`.
pub fn polyakov_alvarez_shift<T: Real>(terms: &PolyakovAlvarezTerms<T>, h0: T) -> T {
    h0 + terms.shift()
}

/// Terms for `ψ(v)` on the flat cylinder `[0,l] × [A,B]` (`K₀ = k₀ = 0`),
/// by adaptive quadrature of `l ∫ ψ′² dv / 2`.
pub fn cylinder_polyakov_terms<T: Real>(c: &FlatCylinder<T>) -> Result<PolyakovAlvarezTerms<T>> {
    let psi = c
        .psi
        .clone()
        .ok_or_else(|| domain("cylinder carries no conformal factor"))?;
    let energy = integrate_adaptive(
        |v| {
            let d = psi.derivative(v);
            d * d
        },
        c.a,
        c.b,
        T::lit(1e-14),
    );
    Ok(PolyakovAlvarezTerms {
        dirichlet: c.l * energy * T::half(),
        gauss: T::zero(),
        geodesic: T::zero(),
        normal: c.l * (psi.derivative(c.b) - psi.derivative(c.a)),
    })
}

/// Discrete terms on a triangulated surface: cotangent Dirichlet energy,
/// lumped `K₀ dA₀` and `k₀ ds₀` measures. The normal-derivative integral is
/// taken as the change of total geodesic curvature, `∫k ds − ∫k₀ ds₀`, which
/// is what Gauss–Bonnet gives for `∫∂ₙψ ds₀ + ∫Δ₀ψ dA₀` applied to the
/// discrete curvature; with it, constant factors obey the scaling law exactly.
pub fn mesh_polyakov_terms<T: Real>(base: &MetricSurface<T>, psi: &[T]) -> Result<PolyakovAlvarezTerms<T>> {
    if psi.len() != base.vertex_count() {
        return Err(domain("conformal factor must have one value per vertex"));
    }
    let s_psi = base.apply_stiffness(psi);
    let dirichlet = psi.iter().zip(&s_psi).fold(T::zero(), |a, (p, q)| a + *p * *q) * T::half();
    let curv = base.curvature();
    let areas = base.vertex_areas();
    let arcs = base.boundary_weights();
    let gauss = curv
        .gauss
        .iter()
        .zip(&areas)
        .zip(psi)
        .fold(T::zero(), |a, ((k, w), p)| a + *k * *w * *p);
    let geodesic = curv
        .geodesic
        .iter()
        .fold(T::zero(), |a, &(v, k)| a + k * arcs[v] * psi[v]);
    let normal = base.conformal(psi)?.curvature().total_geodesic - curv.total_geodesic;
    Ok(PolyakovAlvarezTerms {
        dirichlet,
        gauss,
        geodesic,
        normal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Profile;
    use std::f64::consts::PI;

    #[test]
    fn constant_factor_gives_scaling_law() {
        // χ = 0 on the cylinder: constant ψ changes nothing
        let c = FlatCylinder::new(0.7f64, 0.1, 1.3)
            .unwrap()
            .with_factor(Profile::constant(2f64.ln()))
            .unwrap();
        let t = cylinder_polyakov_terms(&c).unwrap();
        assert_eq!(polyakov_alvarez_shift(&t, 0.25), 0.25);
    }

    #[test]
    fn collar_terms_closed_form() {
        let (l, a, b) = (0.5f64, 1.0, PI - 1.0);
        let c = FlatCylinder::new(l, a, b).unwrap().with_factor(Profile::neg_log_sin()).unwrap();
        let t = cylinder_polyakov_terms(&c).unwrap();
        let cot = |x: f64| x.cos() / x.sin();
        assert!((t.dirichlet - 0.5 * l * (cot(a) - cot(b) - (b - a))).abs() < 1e-13);
        assert!((t.normal - l * (cot(a) - cot(b))).abs() < 1e-13);
    }
}
