//! Linear pre-normalizations: a conformal change that straightens the
//! boundary, and one that flattens a constant-curvature metric.

use crate::error::{Error, Result};
use crate::geometry::MetricSurface;
use crate::scalar::Real;
use crate::uniformization::laplace::{uniformity, DiscreteLaplace};

/// Conformal change `φ₀` (mass-weighted mean zero) with `S φ₀ = f`,
/// `f_b = −κ_b` on the boundary and the total `Σ κ` spread over the interior
/// by area. The new boundary is geodesic up to the change of the boundary
/// Gaussian curvature; the `F1` step then makes it exactly geodesic.
pub fn normalize_geodesic_boundary<T: Real>(sigma: &MetricSurface<T>) -> Result<(MetricSurface<T>, Vec<T>)> {
    let interior = sigma.interior_vertices();
    if interior.is_empty() {
        return Err(Error::Precondition("mesh has no interior vertices".into()));
    }
    let lap = DiscreteLaplace::new(sigma);
    let curv = sigma.curvature();
    let arcs = sigma.boundary_weights();
    let mut f = vec![T::zero(); sigma.vertex_count()];
    let mut total = T::zero();
    for &(v, k) in &curv.geodesic {
        f[v] = -k * arcs[v];
        total += k * arcs[v];
    }
    let interior_area = interior.iter().fold(T::zero(), |s, &v| s + lap.mass[v]);
    for &v in &interior {
        f[v] = total * lap.mass[v] / interior_area;
    }
    let phi = lap.solve_neumann(&f)?;
    Ok((sigma.conformal(&phi)?, phi))
}

/// Conformal change `φ₀` (mass-weighted mean zero) that makes a metric of
/// constant curvature `K < 0` flat. See [`flatten`].
pub fn normalize_flat<T: Real>(tau: &MetricSurface<T>, tolerance: f64) -> Result<(MetricSurface<T>, Vec<T>)> {
    let u = uniformity(tau);
    if !(u.gauss_mean < 0.0) || u.gauss_spread > tolerance * u.gauss_mean.abs() {
        return Err(Error::Precondition(format!(
            "flattening needs constant negative curvature (mean {:.3e}, spread {:.3e})",
            u.gauss_mean, u.gauss_spread
        )));
    }
    flatten(tau)
}

/// Conformal change `φ₀` (mass-weighted mean zero) with `S φ₀ = −Ω` at
/// interior vertices and, at boundary vertices, `−K a_b` plus the total
/// curvature spread by arc length: the discrete `Δφ₀ = −K` with constant
/// Neumann data. The result is exactly flat (interior angle defects vanish).
pub fn flatten<T: Real>(s: &MetricSurface<T>) -> Result<(MetricSurface<T>, Vec<T>)> {
    let lap = DiscreteLaplace::new(s);
    let omega = s.curvature_measure();
    let curv = s.curvature();
    let length = lap.boundary_mass.iter().fold(T::zero(), |a, b| a + *b);
    let f: Vec<T> = (0..s.vertex_count())
        .map(|v| {
            if s.is_boundary(v) {
                -curv.gauss[v] * lap.mass[v] + curv.total_gauss * lap.boundary_mass[v] / length
            } else {
                -omega[v]
            }
        })
        .collect();
    let phi = lap.solve_neumann(&f)?;
    Ok((s.conformal(&phi)?, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::meshgen::{pants, PantsSpec};

    #[test]
    fn geodesic_normalization_reduces_boundary_curvature() {
        let s: MetricSurface<f64> = pants(PantsSpec::with_vertex_target(500)).unwrap();
        let before = uniformity(&s).max_abs_geodesic;
        let (g, phi) = normalize_geodesic_boundary(&s).unwrap();
        let after = uniformity(&g).max_abs_geodesic;
        assert!(after < 0.2 * before, "{before} -> {after}");
        let mean: f64 = phi.iter().zip(s.vertex_areas()).map(|(p, a)| p * a).sum();
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn flat_input_is_rejected() {
        let s: MetricSurface<f64> = pants(PantsSpec::with_vertex_target(300)).unwrap();
        assert!(matches!(normalize_flat(&s, 1e-6), Err(Error::Precondition(_))));
    }
}
