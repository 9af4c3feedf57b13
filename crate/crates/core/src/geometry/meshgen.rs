//! Mesh generators for the test geometries.

use std::collections::HashMap;

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::error::{domain, Error, Result};
use crate::geometry::{MetricSurface, Profile};
use crate::scalar::Real;

/// A planar pair of pants: the unit disk minus two disks of radius `r`
/// centred at `(±c, 0)`, triangulated by constrained Delaunay triangulation
/// of a triangular lattice with spacing `h` plus boundary samples.
#[derive(Clone, Copy, Debug)]
pub struct PantsSpec {
    pub hole_radius: f64,
    pub hole_offset: f64,
    pub spacing: f64,
}

impl PantsSpec {
    /// Spacing chosen so the mesh has roughly `vertices` vertices.
    pub fn with_vertex_target(vertices: usize) -> Self {
        let (r, c) = (0.2, 0.45);
        let area = std::f64::consts::PI * (1.0 - 2.0 * r * r);
        let h = (2.0 * area / (3f64.sqrt() * vertices as f64)).sqrt();
        Self {
            hole_radius: r,
            hole_offset: c,
            spacing: h,
        }
    }
}

pub fn pants<T: Real>(spec: PantsSpec) -> Result<MetricSurface<T>> {
    let PantsSpec {
        hole_radius: r,
        hole_offset: c,
        spacing: h,
    } = spec;
    if !(h > 0.0) || !(r > 0.0) || c + r >= 1.0 || c - r <= 0.0 {
        return Err(domain("pants holes must be disjoint and inside the unit disk"));
    }
    use std::f64::consts::TAU;
    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut loops = Vec::new();
    let circle = |cx: f64, cy: f64, rad: f64, ccw: bool, points: &mut Vec<[f64; 2]>| {
        let n = ((TAU * rad / h).round() as usize).max(8);
        let start = points.len();
        for k in 0..n {
            let a = TAU * k as f64 / n as f64;
            let a = if ccw { a } else { -a };
            points.push([cx + rad * a.cos(), cy + rad * a.sin()]);
        }
        (start..start + n).collect::<Vec<_>>()
    };
    loops.push(circle(0.0, 0.0, 1.0, true, &mut points));
    loops.push(circle(-c, 0.0, r, false, &mut points));
    loops.push(circle(c, 0.0, r, false, &mut points));

    let clearance = 0.6 * h;
    let dy = h * 3f64.sqrt() / 2.0;
    let rows = (1.0 / dy).ceil() as i64 + 1;
    let cols = (1.0 / h).ceil() as i64 + 1;
    for j in -rows..=rows {
        let y = j as f64 * dy;
        let shift = if j.rem_euclid(2) == 1 { 0.5 * h } else { 0.0 };
        for i in -cols..=cols {
            let x = i as f64 * h + shift;
            let rho = (x * x + y * y).sqrt();
            let d1 = ((x + c).powi(2) + y * y).sqrt();
            let d2 = ((x - c).powi(2) + y * y).sqrt();
            if rho < 1.0 - clearance && d1 > r + clearance && d2 > r + clearance {
                points.push([x, y]);
            }
        }
    }
    let mut constraints = Vec::new();
    for lp in &loops {
        for k in 0..lp.len() {
            constraints.push([lp[k], lp[(k + 1) % lp.len()]]);
        }
    }
    let cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(
        points.iter().map(|p| Point2::new(p[0], p[1])).collect(),
        constraints,
    )
    .map_err(|e| Error::Mesh(format!("triangulation failed: {:?}", e)))?;
    if cdt.num_vertices() != points.len() {
        return Err(Error::Mesh("triangulation merged input points".into()));
    }
    let hole_of = |v: usize| -> Option<usize> {
        if v >= loops[1][0] && v < loops[2][0] {
            Some(1)
        } else if v >= loops[2][0] && v <= *loops[2].last().unwrap() {
            Some(2)
        } else {
            None
        }
    };
    let mut triangles = Vec::new();
    for f in cdt.inner_faces() {
        let vs = f.vertices().map(|v| v.fix().index());
        if let (Some(a), Some(b), Some(cc)) = (hole_of(vs[0]), hole_of(vs[1]), hole_of(vs[2])) {
            if a == b && b == cc {
                let centre = if a == 1 { -c } else { c };
                let gx = (points[vs[0]][0] + points[vs[1]][0] + points[vs[2]][0]) / 3.0 - centre;
                let gy = (points[vs[0]][1] + points[vs[1]][1] + points[vs[2]][1]) / 3.0;
                if (gx * gx + gy * gy).sqrt() < r {
                    continue;
                }
            }
        }
        triangles.push(vs);
    }
    let vertices = points
        .iter()
        .map(|p| [T::lit(p[0]), T::lit(p[1]), T::zero()])
        .collect();
    MetricSurface::from_coordinates(vertices, triangles, Some(loops))
}

/// Planar annulus `r0 ≤ |x| ≤ 1` on a polar grid with geometrically graded
/// rings, so every cell is close to square. All quads are split the same
/// way, making the mesh invariant under rotation by `2π/n_theta`.
pub fn annulus<T: Real>(inner_radius: f64, n_theta: usize, n_radial: usize) -> Result<MetricSurface<T>> {
    if !(inner_radius > 0.0 && inner_radius < 1.0) || n_theta < 3 || n_radial < 1 {
        return Err(domain("annulus needs 0 < r0 < 1, n_theta ≥ 3, n_radial ≥ 1"));
    }
    use std::f64::consts::TAU;
    let mut vertices = Vec::new();
    for k in 0..=n_radial {
        let rho = inner_radius * (1.0 / inner_radius).powf(k as f64 / n_radial as f64);
        for j in 0..n_theta {
            let a = TAU * j as f64 / n_theta as f64;
            vertices.push([T::lit(rho * a.cos()), T::lit(rho * a.sin()), T::zero()]);
        }
    }
    let id = |k: usize, j: usize| k * n_theta + (j % n_theta);
    let mut triangles = Vec::new();
    for k in 0..n_radial {
        for j in 0..n_theta {
            triangles.push([id(k, j), id(k, j + 1), id(k + 1, j + 1)]);
            triangles.push([id(k, j), id(k + 1, j + 1), id(k + 1, j)]);
        }
    }
    let inner: Vec<usize> = (0..n_theta).rev().map(|j| id(0, j)).collect();
    let outer: Vec<usize> = (0..n_theta).map(|j| id(n_radial, j)).collect();
    MetricSurface::from_coordinates(vertices, triangles, Some(vec![outer, inner]))
}

/// Periodic grid on `[0, l) × [A, B]` carrying the metric
/// `e^{2ψ(v)}(du² + dv²)`: flat edge lengths, log scale `ψ(v)` at each vertex.
///
/// Coordinates embed the grid as a round cylinder in space (for output only;
/// the metric is intrinsic).
pub fn periodic_cylinder<T: Real>(
    l: T,
    a: T,
    b: T,
    psi: &Profile<T>,
    n_u: usize,
    n_v: usize,
) -> Result<MetricSurface<T>> {
    if n_u < 3 || n_v < 1 || !(l > T::zero()) || !(a < b) {
        return Err(domain("periodic cylinder needs n_u ≥ 3, n_v ≥ 1, l > 0, A < B"));
    }
    let du = l / T::of(n_u);
    let dv = (b - a) / T::of(n_v);
    let diag = (du * du + dv * dv).sqrt();
    let radius = l / T::two_pi();
    let id = |k: usize, j: usize| k * n_u + (j % n_u);
    let mut vertices = Vec::with_capacity(n_u * (n_v + 1));
    let mut scale = Vec::with_capacity(n_u * (n_v + 1));
    for k in 0..=n_v {
        let v = a + dv * T::of(k);
        let value = psi.value(v);
        if !value.is_finite() {
            return Err(domain(format!("conformal factor not finite at v = {:?}", v)));
        }
        for j in 0..n_u {
            let ang = T::two_pi() * T::of(j) / T::of(n_u);
            vertices.push([radius * ang.cos(), radius * ang.sin(), v]);
            scale.push(value);
        }
    }
    let mut triangles = Vec::new();
    let mut lengths = HashMap::new();
    for k in 0..n_v {
        for j in 0..n_u {
            let (p, q, r, s) = (id(k, j), id(k, j + 1), id(k + 1, j + 1), id(k + 1, j));
            triangles.push([p, q, r]);
            triangles.push([p, r, s]);
            lengths.insert((p.min(q), p.max(q)), du);
            lengths.insert((s.min(r), s.max(r)), du);
            lengths.insert((p.min(s), p.max(s)), dv);
            lengths.insert((q.min(r), q.max(r)), dv);
            lengths.insert((p.min(r), p.max(r)), diag);
        }
    }
    let bottom: Vec<usize> = (0..n_u).rev().map(|j| id(0, j)).collect();
    let top: Vec<usize> = (0..n_u).map(|j| id(n_v, j)).collect();
    let surface = MetricSurface::with_edge_lengths(vertices, triangles, Some(vec![bottom, top]), &lengths)?;
    surface.with_log_scale(&scale)
}

/// `v` coordinate of each vertex of a [`periodic_cylinder`] mesh.
pub fn periodic_cylinder_heights<T: Real>(a: T, b: T, n_u: usize, n_v: usize) -> Vec<T> {
    let dv = (b - a) / T::of(n_v);
    (0..=n_v)
        .flat_map(|k| std::iter::repeat_n(a + dv * T::of(k), n_u))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pants_topology() {
        let s: MetricSurface<f64> = pants(PantsSpec::with_vertex_target(600)).unwrap();
        assert_eq!(s.euler_characteristic(), -1);
        assert_eq!(s.boundary_component_count(), 3);
        assert_eq!(s.genus(), Some(0));
        let n = s.vertex_count();
        assert!(n > 400 && n < 900, "{} vertices", n);
        let expected = std::f64::consts::PI * (1.0 - 2.0 * 0.04);
        assert!((s.area() - expected).abs() < 0.02 * expected);
        assert!(s.gauss_bonnet_defect().abs() < 1e-10);
        // planar mesh: zero angle defect inside
        let omega = s.base_curvature_measure();
        for v in s.interior_vertices() {
            assert!(omega[v].abs() < 1e-10);
        }
    }

    #[test]
    fn annulus_topology() {
        let s: MetricSurface<f64> = annulus(0.2, 32, 8).unwrap();
        assert_eq!(s.euler_characteristic(), 0);
        assert_eq!(s.boundary_component_count(), 2);
        assert!(s.gauss_bonnet_defect().abs() < 1e-10);
    }

    #[test]
    fn cylinder_mesh_is_intrinsically_flat() {
        let s: MetricSurface<f64> =
            periodic_cylinder(0.5, 1.0, 2.0, &Profile::zero(), 12, 6).unwrap();
        assert_eq!(s.euler_characteristic(), 0);
        assert!((s.area() - 0.5).abs() < 1e-14);
        assert!((s.boundary_length() - 1.0).abs() < 1e-14);
        assert!(s.base_curvature_measure().iter().all(|o| o.abs() < 1e-12));
    }

    #[test]
    fn collar_mesh_curvature_near_minus_one() {
        let (l, a, b) = (0.5f64, 1.0, std::f64::consts::PI - 1.0);
        let s = periodic_cylinder(l, a, b, &Profile::neg_log_sin(), 24, 48).unwrap();
        let k = s.curvature();
        for v in s.interior_vertices() {
            assert!((k.gauss[v] + 1.0).abs() < 2e-3, "K = {}", k.gauss[v]);
        }
        assert!(s.gauss_bonnet_defect().abs() < 1e-10);
    }
}
