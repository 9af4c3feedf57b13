use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Triangulated surface with boundary.
///
/// The metric is `e^{2u} σ_ℓ`, where `σ_ℓ` is the piecewise-flat metric given
/// by the edge lengths `ℓ` and `u` is a per-vertex log scale factor. The
/// curvature measure transforms linearly under `u`:
/// `Ω′ = Ω + S u`, where `Ω` is the angle defect of `σ_ℓ` (interior) or
/// `π` minus the angle sum (boundary) and `S` is the cotangent stiffness.
/// Vertex areas scale as `e^{2u}` and boundary arc weights as `e^{u}`.
#[derive(Clone, Debug)]
pub struct MetricSurface<T: Real> {
    vertices: Vec<[T; 3]>,
    triangles: Vec<[usize; 3]>,
    boundary_loops: Vec<Vec<usize>>,
    edges: Vec<[usize; 2]>,
    edge_index: HashMap<(usize, usize), usize>,
    lengths: Vec<T>,
    log_scale: Vec<T>,
    tri_edges: Vec<[usize; 3]>,
    on_boundary: Vec<bool>,
    neighbours: Vec<Vec<usize>>,
    cot_weights: Vec<T>,
    base_angle_sums: Vec<T>,
    base_vertex_areas: Vec<T>,
    base_boundary_weights: Vec<T>,
}

/// Vertexwise curvature of a [`MetricSurface`].
#[derive(Clone, Debug)]
pub struct DiscreteCurvature<T: Real> {
    /// Gaussian curvature per vertex. Interior vertices carry
    /// `Ω′_i / a′_i`; boundary vertices carry the mean over their interior
    /// neighbours (zero when there are none).
    pub gauss: Vec<T>,
    /// Geodesic curvature per boundary vertex,
    /// `(Ω′_b − K_b a′_b) / b′_b`, in boundary-vertex order.
    pub geodesic: Vec<(usize, T)>,
    /// Integrated Gaussian curvature `Σ K_i a′_i`.
    pub total_gauss: T,
    /// Integrated geodesic curvature `Σ k_b b′_b`.
    pub total_geodesic: T,
}

fn edge_key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

fn mesh_err(msg: impl Into<String>) -> Error {
    Error::Mesh(msg.into())
}

impl<T: Real> MetricSurface<T> {
    /// Builds a surface whose edge lengths are induced by vertex coordinates.
    pub fn from_coordinates(
        vertices: Vec<[T; 3]>,
        triangles: Vec<[usize; 3]>,
        boundary_loops: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let lengths = |i: usize, j: usize| {
            let (p, q) = (vertices[i], vertices[j]);
            let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        };
        let mut supplied = HashMap::new();
        for t in &triangles {
            for k in 0..3 {
                let (i, j) = (t[k], t[(k + 1) % 3]);
                if i >= vertices.len() || j >= vertices.len() {
                    return Err(mesh_err(format!("triangle references vertex {} out of range", i.max(j))));
                }
                supplied.insert(edge_key(i, j), lengths(i, j));
            }
        }
        Self::with_edge_lengths(vertices, triangles, boundary_loops, &supplied)
    }

    /// Builds a surface with intrinsic edge lengths. Every edge of every
    /// triangle must appear in `lengths` (keyed by either vertex order).
    pub fn with_edge_lengths(
        vertices: Vec<[T; 3]>,
        triangles: Vec<[usize; 3]>,
        boundary_loops: Option<Vec<Vec<usize>>>,
        lengths: &HashMap<(usize, usize), T>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(mesh_err("mesh has no triangles"));
        }
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_lengths = Vec::new();
        let mut edge_faces: Vec<usize> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (ti, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(mesh_err(format!("triangle {} references a missing vertex", ti)));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(mesh_err(format!("triangle {} is degenerate", ti)));
            }
            let mut te = [0usize; 3];
            for k in 0..3 {
                let (i, j) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                let key = edge_key(i, j);
                let e = match edge_index.get(&key) {
                    Some(&e) => e,
                    None => {
                        let len = lengths
                            .get(&key)
                            .or_else(|| lengths.get(&(key.1, key.0)))
                            .copied()
                            .ok_or_else(|| mesh_err(format!("no length for edge ({}, {})", key.0, key.1)))?;
                        if !(len > T::zero()) || !len.is_finite() {
                            return Err(mesh_err(format!("edge ({}, {}) has nonpositive length", key.0, key.1)));
                        }
                        edges.push([key.0, key.1]);
                        edge_lengths.push(len);
                        edge_faces.push(0);
                        edge_index.insert(key, edges.len() - 1);
                        edges.len() - 1
                    }
                };
                edge_faces[e] += 1;
                te[k] = e;
            }
            tri_edges.push(te);
        }
        if let Some(e) = edge_faces.iter().position(|&c| c > 2) {
            return Err(mesh_err(format!(
                "edge ({}, {}) has more than two incident triangles",
                edges[e][0], edges[e][1]
            )));
        }
        let mut on_boundary = vec![false; nv];
        let mut boundary_adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for (e, &c) in edge_faces.iter().enumerate() {
            if c == 1 {
                let [i, j] = edges[e];
                on_boundary[i] = true;
                on_boundary[j] = true;
                boundary_adj.entry(i).or_default().push(j);
                boundary_adj.entry(j).or_default().push(i);
            }
        }
        for (v, adj) in &boundary_adj {
            if adj.len() != 2 {
                return Err(mesh_err(format!("boundary is not a manifold at vertex {}", v)));
            }
        }
        let loops = match boundary_loops {
            Some(loops) => {
                let mut seen = 0usize;
                for lp in &loops {
                    if lp.len() < 3 {
                        return Err(mesh_err("boundary loop with fewer than three vertices"));
                    }
                    for k in 0..lp.len() {
                        let (i, j) = (lp[k], lp[(k + 1) % lp.len()]);
                        let ok = edge_index
                            .get(&edge_key(i, j))
                            .map(|&e| edge_faces[e] == 1)
                            .unwrap_or(false);
                        if !ok {
                            return Err(mesh_err(format!("loop edge ({}, {}) is not a boundary edge", i, j)));
                        }
                        seen += 1;
                    }
                }
                let n_boundary_edges = edge_faces.iter().filter(|&&c| c == 1).count();
                if seen != n_boundary_edges {
                    return Err(mesh_err(format!(
                        "loops cover {} boundary edges, mesh has {}",
                        seen, n_boundary_edges
                    )));
                }
                loops
            }
            None => trace_loops(&boundary_adj),
        };

        let mut neighbours = vec![Vec::new(); nv];
        for &[i, j] in &edges {
            neighbours[i].push(j);
            neighbours[j].push(i);
        }
        for (v, nb) in neighbours.iter_mut().enumerate() {
            if nb.is_empty() {
                return Err(mesh_err(format!("vertex {} is isolated", v)));
            }
            nb.sort_unstable();
        }
        check_vertex_links(nv, &triangles)?;

        let mut surface = Self {
            vertices,
            triangles,
            boundary_loops: loops,
            edges,
            edge_index,
            lengths: edge_lengths,
            log_scale: vec![T::zero(); nv],
            tri_edges,
            on_boundary,
            neighbours,
            cot_weights: Vec::new(),
            base_angle_sums: Vec::new(),
            base_vertex_areas: Vec::new(),
            base_boundary_weights: Vec::new(),
        };
        surface.compute_base_quantities()?;
        Ok(surface)
    }

    fn compute_base_quantities(&mut self) -> Result<()> {
        let nv = self.vertices.len();
        let mut cot = vec![T::zero(); self.edges.len()];
        let mut angles = vec![T::zero(); nv];
        let mut areas = vec![T::zero(); nv];
        let third = T::one() / T::lit(3.0);
        for (ti, t) in self.triangles.iter().enumerate() {
            let te = self.tri_edges[ti];
            let l = [self.lengths[te[0]], self.lengths[te[1]], self.lengths[te[2]]];
            let area = triangle_area(l[0], l[1], l[2]).ok_or_else(|| {
                mesh_err(format!("triangle {} violates the triangle inequality", ti))
            })?;
            for k in 0..3 {
                let (a, b, c) = (l[k], l[(k + 1) % 3], l[(k + 2) % 3]);
                let num = b * b + c * c - a * a;
                cot[te[k]] += num / (T::lit(8.0) * area);
                let cosv = (num / (T::two() * b * c)).max(-T::one()).min(T::one());
                angles[t[k]] += cosv.acos();
                areas[t[k]] += area * third;
            }
        }
        let mut bw = vec![T::zero(); nv];
        for lp in &self.boundary_loops {
            for k in 0..lp.len() {
                let (i, j) = (lp[k], lp[(k + 1) % lp.len()]);
                let len = self.edge_length_between(i, j).expect("loop edge exists");
                bw[i] += len * T::half();
                bw[j] += len * T::half();
            }
        }
        self.cot_weights = cot;
        self.base_angle_sums = angles;
        self.base_vertex_areas = areas;
        self.base_boundary_weights = bw;
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[[T; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.neighbours[v]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        self.boundary_loops.iter().flatten().copied().collect()
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| !self.on_boundary[v]).collect()
    }

    pub fn edge_length_between(&self, i: usize, j: usize) -> Option<T> {
        self.edge_id(i, j).map(|e| self.lengths[e])
    }

    pub fn edge_id(&self, i: usize, j: usize) -> Option<usize> {
        self.edge_index.get(&edge_key(i, j)).copied()
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn boundary_component_count(&self) -> usize {
        self.boundary_loops.len()
    }

    /// Genus from `χ = 2 − 2g − n`; `None` if inconsistent.
    pub fn genus(&self) -> Option<usize> {
        let twice = 2 - self.euler_characteristic() - self.boundary_component_count() as i64;
        if twice >= 0 && twice % 2 == 0 {
            Some((twice / 2) as usize)
        } else {
            None
        }
    }

    /// Per-vertex log scale `u` of the metric `e^{2u} σ_ℓ`.
    pub fn log_scale(&self) -> &[T] {
        &self.log_scale
    }

    /// The metric `e^{2ψ}` times the current one.
    pub fn conformal(&self, psi: &[T]) -> Result<Self> {
        if psi.len() != self.vertex_count() {
            return Err(mesh_err(format!(
                "conformal factor has {} values for {} vertices",
                psi.len(),
                self.vertex_count()
            )));
        }
        if psi.iter().any(|p| !p.is_finite()) {
            return Err(mesh_err("conformal factor is not finite"));
        }
        let mut out = self.clone();
        for (u, p) in out.log_scale.iter_mut().zip(psi) {
            *u += *p;
        }
        Ok(out)
    }

    /// Same edge lengths, log scale replaced by `u`.
    pub fn with_log_scale(&self, u: &[T]) -> Result<Self> {
        let zero = self.conformal(&vec![T::zero(); self.vertex_count()])?;
        let mut out = zero;
        if u.len() != out.vertex_count() {
            return Err(mesh_err("log scale length mismatch"));
        }
        out.log_scale = u.to_vec();
        Ok(out)
    }

    /// Same triangulation, new edge lengths (log scale kept).
    pub fn with_lengths(&self, lengths: &[T]) -> Result<Self> {
        if lengths.len() != self.edges.len() {
            return Err(mesh_err("edge length count mismatch"));
        }
        if lengths.iter().any(|l| !(*l > T::zero())) {
            return Err(mesh_err("edge lengths must be positive"));
        }
        let mut out = self.clone();
        out.lengths = lengths.to_vec();
        out.compute_base_quantities()?;
        Ok(out)
    }

    /// Piecewise-flat surface with lengths `ℓ_ij e^{(u_i + u_j)/2}` and zero
    /// log scale; a geometric realization of the current metric.
    pub fn realize(&self) -> Result<Self> {
        let lengths: Vec<T> = self
            .edges
            .iter()
            .zip(&self.lengths)
            .map(|(&[i, j], &l)| l * ((self.log_scale[i] + self.log_scale[j]) * T::half()).exp())
            .collect();
        let mut out = self.with_lengths(&lengths)?;
        out.log_scale = vec![T::zero(); self.vertex_count()];
        Ok(out)
    }

    /// Cotangent weights `w_e = ½(cot α + cot β)` of the edge-length metric.
    pub fn cotan_weights(&self) -> &[T] {
        &self.cot_weights
    }

    /// `(S f)_i = Σ_j w_ij (f_i − f_j)`.
    pub fn apply_stiffness(&self, f: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.vertex_count()];
        for (e, &[i, j]) in self.edges.iter().enumerate() {
            let flux = self.cot_weights[e] * (f[i] - f[j]);
            out[i] += flux;
            out[j] -= flux;
        }
        out
    }

    /// Lumped vertex areas of the edge-length metric (one third of each
    /// incident triangle).
    pub fn base_vertex_areas(&self) -> &[T] {
        &self.base_vertex_areas
    }

    /// Half the lengths of the two incident boundary edges; zero at interior
    /// vertices.
    pub fn base_boundary_weights(&self) -> &[T] {
        &self.base_boundary_weights
    }

    /// Curvature measure of the edge-length metric.
    pub fn base_curvature_measure(&self) -> Vec<T> {
        let two_pi = T::two_pi();
        (0..self.vertex_count())
            .map(|v| {
                if self.on_boundary[v] {
                    T::pi() - self.base_angle_sums[v]
                } else {
                    two_pi - self.base_angle_sums[v]
                }
            })
            .collect()
    }

    /// Curvature measure `Ω′ = Ω + S u` of the current metric.
    pub fn curvature_measure(&self) -> Vec<T> {
        let su = self.apply_stiffness(&self.log_scale);
        self.base_curvature_measure()
            .into_iter()
            .zip(su)
            .map(|(o, s)| o + s)
            .collect()
    }

    pub fn vertex_areas(&self) -> Vec<T> {
        self.base_vertex_areas
            .iter()
            .zip(&self.log_scale)
            .map(|(a, u)| *a * (T::two() * *u).exp())
            .collect()
    }

    pub fn boundary_weights(&self) -> Vec<T> {
        self.base_boundary_weights
            .iter()
            .zip(&self.log_scale)
            .map(|(b, u)| *b * u.exp())
            .collect()
    }

    pub fn area(&self) -> T {
        self.vertex_areas().into_iter().fold(T::zero(), |a, b| a + b)
    }

    pub fn boundary_length(&self) -> T {
        self.boundary_weights().into_iter().fold(T::zero(), |a, b| a + b)
    }

    /// Boundary length of each component, in loop order.
    pub fn boundary_component_lengths(&self) -> Vec<T> {
        let b = self.boundary_weights();
        self.boundary_loops
            .iter()
            .map(|lp| lp.iter().fold(T::zero(), |s, &v| s + b[v]))
            .collect()
    }

    pub fn curvature(&self) -> DiscreteCurvature<T> {
        let omega = self.curvature_measure();
        let area = self.vertex_areas();
        let bw = self.boundary_weights();
        let nv = self.vertex_count();
        let mut gauss = vec![T::zero(); nv];
        for v in 0..nv {
            if !self.on_boundary[v] {
                gauss[v] = omega[v] / area[v];
            }
        }
        for v in 0..nv {
            if self.on_boundary[v] {
                let (mut s, mut n) = (T::zero(), 0usize);
                for &w in &self.neighbours[v] {
                    if !self.on_boundary[w] {
                        s += gauss[w];
                        n += 1;
                    }
                }
                if n > 0 {
                    gauss[v] = s / T::of(n);
                }
            }
        }
        let mut geodesic = Vec::new();
        let mut total_geodesic = T::zero();
        for v in self.boundary_vertices() {
            let k = (omega[v] - gauss[v] * area[v]) / bw[v];
            total_geodesic += k * bw[v];
            geodesic.push((v, k));
        }
        let total_gauss = gauss
            .iter()
            .zip(&area)
            .fold(T::zero(), |s, (k, a)| s + *k * *a);
        DiscreteCurvature {
            gauss,
            geodesic,
            total_gauss,
            total_geodesic,
        }
    }

    /// `Σ K a′ + Σ k b′ − 2πχ`.
    pub fn gauss_bonnet_defect(&self) -> T {
        let c = self.curvature();
        c.total_gauss + c.total_geodesic - T::two_pi() * T::lit(self.euler_characteristic() as f64)
    }
}

/// Heron's formula in the cancellation-free ordering; `None` if degenerate.
fn triangle_area<T: Real>(a: T, b: T, c: T) -> Option<T> {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p > T::zero() {
        Some(p.sqrt() * T::lit(0.25))
    } else {
        None
    }
}

fn trace_loops(adj: &HashMap<usize, Vec<usize>>) -> Vec<Vec<usize>> {
    let mut starts: Vec<usize> = adj.keys().copied().collect();
    starts.sort_unstable();
    let mut visited = std::collections::HashSet::new();
    let mut loops = Vec::new();
    for s in starts {
        if visited.contains(&s) {
            continue;
        }
        let mut lp = vec![s];
        visited.insert(s);
        let mut prev = s;
        let mut cur = *adj[&s].iter().min().unwrap();
        while cur != s {
            visited.insert(cur);
            lp.push(cur);
            let nb = &adj[&cur];
            let next = if nb[0] == prev { nb[1] } else { nb[0] };
            prev = cur;
            cur = next;
        }
        loops.push(lp);
    }
    loops
}

/// Each vertex star must be a single edge-connected fan.
fn check_vertex_links(nv: usize, triangles: &[[usize; 3]]) -> Result<()> {
    let mut star: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (ti, t) in triangles.iter().enumerate() {
        for &v in t {
            star[v].push(ti);
        }
    }
    for (v, tris) in star.iter().enumerate() {
        if tris.len() <= 1 {
            continue;
        }
        let others = |ti: usize| -> [usize; 2] {
            let t = triangles[ti];
            let k = t.iter().position(|&x| x == v).unwrap();
            [t[(k + 1) % 3], t[(k + 2) % 3]]
        };
        let mut reached = vec![false; tris.len()];
        reached[0] = true;
        let mut stack = vec![0usize];
        while let Some(a) = stack.pop() {
            let oa = others(tris[a]);
            for b in 0..tris.len() {
                if !reached[b] {
                    let ob = others(tris[b]);
                    if oa.iter().any(|x| ob.contains(x)) {
                        reached[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        if reached.iter().any(|r| !r) {
            return Err(mesh_err(format!("vertex {} is not a manifold point", v)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> MetricSurface<f64> {
        // unit square split into four triangles around a centre vertex
        let v = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.5, 0.5, 0.0],
        ];
        let t = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        MetricSurface::from_coordinates(v, t, None).unwrap()
    }

    #[test]
    fn square_invariants() {
        let s = square();
        assert_eq!(s.euler_characteristic(), 1);
        assert_eq!(s.genus(), Some(0));
        assert_eq!(s.boundary_component_count(), 1);
        assert_relative_eq!(s.area(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.boundary_length(), 4.0, epsilon = 1e-15);
        let omega = s.base_curvature_measure();
        assert!(omega[4].abs() < 1e-14);
        for &o in &omega[..4] {
            assert_relative_eq!(o, std::f64::consts::FRAC_PI_2, epsilon = 1e-14);
        }
        assert!(s.gauss_bonnet_defect().abs() < 1e-12);
    }

    #[test]
    fn stiffness_annihilates_constants_and_linears_inside() {
        let s = square();
        let c = s.apply_stiffness(&[3.0; 5]);
        assert!(c.iter().all(|x| x.abs() < 1e-14));
        let lin: Vec<f64> = s.vertices().iter().map(|p| 2.0 * p[0] - p[1]).collect();
        assert!(s.apply_stiffness(&lin)[4].abs() < 1e-14);
    }

    #[test]
    fn conformal_change_keeps_gauss_bonnet() {
        let s = square();
        let psi = [0.1, -0.3, 0.2, 0.05, 0.4];
        let t = s.conformal(&psi).unwrap();
        assert!(t.gauss_bonnet_defect().abs() < 1e-12);
        let expected: f64 = s
            .base_vertex_areas()
            .iter()
            .zip(&psi)
            .map(|(a, p)| a * (2.0 * p).exp())
            .sum();
        assert_relative_eq!(t.area(), expected, epsilon = 1e-14);
    }

    #[test]
    fn rejects_nonmanifold_edge() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        let t = vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]];
        assert!(MetricSurface::from_coordinates(v, t, None).is_err());
    }

    #[test]
    fn rejects_bad_lengths() {
        let v = vec![[0.0, 0.0, 0.0]; 3];
        let t = vec![[0, 1, 2]];
        let mut l = HashMap::new();
        l.insert((0, 1), 1.0);
        l.insert((1, 2), 1.0);
        l.insert((0, 2), 3.0);
        assert!(MetricSurface::with_edge_lengths(v, t, None, &l).is_err());
    }

    #[test]
    fn realize_matches_scaled_lengths() {
        let s = square();
        let t = s.conformal(&[0.5f64.ln(); 5]).unwrap();
        let r = t.realize().unwrap();
        assert_relative_eq!(r.area(), 0.25, epsilon = 1e-14);
        assert_relative_eq!(t.area(), 0.25, epsilon = 1e-14);
    }
}
