use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::MetricSurface;
use crate::scalar::Real;
use crate::uniformization::sparse::{dot, SpdSolver};

/// Piecewise-linear finite elements on a [`MetricSurface`]: cotangent
/// stiffness, lumped mass and boundary arc weights of the current metric.
#[derive(Clone, Debug)]
pub struct DiscreteLaplace<T: Real> {
    pub edges: Vec<[usize; 2]>,
    /// Cotangent weight per edge; the stiffness is `Σ_e w_e (δ_i − δ_j)(δ_i − δ_j)ᵀ`.
    pub weights: Vec<T>,
    pub mass: Vec<T>,
    pub boundary_mass: Vec<T>,
}

impl<T: Real> DiscreteLaplace<T> {
    pub fn new(s: &MetricSurface<T>) -> Self {
        Self {
            edges: s.edges().to_vec(),
            weights: s.cotan_weights().to_vec(),
            mass: s.vertex_areas(),
            boundary_mass: s.boundary_weights(),
        }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn apply(&self, f: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        for (&[i, j], &w) in self.edges.iter().zip(&self.weights) {
            let flux = w * (f[i] - f[j]);
            out[i] += flux;
            out[j] -= flux;
        }
        out
    }

    /// `fᵀ S f`.
    pub fn energy(&self, f: &[T]) -> T {
        self.edges
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |s, (&[i, j], &w)| s + w * (f[i] - f[j]) * (f[i] - f[j]))
    }

    /// Triplets of `S + diag(shift)`.
    pub fn entries(&self, shift: &[T]) -> Vec<(usize, usize, T)> {
        let mut out = Vec::with_capacity(4 * self.edges.len() + self.len());
        for (v, &d) in shift.iter().enumerate() {
            out.push((v, v, d));
        }
        for (&[i, j], &w) in self.edges.iter().zip(&self.weights) {
            out.push((i, i, w));
            out.push((j, j, w));
            out.push((i, j, -w));
            out.push((j, i, -w));
        }
        out
    }

    /// Triplets of the stiffness on the vertices with an index (renumbered).
    fn restricted_entries(&self, index: &[Option<usize>]) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for (&[i, j], &w) in self.edges.iter().zip(&self.weights) {
            if let Some(a) = index[i] {
                out.push((a, a, w));
            }
            if let Some(b) = index[j] {
                out.push((b, b, w));
            }
            if let (Some(a), Some(b)) = (index[i], index[j]) {
                out.push((a, b, -w));
                out.push((b, a, -w));
            }
        }
        out
    }

    /// Factors the stiffness with one vertex pinned, for repeated Neumann
    /// solves.
    pub fn neumann_solver(&self) -> Result<NeumannSolver<T>> {
        let n = self.len();
        let mut e = self.entries(&vec![T::zero(); n]);
        e.push((n - 1, n - 1, T::one()));
        Ok(NeumannSolver {
            factor: SpdSolver::factor(n, &e)?,
            mass: self.mass.clone(),
        })
    }

    /// Solves the Neumann problem `S f = rhs` (requires `Σ rhs = 0`) for the
    /// solution with `Σ mass·f = 0`.
    pub fn solve_neumann(&self, rhs: &[T]) -> Result<Vec<T>> {
        self.neumann_solver()?.solve(rhs)
    }
}

/// Solver for `S f = rhs` on a connected mesh.
pub struct NeumannSolver<T: Real> {
    factor: SpdSolver<T>,
    mass: Vec<T>,
}

impl<T: Real> NeumannSolver<T> {
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let total = rhs.iter().fold(T::zero(), |s, r| s + *r);
        let scale = rhs.iter().fold(T::zero(), |s, r| s + r.abs());
        if total.abs() > T::lit(1e-9) * scale.max(T::eps()) {
            return Err(domain(format!("Neumann data not compatible (sum {:?})", total)));
        }
        // with e = δ_last: 1ᵀ(S + e eᵀ)x = x_last = Σ rhs = 0, so S x = rhs
        let mut x = self.factor.solve(rhs);
        let area = self.mass.iter().fold(T::zero(), |s, a| s + *a);
        let mean = dot(&self.mass, &x) / area;
        for xi in x.iter_mut() {
            *xi -= mean;
        }
        Ok(x)
    }
}

/// Dirichlet-to-Neumann operator: Schur complement of the interior block of
/// the stiffness. `(Tφ)_b` is the flux of the discrete harmonic extension
/// of `φ` through boundary vertex `b`.
#[derive(Clone, Debug)]
pub struct DirichletNeumannOperator<T: Real> {
    /// Boundary vertices in loop order; rows and columns of `matrix`.
    pub boundary: Vec<usize>,
    pub matrix: DMatrix<T>,
    /// `E` with `u_interior = E φ` the harmonic extension.
    extension: DMatrix<T>,
    interior: Vec<usize>,
    vertex_count: usize,
}

impl<T: Real> DirichletNeumannOperator<T> {
    pub fn new(s: &MetricSurface<T>) -> Result<Self> {
        let lap = DiscreteLaplace::new(s);
        let boundary = s.boundary_vertices();
        let interior = s.interior_vertices();
        let n = s.vertex_count();
        let nb = boundary.len();
        let mut bindex = vec![None; n];
        for (k, &v) in boundary.iter().enumerate() {
            bindex[v] = Some(k);
        }
        let mut iindex = vec![None; n];
        for (k, &v) in interior.iter().enumerate() {
            iindex[v] = Some(k);
        }
        let mut s_bb: DMatrix<T> = DMatrix::zeros(nb, nb);
        let mut s_ib: DMatrix<T> = DMatrix::zeros(interior.len(), nb);
        for (&[i, j], &w) in lap.edges.iter().zip(&lap.weights) {
            for (a, b) in [(i, j), (j, i)] {
                if let Some(ka) = bindex[a] {
                    s_bb[(ka, ka)] += w;
                    if let Some(kb) = bindex[b] {
                        s_bb[(ka, kb)] -= w;
                    } else if let Some(ib) = iindex[b] {
                        s_ib[(ib, ka)] -= w;
                    }
                }
            }
        }
        let extension = if interior.is_empty() {
            DMatrix::zeros(0, nb)
        } else {
            let solver = SpdSolver::factor(interior.len(), &lap.restricted_entries(&iindex))?;
            let mut e: DMatrix<T> = DMatrix::zeros(interior.len(), nb);
            for c in 0..nb {
                let col: Vec<T> = s_ib.column(c).iter().map(|x| -*x).collect();
                let x = solver.solve(&col);
                e.column_mut(c).copy_from_slice(&x);
            }
            e
        };
        let matrix = &s_bb + s_ib.transpose() * &extension;
        Ok(Self {
            boundary,
            matrix,
            extension,
            interior,
            vertex_count: n,
        })
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn apply(&self, phi: &[T]) -> Vec<T> {
        (&self.matrix * DVector::from_column_slice(phi)).iter().copied().collect()
    }

    /// `φᵀ T φ`.
    pub fn quadratic_form(&self, phi: &[T]) -> T {
        dot(phi, &self.apply(phi))
    }

    /// Discrete harmonic function on the whole mesh with boundary values `φ`.
    pub fn harmonic_extension(&self, phi: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.vertex_count];
        for (&v, &p) in self.boundary.iter().zip(phi) {
            out[v] = p;
        }
        if !self.interior.is_empty() {
            let inner = &self.extension * DVector::from_column_slice(phi);
            for (&v, &x) in self.interior.iter().zip(inner.iter()) {
                out[v] = x;
            }
        }
        out
    }

    /// `max |T − Tᵀ|`; the Schur complement is symmetric in exact arithmetic.
    pub fn asymmetry(&self) -> T {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// Largest absolute row sum; zero up to rounding because `T 1 = 0`.
    pub fn constant_defect(&self) -> T {
        self.matrix
            .row_iter()
            .map(|r| r.iter().fold(T::zero(), |s, x| s + *x).abs())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Values of `f` at the boundary vertices, in operator order.
    pub fn restrict(&self, f: &[T]) -> Vec<T> {
        self.boundary.iter().map(|&v| f[v]).collect()
    }
}

/// Summary of how close a metric is to either uniform type.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Uniformity {
    pub gauss_mean: f64,
    /// `max |K − mean K|`.
    pub gauss_spread: f64,
    /// Arc-weighted mean geodesic curvature of the boundary.
    pub geodesic_mean: f64,
    /// `max |k − mean k|`.
    pub geodesic_spread: f64,
    pub max_abs_gauss: f64,
    pub max_abs_geodesic: f64,
    pub area: f64,
    pub boundary_length: f64,
}

pub fn uniformity<T: Real>(s: &MetricSurface<T>) -> Uniformity {
    let c = s.curvature();
    let area = s.vertex_areas();
    let arcs = s.boundary_weights();
    let total_area = area.iter().fold(0.0, |a, b| a + b.to_f());
    let gauss_mean = c.total_gauss.to_f() / total_area;
    let gauss_spread = c.gauss.iter().fold(0.0f64, |m, k| m.max((k.to_f() - gauss_mean).abs()));
    let max_abs_gauss = c.gauss.iter().fold(0.0f64, |m, k| m.max(k.to_f().abs()));
    let length: f64 = c.geodesic.iter().map(|&(v, _)| arcs[v].to_f()).sum();
    let geodesic_mean = c.total_geodesic.to_f() / length;
    let geodesic_spread = c
        .geodesic
        .iter()
        .fold(0.0f64, |m, &(_, k)| m.max((k.to_f() - geodesic_mean).abs()));
    let max_abs_geodesic = c.geodesic.iter().fold(0.0f64, |m, &(_, k)| m.max(k.to_f().abs()));
    Uniformity {
        gauss_mean,
        gauss_spread,
        geodesic_mean,
        geodesic_spread,
        max_abs_gauss,
        max_abs_geodesic,
        area: total_area,
        boundary_length: length,
    }
}
