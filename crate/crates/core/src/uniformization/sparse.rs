//! Sparse symmetric positive-definite solves for the mesh operators.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reverse Cuthill–McKee ordering of a symmetric sparsity graph; returns
/// `order[new] = old`. Each component starts from a minimum-degree vertex.
pub fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (adjacency[v].len(), v));
    for &start in &by_degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (adjacency[w].len(), w));
            for w in next {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor of a symmetric positive-definite matrix given by
/// triplets (duplicates summed), in RCM order.
pub struct SpdSolver<T: Real> {
    order: Vec<usize>,
    factor: CscCholesky<T>,
}

impl<T: Real> SpdSolver<T> {
    pub fn factor(n: usize, entries: &[(usize, usize, T)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j, _) in entries {
            if i != j {
                adjacency[i].push(j);
            }
        }
        for a in adjacency.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        let order = reverse_cuthill_mckee(&adjacency);
        let mut position = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let mut coo = CooMatrix::new(n, n);
        for &(i, j, v) in entries {
            coo.push(position[i], position[j], v);
        }
        let csc = CscMatrix::from(&coo);
        let factor = CscCholesky::factor(&csc)
            .map_err(|e| Error::Precondition(format!("matrix is not positive definite: {e}")))?;
        Ok(Self { order, factor })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let b = DVector::from_iterator(self.len(), self.order.iter().map(|&old| rhs[old]));
        let x = self.factor.solve(&b);
        let mut out = vec![T::zero(); self.len()];
        for (new, &old) in self.order.iter().enumerate() {
            out[old] = x[(new, 0)];
        }
        out
    }
}

/// `(M + Σ_k s_k u_k u_kᵀ)⁻¹` by the Woodbury identity, with `M` factored.
pub struct LowRankUpdated<'a, T: Real> {
    base: &'a SpdSolver<T>,
    vectors: Vec<Vec<T>>,
    solved: Vec<Vec<T>>,
    capacitance: DMatrix<T>,
}

impl<'a, T: Real> LowRankUpdated<'a, T> {
    pub fn new(base: &'a SpdSolver<T>, updates: Vec<(T, Vec<T>)>) -> Result<Self> {
        let k = updates.len();
        let solved: Vec<Vec<T>> = updates.iter().map(|(_, u)| base.solve(u)).collect();
        let mut cap = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                cap[(a, b)] = dot(&updates[a].1, &solved[b]);
            }
            cap[(a, a)] += T::one() / updates[a].0;
        }
        let capacitance = cap
            .try_inverse()
            .ok_or_else(|| Error::Precondition("low-rank update makes the matrix singular".into()))?;
        Ok(Self {
            base,
            vectors: updates.into_iter().map(|(_, u)| u).collect(),
            solved,
            capacitance,
        })
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = self.base.solve(rhs);
        let k = self.vectors.len();
        let proj = DVector::from_iterator(k, self.vectors.iter().map(|u| dot(u, &x)));
        let coef = &self.capacitance * proj;
        for (c, z) in coef.iter().zip(&self.solved) {
            for (xi, zi) in x.iter_mut().zip(z) {
                *xi -= *c * *zi;
            }
        }
        x
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian_plus_identity(n: usize) -> Vec<(usize, usize, f64)> {
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, 3.0));
            if i + 1 < n {
                e.push((i, i + 1, -1.0));
                e.push((i + 1, i, -1.0));
            }
        }
        e
    }

    fn dense(n: usize, e: &[(usize, usize, f64)]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, v) in e {
            m[(i, j)] += v;
        }
        m
    }

    #[test]
    fn rcm_is_a_permutation() {
        let adj = vec![vec![3], vec![2, 3], vec![1], vec![0, 1], vec![]];
        let mut o = reverse_cuthill_mckee(&adj);
        o.sort_unstable();
        assert_eq!(o, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn solves_match_dense_with_low_rank_terms() {
        let n = 40;
        let e = path_laplacian_plus_identity(n);
        let s = SpdSolver::factor(n, &e).unwrap();
        let u: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let v: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let upd = LowRankUpdated::new(&s, vec![(0.7, u.clone()), (-0.2, v.clone())]).unwrap();
        let mut m = dense(n, &e);
        m += DMatrix::from_fn(n, n, |i, j| 0.7 * u[i] * u[j] - 0.2 * v[i] * v[j]);
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let x = upd.solve(&rhs);
        let r = &m * DVector::from_column_slice(&x) - DVector::from_column_slice(&rhs);
        assert!(r.amax() < 1e-12, "residual {}", r.amax());
    }
}
