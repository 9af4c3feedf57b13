//! Symmetric tridiagonal pencils `K − λ W` with `W` diagonal positive.

use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct TridiagonalPencil<T: Real> {
    /// `K_ii`.
    pub diag: Vec<T>,
    /// `K_{i,i+1}`, length `n − 1`.
    pub off: Vec<T>,
    /// `W_ii > 0`.
    pub weight: Vec<T>,
}

impl<T: Real> TridiagonalPencil<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of
    /// `K − x W` via the LDLᵀ pivots).
    pub fn count_below(&self, x: T) -> usize {
        let tiny = T::lit(f64::MIN_POSITIVE).sqrt();
        let mut count = 0usize;
        let mut q = T::one();
        for i in 0..self.diag.len() {
            let d = self.diag[i] - x * self.weight[i];
            q = if i == 0 {
                d
            } else {
                let e = self.off[i - 1];
                d - e * e / q
            };
            if q == T::zero() {
                q = -tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// [`Self::count_below`] for several shifts at once; the independent
    /// pivot recurrences interleave, which hides the division latency.
    pub fn count_below_lanes<const N: usize>(&self, x: [T; N]) -> [usize; N] {
        let tiny = T::lit(f64::MIN_POSITIVE).sqrt();
        let mut count = [0usize; N];
        let mut q = [T::one(); N];
        for i in 0..self.diag.len() {
            let (d0, w) = (self.diag[i], self.weight[i]);
            let e2 = if i == 0 { T::zero() } else { self.off[i - 1] * self.off[i - 1] };
            for j in 0..N {
                let mut v = d0 - x[j] * w;
                if i > 0 {
                    v -= e2 / q[j];
                }
                if v == T::zero() {
                    v = -tiny;
                }
                count[j] += (v < T::zero()) as usize;
                q[j] = v;
            }
        }
        count
    }

    /// Eigenvalues `k` inside the given brackets `[lo, hi]` (widened when
    /// they fail to bracket), bisected eight at a time.
    pub fn eigenvalues_in(&self, brackets: &[(usize, T, T)]) -> Vec<T> {
        const LANES: usize = 8;
        let ceiling = self.spectral_upper_bound() * T::lit(1.01) + T::one();
        let eps = T::eps();
        let mut out = Vec::with_capacity(brackets.len());
        for chunk in brackets.chunks(LANES) {
            let mut lo = [T::zero(); LANES];
            let mut hi = [T::zero(); LANES];
            let mut idx = [0usize; LANES];
            for (j, &(k, a, b)) in chunk.iter().enumerate() {
                let (a, b) = self.widen(k, a, b, ceiling);
                lo[j] = a;
                hi[j] = b;
                idx[j] = k;
            }
            for j in chunk.len()..LANES {
                // idle lanes repeat the first bracket
                lo[j] = lo[0];
                hi[j] = hi[0];
                idx[j] = idx[0];
            }
            for _ in 0..200 {
                let mut mid = [T::zero(); LANES];
                let mut active = false;
                for j in 0..LANES {
                    mid[j] = (lo[j] + hi[j]) * T::half();
                    if mid[j] > lo[j] && mid[j] < hi[j] && hi[j] - lo[j] > T::two() * eps * (lo[j].abs() + hi[j].abs()) {
                        active = true;
                    }
                }
                if !active {
                    break;
                }
                let c = self.count_below_lanes(mid);
                for j in 0..LANES {
                    if c[j] > idx[j] {
                        hi[j] = mid[j];
                    } else {
                        lo[j] = mid[j];
                    }
                }
            }
            for j in 0..chunk.len() {
                out.push((lo[j] + hi[j]) * T::half());
            }
        }
        out
    }

    fn widen(&self, k: usize, mut lo: T, mut hi: T, ceiling: T) -> (T, T) {
        let mut grow = (hi - lo).abs().max(T::eps() * hi.abs().max(T::one()));
        while lo > T::zero() && self.count_below(lo) > k {
            lo -= grow;
            grow += grow;
            if lo < T::zero() {
                lo = T::zero();
            }
        }
        grow = (hi - lo).abs().max(T::eps() * hi.abs().max(T::one()));
        while self.count_below(hi) <= k {
            hi += grow;
            grow += grow;
            if hi > ceiling {
                hi = ceiling;
                break;
            }
        }
        (lo, hi)
    }

    /// Upper bound on the spectrum from Gershgorin discs of
    /// `W^{-1/2} K W^{-1/2}`.
    pub fn spectral_upper_bound(&self) -> T {
        let n = self.len();
        let mut hi = T::zero();
        for i in 0..n {
            let mut r = self.diag[i] / self.weight[i];
            if i > 0 {
                r += self.off[i - 1].abs() / (self.weight[i - 1] * self.weight[i]).sqrt();
            }
            if i + 1 < n {
                r += self.off[i].abs() / (self.weight[i] * self.weight[i + 1]).sqrt();
            }
            hi = hi.max(r);
        }
        hi
    }

    /// The `k`-th eigenvalue (0-based) by bisection inside `[lo, hi]`, which
    /// is widened until it brackets the eigenvalue.
    pub fn eigenvalue(&self, k: usize, lo: T, hi: T) -> T {
        assert!(k < self.len(), "eigenvalue index out of range");
        self.eigenvalues_in(&[(k, lo, hi)])[0]
    }

    /// Eigenvector for the (simple) eigenvalue `lambda` by inverse iteration,
    /// normalized so that `fᵀ W f = 1` and its largest entry is positive.
    pub fn eigenvector(&self, lambda: T) -> Vec<T> {
        let n = self.len();
        let shift = lambda * (T::one() + T::lit(64.0) * T::eps()) + T::lit(1e-300).max(T::eps() * T::eps());
        let mut f: Vec<T> = (0..n)
            .map(|i| T::one() + T::lit(0.01) * T::of(i % 7))
            .collect();
        for _ in 0..4 {
            let rhs: Vec<T> = f.iter().zip(&self.weight).map(|(a, w)| *a * *w).collect();
            f = self.solve_shifted(shift, &rhs);
            let norm = f
                .iter()
                .zip(&self.weight)
                .fold(T::zero(), |s, (a, w)| s + *a * *a * *w)
                .sqrt();
            for v in f.iter_mut() {
                *v /= norm;
            }
        }
        let (mut big, mut sign) = (T::zero(), T::one());
        for v in &f {
            if v.abs() > big {
                big = v.abs();
                sign = if *v < T::zero() { -T::one() } else { T::one() };
            }
        }
        for v in f.iter_mut() {
            *v *= sign;
        }
        f
    }

    /// Solves `(K − σ W) x = b` by Gaussian elimination with partial
    /// pivoting (tridiagonal, one extra superdiagonal of fill).
    pub fn solve_shifted(&self, sigma: T, b: &[T]) -> Vec<T> {
        let n = self.len();
        let mut d: Vec<T> = (0..n).map(|i| self.diag[i] - sigma * self.weight[i]).collect();
        let mut up: Vec<T> = self.off.clone();
        up.push(T::zero());
        let mut up2 = vec![T::zero(); n];
        let mut low: Vec<T> = self.off.clone();
        let mut x = b.to_vec();
        let tiny = T::eps() * T::lit(1e-10) * (self.diag.iter().fold(T::zero(), |m, v| m.max(v.abs())) + T::one());
        for i in 0..n.saturating_sub(1) {
            if low[i].abs() > d[i].abs() {
                // swap rows i and i+1
                let (a0, a1, a2) = (d[i], up[i], up2[i]);
                d[i] = low[i];
                up[i] = d[i + 1];
                up2[i] = up[i + 1];
                low[i] = a0;
                d[i + 1] = a1;
                up[i + 1] = a2;
                x.swap(i, i + 1);
            }
            if d[i] == T::zero() {
                d[i] = tiny;
            }
            let m = low[i] / d[i];
            d[i + 1] -= m * up[i];
            if i + 1 < n {
                up[i + 1] -= m * up2[i];
            }
            x[i + 1] = x[i + 1] - m * x[i];
        }
        if d[n - 1] == T::zero() {
            d[n - 1] = tiny;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= up[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= up2[i] * x[i + 2];
            }
            x[i] = s / d[i];
        }
        x
    }
}
