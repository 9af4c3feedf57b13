//! Quadrature rules, special functions and small numeric helpers.

use crate::scalar::{Real, EULER_GAMMA};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, 0.0f64);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (
        nodes.into_iter().map(T::lit).collect(),
        weights.into_iter().map(T::lit).collect(),
    )
}

/// Composite Gauss–Legendre quadrature of `f` over `[a, b]`.
pub fn integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, panels: usize, order: usize) -> T {
    let (x, w) = gauss_legendre::<T>(order);
    let h = (b - a) / T::of(panels);
    let mut total = T::zero();
    for p in 0..panels {
        let lo = a + h * T::of(p);
        let mid = lo + h * T::half();
        let mut panel = T::zero();
        for (xi, wi) in x.iter().zip(&w) {
            panel += *wi * f(mid + *xi * h * T::half());
        }
        total += panel * h * T::half();
    }
    total
}

/// Adaptive Gauss–Legendre quadrature: panels are halved until a 10-point
/// rule and its two-panel refinement agree to `tol` (absolute, per panel
/// scaled by width) or to rounding level of the panel value.
pub fn integrate_adaptive<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    let (x, w) = gauss_legendre::<T>(10);
    let rule = |lo: T, hi: T| {
        let (mid, half) = ((lo + hi) * T::half(), (hi - lo) * T::half());
        x.iter().zip(&w).fold(T::zero(), |s, (xi, wi)| s + *wi * f(mid + *xi * half)) * half
    };
    let width = b - a;
    let mut total = T::zero();
    let mut stack = vec![(a, b, rule(a, b), 0usize)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = (lo + hi) * T::half();
        let (left, right) = (rule(lo, mid), rule(mid, hi));
        let floor = T::lit(16.0) * T::eps() * (left.abs() + right.abs());
        let local_tol = (tol * (hi - lo) / width).max(floor);
        if (left + right - whole).abs() <= local_tol || depth >= 40 {
            total += left + right;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    total
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-s}/s ds` for `x > 0`.
pub fn exp_integral_e1<T: Real>(x: T) -> T {
    assert!(x > T::zero(), "E1 defined here for positive arguments");
    let eps = T::eps();
    if x <= T::one() {
        let mut sum = T::zero();
        let mut term = T::one();
        let mut k = 1usize;
        loop {
            term *= -x / T::of(k);
            let add = term / T::of(k);
            sum += add;
            if add.abs() <= eps * sum.abs().max(T::lit(1e-300)) || k > 200 {
                break;
            }
            k += 1;
        }
        -T::lit(EULER_GAMMA) - x.ln() - sum
    } else {
        // modified Lentz on the continued fraction
        let tiny = T::lit(1e-30);
        let mut b = x + T::one();
        let mut c = T::one() / tiny;
        let mut d = T::one() / b;
        let mut h = d;
        for i in 1..500usize {
            let an = -T::of(i * i);
            b += T::two();
            d = T::one() / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - T::one()).abs() <= eps {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Upper bound on `Σ_{k ≥ k0} exp(-a k²)` for `a > 0`, `k0 ≥ 1`.
///
/// Uses `k² ≥ k0² + 2 k0 (k - k0)`, giving a geometric majorant.
pub fn gaussian_sum_tail<T: Real>(a: T, k0: usize) -> T {
    if k0 == 0 {
        return gaussian_sum_tail(a, 1) + T::one();
    }
    let k0t = T::of(k0);
    let ratio = (-T::two() * a * k0t).exp();
    let head = (-a * k0t * k0t).exp();
    if ratio >= T::one() {
        return T::lit(f64::INFINITY);
    }
    head / (T::one() - ratio)
}

/// `n` points log-uniformly spaced between `lo` and `hi` inclusive.
pub fn log_space<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 2 && lo > T::zero() && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * T::of(i) / T::of(n - 1)).exp())
        .collect()
}

/// Solves the real symmetric positive-definite system `A x = b` for a small
/// dense matrix; used by least-squares fits.
pub(crate) fn least_squares<T: Real>(rows: &[Vec<T>], rhs: &[T]) -> Option<Vec<T>> {
    let m = rows.len();
    let n = rows.first()?.len();
    if m < n {
        return None;
    }
    // column scaling keeps the normal equations away from overflow
    let mut scale = vec![T::zero(); n];
    for r in rows {
        for (j, v) in r.iter().enumerate() {
            scale[j] = scale[j].max(v.abs());
        }
    }
    let a = nalgebra::DMatrix::<T>::from_fn(m, n, |i, j| {
        if scale[j] > T::zero() {
            rows[i][j] / scale[j]
        } else {
            T::zero()
        }
    });
    let b = nalgebra::DVector::<T>::from_column_slice(rhs);
    let svd = a.svd(true, true);
    let x = svd.solve(&b, T::eps() * T::lit(100.0)).ok()?;
    Some(
        (0..n)
            .map(|j| {
                if scale[j] > T::zero() {
                    x[j] / scale[j]
                } else {
                    T::zero()
                }
            })
            .collect(),
    )
}
