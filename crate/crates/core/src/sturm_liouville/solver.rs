use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::sturm_liouville::problem::{Coordinate, ModeProblem, SturmLiouville};
use crate::sturm_liouville::tridiag::TridiagonalPencil;

/// Grid and extrapolation settings.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridOptions {
    /// Intervals of the coarsest grid; chosen from `resolution` when `None`.
    pub base_intervals: Option<usize>,
    /// Number of grids (each halving the spacing) combined by Richardson
    /// extrapolation in `h²`.
    pub levels: usize,
    /// Target `κ h` on the coarsest grid for the largest wanted eigenvalue,
    /// `κ = √(λ max w/p)`.
    pub resolution: f64,
    pub min_intervals: usize,
    pub max_intervals: usize,
    /// Largest accepted relative Richardson error estimate.
    pub rel_tol: f64,
    /// Coordinate override; the problem's preferred one otherwise.
    pub coordinate: Option<Coordinate>,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            base_intervals: None,
            levels: 4,
            resolution: 1.0,
            min_intervals: 256,
            max_intervals: 1 << 22,
            rel_tol: 1e-3,
            coordinate: None,
        }
    }
}

/// One piece of the Neumann bracketing used for eigenvalue lower bounds.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BracketPiece<T: Real> {
    pub length: T,
    /// `max w / min p` on the piece.
    pub ratio: T,
    /// `min q / w` on the piece.
    pub shift: T,
}

/// Rigorous-in-the-coefficients upper bounds on the eigenvalue counting
/// function, from decoupling the interval into Neumann pieces:
/// `N(λ) ≤ Σ_j [λ ≥ s_j] (1 + (L_j/π) √(r_j (λ − s_j)))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailBound<T: Real> {
    pub pieces: Vec<BracketPiece<T>>,
}

impl<T: Real> TailBound<T> {
    pub fn from_problem(sl: &SturmLiouville<T>, pieces: usize, samples: usize) -> Self {
        let h = sl.length() / T::of(pieces);
        let margin_lo = T::lit(0.98);
        let margin_hi = T::lit(1.02);
        let out = (0..pieces)
            .map(|j| {
                let lo = sl.a + h * T::of(j);
                let (mut pmin, mut wmax, mut smin) = (T::lit(f64::MAX), T::zero(), T::lit(f64::MAX));
                for s in 0..=samples {
                    let x = lo + h * T::of(s) / T::of(samples);
                    let (p, q, w) = (sl.p.value(x), sl.q.value(x), sl.w.value(x));
                    pmin = pmin.min(p);
                    wmax = wmax.max(w);
                    smin = smin.min(q / w);
                }
                BracketPiece {
                    length: h,
                    ratio: wmax * margin_hi / (pmin * margin_lo),
                    shift: smin * margin_lo,
                }
            })
            .collect();
        Self { pieces: out }
    }

    pub fn count_upper(&self, lambda: T) -> T {
        self.pieces.iter().fold(T::zero(), |acc, pc| {
            if lambda < pc.shift {
                acc
            } else {
                acc + T::one() + pc.length / T::pi() * (pc.ratio * (lambda - pc.shift)).sqrt()
            }
        })
    }

    /// Lower bound on the `k`-th eigenvalue (1-based), inverting
    /// [`Self::count_upper`] by bisection.
    pub fn eigenvalue_lower_bound(&self, k: usize) -> T {
        let target = T::of(k);
        let (mut lo, mut hi) = (T::zero(), T::one());
        while self.count_upper(hi) < target {
            hi += hi;
        }
        for _ in 0..200 {
            let mid = (lo + hi) * T::half();
            if self.count_upper(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Bound on `Σ_{λ_k > Λ} e^{−t λ_k}` given that exactly `known` eigenvalues
    /// are `≤ Λ`.
    pub fn sum_above(&self, t: T, cutoff: T, known: usize) -> T {
        let pi = T::pi();
        let mut total = T::zero();
        for pc in &self.pieces {
            let start = cutoff.max(pc.shift);
            let y = start - pc.shift;
            let z = t * y;
            let gamma_32 = pi.sqrt() * T::half();
            let g = if z > T::zero() {
                let tail = z.sqrt() * (-z).exp() + (-z).exp() / (T::two() * z.sqrt());
                tail.min(gamma_32)
            } else {
                gamma_32
            };
            let c = pc.length * pc.ratio.sqrt() / pi;
            total += (-t * start).exp() + c * (-t * pc.shift).exp() * g / t.sqrt();
        }
        (total - T::of(known) * (-t * cutoff).exp()).max(T::zero())
    }

    pub fn total(&self, t: T) -> T {
        self.sum_above(t, T::zero(), 0)
    }

    /// Smallest eigenvalue lower bound, `min_j s_j` adjusted by the first
    /// Dirichlet quotient over the whole interval.
    pub fn ground_state_lower_bound(&self) -> T {
        let length = self.pieces.iter().fold(T::zero(), |s, p| s + p.length);
        let ratio = self.pieces.iter().fold(T::zero(), |m, p| m.max(p.ratio));
        let shift = self.pieces.iter().fold(T::lit(f64::MAX), |m, p| m.min(p.shift));
        shift + (pi_over(length) * pi_over(length)) / ratio
    }
}

fn pi_over<T: Real>(l: T) -> T {
    T::pi() / l
}

/// Eigenvalues of a single-mode problem with discretization error estimates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum<T: Real> {
    pub eigenvalues: Vec<T>,
    /// Absolute error estimate per eigenvalue (last Richardson correction).
    pub errors: Vec<T>,
    pub tail: TailBound<T>,
    /// Intervals of the finest grid.
    pub intervals: usize,
    pub levels: usize,
    /// Convergence order of the underlying scheme in `h`.
    pub order: usize,
    pub coordinate: Coordinate,
}

impl<T: Real> Spectrum<T> {
    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn largest(&self) -> T {
        *self.eigenvalues.last().expect("spectrum is nonempty")
    }

    /// Bound on the trace contribution of the eigenvalues not computed.
    pub fn truncation_error_bound(&self, t: T) -> T {
        self.tail.sum_above(t, self.largest(), self.count())
    }

    /// Bound on the trace error caused by the eigenvalue errors.
    pub fn discretization_error_bound(&self, t: T) -> T {
        self.eigenvalues
            .iter()
            .zip(&self.errors)
            .fold(T::zero(), |s, (l, e)| s + t * *e * (-t * (*l - *e).max(T::zero())).exp())
    }
}

/// Second-order conservative finite differences on `n` uniform intervals;
/// `p` at midpoints, `q` and `w` lumped at nodes.
pub fn discretize<T: Real>(sl: &SturmLiouville<T>, n: usize) -> TridiagonalPencil<T> {
    assert!(n >= 2, "need at least two intervals");
    let h = sl.length() / T::of(n);
    let h2 = h * h;
    let m = n - 1;
    let pm: Vec<T> = (0..n)
        .map(|i| sl.p.value(sl.a + h * (T::of(i) + T::half())))
        .collect();
    let mut diag = Vec::with_capacity(m);
    let mut weight = Vec::with_capacity(m);
    for i in 1..n {
        let x = sl.a + h * T::of(i);
        diag.push((pm[i - 1] + pm[i]) / h2 + sl.q.value(x));
        weight.push(sl.w.value(x));
    }
    let off = (1..m).map(|i| -pm[i] / h2).collect();
    TridiagonalPencil { diag, off, weight }
}

/// Grid nodes (interior) of [`discretize`].
pub fn grid_nodes<T: Real>(sl: &SturmLiouville<T>, n: usize) -> Vec<T> {
    let h = sl.length() / T::of(n);
    (1..n).map(|i| sl.a + h * T::of(i)).collect()
}

/// The lowest `count` eigenvalues of the pencil by spectrum slicing.
pub fn lowest_eigenvalues<T: Real>(pencil: &TridiagonalPencil<T>, count: usize) -> Vec<T> {
    let count = count.min(pencil.len());
    let hi = pencil.spectral_upper_bound() * T::lit(1.01) + T::one();
    let mut out = vec![T::zero(); count];
    let mut isolated = Vec::new();
    let mut stack = vec![(T::zero(), hi, 0usize, pencil.count_below(hi))];
    let eps = T::eps();
    while let Some((lo, hi, clo, chi)) = stack.pop() {
        if clo >= count || chi == clo {
            continue;
        }
        if chi == clo + 1 {
            isolated.push((clo, lo, hi));
            continue;
        }
        if hi - lo <= T::two() * eps * (lo.abs() + hi.abs()) {
            for slot in out.iter_mut().take(chi.min(count)).skip(clo) {
                *slot = (lo + hi) * T::half();
            }
            continue;
        }
        let mid = (lo + hi) * T::half();
        let cm = pencil.count_below(mid);
        stack.push((mid, hi, cm, chi));
        stack.push((lo, mid, clo, cm));
    }
    isolated.sort_by_key(|b| b.0);
    for (b, lam) in isolated.iter().zip(bisect_parallel(pencil, &isolated)) {
        out[b.0] = lam;
    }
    out
}

fn bisect_parallel<T: Real>(pencil: &TridiagonalPencil<T>, brackets: &[(usize, T, T)]) -> Vec<T> {
    brackets
        .par_chunks(16)
        .map(|c| pencil.eigenvalues_in(c))
        .collect::<Vec<_>>()
        .concat()
}

/// Eigenvalues on a refined grid, bracketed by predictions from coarser ones.
fn refined_eigenvalues<T: Real>(pencil: &TridiagonalPencil<T>, predictions: &[(T, T)]) -> Vec<T> {
    let brackets: Vec<(usize, T, T)> = predictions
        .iter()
        .enumerate()
        .map(|(k, &(centre, half))| (k, (centre - half).max(T::zero()), centre + half))
        .collect();
    bisect_parallel(pencil, &brackets)
}

/// Result of Richardson extrapolation over grids `h, h/2, h/4, …`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrapolation<T: Real> {
    pub value: T,
    /// Distance to the best extrapolant that ignores the finest grid
    /// (conservative; used to reject under-resolved grids).
    pub correction: T,
    /// Distance to the finest-row extrapolant one order lower (the usual
    /// Romberg error estimate for `value`).
    pub estimate: T,
}

/// Richardson extrapolation with error expansion in `h²`.
pub fn richardson<T: Real>(values: &[T]) -> Extrapolation<T> {
    let n = values.len();
    assert!(n >= 1);
    if n == 1 {
        let inf = T::lit(f64::INFINITY);
        return Extrapolation {
            value: values[0],
            correction: inf,
            estimate: inf,
        };
    }
    let mut table = values.to_vec();
    let mut factor = T::one();
    let mut lower = table[n - 1];
    for j in 1..n {
        factor *= T::lit(4.0);
        lower = table[n - 1];
        for i in (j..n).rev() {
            table[i] = table[i] + (table[i] - table[i - 1]) / (factor - T::one());
        }
    }
    Extrapolation {
        value: table[n - 1],
        correction: (table[n - 1] - table[n - 2]).abs(),
        estimate: (table[n - 1] - lower).abs(),
    }
}

fn base_intervals<T: Real>(sl: &SturmLiouville<T>, lambda_max: T, opts: &GridOptions) -> usize {
    if let Some(n) = opts.base_intervals {
        return n.max(2);
    }
    let mut ratio = T::zero();
    for i in 0..=256 {
        let x = sl.a + sl.length() * T::of(i) / T::lit(256.0);
        ratio = ratio.max(sl.w.value(x) / sl.p.value(x));
    }
    let kappa = (lambda_max * ratio).sqrt();
    let n = (sl.length() * kappa / T::lit(opts.resolution)).to_f().ceil() as usize;
    n.max(opts.min_intervals).min(opts.max_intervals)
}

/// Extrapolated eigenvalues for a prepared Sturm–Liouville problem.
pub fn solve_sturm_liouville<T: Real>(
    sl: &SturmLiouville<T>,
    count: usize,
    base: usize,
    levels: usize,
    rel_tol: f64,
    coordinate: Coordinate,
) -> Result<Spectrum<T>> {
    if count == 0 {
        return Err(domain("need at least one eigenvalue"));
    }
    if levels == 0 {
        return Err(domain("need at least one grid level"));
    }
    let mut per_level: Vec<Vec<T>> = Vec::with_capacity(levels);
    let mut n = base;
    for j in 0..levels {
        let pencil = discretize(sl, n);
        if pencil.len() < count {
            return Err(Error::Resolution {
                index: count,
                fine: f64::NAN,
                coarse: f64::NAN,
            });
        }
        let vals = if j == 0 {
            lowest_eigenvalues(&pencil, count)
        } else {
            let prev = &per_level[j - 1];
            let preds: Vec<(T, T)> = (0..count)
                .map(|k| {
                    if j == 1 {
                        (prev[k], prev[k] * T::lit(0.1) + T::eps())
                    } else {
                        let d = prev[k] - per_level[j - 2][k];
                        (prev[k] + d * T::lit(0.25), d.abs() * T::half() + prev[k] * T::lit(1e-13))
                    }
                })
                .collect();
            refined_eigenvalues(&pencil, &preds)
        };
        per_level.push(vals);
        n *= 2;
    }
    // bisection resolves eigenvalues to about ε‖W⁻¹K‖ on the finest grid
    let roundoff = T::lit(4.0) * T::eps() * discretize(sl, n / 2).spectral_upper_bound();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut errors = Vec::with_capacity(count);
    for k in 0..count {
        let column: Vec<T> = per_level.iter().map(|v| v[k]).collect();
        let ex = richardson(&column);
        let val = ex.value;
        if levels > 1 && ex.correction > T::lit(rel_tol) * val.abs() {
            return Err(Error::Resolution {
                index: k + 1,
                fine: val.to_f(),
                coarse: column[0].to_f(),
            });
        }
        eigenvalues.push(val);
        errors.push(if levels > 1 {
            ex.estimate.max(roundoff)
        } else {
            val.abs() * T::lit(1e-2)
        });
    }
    Ok(Spectrum {
        eigenvalues,
        errors,
        tail: TailBound::from_problem(sl, 64, 16),
        intervals: base << (levels - 1),
        levels,
        order: 2,
        coordinate,
    })
}

fn coordinate_for<T: Real>(problem: &ModeProblem<T>, opts: &GridOptions) -> Result<Coordinate> {
    let c = opts.coordinate.unwrap_or_else(|| problem.default_coordinate());
    if !problem.supports(c) {
        return Err(domain(format!("coordinate {:?} not available for this mode problem", c)));
    }
    Ok(c)
}

/// The lowest `n_eigs` Dirichlet eigenvalues of a mode problem.
pub fn solve_mode<T: Real>(problem: &ModeProblem<T>, n_eigs: usize, opts: &GridOptions) -> Result<Spectrum<T>> {
    let coordinate = coordinate_for(problem, opts)?;
    let sl = problem.sturm_liouville(coordinate)?;
    let base = base_intervals(&sl, eigenvalue_upper_estimate(&sl, n_eigs), opts).max(n_eigs + 2);
    solve_sturm_liouville(&sl, n_eigs, base, opts.levels, opts.rel_tol, coordinate)
}

/// All eigenvalues below `lambda_cut` (at least one).
pub fn solve_mode_below<T: Real>(
    problem: &ModeProblem<T>,
    lambda_cut: T,
    opts: &GridOptions,
) -> Result<Spectrum<T>> {
    let coordinate = coordinate_for(problem, opts)?;
    let sl = problem.sturm_liouville(coordinate)?;
    let base = base_intervals(&sl, lambda_cut, opts);
    let pencil = discretize(&sl, base);
    let count = pencil.count_below(lambda_cut).max(1);
    solve_sturm_liouville(&sl, count, base, opts.levels, opts.rel_tol, coordinate)
}

/// `max q/w + (π n / L)² max p / min w`, an upper bound for `λ_n` by
/// comparison with constant coefficients (sampled).
fn eigenvalue_upper_estimate<T: Real>(sl: &SturmLiouville<T>, n: usize) -> T {
    let (mut pmax, mut wmin, mut smax) = (T::zero(), T::lit(f64::MAX), T::zero());
    for i in 0..=256 {
        let x = sl.a + sl.length() * T::of(i) / T::lit(256.0);
        let (p, q, w) = (sl.p.value(x), sl.q.value(x), sl.w.value(x));
        pmax = pmax.max(p);
        wmin = wmin.min(w);
        smax = smax.max(q / w);
    }
    let k = T::pi() * T::of(n) / sl.length();
    smax + k * k * pmax / wmin
}

/// Eigenpairs on a single grid: eigenvalues, grid nodes, and eigenvectors
/// normalized in the lumped weighted inner product `Σ w_i f_i² h = 1`.
#[derive(Clone, Debug)]
pub struct Eigenpairs<T: Real> {
    pub eigenvalues: Vec<T>,
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub spacing: T,
    pub vectors: Vec<Vec<T>>,
}

pub fn eigenpairs<T: Real>(sl: &SturmLiouville<T>, count: usize, intervals: usize) -> Eigenpairs<T> {
    let pencil = discretize(sl, intervals);
    let eigenvalues = lowest_eigenvalues(&pencil, count);
    let h = sl.length() / T::of(intervals);
    let scale = T::one() / h.sqrt();
    let vectors = eigenvalues
        .par_iter()
        .map(|&l| pencil.eigenvector(l).into_iter().map(|v| v * scale).collect())
        .collect();
    Eigenpairs {
        eigenvalues,
        nodes: grid_nodes(sl, intervals),
        weights: pencil.weight.clone(),
        spacing: h,
        vectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Profile, WeightedInterval};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn flat_interval_closed_form() {
        let p = ModeProblem::q_phi(WeightedInterval::flat(2.0f64).unwrap());
        let s = solve_mode(&p, 10, &GridOptions::default()).unwrap();
        for (k, l) in s.eigenvalues.iter().enumerate() {
            let exact = (PI * (k + 1) as f64 / 2.0).powi(2);
            assert_relative_eq!(*l, exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn richardson_removes_h2_terms() {
        let vals: Vec<f64> = [1.0, 0.5, 0.25, 0.125]
            .iter()
            .map(|h: &f64| 3.0 + 2.0 * h * h + 0.7 * h.powi(4) - 0.1 * h.powi(6))
            .collect();
        let v = richardson(&vals).value;
        assert_relative_eq!(v, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_cylinder_mode_closed_form() {
        let (l, a, b, m) = (0.7f64, 0.3, 1.9, 2usize);
        let p = ModeProblem::conformal_flat(l, a, b, m, Profile::zero()).unwrap();
        let s = solve_mode(&p, 6, &GridOptions::default()).unwrap();
        let mu2 = (2.0 * PI * m as f64 / l).powi(2);
        for (k, lam) in s.eigenvalues.iter().enumerate() {
            let exact = mu2 + (PI * (k + 1) as f64 / (b - a)).powi(2);
            assert_relative_eq!(*lam, exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn collar_ground_state_quadratic_form_bound() {
        let (l, a, b, m) = (0.5f64, 1.0, PI - 1.0, 3usize);
        let p = ModeProblem::collar(l, a, b, m).unwrap();
        let s = solve_mode(&p, 1, &GridOptions::default()).unwrap();
        let bound = (2.0 * PI * m as f64 / l).powi(2) * a.sin().powi(2);
        assert!(s.eigenvalues[0] >= bound, "{} < {}", s.eigenvalues[0], bound);
    }

    #[test]
    fn liouville_and_natural_coordinates_agree() {
        let p = ModeProblem::collar(0.5f64, 0.8, 2.2, 1).unwrap();
        let lv = solve_mode(&p, 8, &GridOptions::default()).unwrap();
        let nat = solve_mode(
            &p,
            8,
            &GridOptions {
                coordinate: Some(Coordinate::Natural),
                ..GridOptions::default()
            },
        )
        .unwrap();
        for (x, y) in lv.eigenvalues.iter().zip(&nat.eigenvalues) {
            assert_relative_eq!(*x, *y, max_relative = 1e-8);
        }
    }

    #[test]
    fn tail_bound_dominates_exact_tail() {
        let p = ModeProblem::q_phi(WeightedInterval::flat(PI).unwrap());
        let s = solve_mode(&p, 5, &GridOptions::default()).unwrap();
        for &t in &[1e-3, 1e-2, 0.1, 1.0] {
            let exact: f64 = (6..200000u64).map(|k| (-t * (k * k) as f64).exp()).sum();
            let b = s.truncation_error_bound(t);
            assert!(b >= exact, "t = {}: bound {} < exact {}", t, b, exact);
        }
        for k in 1..20 {
            assert!(s.tail.eigenvalue_lower_bound(k) <= (k * k) as f64 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let p = ModeProblem::collar(0.5f64, 0.6, 2.4, 2).unwrap();
        let sl = p.sturm_liouville(Coordinate::Natural).unwrap();
        let e = eigenpairs(&sl, 6, 800);
        for i in 0..6 {
            for j in 0..6 {
                let g: f64 = (0..e.nodes.len())
                    .map(|n| e.vectors[i][n] * e.vectors[j][n] * e.weights[n] * e.spacing)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g - target).abs() < 1e-8, "<f{}, f{}> = {}", i, j, g);
            }
        }
    }
}
