use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Profile;
use crate::scalar::Real;
use crate::sturm_liouville::problem::ModeProblem;
use crate::sturm_liouville::solver::{eigenpairs, richardson, solve_mode, GridOptions, Spectrum};

/// A trace value with its error split into the truncation part (omitted
/// eigenvalues, rigorous given the coefficient bounds) and the
/// discretization part (Richardson estimate).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceValue<T: Real> {
    pub value: T,
    pub tail: T,
    pub discretization: T,
}

impl<T: Real> TraceValue<T> {
    pub fn error(&self) -> T {
        self.tail + self.discretization
    }
}

/// `Σ_k e^{−t λ_k}` over the computed spectrum, with the omitted tail bounded.
pub fn mode_heat_trace<T: Real>(spectrum: &Spectrum<T>, t: T) -> TraceValue<T> {
    let value = spectrum
        .eigenvalues
        .iter()
        .fold(T::zero(), |s, l| s + (-t * *l).exp());
    TraceValue {
        value,
        tail: spectrum.truncation_error_bound(t),
        discretization: spectrum.discretization_error_bound(t),
    }
}

/// Reference measure for pointwise kernel values. The operator is
/// self-adjoint on `L²(e^{2φ} dx)`; the same trace can be written against the
/// length measure `e^{φ} dx`. Traces agree; kernel diagonals differ by the
/// factor `e^{φ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    /// `e^{2φ} dx` (for collar modes, `dv / sin² v`).
    Natural,
    /// `e^{φ} dx` (for collar modes, `dv / sin v`).
    Linear,
}

fn level_intervals<T: Real>(spectrum: &Spectrum<T>) -> Vec<usize> {
    let base = spectrum.intervals >> (spectrum.levels - 1);
    (0..spectrum.levels).map(|j| base << j).collect()
}

/// `Σ_k e^{−t λ_k} ∫ ϕ |f_k|² dμ` with eigenfunctions normalized in the
/// weighted space. Extrapolated over the same grids as the spectrum.
pub fn modified_mode_trace<T: Real>(
    problem: &ModeProblem<T>,
    varphi: &Profile<T>,
    t: T,
    n_eigs: usize,
    opts: &GridOptions,
) -> Result<TraceValue<T>> {
    let spectrum = solve_mode(problem, n_eigs, opts)?;
    let sl = problem.sturm_liouville(spectrum.coordinate)?;
    let mut per_level = Vec::new();
    let mut sup = T::zero();
    for n in level_intervals(&spectrum) {
        let e = eigenpairs(&sl, n_eigs, n);
        let phi_at: Vec<T> = e
            .nodes
            .iter()
            .map(|x| varphi.value(problem.to_natural(spectrum.coordinate, *x)))
            .collect();
        sup = phi_at.iter().fold(sup, |m, v| m.max(v.abs()));
        let mut total = T::zero();
        for (lam, f) in e.eigenvalues.iter().zip(&e.vectors) {
            let g = f
                .iter()
                .zip(&e.weights)
                .zip(&phi_at)
                .fold(T::zero(), |s, ((fi, wi), pi)| s + *pi * *fi * *fi * *wi);
            total += (-t * *lam).exp() * g * e.spacing;
        }
        per_level.push(total);
    }
    let ex = richardson(&per_level);
    let value = ex.value;
    let disc = if per_level.len() > 1 { ex.estimate } else { value.abs() * T::lit(1e-2) };
    Ok(TraceValue {
        value,
        tail: sup * spectrum.truncation_error_bound(t),
        discretization: disc + sup * spectrum.discretization_error_bound(t),
    })
}

/// Truncated kernel diagonal `Σ_k e^{−tλ_k} f_k(x)²` on the finest grid,
/// returned as `(v, value)` in the problem's own variable.
pub fn kernel_diagonal<T: Real>(
    problem: &ModeProblem<T>,
    t: T,
    n_eigs: usize,
    intervals: usize,
    measure: Measure,
) -> Result<Vec<(T, T)>> {
    let coordinate = problem.default_coordinate();
    let sl = problem.sturm_liouville(coordinate)?;
    let e = eigenpairs(&sl, n_eigs, intervals);
    let phi = problem.log_density();
    Ok(e
        .nodes
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let v = problem.to_natural(coordinate, *x);
            // w dx equals e^{2φ} dv in either coordinate, so this is already
            // the density against the natural measure
            let natural = e
                .eigenvalues
                .iter()
                .zip(&e.vectors)
                .fold(T::zero(), |s, (l, f)| s + (-t * *l).exp() * f[i] * f[i]);
            let value = match measure {
                Measure::Natural => natural,
                Measure::Linear => natural * phi.value(v).exp(),
            };
            (v, value)
        })
        .collect())
}
