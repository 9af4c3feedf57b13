//! Traces of separable cylinders as sums over Fourier modes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::TraceCoefficients;
use crate::scalar::Real;
use crate::special::gaussian_sum_tail;
use crate::spectral_zeta::trace::{HeatTrace, LogGrid};
use crate::sturm_liouville::{
    mode_heat_trace, solve_mode_below, GridOptions, ModeProblem, Spectrum, TailBound, TraceValue,
};

/// How many times each Fourier mode `m` occurs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Multiplicity {
    /// Full circle: `e^{±2πimu/l}`; `m = 0` once, `m ≥ 1` twice.
    Cylinder,
    /// Half circle with Dirichlet sides: `sin(2πmu/l)`, `m ≥ 1` once.
    HalfCylinder,
    /// Only `m = 0`.
    ZeroMode,
}

impl Multiplicity {
    pub fn of(&self, m: usize) -> usize {
        match (self, m) {
            (Multiplicity::Cylinder, 0) => 1,
            (Multiplicity::Cylinder, _) => 2,
            (Multiplicity::HalfCylinder, 0) => 0,
            (Multiplicity::HalfCylinder, _) => 1,
            (Multiplicity::ZeroMode, 0) => 1,
            (Multiplicity::ZeroMode, _) => 0,
        }
    }

    fn max(&self) -> usize {
        match self {
            Multiplicity::Cylinder => 2,
            Multiplicity::HalfCylinder | Multiplicity::ZeroMode => 1,
        }
    }
}

/// Truncation settings for a mode sum.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModeSumOptions {
    /// Smallest time at which the trace must be accurate.
    pub t_min: f64,
    /// Absolute budget for all omitted eigenvalues and modes at `t_min`.
    pub budget: f64,
    pub grid: GridOptions,
}

impl Default for ModeSumOptions {
    fn default() -> Self {
        Self {
            t_min: 1e-4,
            budget: 1e-10,
            grid: GridOptions::default(),
        }
    }
}

/// Spectra of the modes `m = 0..=M` of a separable cylinder whose mode
/// operators satisfy `λ(m) ≥ λ(0) + m² · gap`.
#[derive(Clone, Debug)]
pub struct ModeFamily<T: Real> {
    pub spectra: Vec<Spectrum<T>>,
    /// `(2π/l)² min e^{−2ψ}`.
    pub gap: T,
    /// Eigenvalue cutoff used for every mode.
    pub cutoff: T,
}

/// Smallest `Λ` with the tail bound `Σ_{λ>Λ} e^{−tλ}` below `budget`.
pub fn eigenvalue_cutoff<T: Real>(tail: &TailBound<T>, t: T, budget: T) -> T {
    let mut hi = T::one() / t;
    while tail.sum_above(t, hi, 0) > budget {
        hi += hi;
    }
    let mut lo = T::zero();
    for _ in 0..60 {
        let mid = (lo + hi) * T::half();
        if tail.sum_above(t, mid, 0) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

impl<T: Real> ModeFamily<T> {
    /// Solves every mode that can hold an eigenvalue below the cutoff.
    pub fn solve<F>(make: F, gap: T, opts: &ModeSumOptions) -> Result<Self>
    where
        F: Fn(usize) -> Result<ModeProblem<T>> + Sync,
    {
        if !(gap > T::zero()) {
            return Err(domain("mode gap must be positive"));
        }
        let t = T::lit(opts.t_min);
        let zero = make(0)?;
        let coordinate = opts.grid.coordinate.unwrap_or_else(|| zero.default_coordinate());
        let tail0 = TailBound::from_problem(&zero.sturm_liouville(coordinate)?, 64, 16);
        let budget = T::lit(opts.budget);
        let rough = eigenvalue_cutoff(&tail0, t, budget);
        let modes = (rough / gap).sqrt().to_f().floor() as usize + 1;
        let cutoff = eigenvalue_cutoff(&tail0, t, budget / T::of(4 * modes));
        let top = (cutoff / gap).sqrt().to_f().floor() as usize;
        let spectra = (0..=top)
            .into_par_iter()
            .map(|m| solve_mode_below(&make(m)?, cutoff, &opts.grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spectra, gap, cutoff })
    }

    pub fn modes(&self) -> usize {
        self.spectra.len()
    }

    pub fn eigenvalue_count(&self) -> usize {
        self.spectra.iter().map(|s| s.count()).sum()
    }

    pub fn mode_trace(&self, m: usize, t: T) -> TraceValue<T> {
        mode_heat_trace(&self.spectra[m], t)
    }

    /// `Σ_m mult(m) θ_m(t)` with the omitted modes bounded by
    /// `θ₀(t) Σ_{m>M} e^{−t m² gap}` per copy.
    pub fn trace(&self, t: T, mult: Multiplicity) -> TraceValue<T> {
        let mut acc = TraceValue {
            value: T::zero(),
            tail: T::zero(),
            discretization: T::zero(),
        };
        for (m, _) in self.spectra.iter().enumerate() {
            let k = mult.of(m);
            if k == 0 {
                continue;
            }
            let v = self.mode_trace(m, t);
            let w = T::of(k);
            acc.value += w * v.value;
            acc.tail += w * v.tail;
            acc.discretization += w * v.discretization;
        }
        let zero = self.mode_trace(0, t);
        let omitted = T::of(mult.max())
            * (zero.value + zero.error())
            * gaussian_sum_tail(t * self.gap, self.spectra.len());
        acc.tail += omitted;
        acc
    }

    /// Lower bound on the smallest eigenvalue that enters with nonzero
    /// multiplicity.
    pub fn ground_state(&self, mult: Multiplicity) -> T {
        self.spectra
            .iter()
            .enumerate()
            .filter(|(m, _)| mult.of(*m) > 0)
            .map(|(_, s)| s.eigenvalues[0] - s.errors[0])
            .fold(T::lit(f64::MAX), |a, b| a.min(b))
    }
}

/// Samples `θ(t) = Σ_m mult(m) θ_m(t)` on `grid`.
pub fn heat_trace_of_product<T: Real>(
    family: &ModeFamily<T>,
    mult: Multiplicity,
    grid: LogGrid,
    coefficients: TraceCoefficients<T>,
    provenance: impl Into<String>,
) -> Result<HeatTrace<T>> {
    HeatTrace::sample(
        |t| family.trace(t, mult),
        grid,
        coefficients,
        family.ground_state(mult),
        provenance,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Profile;
    use crate::spectral_zeta::closed_form::flat_cylinder_trace;
    use std::f64::consts::PI;

    #[test]
    fn flat_cylinder_mode_sum_matches_double_sum() {
        let (l, a, b) = (0.8f64, 0.2, 1.4);
        let opts = ModeSumOptions {
            t_min: 1e-3,
            ..ModeSumOptions::default()
        };
        let fam = ModeFamily::solve(
            |m| ModeProblem::conformal_flat(l, a, b, m, Profile::zero()),
            (2.0 * PI / l).powi(2),
            &opts,
        )
        .unwrap();
        for &t in &[1e-3, 1e-2, 0.1, 1.0] {
            let v = fam.trace(t, Multiplicity::Cylinder);
            let exact = flat_cylinder_trace(l, b - a, t).value;
            assert!((v.value - exact).abs() < 1e-10 + v.error(), "t={t}: {} vs {exact}", v.value);
            assert!((v.value - exact).abs() < 1e-9, "t={t}: {} vs {exact}", v.value);
            assert!(v.error() < 1e-6, "t={t}: error {}", v.error());
        }
    }
}
