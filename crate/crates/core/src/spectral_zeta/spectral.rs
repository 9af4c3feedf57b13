//! Heights computed from spectra (or exact traces) through the Mellin
//! regularization.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{FlatCylinder, TraceAsymptotics, TraceCoefficients, WeightedInterval};
use crate::scalar::Real;
use crate::spectral_zeta::closed_form::flat_cylinder_trace;
use crate::spectral_zeta::mellin::{zeta_prime_at_zero, Height, MellinOptions};
use crate::spectral_zeta::product::{eigenvalue_cutoff, ModeSumOptions};
use crate::spectral_zeta::trace::{HeatTrace, LogGrid};
use crate::sturm_liouville::{solve_mode_below, GridOptions, ModeProblem, TailBound};

/// Everything needed to turn a geometry into a height.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct HeightOptions {
    pub mellin: MellinOptions,
    pub grid: GridOptions,
    /// Absolute trace error budget at the smallest sampled time.
    pub trace_budget: Option<f64>,
}

impl HeightOptions {
    pub fn trace_budget(&self) -> f64 {
        self.trace_budget.unwrap_or(1e-10)
    }

    /// Smallest sampled time after the grid is anchored at the split.
    pub fn sampled_t_min(&self) -> Result<f64> {
        let m = &self.mellin;
        Ok(LogGrid::covering(m.t_min, m.split, 10.0 * m.split, m.per_decade)?.t_min())
    }

    /// Places `t_min` so that the winding terms `e^{−l²/4t}` of a circle of
    /// length `l` stay below `e^{−25}` across the fitting window, and no
    /// lower (the eigenvalue count grows like `1/t_min`).
    pub fn resolving_circle(mut self, l: f64) -> Self {
        self.mellin.t_min = l * l / (100.0 * 10f64.powf(self.mellin.fit_decades));
        self
    }

    pub fn mode_sum(&self) -> Result<ModeSumOptions> {
        Ok(ModeSumOptions {
            t_min: self.sampled_t_min()?,
            budget: self.trace_budget(),
            grid: self.grid,
        })
    }
}

/// Sampled heat trace of `Q_φ` on a weighted interval, from its computed
/// spectrum.
pub fn interval_trace<T: Real>(interval: &WeightedInterval<T>, opts: &HeightOptions) -> Result<HeatTrace<T>> {
    mode_trace(
        &ModeProblem::q_phi(interval.clone()),
        interval.trace_asymptotics(),
        opts,
        "weighted interval",
    )
}

/// Sampled heat trace of a single mode problem, from its computed spectrum.
pub fn mode_trace<T: Real>(
    problem: &ModeProblem<T>,
    coefficients: TraceCoefficients<T>,
    opts: &HeightOptions,
    what: &str,
) -> Result<HeatTrace<T>> {
    let coordinate = opts.grid.coordinate.unwrap_or_else(|| problem.default_coordinate());
    let tail = TailBound::from_problem(&problem.sturm_liouville(coordinate)?, 64, 16);
    let t_min = T::lit(opts.sampled_t_min()?);
    let cutoff = eigenvalue_cutoff(&tail, t_min, T::lit(opts.trace_budget()));
    let spectrum = solve_mode_below(problem, cutoff, &opts.grid)?;
    let grid = opts.mellin.grid((spectrum.eigenvalues[0] - spectrum.errors[0]).to_f())?;
    HeatTrace::from_spectrum(&spectrum, grid, coefficients, what)
}

/// `Z_φ′(0)` of `Q_φ` on a weighted interval from its computed spectrum.
pub fn interval_height<T: Real>(interval: &WeightedInterval<T>, opts: &HeightOptions) -> Result<Height<T>> {
    let trace = interval_trace(interval, opts)?;
    zeta_prime_at_zero(&trace, T::lit(opts.mellin.split), &opts.mellin)
}

/// Spectral companion of [`one_d_polyakov`](super::one_d_polyakov).
pub fn one_d_polyakov_spectral<T: Real>(interval: &WeightedInterval<T>, opts: &HeightOptions) -> Result<Height<T>> {
    interval_height(interval, opts)
}

/// Exact heat trace of a flat cylinder sampled on the Mellin grid.
pub fn flat_cylinder_sampled_trace<T: Real>(c: &FlatCylinder<T>, opts: &MellinOptions) -> Result<HeatTrace<T>> {
    if c.psi.is_some() {
        return Err(domain("exact trace is available for the flat metric only"));
    }
    let length = c.height_length();
    let lambda1 = (T::pi() / length).powi(2);
    let grid = opts.grid(lambda1.to_f())?;
    HeatTrace::sample(
        |t| flat_cylinder_trace(c.l, length, t),
        grid,
        c.trace_asymptotics(),
        lambda1,
        "flat cylinder",
    )
}

/// Height of a flat cylinder from its exact trace.
pub fn flat_cylinder_height<T: Real>(c: &FlatCylinder<T>, opts: &MellinOptions) -> Result<Height<T>> {
    let trace = flat_cylinder_sampled_trace(c, opts)?;
    zeta_prime_at_zero(&trace, T::lit(opts.split), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_zeta::closed_form::{flat_cylinder_zeta_prime, interval_zeta_prime};

    #[test]
    fn flat_interval_from_spectrum() {
        for len in [0.5f64, 1.0, std::f64::consts::PI - 0.2] {
            let h = interval_height(&WeightedInterval::flat(len).unwrap(), &HeightOptions::default()).unwrap();
            let exact = interval_zeta_prime(len).unwrap();
            assert!((h.value - exact).abs() < 1e-7, "L={len}: {} vs {exact} (err {})", h.value, h.error);
        }
    }

    #[test]
    fn flat_cylinder_closed_form() {
        for (l, a, b) in [(0.5f64, 0.0, 1.0), (1.3, 0.2, 0.9), (0.3, 1.0, 2.1)] {
            let c = FlatCylinder::new(l, a, b).unwrap();
            let h = flat_cylinder_height(&c, &MellinOptions::default()).unwrap();
            let exact = flat_cylinder_zeta_prime(l, b - a).unwrap();
            assert!((h.value - exact).abs() < 1e-8, "{l},{a},{b}: {} vs {exact} (err {})", h.value, h.error);
        }
    }
}
