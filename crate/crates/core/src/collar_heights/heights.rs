use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    collar_zero_mode_coefficients, CollarCylinder, FlatCylinder, HalfCollar, Profile, TraceAsymptotics,
    WeightedInterval,
};
use crate::scalar::Real;
use crate::spectral_zeta::{
    flat_cylinder_zeta_prime, heat_trace_of_product, mode_trace, one_d_polyakov, zeta_prime_at_zero, Height, HeightOptions,
    ModeFamily, Multiplicity,
};
use crate::sturm_liouville::{Coordinate, GridOptions, ModeProblem};
use crate::uniformization::cylinder_polyakov_terms;

/// How a collar height is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Route {
    /// Mode-sum heat trace and Mellin regularization.
    Direct,
    /// Polyakov–Alvarez from the flat cylinder with `ψ = −log sin v`.
    Conformal,
}

impl Route {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" | "spectral" => Some(Route::Direct),
            "conformal" | "polyakov" => Some(Route::Conformal),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::Conformal => "conformal",
        }
    }
}

/// `(2π/l)² min_{[A,B]} sin² v`: every mode-`m` eigenvalue exceeds the
/// corresponding mode-0 one by at least `m²` times this.
pub fn collar_mode_gap<T: Real>(c: &CollarCylinder<T>) -> T {
    let s = c.a.sin().min(c.b.sin());
    (T::two_pi() / c.l).powi(2) * s * s
}

/// Spectra of the modes `Δ_l(m)` on `[A, B]`.
pub fn collar_mode_family<T: Real>(
    c: &CollarCylinder<T>,
    coordinate: Coordinate,
    opts: &HeightOptions,
) -> Result<ModeFamily<T>> {
    let mut sum = opts.mode_sum()?;
    sum.grid = GridOptions {
        coordinate: Some(coordinate),
        ..sum.grid
    };
    let (l, a, b) = (c.l, c.a, c.b);
    ModeFamily::solve(|m| ModeProblem::collar(l, a, b, m), collar_mode_gap(c), &sum)
}

/// Height of the collar from its mode-sum trace.
pub fn direct_collar_height<T: Real>(c: &CollarCylinder<T>, opts: &HeightOptions) -> Result<Height<T>> {
    let opts = &opts.resolving_circle(c.l.to_f());
    let family = collar_mode_family(c, Coordinate::Liouville, opts)?;
    height_of_family(&family, Multiplicity::Cylinder, c.trace_coefficients(), opts, "collar")
}

fn height_of_family<T: Real>(
    family: &ModeFamily<T>,
    mult: Multiplicity,
    coefficients: crate::geometry::TraceCoefficients<T>,
    opts: &HeightOptions,
    what: &str,
) -> Result<Height<T>> {
    let grid = opts.mellin.grid(family.ground_state(mult).to_f())?;
    let trace = heat_trace_of_product(family, mult, grid, coefficients, what)?;
    zeta_prime_at_zero(&trace, T::lit(opts.mellin.split), &opts.mellin)
}

/// Height of the collar as the flat cylinder `[0,l] × [A,B]` (closed form)
/// shifted by the Polyakov–Alvarez terms of `ψ = −log sin v`.
pub fn conformal_collar_height<T: Real>(c: &CollarCylinder<T>) -> Result<Height<T>> {
    let h0 = flat_cylinder_zeta_prime(c.l, c.b - c.a)?;
    let flat = FlatCylinder::new(c.l, c.a, c.b)?.with_factor(Profile::neg_log_sin())?;
    let terms = cylinder_polyakov_terms(&flat)?;
    let value = h0 + terms.shift();
    Ok(Height {
        value,
        zeta_at_zero: T::zero(),
        // adaptive quadrature at 1e-14 plus rounding in the closed form
        error: T::lit(1e-12) * value.abs().max(T::one()),
        split: T::zero(),
    })
}

pub fn collar_height<T: Real>(c: &CollarCylinder<T>, route: Route, opts: &HeightOptions) -> Result<Height<T>> {
    match route {
        Route::Direct => direct_collar_height(c, opts),
        Route::Conformal => conformal_collar_height(c),
    }
}

/// `Z′(0)` of the zero mode `Δ_l(0) = Q_φ`, `φ = −log sin v`, by the 1-D
/// Polyakov formula.
pub fn zero_mode_zeta_prime<T: Real>(c: &CollarCylinder<T>) -> Result<T> {
    one_d_polyakov(&WeightedInterval::new(c.a, c.b, Profile::neg_log_sin())?)
}

/// `Z′(0)` of the zero mode from its computed spectrum, discretized in the
/// Liouville variable.
pub fn zero_mode_height<T: Real>(c: &CollarCylinder<T>, opts: &HeightOptions) -> Result<Height<T>> {
    let interval = WeightedInterval::new(c.a, c.b, Profile::neg_log_sin())?;
    let mut opts = *opts;
    opts.grid.coordinate = Some(Coordinate::Liouville);
    let trace = mode_trace(
        &ModeProblem::collar(c.l, c.a, c.b, 0)?,
        interval.trace_asymptotics(),
        &opts,
        "collar zero mode",
    )?;
    zeta_prime_at_zero(&trace, T::lit(opts.mellin.split), &opts.mellin)
}

/// How a half-collar height is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfRoute {
    /// `(h(C) − Z′(0)) / 2` with `h(C)` from the given route.
    Identity(Route),
    /// Mode sum over `sin(2πmu/l)`, `m ≥ 1`, discretized in `v` (independent
    /// of the Liouville-variable discretization used for `h(C)`).
    Spectral,
}

pub fn half_collar_height<T: Real>(h: &HalfCollar<T>, route: HalfRoute, opts: &HeightOptions) -> Result<Height<T>> {
    let c = &h.base;
    match route {
        HalfRoute::Identity(r) => {
            let full = collar_height(c, r, opts)?;
            let z = zero_mode_zeta_prime(c)?;
            Ok(Height {
                value: (full.value - z) * T::half(),
                zeta_at_zero: (full.zeta_at_zero - collar_zero_mode_coefficients(c).c3) * T::half(),
                error: full.error * T::half(),
                split: full.split,
            })
        }
        HalfRoute::Spectral => {
            let opts = &opts.resolving_circle(c.l.to_f());
            let family = collar_mode_family(c, Coordinate::Natural, opts)?;
            height_of_family(
                &family,
                Multiplicity::HalfCylinder,
                h.identity_trace_coefficients(),
                opts,
                "half collar",
            )
        }
    }
}

/// Every height attached to one collar.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CollarHeightResult<T: Real> {
    pub l: T,
    pub a: T,
    pub b: T,
    pub h_direct: Option<Height<T>>,
    pub h_conformal: Height<T>,
    /// Half collar through the heights identity.
    pub h_half: Height<T>,
    /// Half collar from its own mode sum, when requested.
    pub h_half_spectral: Option<Height<T>>,
    /// `Z′(0)` of the zero mode.
    pub z_prime: T,
}

impl<T: Real> CollarHeightResult<T> {
    /// `|h_direct − h_conformal|` and the combined error allowance.
    pub fn route_gap(&self) -> Option<(T, T)> {
        self.h_direct
            .map(|d| ((d.value - self.h_conformal.value).abs(), d.error + self.h_conformal.error))
    }

    /// `|2 h_III − h(C) + Z′(0)|` for the spectral half-collar height against
    /// the direct (or, without it, conformal) collar height.
    pub fn identity_defect(&self) -> T {
        let full = self.h_direct.unwrap_or(self.h_conformal).value;
        let half = self.h_half_spectral.unwrap_or(self.h_half).value;
        (T::two() * half - full + self.z_prime).abs()
    }
}

/// Which routes [`collar_report`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRoutes {
    pub direct: bool,
    pub half_spectral: bool,
}

/// All heights of a collar, with the route-consistency check applied when
/// the direct route is evaluated.
pub fn collar_report<T: Real>(
    c: &CollarCylinder<T>,
    routes: ReportRoutes,
    opts: &HeightOptions,
) -> Result<CollarHeightResult<T>> {
    let h_conformal = conformal_collar_height(c)?;
    let h_direct = if routes.direct {
        Some(direct_collar_height(c, opts)?)
    } else {
        None
    };
    let z_prime = zero_mode_zeta_prime(c)?;
    let full = h_direct.unwrap_or(h_conformal);
    let h_half = Height {
        value: (full.value - z_prime) * T::half(),
        zeta_at_zero: (full.zeta_at_zero + T::half()) * T::half(),
        error: full.error * T::half(),
        split: full.split,
    };
    let h_half_spectral = if routes.half_spectral {
        Some(half_collar_height(&HalfCollar { base: *c }, HalfRoute::Spectral, opts)?)
    } else {
        None
    };
    let out = CollarHeightResult {
        l: c.l,
        a: c.a,
        b: c.b,
        h_direct,
        h_conformal,
        h_half,
        h_half_spectral,
        z_prime,
    };
    if let Some((gap, allowed)) = out.route_gap() {
        if gap > allowed {
            return Err(Error::RouteDisagreement {
                what: format!("collar height (l = {:?}, A = {:?}, B = {:?})", c.l, c.a, c.b),
                difference: gap.to_f(),
                allowed: allowed.to_f(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn conformal_route_is_reflection_invariant() {
        let c = CollarCylinder::new(0.3f64, 0.4, 1.9).unwrap();
        let h = conformal_collar_height(&c).unwrap().value;
        let r = conformal_collar_height(&c.reflected()).unwrap().value;
        assert!((h - r).abs() < 1e-12);
        assert_eq!(h, conformal_collar_height(&c).unwrap().value);
    }

    #[test]
    fn routes_agree_on_moderate_collar() {
        let c = CollarCylinder::new(0.5f64, 1.0, PI - 1.0).unwrap();
        let report = collar_report(
            &c,
            ReportRoutes {
                direct: true,
                half_spectral: false,
            },
            &HeightOptions::default(),
        )
        .unwrap();
        let (gap, allowed) = report.route_gap().unwrap();
        assert!(gap < allowed && gap < 1e-6, "gap {gap:e}");
        // the identity inverts exactly
        let rebuilt = 2.0 * report.h_half.value + report.z_prime;
        assert!((rebuilt - report.h_direct.unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn zero_mode_closed_form() {
        let c = CollarCylinder::new(0.1f64, 0.2, PI - 0.2).unwrap();
        let expected = 0.2f64.sin().ln() - (2.0 * (PI - 0.4)).ln();
        assert!((zero_mode_zeta_prime(&c).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn degenerate_half_collar_rejected() {
        assert!(HalfCollar::new(0.2f64, 1.0, 1.0).is_err());
    }
}
