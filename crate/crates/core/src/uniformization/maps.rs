//! The maps between the two uniform representatives of a conformal class:
//! `Ψ` (flat with constant boundary curvature → constant curvature with
//! geodesic boundary) and `Φ` (its inverse).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MetricSurface;
use crate::scalar::Real;
use crate::uniformization::functionals::{minimize_f1, minimize_f2, NewtonOptions, UniformizationResult};
use crate::uniformization::laplace::{uniformity, Uniformity};
use crate::uniformization::normalize::{flatten, normalize_flat, normalize_geodesic_boundary};
use crate::uniformization::polyakov::{mesh_polyakov_terms, PolyakovAlvarezTerms};
use crate::uniformization::sparse::dot;

/// Which uniform type a metric is expected to have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UniformType {
    /// Constant Gaussian curvature, geodesic boundary.
    ConstantCurvature,
    /// Flat, constant geodesic curvature on the boundary.
    FlatBoundary,
}

impl UniformType {
    pub fn label(&self) -> &'static str {
        match self {
            UniformType::ConstantCurvature => "I",
            UniformType::FlatBoundary => "II",
        }
    }

    /// Largest violation of the defining conditions, made scale invariant
    /// as `spread(K)·A/2π` and `spread(k)·L/2π` (with `|K|`, `|k|` in place
    /// of the spread for the quantity that must vanish). Unlike ratios to
    /// the mean curvature this stays meaningful when `χ = 0`.
    pub fn violation(&self, u: &Uniformity) -> f64 {
        let tau = std::f64::consts::TAU;
        let (gauss, geodesic) = match self {
            UniformType::ConstantCurvature => (u.gauss_spread, u.max_abs_geodesic),
            UniformType::FlatBoundary => (u.max_abs_gauss, u.geodesic_spread),
        };
        (gauss * u.area).max(geodesic * u.boundary_length) / tau
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MapOptions {
    pub newton: NewtonOptions,
    /// Relative tolerance on the input's uniformity conditions.
    pub uniformity_tolerance: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            uniformity_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct UniformMap<T: Real> {
    pub metric: MetricSurface<T>,
    /// Total conformal factor relative to the input metric.
    pub factor: Vec<T>,
    pub normalization: Vec<T>,
    pub result: UniformizationResult<T>,
}

fn check_type<T: Real>(s: &MetricSurface<T>, kind: UniformType, tol: f64) -> Result<()> {
    let v = kind.violation(&uniformity(s));
    if v > tol {
        return Err(Error::Precondition(format!(
            "input is not of type {} (violation {v:.3e}, tolerance {tol:.1e})",
            kind.label()
        )));
    }
    Ok(())
}

fn compose<T: Real>(
    input: &MetricSurface<T>,
    normalization: Vec<T>,
    result: UniformizationResult<T>,
) -> Result<UniformMap<T>> {
    let factor: Vec<T> = normalization.iter().zip(&result.factor).map(|(a, b)| *a + *b).collect();
    Ok(UniformMap {
        metric: input.conformal(&factor)?,
        factor,
        normalization,
        result,
    })
}

/// The uniform metric of the given type in the conformal class of `s`, with
/// area `area`; no uniformity is assumed of `s`.
pub fn uniformize<T: Real>(
    s: &MetricSurface<T>,
    kind: UniformType,
    area: T,
    opts: &MapOptions,
) -> Result<UniformMap<T>> {
    match kind {
        UniformType::ConstantCurvature => {
            let (normalized, phi0) = normalize_geodesic_boundary(s)?;
            let r = minimize_f1(&normalized, area, &opts.newton)?;
            compose(s, phi0, r)
        }
        UniformType::FlatBoundary => {
            let (flat, phi0) = flatten(s)?;
            let r = minimize_f2(&flat, area, &opts.newton)?;
            compose(s, phi0, r)
        }
    }
}

/// `Ψ`: a type II metric to the type I metric of the same conformal class
/// with the given area.
pub fn map_psi<T: Real>(sigma: &MetricSurface<T>, area: T, opts: &MapOptions) -> Result<UniformMap<T>> {
    check_type(sigma, UniformType::FlatBoundary, opts.uniformity_tolerance)?;
    uniformize(sigma, UniformType::ConstantCurvature, area, opts)
}

/// `Φ`: a type I metric to the type II metric of the same conformal class
/// with the given area.
pub fn map_phi<T: Real>(tau: &MetricSurface<T>, area: T, opts: &MapOptions) -> Result<UniformMap<T>> {
    check_type(tau, UniformType::ConstantCurvature, opts.uniformity_tolerance)?;
    normalize_flat(tau, opts.uniformity_tolerance)?;
    uniformize(tau, UniformType::FlatBoundary, area, opts)
}

/// `max |u − u′|` between the log scales of two metrics on the same mesh.
pub fn log_scale_discrepancy<T: Real>(a: &MetricSurface<T>, b: &MetricSurface<T>) -> T {
    a.log_scale()
        .iter()
        .zip(b.log_scale())
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RoundTrip<T: Real> {
    /// `max |log scale of Φ(Ψ(σ)) − log scale of σ|`.
    pub discrepancy: T,
    pub psi_residual: T,
    pub phi_residual: T,
}

/// `Φ ∘ Ψ` on a type II metric; areas are kept at those of the input and of
/// the intermediate type I metric.
pub fn round_trip<T: Real>(sigma: &MetricSurface<T>, area: T, opts: &MapOptions) -> Result<RoundTrip<T>> {
    let tau = map_psi(sigma, area, opts)?;
    let back = map_phi(&tau.metric, sigma.area(), opts)?;
    Ok(RoundTrip {
        discrepancy: log_scale_discrepancy(&back.metric, sigma),
        psi_residual: tau.result.residual,
        phi_residual: back.result.residual,
    })
}

/// The factor `ψ` with `e^{2ψ} τ` flat and of the same area: the
/// flattening of [`normalize_flat`] shifted by a constant.
pub fn flattening_factor<T: Real>(tau: &MetricSurface<T>, tolerance: f64) -> Result<Vec<T>> {
    let (_, phi) = normalize_flat(tau, tolerance)?;
    let z = tau
        .vertex_areas()
        .iter()
        .zip(&phi)
        .fold(T::zero(), |s, (a, p)| s + *a * (*p + *p).exp());
    let c = (tau.area() / z).ln() * T::half();
    Ok(phi.into_iter().map(|p| p + c).collect())
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HeightInequality<T: Real> {
    pub terms: PolyakovAlvarezTerms<T>,
    /// `h(e^{2ψ}τ) − h(τ)`.
    pub shift: T,
    /// `χ/2`.
    pub bound: T,
    /// `shift − bound`, equal to `(½∫|∇ψ|² − ∫ψ dA)/6π`.
    pub slack: T,
    /// `∫∂ₙψ ds`, which must equal `2πχ`.
    pub normal: T,
    pub two_pi_chi: T,
    /// `∫2ψ dA / A`.
    pub jensen_lhs: T,
    /// `log(∫e^{2ψ} dA / A)`, bounding `jensen_lhs` from above.
    pub jensen_rhs: T,
    pub holds: bool,
}

/// Checks `h(e^{2ψ}τ) ≥ h(τ) + χ/2` for a type I metric `τ` with `K = −1`
/// and its area-preserving flattening `ψ`.
pub fn height_inequality_check<T: Real>(
    tau: &MetricSurface<T>,
    psi: &[T],
    tolerance: f64,
) -> Result<HeightInequality<T>> {
    if psi.len() != tau.vertex_count() {
        return Err(Error::Domain("conformal factor must have one value per vertex".into()));
    }
    let u = uniformity(tau);
    if (u.gauss_mean + 1.0).abs() > tolerance || UniformType::ConstantCurvature.violation(&u) > tolerance {
        return Err(Error::Precondition(format!(
            "needs a type I metric with K = −1 (mean K {:.6}, violation {:.3e})",
            u.gauss_mean,
            UniformType::ConstantCurvature.violation(&u)
        )));
    }
    let areas = tau.vertex_areas();
    let area = tau.area();
    let z = areas.iter().zip(psi).fold(T::zero(), |s, (a, p)| s + *a * (*p + *p).exp());
    if (z / area - T::one()).abs().to_f() > tolerance {
        return Err(Error::Precondition(format!(
            "factor does not preserve the area (ratio {:.6e})",
            (z / area).to_f()
        )));
    }
    let flat = uniformity(&tau.conformal(psi)?);
    if flat.max_abs_gauss > tolerance {
        return Err(Error::Precondition(format!(
            "factor does not flatten the metric (max |K| {:.3e})",
            flat.max_abs_gauss
        )));
    }
    let terms = mesh_polyakov_terms(tau, psi)?;
    let chi = T::lit(tau.euler_characteristic() as f64);
    let shift = terms.shift();
    let bound = chi * T::half();
    let slack = shift - bound;
    Ok(HeightInequality {
        terms,
        shift,
        bound,
        slack,
        normal: terms.normal,
        two_pi_chi: T::two_pi() * chi,
        jensen_lhs: T::two() * dot(&areas, psi) / area,
        jensen_rhs: (z / area).ln(),
        holds: slack >= -T::lit(tolerance),
    })
}
