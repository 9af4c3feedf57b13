//! The strictly convex functionals whose minimizers are the uniform metrics:
//! `F1` (constant curvature, geodesic boundary) and `F2` (flat, constant
//! boundary curvature).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::MetricSurface;
use crate::scalar::Real;
use crate::uniformization::laplace::{uniformity, DirichletNeumannOperator, DiscreteLaplace};
use crate::uniformization::sparse::{dot, LowRankUpdated, SpdSolver};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Stop once the Newton decrement `√(gᵀ H⁻¹ g)` falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest `|K|` accepted as flat by the `F2` precondition.
    pub flat_tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
            flat_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniformizationResult<T: Real> {
    /// Per-vertex conformal factor relative to the base, area rescale included.
    pub factor: Vec<T>,
    /// `F2` only: the minimizer on the boundary, before extension and rescale.
    pub boundary_factor: Option<Vec<T>>,
    /// Constant added for the target area.
    pub rescale: T,
    /// Newton decrement at the returned minimizer (dual norm of the
    /// Euler–Lagrange residual).
    pub residual: T,
    /// `max |∂F|` at the minimizer.
    pub gradient_max: T,
    pub iterations: usize,
    /// Functional value at the (unrescaled) minimizer.
    pub functional_value: T,
    /// `|∫ψ dA₀| / A₀` (F1) or `|∫φ ds₀| / L₀` (F2) before the rescale.
    pub constraint_violation: T,
}

fn log_sum_exp_weighted<T: Real>(weights: &[T], x: &[T]) -> T {
    let m = x.iter().fold(T::lit(f64::MIN), |a, b| a.max(*b));
    let s = weights.iter().zip(x).fold(T::zero(), |s, (w, v)| s + *w * (*v - m).exp());
    m + s.ln()
}

fn chi_of<T: Real>(s: &MetricSurface<T>) -> T {
    T::lit(s.euler_characteristic() as f64)
}

struct F1Data<T: Real> {
    lap: DiscreteLaplace<T>,
    omega: Vec<T>,
    chi: T,
}

impl<T: Real> F1Data<T> {
    fn new(base: &MetricSurface<T>) -> Self {
        Self {
            lap: DiscreteLaplace::new(base),
            omega: base.curvature_measure(),
            chi: chi_of(base),
        }
    }

    fn value(&self, psi: &[T]) -> T {
        let two_psi: Vec<T> = psi.iter().map(|p| *p + *p).collect();
        self.lap.energy(psi) * T::half() + dot(&self.omega, psi)
            - T::pi() * self.chi * log_sum_exp_weighted(&self.lap.mass, &two_psi)
    }

    /// Gradient and the normalized area density `p = a e^{2ψ} / Σ a e^{2ψ}`.
    fn gradient(&self, psi: &[T]) -> (Vec<T>, Vec<T>) {
        let two_psi: Vec<T> = psi.iter().map(|p| *p + *p).collect();
        let lz = log_sum_exp_weighted(&self.lap.mass, &two_psi);
        let p: Vec<T> = self
            .lap
            .mass
            .iter()
            .zip(&two_psi)
            .map(|(a, t)| *a * (*t - lz).exp())
            .collect();
        let s = self.lap.apply(psi);
        let coef = T::two_pi() * self.chi;
        let g = s
            .iter()
            .zip(&self.omega)
            .zip(&p)
            .map(|((s, o), p)| *s + *o - coef * *p)
            .collect();
        (g, p)
    }
}

/// `F1(ψ) = ½ ψᵀSψ + Σ Ω_i ψ_i − πχ log Σ a_i e^{2ψ_i}` with `Ω` the full
/// curvature measure of the base (equal to the `K₀ dA₀` measure when the
/// base boundary is geodesic).
pub fn evaluate_f1<T: Real>(base: &MetricSurface<T>, psi: &[T]) -> Result<T> {
    if psi.len() != base.vertex_count() {
        return Err(domain("conformal factor must have one value per vertex"));
    }
    Ok(F1Data::new(base).value(psi))
}

pub fn minimize_f1<T: Real>(base: &MetricSurface<T>, area: T, opts: &NewtonOptions) -> Result<UniformizationResult<T>> {
    minimize_f1_from(base, area, &vec![T::zero(); base.vertex_count()], opts)
}

/// Damped Newton on the mean-zero subspace `Σ a_i ψ_i = 0`, from `init`.
pub fn minimize_f1_from<T: Real>(
    base: &MetricSurface<T>,
    area: T,
    init: &[T],
    opts: &NewtonOptions,
) -> Result<UniformizationResult<T>> {
    let chi = chi_of(base);
    if !(chi < T::zero()) {
        return Err(Error::Topology(format!(
            "F1 needs negative Euler characteristic, got {}",
            base.euler_characteristic()
        )));
    }
    if init.len() != base.vertex_count() || !(area > T::zero()) {
        return Err(domain("F1 needs one initial value per vertex and a positive area"));
    }
    let data = F1Data::new(base);
    let mass = data.lap.mass.clone();
    let a0 = mass.iter().fold(T::zero(), |s, a| s + *a);
    let project = |psi: &mut Vec<T>| {
        let mean = dot(&mass, psi) / a0;
        psi.iter_mut().for_each(|p| *p -= mean);
    };
    let mut psi = init.to_vec();
    project(&mut psi);
    let c = -T::lit(4.0) * T::pi() * chi;
    let tol = T::lit(opts.tolerance);
    let mut value = data.value(&psi);
    for it in 0..=opts.max_iterations {
        let (g, p) = data.gradient(&psi);
        // H = S + c (diag p − p pᵀ); the mass direction fixes the kernel
        let shift: Vec<T> = p.iter().map(|x| c * *x).collect();
        let factor = SpdSolver::factor(psi.len(), &data.lap.entries(&shift))?;
        let h = LowRankUpdated::new(&factor, vec![(-c, p.clone()), (T::one() / a0, mass.clone())])?;
        let step: Vec<T> = h.solve(&g).into_iter().map(|x| -x).collect();
        let decrement = (-dot(&g, &step)).max(T::zero()).sqrt();
        if decrement < tol {
            return Ok(finish_f1(base, &data, psi, value, &g, decrement, it, area));
        }
        if it == opts.max_iterations {
            break;
        }
        let slope = dot(&g, &step);
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<T> = psi.iter().zip(&step).map(|(x, d)| *x + t * *d).collect();
            let v = data.value(&trial);
            if v <= value + T::lit(1e-4) * t * slope || decrement < T::lit(1e-6) {
                psi = trial;
                value = v;
                accepted = true;
                break;
            }
            t *= T::half();
        }
        if !accepted {
            break;
        }
        project(&mut psi);
    }
    let (g, _) = data.gradient(&psi);
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual: g.iter().fold(0.0f64, |m, x| m.max(x.to_f().abs())),
    })
}

#[allow(clippy::too_many_arguments)]
fn finish_f1<T: Real>(
    base: &MetricSurface<T>,
    data: &F1Data<T>,
    psi: Vec<T>,
    value: T,
    g: &[T],
    decrement: T,
    iterations: usize,
    area: T,
) -> UniformizationResult<T> {
    let a0 = data.lap.mass.iter().fold(T::zero(), |s, a| s + *a);
    let violation = dot(&data.lap.mass, &psi).abs() / a0;
    let z = base
        .vertex_areas()
        .iter()
        .zip(&psi)
        .fold(T::zero(), |s, (a, p)| s + *a * (*p + *p).exp());
    let rescale = (area / z).ln() * T::half();
    UniformizationResult {
        factor: psi.iter().map(|p| *p + rescale).collect(),
        boundary_factor: None,
        rescale,
        residual: decrement,
        gradient_max: g.iter().fold(T::zero(), |m, x| m.max(x.abs())),
        iterations,
        functional_value: value,
        constraint_violation: violation,
    }
}

struct F2Data<T: Real> {
    dtn: DirichletNeumannOperator<T>,
    kappa: Vec<T>,
    arcs: Vec<T>,
    chi: T,
}

impl<T: Real> F2Data<T> {
    fn new(base: &MetricSurface<T>, opts: &NewtonOptions) -> Result<Self> {
        let u = uniformity(base);
        if u.max_abs_gauss > opts.flat_tolerance {
            return Err(Error::Precondition(format!(
                "F2 needs a flat base, max |K| = {:.3e}",
                u.max_abs_gauss
            )));
        }
        let dtn = DirichletNeumannOperator::new(base)?;
        let curv = base.curvature();
        let arcs_all = base.boundary_weights();
        let mut kappa = Vec::with_capacity(dtn.len());
        for (&(v, k), &b) in curv.geodesic.iter().zip(&dtn.boundary) {
            debug_assert_eq!(v, b);
            kappa.push(k * arcs_all[v]);
        }
        let arcs = dtn.restrict(&arcs_all);
        Ok(Self {
            dtn,
            kappa,
            arcs,
            chi: chi_of(base),
        })
    }

    fn value(&self, phi: &[T]) -> T {
        self.dtn.quadratic_form(phi) * T::half() + dot(&self.kappa, phi)
            - T::two_pi() * self.chi * log_sum_exp_weighted(&self.arcs, phi)
    }

    fn gradient(&self, phi: &[T]) -> (Vec<T>, Vec<T>) {
        let lz = log_sum_exp_weighted(&self.arcs, phi);
        let q: Vec<T> = self.arcs.iter().zip(phi).map(|(b, p)| *b * (*p - lz).exp()).collect();
        let t = self.dtn.apply(phi);
        let coef = T::two_pi() * self.chi;
        let g = t
            .iter()
            .zip(&self.kappa)
            .zip(&q)
            .map(|((t, k), q)| *t + *k - coef * *q)
            .collect();
        (g, q)
    }
}

/// `F2(φ) = ½ φᵀTφ + Σ κ_b φ_b − 2πχ log Σ b_b e^{φ_b}`, with `κ` the
/// geodesic curvature measure of the flat base.
pub fn evaluate_f2<T: Real>(base: &MetricSurface<T>, phi: &[T], opts: &NewtonOptions) -> Result<T> {
    let data = F2Data::new(base, opts)?;
    if phi.len() != data.dtn.len() {
        return Err(domain("boundary factor must have one value per boundary vertex"));
    }
    Ok(data.value(phi))
}

pub fn minimize_f2<T: Real>(base: &MetricSurface<T>, area: T, opts: &NewtonOptions) -> Result<UniformizationResult<T>> {
    let n = base.boundary_vertices().len();
    minimize_f2_from(base, area, &vec![T::zero(); n], opts)
}

/// Damped Newton on `Σ b_b φ_b = 0`; the minimizer is extended harmonically
/// and shifted to the target area.
pub fn minimize_f2_from<T: Real>(
    base: &MetricSurface<T>,
    area: T,
    init: &[T],
    opts: &NewtonOptions,
) -> Result<UniformizationResult<T>> {
    let chi = chi_of(base);
    if chi > T::zero() {
        return Err(Error::Topology(format!(
            "F2 needs nonpositive Euler characteristic, got {}",
            base.euler_characteristic()
        )));
    }
    let data = F2Data::new(base, opts)?;
    if init.len() != data.dtn.len() || !(area > T::zero()) {
        return Err(domain("F2 needs one initial value per boundary vertex and a positive area"));
    }
    let arcs = data.arcs.clone();
    let l0 = arcs.iter().fold(T::zero(), |s, b| s + *b);
    let project = |phi: &mut Vec<T>| {
        let mean = dot(&arcs, phi) / l0;
        phi.iter_mut().for_each(|p| *p -= mean);
    };
    let mut phi = init.to_vec();
    project(&mut phi);
    let c = -T::two_pi() * chi;
    let tol = T::lit(opts.tolerance);
    let mut value = data.value(&phi);
    let n = phi.len();
    for it in 0..=opts.max_iterations {
        let (g, q) = data.gradient(&phi);
        let qv = DVector::from_column_slice(&q);
        let bv = DVector::from_column_slice(&arcs);
        let mut h: DMatrix<T> = data.dtn.matrix.clone();
        h = (&h + h.transpose()) * T::half();
        for i in 0..n {
            h[(i, i)] += c * q[i];
        }
        h -= &qv * qv.transpose() * c;
        h += &bv * bv.transpose() / l0;
        let chol = h
            .cholesky()
            .ok_or_else(|| Error::Precondition("F2 Hessian is not positive definite".into()))?;
        let step: Vec<T> = chol.solve(&DVector::from_column_slice(&g)).iter().map(|x| -*x).collect();
        let decrement = (-dot(&g, &step)).max(T::zero()).sqrt();
        if decrement < tol {
            return Ok(finish_f2(base, &data, phi, value, &g, decrement, it, area));
        }
        if it == opts.max_iterations {
            break;
        }
        let slope = dot(&g, &step);
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<T> = phi.iter().zip(&step).map(|(x, d)| *x + t * *d).collect();
            let v = data.value(&trial);
            if v <= value + T::lit(1e-4) * t * slope || decrement < T::lit(1e-6) {
                phi = trial;
                value = v;
                accepted = true;
                break;
            }
            t *= T::half();
        }
        if !accepted {
            break;
        }
        project(&mut phi);
    }
    let (g, _) = data.gradient(&phi);
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual: g.iter().fold(0.0f64, |m, x| m.max(x.to_f().abs())),
    })
}

#[allow(clippy::too_many_arguments)]
fn finish_f2<T: Real>(
    base: &MetricSurface<T>,
    data: &F2Data<T>,
    phi: Vec<T>,
    value: T,
    g: &[T],
    decrement: T,
    iterations: usize,
    area: T,
) -> UniformizationResult<T> {
    let l0 = data.arcs.iter().fold(T::zero(), |s, b| s + *b);
    let violation = dot(&data.arcs, &phi).abs() / l0;
    let u = data.dtn.harmonic_extension(&phi);
    let z = base
        .vertex_areas()
        .iter()
        .zip(&u)
        .fold(T::zero(), |s, (a, p)| s + *a * (*p + *p).exp());
    let rescale = (area / z).ln() * T::half();
    UniformizationResult {
        factor: u.iter().map(|p| *p + rescale).collect(),
        boundary_factor: Some(phi),
        rescale,
        residual: decrement,
        gradient_max: g.iter().fold(T::zero(), |m, x| m.max(x.abs())),
        iterations,
        functional_value: value,
        constraint_violation: violation,
    }
}
