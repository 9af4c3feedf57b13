use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::TraceCoefficients;
use crate::scalar::{Real, EULER_GAMMA};
use crate::special::least_squares;
use crate::spectral_zeta::trace::{HeatTrace, LogGrid, TraceSample};

/// Settings for the regularized Mellin transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MellinOptions {
    /// Smallest sampled time.
    pub t_min: f64,
    /// Split time `T`.
    pub split: f64,
    pub per_decade: usize,
    /// Samples run up to `t_max = tail_factor / λ₁` (at least `10 T`).
    pub tail_factor: f64,
    /// Width of the small-time fitting window in decades.
    pub fit_decades: f64,
    /// Largest accepted total error estimate for `ζ′(0)`.
    pub budget: f64,
    /// Largest accepted mismatch between the fitted and the claimed `ζ(0)`.
    pub c3_tolerance: f64,
}

impl Default for MellinOptions {
    fn default() -> Self {
        Self {
            t_min: 1e-4,
            split: 1.0,
            per_decade: 64,
            tail_factor: 50.0,
            fit_decades: 0.3,
            budget: 1e-6,
            c3_tolerance: 1e-6,
        }
    }
}

impl MellinOptions {
    pub fn with_split(mut self, split: f64) -> Self {
        self.split = split;
        self
    }

    pub fn grid(&self, ground_state: f64) -> Result<LogGrid> {
        if !(ground_state > 0.0) {
            return Err(Error::Precondition("lowest eigenvalue must be positive".into()));
        }
        let t_max = (self.tail_factor / ground_state).max(10.0 * self.split);
        LogGrid::covering(self.t_min, self.split, t_max, self.per_decade)
    }
}

/// `ζ′(0)` of a Dirichlet Laplacian, i.e. the height `h = −log det Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Height<T: Real> {
    /// `ζ′(0) = −log det Δ`.
    pub value: T,
    /// `ζ(0)` as seen by the continuation; equals `c3` when consistent.
    #[serde(rename = "zeta0")]
    pub zeta_at_zero: T,
    /// Total error estimate.
    pub error: T,
    /// Split time `T`.
    #[serde(rename = "T")]
    pub split: T,
}

impl<T: Real> Height<T> {
    /// Exact value (closed form), error at rounding level.
    pub fn exact(value: T, zeta_at_zero: T) -> Self {
        Self {
            value,
            zeta_at_zero,
            error: T::eps() * value.abs().max(T::one()) * T::lit(16.0),
            split: T::zero(),
        }
    }

    /// `log det Δ = −ζ′(0)`.
    pub fn log_det(&self) -> T {
        -self.value
    }

    pub fn to_json(&self) -> Result<String> {
        let v = serde_json::json!({
            "T": self.split.to_f(),
            "error": self.error.to_f(),
            "value": self.value.to_f(),
            "zeta0": self.zeta_at_zero.to_f(),
        });
        Ok(serde_json::to_string(&v)?)
    }
}

/// Contributions to `ζ′(0)`, for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MellinParts<T: Real> {
    /// `∫₀^{t₀} (θ − asymptotics) dt/t` from the fitted remainder.
    pub small_time: T,
    /// `∫_{t₀}^T (θ − asymptotics) dt/t`.
    pub near: T,
    /// `∫_T^{t_max} θ dt/t`.
    pub far: T,
    /// `∫_{t_max}^∞ θ dt/t` (bounded, included at face value).
    pub tail: T,
    /// `−c1/T − 2c2/√T + c3(γ + log T)`.
    pub counterterms: T,
    pub quadrature_error: T,
    pub sample_error: T,
    pub fit_error: T,
    /// Fitted constant left after subtracting the claimed asymptotics.
    pub residual_constant: T,
}

/// Composite trapezoid/Romberg on uniformly spaced samples (count − 1 a
/// multiple of 8). Returns (value, error estimate).
fn romberg<T: Real>(f: &[T], h: T) -> (T, T) {
    let n = f.len() - 1;
    debug_assert!(n % 8 == 0 && n > 0);
    let trap = |stride: usize| {
        let mut s = (f[0] + f[n]) * T::half();
        let mut i = stride;
        while i < n {
            s += f[i];
            i += stride;
        }
        s * h * T::of(stride)
    };
    let mut table: Vec<Vec<T>> = Vec::new();
    for (k, stride) in [8usize, 4, 2, 1].into_iter().enumerate() {
        let mut row = vec![trap(stride)];
        for j in 1..=k {
            let factor = T::lit(4f64.powi(j as i32));
            let prev = table[k - 1][j - 1];
            let cur = row[j - 1];
            row.push(cur + (cur - prev) / (factor - T::one()));
        }
        table.push(row);
    }
    let best = table[3][3];
    (best, (best - table[2][2]).abs())
}

fn trapezoid_error_weight<T: Real>(err: &[T], h: T) -> T {
    let n = err.len() - 1;
    let inner = err[1..n].iter().fold(T::zero(), |s, e| s + *e);
    (inner + (err[0] + err[n]) * T::half()) * h
}

fn remainder<T: Real>(c: &TraceCoefficients<T>, s: &TraceSample<T>) -> T {
    s.theta - c.eval(s.t)
}

fn fit_remainder<T: Real>(window: &[TraceSample<T>], c: &TraceCoefficients<T>, powers: &[f64]) -> Option<Vec<T>> {
    let rows: Vec<Vec<T>> = window
        .iter()
        .map(|s| powers.iter().map(|p| s.t.powf(T::lit(*p))).collect())
        .collect();
    let rhs: Vec<T> = window.iter().map(|s| remainder(c, s)).collect();
    least_squares(&rows, &rhs)
}

/// `∫₀^{t₀} Σ a_j t^{p_j} dt/t` for powers `p_j > 0`.
fn power_integral<T: Real>(coef: &[T], powers: &[f64], t0: T) -> T {
    coef.iter()
        .zip(powers)
        .fold(T::zero(), |s, (a, p)| s + *a * t0.powf(T::lit(*p)) / T::lit(*p))
}

/// `ζ′(0)` by the split Mellin transform
///
/// `ζ′(0) = ∫₀^T (θ − c1/t − c2/√t − c3) dt/t + ∫_T^∞ θ dt/t − c1/T − 2c2/√T + c3(γ + log T)`.
///
/// `split` must be a node of the trace grid with a multiple of 8 intervals
/// on each side.
pub fn zeta_prime_at_zero<T: Real>(
    trace: &HeatTrace<T>,
    split: T,
    opts: &MellinOptions,
) -> Result<Height<T>> {
    zeta_prime_parts(trace, split, opts).map(|(h, _)| h)
}

/// [`zeta_prime_at_zero`] together with its individual contributions.
pub fn zeta_prime_parts<T: Real>(
    trace: &HeatTrace<T>,
    split: T,
    opts: &MellinOptions,
) -> Result<(Height<T>, MellinParts<T>)> {
    let s = &trace.samples;
    let n = s.len();
    let idx = s
        .iter()
        .position(|x| (x.t - split).abs() <= T::lit(1e-12) * split)
        .ok_or_else(|| domain(format!("split time {:?} is not a sample node", split)))?;
    if idx % 8 != 0 || (n - 1 - idx) % 8 != 0 || idx == 0 || idx + 1 == n {
        return Err(domain(
            "split time needs a positive multiple of 8 sample intervals on each side",
        ));
    }
    let h = T::lit(trace.grid.step());
    let c = trace.coefficients;

    // (0, t₀]: fitted remainder r ≈ a₁√t + a₂t + a₃t^{3/2} (+ a₄t²)
    let width = ((opts.fit_decades * trace.grid.per_decade as f64).round() as usize)
        .clamp(6, idx);
    let window = &s[..=width];
    let t0 = s[0].t;
    let p4 = [0.5, 1.0, 1.5, 2.0];
    let p3 = [0.5, 1.0, 1.5];
    let a4 = fit_remainder(window, &c, &p4)
        .ok_or_else(|| Error::GeometryInconsistency("small-time fit is ill-conditioned".into()))?;
    let a3 = fit_remainder(window, &c, &p3)
        .ok_or_else(|| Error::GeometryInconsistency("small-time fit is ill-conditioned".into()))?;
    let small_time = power_integral(&a4, &p4, t0);
    let window_err = window.iter().fold(T::zero(), |m, x| m.max(x.err));
    let fit_error = (small_time - power_integral(&a3, &p3, t0)).abs() + T::two() * window_err;

    // constant left over after subtraction: the continuation has ζ(0) = c3 + a₀
    let with_constant = fit_remainder(window, &c, &[0.0, 0.5, 1.0, 1.5])
        .ok_or_else(|| Error::GeometryInconsistency("small-time fit is ill-conditioned".into()))?;
    let residual_constant = with_constant[0];

    let near_vals: Vec<T> = s[..=idx].iter().map(|x| remainder(&c, x)).collect();
    let near_errs: Vec<T> = s[..=idx].iter().map(|x| x.err).collect();
    let (near, near_q) = romberg(&near_vals, h);
    let far_vals: Vec<T> = s[idx..].iter().map(|x| x.theta).collect();
    let far_errs: Vec<T> = s[idx..].iter().map(|x| x.err).collect();
    let (far, far_q) = romberg(&far_vals, h);
    let sample_error = trapezoid_error_weight(&near_errs, h) + trapezoid_error_weight(&far_errs, h);

    // beyond t_max: θ(t) ≤ θ(t_max) e^{−λ₁(t − t_max)}, and e^x E1(x) < 1/x
    let last = s[n - 1];
    let tail = (last.theta + last.err) / (trace.ground_state * last.t);

    let counterterms = -c.c1 / split - T::two() * c.c2 / split.sqrt()
        + c.c3 * (T::lit(EULER_GAMMA) + split.ln());
    let value = small_time + near + far + tail + counterterms;
    let quadrature_error = near_q + far_q;
    let error = quadrature_error + sample_error + fit_error + tail;

    let parts = MellinParts {
        small_time,
        near,
        far,
        tail,
        counterterms,
        quadrature_error,
        sample_error,
        fit_error,
        residual_constant,
    };
    if residual_constant.abs() > T::lit(opts.c3_tolerance) {
        return Err(Error::GeometryInconsistency(format!(
            "trace leaves constant {:.3e} after subtracting c3 = {:.6e} ({})",
            residual_constant.to_f(),
            c.c3.to_f(),
            trace.provenance
        )));
    }
    if !(error <= T::lit(opts.budget)) {
        return Err(Error::Accuracy {
            what: format!("ζ′(0) of {}", trace.provenance),
            estimate: error.to_f(),
            budget: opts.budget,
        });
    }
    Ok((
        Height {
            value,
            zeta_at_zero: c.c3 + residual_constant,
            error,
            split,
        },
        parts,
    ))
}

/// Least-squares small-time coefficients with confidence widths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallTimeFit<T: Real> {
    pub coefficients: TraceCoefficients<T>,
    /// Change of each coefficient when one more correction term is fitted.
    pub widths: TraceCoefficients<T>,
    pub window: (T, T),
}

/// Fits `θ(t) ≈ c1/t + c2/√t + c3 + d₁√t + d₂t + …` on the first
/// `decades` decades of samples.
pub fn fit_small_t_coefficients<T: Real>(trace: &HeatTrace<T>, decades: f64) -> Result<SmallTimeFit<T>> {
    let count = ((decades * trace.grid.per_decade as f64).round() as usize + 1).min(trace.len());
    if count < 10 {
        return Err(Error::GeometryInconsistency(
            "small-time window has too few samples for a fit".into(),
        ));
    }
    let window = &trace.samples[..count];
    let fit = |terms: usize| -> Result<Vec<T>> {
        // tθ = c1 + c2√t + c3 t + d₁ t^{3/2} + …
        let rows: Vec<Vec<T>> = window
            .iter()
            .map(|s| (0..terms).map(|j| s.t.powf(T::lit(j as f64 * 0.5))).collect())
            .collect();
        let rhs: Vec<T> = window.iter().map(|s| s.t * s.theta).collect();
        least_squares(&rows, &rhs)
            .ok_or_else(|| Error::GeometryInconsistency("small-time fit is ill-conditioned".into()))
    };
    let a = fit(5)?;
    let b = fit(6)?;
    Ok(SmallTimeFit {
        coefficients: TraceCoefficients {
            c1: b[0],
            c2: b[1],
            c3: b[2],
        },
        widths: TraceCoefficients {
            c1: (a[0] - b[0]).abs(),
            c2: (a[1] - b[1]).abs(),
            c3: (a[2] - b[2]).abs(),
        },
        window: (window[0].t, window[count - 1].t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sturm_liouville::TraceValue;

    // flat interval with λ₁ = lambda: pure c2/√t + c3 asymptotics
    fn synthetic(lambda: f64, opts: &MellinOptions) -> HeatTrace<f64> {
        let grid = opts.grid(lambda).unwrap();
        let len = std::f64::consts::PI / lambda.sqrt();
        HeatTrace::sample(
            |t: f64| {
                let v: f64 = (1..4000).map(|k| (-t * lambda * (k * k) as f64).exp()).sum();
                TraceValue { value: v, tail: 1e-300, discretization: 0.0 }
            },
            grid,
            TraceCoefficients::interval(len),
            lambda,
            "flat interval",
        )
        .unwrap()
    }

    #[test]
    fn interval_length_half_has_zero_derivative() {
        // L = 1/2: eigenvalues (2πk)², ζ′(0) = −log(2L) = 0
        let opts = MellinOptions::default();
        let lambda = (2.0 * std::f64::consts::PI).powi(2);
        let tr = synthetic(lambda, &opts);
        let h = zeta_prime_at_zero(&tr, 1.0, &opts).unwrap();
        assert!(h.value.abs() < 1e-9, "{:?}", h);
        assert!((h.zeta_at_zero + 0.5).abs() < 1e-9);
    }

    #[test]
    fn romberg_exponential() {
        let h = 0.01;
        let f: Vec<f64> = (0..=64).map(|i| (i as f64 * h).exp()).collect();
        let (v, e) = romberg(&f, h);
        assert!((v - (0.64f64.exp() - 1.0)).abs() < 1e-14);
        assert!(e < 1e-12);
    }

    #[test]
    fn split_must_be_node() {
        let opts = MellinOptions::default();
        let tr = synthetic(std::f64::consts::PI.powi(2), &opts);
        assert!(zeta_prime_at_zero(&tr, 0.77, &opts).is_err());
    }
}
