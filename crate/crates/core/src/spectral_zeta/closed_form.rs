//! Exact traces and determinants of flat separable domains, and the 1-D
//! Polyakov formula.

use crate::error::{domain, Result};
use crate::geometry::WeightedInterval;
use crate::scalar::{Real, ZETA_R_AT_ZERO, ZETA_R_PRIME_AT_ZERO};
use crate::sturm_liouville::TraceValue;

/// `Z₀′(0) = −log(2L)` for `−d²/dx²` on an interval of length `L`.
pub fn interval_zeta_prime<T: Real>(length: T) -> Result<T> {
    if !(length > T::zero()) {
        return Err(domain("interval length must be positive"));
    }
    Ok(-(T::two() * length).ln())
}

/// The same quantity written through `ζ(s) = (L/π)^{2s} ζ_R(2s)`:
/// `2 log(L/π) ζ_R(0) + 2 ζ_R′(0)`.
pub fn interval_zeta_prime_riemann<T: Real>(length: T) -> Result<T> {
    if !(length > T::zero()) {
        return Err(domain("interval length must be positive"));
    }
    Ok(T::two() * (length / T::pi()).ln() * T::lit(ZETA_R_AT_ZERO) + T::two() * T::lit(ZETA_R_PRIME_AT_ZERO))
}

/// `Z_φ′(0) = −½(φ(A) + φ(B)) + Z₀′(0)` for `Q_φ = −e^{−2φ} d²/dx²`, with
/// `Z₀` the flat interval of the same coordinate length.
pub fn one_d_polyakov<T: Real>(interval: &WeightedInterval<T>) -> Result<T> {
    let phi = interval.phi();
    Ok(-(phi.value(interval.a()) + phi.value(interval.b())) * T::half()
        + interval_zeta_prime(interval.coordinate_length())?)
}

/// `Σ_{k≥1} e^{−t(πk/L)²}`, switching to the Poisson-dual series for small `t`.
pub fn flat_interval_trace<T: Real>(length: T, t: T) -> T {
    let a = t * (T::pi() / length).powi(2);
    if a > T::lit(0.5) {
        let mut s = T::zero();
        for k in 1..200usize {
            let term = (-a * T::of(k * k)).exp();
            s += term;
            if term < T::eps() * s {
                break;
            }
        }
        s
    } else {
        // Σ_{k∈Z} e^{−ak²} = (L/√(πt)) Σ_n e^{−n²L²/t}
        let b = length * length / t;
        let mut dual = T::one();
        for n in 1..200usize {
            let term = T::two() * (-b * T::of(n * n)).exp();
            dual += term;
            if term < T::eps() * dual {
                break;
            }
        }
        (length / (T::pi() * t).sqrt() * dual - T::one()) * T::half()
    }
}

/// `Σ_{m∈Z} e^{−t(2πm/l)²}`.
pub fn circle_trace<T: Real>(l: T, t: T) -> T {
    let a = t * (T::two_pi() / l).powi(2);
    if a > T::lit(0.5) {
        let mut s = T::one();
        for m in 1..200usize {
            let term = T::two() * (-a * T::of(m * m)).exp();
            s += term;
            if term < T::eps() * s {
                break;
            }
        }
        s
    } else {
        let b = l * l / (T::lit(4.0) * t);
        let mut dual = T::one();
        for n in 1..200usize {
            let term = T::two() * (-b * T::of(n * n)).exp();
            dual += term;
            if term < T::eps() * dual {
                break;
            }
        }
        l / (T::lit(4.0) * T::pi() * t).sqrt() * dual
    }
}

/// Exact Dirichlet heat trace of the flat cylinder `(R/lZ) × [0, L]`.
pub fn flat_cylinder_trace<T: Real>(l: T, length: T, t: T) -> TraceValue<T> {
    let value = circle_trace(l, t) * flat_interval_trace(length, t);
    TraceValue {
        value,
        tail: T::zero(),
        discretization: value.abs() * T::eps() * T::lit(64.0),
    }
}

/// `ζ′(0)` of the flat cylinder `(R/lZ) × [0, L]`:
/// `−log(2L) + πL/(3l) + log l − 2 Σ_{m≥1} log(1 − e^{−4πmL/l})`.
pub fn flat_cylinder_zeta_prime<T: Real>(l: T, length: T) -> Result<T> {
    if !(l > T::zero() && length > T::zero()) {
        return Err(domain("cylinder dimensions must be positive"));
    }
    let q = T::lit(4.0) * T::pi() * length / l;
    let mut sum = T::zero();
    for m in 1..10_000usize {
        let term = (-q * T::of(m)).exp();
        sum += (T::one() - term).ln();
        if term < T::eps() * T::lit(1e-3) {
            break;
        }
    }
    Ok(interval_zeta_prime(length)? + T::pi() * length / (T::lit(3.0) * l) + l.ln()
        - T::two() * sum)
}

/// `h(λ²σ) = h(σ) + (χ/3) log λ`.
pub fn scaled_height<T: Real>(height: T, chi: T, lambda: T) -> T {
    height + chi / T::lit(3.0) * lambda.ln()
}
