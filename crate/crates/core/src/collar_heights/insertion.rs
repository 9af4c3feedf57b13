use serde::{Deserialize, Serialize};

use crate::collar_heights::heights::{collar_height, Route};
use crate::error::{domain, Result};
use crate::geometry::CollarCylinder;
use crate::scalar::Real;
use crate::spectral_zeta::HeightOptions;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct InsertionGap<T: Real> {
    pub whole: T,
    /// Heights of `[A, A′]`, `[A′, B′]` (absent when `A′ = B′`) and `[B′, B]`.
    pub pieces: [Option<T>; 3],
    /// `h(M) − Σ h(pieces)`.
    pub gap: T,
    pub error: T,
}

/// Cuts `C^{l,[A,B]}` along `v = A′` and `v = B′` and compares heights.
pub fn insertion_gap<T: Real>(
    l: T,
    outer: (T, T),
    inner: (T, T),
    route: Route,
    opts: &HeightOptions,
) -> Result<InsertionGap<T>> {
    let ((a, b), (a1, b1)) = (outer, inner);
    if !(a < a1 && a1 <= b1 && b1 < b) {
        return Err(domain(format!(
            "need A < A′ ≤ B′ < B, got [{:?}, {:?}] inside [{:?}, {:?}]",
            a1, b1, a, b
        )));
    }
    let h = |lo: T, hi: T| collar_height(&CollarCylinder::new(l, lo, hi)?, route, opts);
    let whole = h(a, b)?;
    let left = h(a, a1)?;
    let right = h(b1, b)?;
    let middle = if a1 < b1 { Some(h(a1, b1)?) } else { None };
    let mut error = whole.error + left.error + right.error;
    let mut gap = whole.value - left.value - right.value;
    if let Some(m) = middle {
        gap -= m.value;
        error += m.error;
    }
    Ok(InsertionGap {
        whole: whole.value,
        pieces: [Some(left.value), middle.map(|m| m.value), Some(right.value)],
        gap,
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gap_is_finite_including_empty_middle() {
        let opts = HeightOptions::default();
        let l = 0.1f64;
        let g = insertion_gap(l, (l, PI - l), (2.0 * l, PI - 2.0 * l), Route::Conformal, &opts).unwrap();
        assert!(g.gap.is_finite());
        let g2 = insertion_gap(l, (l, PI - l), (1.0, 1.0), Route::Conformal, &opts).unwrap();
        assert!(g2.gap.is_finite() && g2.pieces[1].is_none());
        assert!(insertion_gap(l, (l, PI - l), (1.0, 0.9), Route::Conformal, &opts).is_err());
    }
}
