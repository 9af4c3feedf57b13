use crate::error::{domain, Result};
use crate::geometry::{angle_from_liouville, liouville_coordinate, Profile, WeightedInterval};
use crate::scalar::Real;

/// Dirichlet problem `−(p f′)′ + q f = λ w f` on `(a, b)`, `f(a) = f(b) = 0`.
#[derive(Clone, Debug)]
pub struct SturmLiouville<T: Real> {
    pub a: T,
    pub b: T,
    pub p: Profile<T>,
    pub q: Profile<T>,
    pub w: Profile<T>,
}

impl<T: Real> SturmLiouville<T> {
    pub fn new(a: T, b: T, p: Profile<T>, q: Profile<T>, w: Profile<T>) -> Result<Self> {
        if !(a < b) {
            return Err(domain("Sturm–Liouville interval needs a < b"));
        }
        for i in 0..=64 {
            let x = a + (b - a) * T::of(i) / T::lit(64.0);
            let (pv, qv, wv) = (p.value(x), q.value(x), w.value(x));
            if !(pv > T::zero()) || !(wv > T::zero()) || !(qv >= T::zero()) || !qv.is_finite() {
                return Err(domain(format!(
                    "coefficients must satisfy p > 0, w > 0, q ≥ 0 (at x = {:?}: p = {:?}, q = {:?}, w = {:?})",
                    x, pv, qv, wv
                )));
            }
        }
        Ok(Self { a, b, p, q, w })
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }
}

/// The operator family of a single Fourier mode.
#[derive(Clone, Debug)]
pub enum ModeKind<T: Real> {
    /// `Q_φ = −e^{−2φ} d²/dx²` on the interval's own weight `φ`.
    QPhi,
    /// `Δ_l(m) = −sin²v (d²/dv² − 4π²m²/l²)`.
    Collar { l: T },
    /// `−e^{−2ψ(v)}(d²/dv² − (2πm/l)²)`.
    ConformalFlat { l: T, psi: Profile<T> },
}

/// Grid coordinate used to discretize a [`ModeProblem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Coordinate {
    /// The interval's own variable (`x` or `v`).
    Natural,
    /// `x = log tan(v/2)`; available for collar modes, where it turns the
    /// weight `csc² v` into `cosh x` and flattens the end-point blow-up.
    Liouville,
}

/// A single-mode Dirichlet eigenproblem on an interval.
#[derive(Clone, Debug)]
pub struct ModeProblem<T: Real> {
    pub interval: WeightedInterval<T>,
    pub m: usize,
    pub kind: ModeKind<T>,
}

impl<T: Real> ModeProblem<T> {
    pub fn q_phi(interval: WeightedInterval<T>) -> Self {
        Self {
            interval,
            m: 0,
            kind: ModeKind::QPhi,
        }
    }

    /// `Δ_l(m)` on `[A, B]`; the interval carries `φ = −log sin v`.
    pub fn collar(l: T, a: T, b: T, m: usize) -> Result<Self> {
        if !(l > T::zero()) {
            return Err(domain("collar circumference must be positive"));
        }
        let margin = T::lit(1e-12);
        if !(a > margin && b < T::pi() - margin) {
            return Err(domain("collar mode interval must lie inside (0, π)"));
        }
        Ok(Self {
            interval: WeightedInterval::new(a, b, Profile::neg_log_sin())?,
            m,
            kind: ModeKind::Collar { l },
        })
    }

    pub fn conformal_flat(l: T, a: T, b: T, m: usize, psi: Profile<T>) -> Result<Self> {
        if !(l > T::zero()) {
            return Err(domain("cylinder circumference must be positive"));
        }
        Ok(Self {
            interval: WeightedInterval::new(a, b, psi.clone())?,
            m,
            kind: ModeKind::ConformalFlat { l, psi },
        })
    }

    /// `(2πm/l)²`, zero for `Q_φ`.
    pub fn mode_shift(&self) -> T {
        match &self.kind {
            ModeKind::QPhi => T::zero(),
            ModeKind::Collar { l } | ModeKind::ConformalFlat { l, .. } => {
                let mu = T::two_pi() * T::of(self.m) / *l;
                mu * mu
            }
        }
    }

    /// Log of the length density, `φ` with measure `e^{φ} dx`. The operator is
    /// self-adjoint on `L²(e^{2φ} dx)`.
    pub fn log_density(&self) -> Profile<T> {
        self.interval.phi().clone()
    }

    pub fn supports(&self, c: Coordinate) -> bool {
        match c {
            Coordinate::Natural => true,
            Coordinate::Liouville => matches!(self.kind, ModeKind::Collar { .. }),
        }
    }

    /// Coefficients `(p, q, w)` in the chosen coordinate.
    pub fn sturm_liouville(&self, coordinate: Coordinate) -> Result<SturmLiouville<T>> {
        let shift = self.mode_shift();
        match coordinate {
            Coordinate::Natural => {
                let phi = self.log_density();
                SturmLiouville::new(
                    self.interval.a(),
                    self.interval.b(),
                    Profile::constant(T::one()),
                    Profile::constant(shift),
                    Profile::new(move |x| (T::two() * phi.value(x)).exp()),
                )
            }
            Coordinate::Liouville => {
                if !self.supports(Coordinate::Liouville) {
                    return Err(domain("Liouville coordinate is defined for collar modes only"));
                }
                // x = log tan(v/2): p = w = cosh x, q = μ² / cosh x
                SturmLiouville::new(
                    liouville_coordinate(self.interval.a()),
                    liouville_coordinate(self.interval.b()),
                    Profile::new(|x: T| x.cosh()),
                    Profile::new(move |x: T| shift / x.cosh()),
                    Profile::new(|x: T| x.cosh()),
                )
            }
        }
    }

    /// Maps a grid coordinate back to the interval's variable.
    pub fn to_natural(&self, coordinate: Coordinate, x: T) -> T {
        match coordinate {
            Coordinate::Natural => x,
            Coordinate::Liouville => angle_from_liouville(x),
        }
    }

    /// Preferred coordinate for this problem.
    pub fn default_coordinate(&self) -> Coordinate {
        if self.supports(Coordinate::Liouville) {
            Coordinate::Liouville
        } else {
            Coordinate::Natural
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collar_mode_coefficients() {
        let p = ModeProblem::collar(0.5f64, 1.0, 2.0, 3).unwrap();
        let mu2 = (2.0 * std::f64::consts::PI * 3.0 / 0.5f64).powi(2);
        assert!((p.mode_shift() - mu2).abs() < 1e-9);
        let sl = p.sturm_liouville(Coordinate::Natural).unwrap();
        assert!((sl.w.value(1.5) - 1.0 / 1.5f64.sin().powi(2)).abs() < 1e-12);
        let sl = p.sturm_liouville(Coordinate::Liouville).unwrap();
        let x = liouville_coordinate(1.5f64);
        assert!((sl.w.value(x) - 1.0 / 1.5f64.sin()).abs() < 1e-12);
        assert!((sl.q.value(x) - mu2 * 1.5f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn rejects_singular_endpoints() {
        assert!(ModeProblem::collar(0.5f64, 0.0, 1.0, 0).is_err());
        assert!(ModeProblem::collar(0.5f64, 1.0, std::f64::consts::PI, 0).is_err());
        assert!(ModeProblem::collar(0.0f64, 1.0, 2.0, 0).is_err());
    }

    #[test]
    fn liouville_only_for_collars() {
        let q = ModeProblem::q_phi(WeightedInterval::flat(1.0f64).unwrap());
        assert!(q.sturm_liouville(Coordinate::Liouville).is_err());
    }
}
