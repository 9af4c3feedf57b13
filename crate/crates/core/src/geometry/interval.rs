use crate::error::{domain, Result};
use crate::geometry::Profile;
use crate::scalar::Real;
use crate::special::integrate;

/// The interval `[a, b]` with metric `e^{φ} dx`.
#[derive(Clone, Debug)]
pub struct WeightedInterval<T: Real> {
    a: T,
    b: T,
    phi: Profile<T>,
}

impl<T: Real> WeightedInterval<T> {
    pub fn new(a: T, b: T, phi: Profile<T>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(domain(format!(
                "interval endpoints must satisfy a < b (got {:?}, {:?})",
                a, b
            )));
        }
        for i in 0..=64 {
            let x = a + (b - a) * T::of(i) / T::lit(64.0);
            if !phi.value(x).is_finite() {
                return Err(domain(format!("conformal weight not finite at x = {:?}", x)));
            }
        }
        Ok(Self { a, b, phi })
    }

    /// The flat interval `[0, length]`.
    pub fn flat(length: T) -> Result<Self> {
        Self::new(T::zero(), length, Profile::zero())
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn phi(&self) -> &Profile<T> {
        &self.phi
    }

    pub fn coordinate_length(&self) -> T {
        self.b - self.a
    }

    /// Length in the metric `e^{φ} dx`.
    pub fn weighted_length(&self) -> T {
        let phi = &self.phi;
        integrate(|x| phi.value(x).exp(), self.a, self.b, 64, 12)
    }
}
