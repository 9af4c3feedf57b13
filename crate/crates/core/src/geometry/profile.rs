use std::fmt;
use std::sync::Arc;

use crate::scalar::Real;

pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// A smooth scalar function of one variable, optionally carrying its first
/// and second derivatives. Missing derivatives fall back to central
/// differences.
#[derive(Clone)]
pub struct Profile<T: Real> {
    f: ScalarFn<T>,
    df: Option<ScalarFn<T>>,
    d2f: Option<ScalarFn<T>>,
}

impl<T: Real> fmt::Debug for Profile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("analytic_first", &self.df.is_some())
            .field("analytic_second", &self.d2f.is_some())
            .finish()
    }
}

impl<T: Real> Profile<T> {
    pub fn new(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            df: None,
            d2f: None,
        }
    }

    pub fn with_derivatives(
        f: impl Fn(T) -> T + Send + Sync + 'static,
        df: impl Fn(T) -> T + Send + Sync + 'static,
        d2f: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            df: Some(Arc::new(df)),
            d2f: Some(Arc::new(d2f)),
        }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn constant(c: T) -> Self {
        Self::with_derivatives(move |_| c, |_| T::zero(), |_| T::zero())
    }

    /// `-log sin v`, the factor taking the flat cylinder metric to the
    /// hyperbolic collar metric `(du² + dv²)/sin² v`.
    pub fn neg_log_sin() -> Self {
        Self::with_derivatives(
            |v: T| -v.sin().ln(),
            |v: T| -v.cot(),
            |v: T| {
                let s = v.sin();
                T::one() / (s * s)
            },
        )
    }

    /// `log sin v + c`.
    pub fn log_sin_plus(c: T) -> Self {
        Self::with_derivatives(
            move |v: T| v.sin().ln() + c,
            |v: T| v.cot(),
            |v: T| {
                let s = v.sin();
                -T::one() / (s * s)
            },
        )
    }

    /// Drops analytic derivatives, forcing finite differences.
    pub fn without_derivatives(&self) -> Self {
        Self {
            f: self.f.clone(),
            df: None,
            d2f: None,
        }
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.df.is_some() && self.d2f.is_some()
    }

    #[inline]
    pub fn value(&self, x: T) -> T {
        (self.f)(x)
    }

    pub fn derivative(&self, x: T) -> T {
        match &self.df {
            Some(df) => df(x),
            None => {
                let h = T::eps().powf(T::lit(1.0 / 3.0)) * x.abs().max(T::one());
                ((self.f)(x + h) - (self.f)(x - h)) / (h + h)
            }
        }
    }

    pub fn second_derivative(&self, x: T) -> T {
        match &self.d2f {
            Some(d2f) => d2f(x),
            None => {
                let h = T::eps().powf(T::lit(0.25)) * x.abs().max(T::one());
                ((self.f)(x + h) - T::two() * (self.f)(x) + (self.f)(x - h)) / (h * h)
            }
        }
    }

    /// Pointwise sum of two profiles.
    pub fn plus(&self, other: &Profile<T>) -> Profile<T> {
        let (a, b) = (self.clone(), other.clone());
        let (a1, b1) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        Profile::with_derivatives(
            move |x| a.value(x) + b.value(x),
            move |x| a1.derivative(x) + b1.derivative(x),
            move |x| a2.second_derivative(x) + b2.second_derivative(x),
        )
    }
}
