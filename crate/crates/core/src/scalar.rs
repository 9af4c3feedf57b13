//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Geometry, curvature and mesh code is exact enough in either precision;
/// the spectral routines are tuned for `f64` and only reach their stated
/// tolerances there.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Debug + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    /// Machine epsilon of the scalar type.
    fn eps() -> Self;

    #[inline]
    fn cot(self) -> Self {
        self.cos() / self.sin()
    }

    #[inline]
    fn csc(self) -> Self {
        Self::one() / self.sin()
    }
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;
/// Riemann zeta at zero, ζ_R(0).
pub const ZETA_R_AT_ZERO: f64 = -0.5;
/// Derivative of the Riemann zeta at zero, ζ_R′(0) = −½ log 2π.
pub const ZETA_R_PRIME_AT_ZERO: f64 = -0.918_938_533_204_672_741_780_329_736_406;
/// ζ_R(−1).
pub const ZETA_R_AT_MINUS_ONE: f64 = -0.083_333_333_333_333_333_333_333_333_333;
