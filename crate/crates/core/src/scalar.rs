//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point type the library is generic over (`f32` or `f64`).
///
/// Besides the usual float arithmetic, every implementation carries the
/// numerical tolerances the algorithms need, so the same code path can run
/// at both precisions without hard-coding `1e-10` style literals.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Tolerance for structural checks (Hermiticity, unit trace, PSD clamping).
    fn validation_tol() -> Self;

    /// Absolute stopping threshold on the off-diagonal Frobenius norm in Jacobi sweeps.
    fn jacobi_tol() -> Self;

    /// Squared norms below this are treated as an annihilated state.
    fn vanishing_norm_sqr() -> Self;

    /// Converts an `f64` literal. Panics only if the target cannot represent finite floats.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn validation_tol() -> Self {
        1e-10
    }

    fn jacobi_tol() -> Self {
        1e-13
    }

    fn vanishing_norm_sqr() -> Self {
        1e-14
    }
}

impl Real for f32 {
    fn validation_tol() -> Self {
        1e-4
    }

    fn jacobi_tol() -> Self {
        1e-6
    }

    fn vanishing_norm_sqr() -> Self {
        1e-10
    }
}
