//! Scalar abstraction shared by the linear algebra, the solver and the
//! certification layer.

use nalgebra as na;
use num_traits as nt;

/// Real floating point type the crate is generic over (`f32` or `f64`).
///
/// Tolerances that depend on the working precision are exposed as associated
/// functions so that the same code paths can run in single precision with
/// looser acceptance thresholds.
pub trait Real:
    Copy
    + Default
    + nt::FromPrimitive
    + nt::ToPrimitive
    + na::RealField
    + na::Scalar
    + serde::Serialize
    + for<'de> serde::Deserialize<'de>
    + Send
    + Sync
{
    /// Asymmetry ‖X − X†‖_max above which a matrix is rejected as non-Hermitian.
    const HERMITIAN_REJECT: f64;
    /// Generic "numerically zero" threshold for structural checks.
    const STRUCTURAL_TOL: f64;

    /// Converts a literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        nt::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// A tolerance stated for double precision, floored at what the type
    /// can resolve.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x.max(Self::STRUCTURAL_TOL * 1e-2))
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f64 {
    const HERMITIAN_REJECT: f64 = 1e-10;
    const STRUCTURAL_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const HERMITIAN_REJECT: f64 = 1e-4;
    const STRUCTURAL_TOL: f64 = 1e-4;
}
