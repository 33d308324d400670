//! Scalar abstraction: every quantity in this crate (kWh, currency, probability)
//! is a plain floating-point number, generic over the precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used throughout the tariff engine: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute comparison tolerance for equality assertions and solver
    /// feasibility checks. Magnitudes in this domain are O(1-10).
    fn tol() -> Self;

    /// Conversion from an `f64` literal, panicking on overflow.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }
}

impl Real for f64 {
    fn tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn tol() -> Self {
        1e-4
    }
}

/// `|a - b| <= tol`, the crate-wide approximate equality.
pub fn approx_eq<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::tol()
}
