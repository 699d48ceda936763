use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type the whole crate is generic over.
///
/// `f64` is the type every production entry point uses (see the aliases at
/// the crate root); `f32` is available for quick low-precision experiments.
/// The default tolerances baked into the solvers are calibrated for `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` literal into the scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal must convert")
    }

    /// Lift a count into the scalar type.
    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize must convert")
    }

    /// Natural log of the gamma function, evaluated through `f64`.
    #[inline]
    fn ln_gamma(self) -> Self {
        Self::of(libm::lgamma(self.to_f64().expect("scalar to f64")))
    }
}

impl Real for f32 {}
impl Real for f64 {}
