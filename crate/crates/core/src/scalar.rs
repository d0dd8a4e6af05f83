//! Scalar abstraction for the numeric core.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Floating-point scalar the whole core is generic over.
///
/// Everything needed by the kernels and the solver: IEEE semantics with
/// infinities (`α = ∞` and `β = ∞` are first-class stepsizes), casts from
/// literals, and the usual compound assignment operators.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Default
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Cast an `f64` literal (tolerances, weights) into the scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        NumCast::from(v).expect("literal not representable in scalar type")
    }

    /// Lossy view as `f64`, used for reporting and error messages.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
