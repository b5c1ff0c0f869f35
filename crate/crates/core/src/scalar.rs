use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the whole crate is generic over.
///
/// Everything here is real arithmetic on `f32` or `f64`; the trait exists so
/// the solver can be instantiated at either width without duplicating code.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + AddAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Tolerance used when validating user-supplied quantities that should
    /// satisfy exact identities (weights summing to one, and so on). Scaled
    /// to the precision of the type, not to any particular model.
    fn validation_tol() -> Self;
}

impl Scalar for f64 {
    fn validation_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn validation_tol() -> Self {
        1e-5
    }
}

/// Shorthand for pulling an `f64` literal into the generic scalar type.
/// Conversion of an ordinary constant never fails for the two impls above.
pub fn scalar<F: Scalar>(v: f64) -> F {
    F::from_f64(v).expect("constant representable in scalar type")
}
