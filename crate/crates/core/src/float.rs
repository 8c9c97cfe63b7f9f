use core::fmt::{Debug, Display};
use core::iter::Sum;

use num_traits::{Float as NumFloat, FloatConst, FromPrimitive, ToPrimitive};

/// Scalar type the numeric kernels are generic over.
///
/// Everything in this crate is written against this trait so the same code
/// runs in `f32` or `f64`; the crate root exports `f64`-backed aliases which
/// the harness and CLI use.
pub trait Float:
    NumFloat
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Float for f32 {}
impl Float for f64 {}

/// Converts an `f64` constant into the working scalar.
#[inline]
pub fn cast<F: Float>(v: f64) -> F {
    F::from_f64(v).expect("finite f64 converts into any Float scalar")
}
