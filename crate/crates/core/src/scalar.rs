//! Floating-point scalar abstraction.
//!
//! Every geometric and statistical kernel in this crate is generic over
//! [`Real`], so the same code runs in `f32` or `f64`. Pixel containers are
//! deliberately *not* generic: images are `u8`, masks are `bool` and integral
//! images are `u64` because those carry exactness guarantees of their own.

/// Scalar type for geometry and statistics: implemented by `f32` and `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for lowering an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn real<R: Real>(v: f64) -> R {
    R::from_f64(v).expect("f64 literal representable in scalar type")
}
