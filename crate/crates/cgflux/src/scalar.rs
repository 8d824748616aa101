//! Floating-point scalar abstraction.
//!
//! All numerics in this crate are generic over a [`Real`] scalar so the same
//! kernels run in `f32` or `f64`. Concrete aliases live at the crate root.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: f32 or f64.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + std::iter::Sum
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from f64 (panics only on NaN inputs, which
    /// never occur for the literals used internally).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Conversion to f64 for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
