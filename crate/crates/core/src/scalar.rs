use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar the numerical kernels are written against.
///
/// Implemented for `f32` and `f64`. Tolerances are stored as `f64` and
/// converted with [`Real::lit`] at the point of use.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or tolerance into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Element type a [`Matrix`](crate::linalg::Matrix) can hold: a real scalar
/// or a complex number built from one.
pub trait Element: Copy + NumAssign + Sum + Debug + Send + Sync + 'static {}

impl<E: Copy + NumAssign + Sum + Debug + Send + Sync + 'static> Element for E {}
