//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point scalar: `f32` or `f64`.
///
/// Everything that touches spectra, entropies or matrix entries is generic
/// over this trait. Complex entries are `num_complex::Complex<T>`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal, panicking only if the target type cannot hold it at all.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal representable in scalar type")
    }

    fn from_usize_lossy(value: usize) -> Self {
        Self::from_usize(value).unwrap_or_else(Self::infinity)
    }

    /// Lossy conversion used for error payloads and reports.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(value, 16 ulp)`: a requested tolerance clamped to what the type can resolve.
    fn resolvable(value: f64) -> Self {
        let requested = Self::lit(value);
        let floor = Self::epsilon() * Self::lit(16.0);
        if requested < floor {
            floor
        } else {
            requested
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
