//! Scalar abstraction.
//!
//! Every numerical routine in this crate is written against [`Real`], which
//! is implemented for `f32` and `f64`. Matrices are always complex; the real
//! type only fixes the precision.

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar usable as the real part of the algebra's entries.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Converts an `f64` literal or tolerance into this precision.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Widens to `f64` for reporting.
    fn into_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type C<T> = Complex<T>;
/// Dense complex matrix over `T`.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex column vector over `T`.
pub type CVec<T> = DVector<Complex<T>>;

pub(crate) fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}
