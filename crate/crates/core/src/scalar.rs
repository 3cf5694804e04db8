//! Element widths supported by the operators.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::LinalgScalar;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point element type for features, activations and parameters.
///
/// `f32` is the compute path; `f64` is the verification path.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + LinalgScalar + Sum + Default + Debug + Display + Send + Sync
{
    const BITS: u32;
    const BYTES: usize = (Self::BITS / 8) as usize;

    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("float conversion")
    }

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count conversion")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float conversion")
    }
}

impl Scalar for f32 {
    const BITS: u32 = 32;
}

impl Scalar for f64 {
    const BITS: u32 = 64;
}
