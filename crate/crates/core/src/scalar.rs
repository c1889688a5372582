use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the numeric stages are generic over: `f32` or `f64`.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("finite scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
