//! Floating-point abstraction shared by every estimator.
//!
//! Analyses are written once against [`Scalar`] and instantiated for `f32`
//! and `f64`. Exact quantities (goal counts, regression numerators on
//! integer totals) stay in integer or rational arithmetic and are converted
//! at the boundary.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` values at all, which no supported type does.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits scalar")
    }

    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer fits scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip_small_integers() {
        assert_eq!(f64::from_count(306), 306.0);
        assert_eq!(f32::from_int(-27), -27.0);
        assert_eq!(<f32 as Scalar>::lit(0.5).to_f64_lossy(), 0.5);
    }
}
