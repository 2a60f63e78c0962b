//! Scalar abstraction: all numerics in this crate are generic over a
//! floating-point type implementing [`Real`].

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
///
/// Everything in this crate computes with an abstract `Real`; the crate root
/// exports `f64` type aliases for the common case.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant not representable")
    }

    /// Converts a `usize` (counts, dimensions) into this scalar type.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize not representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Default tolerance for mass-function sum checks at construction.
pub const MASS_SUM_TOL: f64 = 1e-12;

/// Default comparison tolerance in property checks.
pub const CMP_TOL: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_work_for_both_widths() {
        assert_eq!(f64::of(0.25), 0.25);
        assert_eq!(f32::of(0.25), 0.25_f32);
        assert_eq!(f64::of_usize(7), 7.0);
    }
}
