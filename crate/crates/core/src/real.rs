//! Floating-point abstraction shared by every solver.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::Float;

/// Working precision of a solve. Implemented for `f32` and `f64`.
pub trait Real:
    Float + Sum + Default + Send + Sync + Debug + Display + LowerExp + 'static
{
    /// Converts an `f64` literal into the working precision.
    fn lit(v: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// `eps^(3/4)`, the default scale of every stopping test.
    fn default_tolerance() -> Self {
        Self::epsilon().powf(Self::lit(0.75))
    }

    /// Bit width, for reports.
    const BITS: u32;
}

impl Real for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }

    const BITS: u32 = 64;
}

impl Real for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }

    const BITS: u32 = 32;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tolerance_matches_eps_three_quarters() {
        let t64 = f64::default_tolerance();
        assert!((t64 - 1.8189894035458617e-12).abs() < 1e-24);
        let t32 = f32::default_tolerance();
        assert!((t32 as f64 - (f32::EPSILON as f64).powf(0.75)).abs() < 1e-9);
    }
}
