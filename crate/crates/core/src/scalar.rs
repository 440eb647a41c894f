//! Floating-point abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used for vectors, statistics and model fits.
///
/// Implemented for `f32` and `f64`. Training defaults to `f32`; the
/// finite-difference and statistical oracles run in `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    /// Widening conversion to `f64`.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    /// Conversion from a count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in every Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Dot product of two equal-length slices.
#[inline]
pub fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Euclidean norm.
#[inline]
pub fn norm<F: Real>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<F: Real>(xs: &[F]) -> Option<F> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().copied().sum::<F>() / F::of_usize(xs.len()))
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub fn sample_sd<F: Real>(xs: &[F]) -> F {
    if xs.len() < 2 {
        return F::zero();
    }
    let m = mean(xs).unwrap_or_else(F::zero);
    let ss: F = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    (ss / F::of_usize(xs.len() - 1)).sqrt()
}
