use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the whole crate is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance used for "within 1e-12" style invariants, widened for
    /// narrow types.
    #[inline]
    fn invariant_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sign with `sgn(0) = 0`.
#[inline]
pub fn sgn<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Total order on scalars that places NaN after every number.
#[inline]
pub fn total_cmp<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    match a.partial_cmp(b) {
        Some(o) => o,
        None => a.is_nan().cmp(&b.is_nan()),
    }
}

/// Wraps an angle into `[0, 2π)`.
#[inline]
pub fn wrap_angle<T: Scalar>(phi: T) -> T {
    let two_pi = T::TAU();
    let mut r = phi % two_pi;
    if r < T::zero() {
        r = r + two_pi;
    }
    if r >= two_pi {
        r = r - two_pi;
    }
    r
}

/// `ln(Σ exp(x_i))` without overflow. Returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<T: Scalar>(xs: impl IntoIterator<Item = T> + Clone) -> T {
    let m = xs
        .clone()
        .into_iter()
        .fold(T::neg_infinity(), |acc, x| if x > acc { x } else { acc });
    if m == T::neg_infinity() || m.is_nan() {
        return m;
    }
    let s: T = xs.into_iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}
