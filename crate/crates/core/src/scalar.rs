//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All algebra, stabilization and verification code is written against
//! [`Real`], so the same pipeline runs in `f32`, `f64` or the double-double
//! [`TwoFloat`] type. `f64` is the working precision of the CLI; the
//! double-double instance is used where a rate has to be resolved below the
//! rounding floor of `f64`.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use twofloat::TwoFloat;

/// Real field used for element entries, norms and control values.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in every Real")
    }

    /// Lossy conversion used for hashing, reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `self^r` for `self >= 0`, with `0^r = 0` for every `r > 0`.
    ///
    /// Exponents 1/2 and 1/4 go through `sqrt`, which is much tighter than
    /// `powf` for `TwoFloat`.
    fn pow_nonneg(self, r: Self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let one = Self::one();
        let half = Self::lit(0.5);
        if r == one {
            self
        } else if r == half {
            self.sqrt()
        } else if r == one + one {
            self * self
        } else if r == Self::lit(0.25) {
            self.sqrt().sqrt()
        } else {
            self.powf(r)
        }
    }

    /// Unit roundoff of the working precision.
    #[inline]
    fn precision() -> Self {
        Self::epsilon()
    }

    /// Relative tolerance clamped from below by a small multiple of the
    /// machine epsilon, so f32 routines do not chase unreachable targets.
    #[inline]
    fn tol_floor(tol: f64) -> Self {
        Self::lit(tol).max(Self::precision() * Self::lit(16.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `TwoFloat`'s `FromPrimitive` truncates to an integer and its `epsilon`
/// is the smallest positive normal, so both are replaced here.
impl Real for TwoFloat {
    fn lit(v: f64) -> Self {
        TwoFloat::from(v)
    }

    fn precision() -> Self {
        TwoFloat::from(2f64.powi(-104))
    }
}

/// Complex scalar with entries in `T`.
pub type Scalar<T> = Complex<T>;

/// Complex conversion from `f64` parts.
#[inline]
pub fn scalar<T: Real>(re: f64, im: f64) -> Scalar<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub(crate) fn is_finite_scalar<T: Real>(z: &Scalar<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
