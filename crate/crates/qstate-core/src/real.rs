use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Scalar type the state algebra is generic over. Implemented for `f32` and `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Literal conversion from `f64`.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("representable constant")
    }

    /// A tolerance equal to `x` in double precision, floored at a small multiple of
    /// machine epsilon so the same contract stays meaningful in single precision.
    fn tol(x: f64) -> Self {
        let eps = Self::default_epsilon().to_f64().unwrap_or(f64::EPSILON);
        Self::c(x.max(64.0 * eps))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
