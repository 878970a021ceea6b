//! Floating-point scalar abstraction shared by the spectral, stochastic and
//! propagator layers.
//!
//! Everything that touches FFTs is generic over [`Scalar`], which is
//! implemented for `f32` and `f64`. Hermite evaluation only needs ring
//! operations and is generic over `num_traits::Num`, so it also runs on
//! exact rationals.

use std::cell::RefCell;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::Arc;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::{Fft, FftNum, FftPlanner};

/// Real scalar type usable in spectral computations.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + Debug + Sum + Send + Sync + 'static
{
    /// Unit roundoff of the type.
    const EPS: f64;

    /// Plans (or fetches from a per-thread cache) an FFT of length `len`.
    fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<Self>>;

    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts to scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($t:ty, $cache:ident) => {
        thread_local! {
            static $cache: RefCell<FftPlanner<$t>> = RefCell::new(FftPlanner::new());
        }

        impl Scalar for $t {
            const EPS: f64 = <$t>::EPSILON as f64;

            fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<Self>> {
                $cache.with(|p| {
                    let mut p = p.borrow_mut();
                    if inverse {
                        p.plan_fft_inverse(len)
                    } else {
                        p.plan_fft_forward(len)
                    }
                })
            }
        }
    };
}

impl_scalar!(f64, PLANNER_F64);
impl_scalar!(f32, PLANNER_F32);
