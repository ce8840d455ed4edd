//! Scalar abstraction for the numeric kernels.
//!
//! Metric kernels (cosine, TF-IDF, Gini, rank statistics, graph ratios) are
//! generic over any IEEE float so they can be instantiated at `f32` or `f64`.
//! The report pipeline pins them to [`crate::Real`].

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable by every metric kernel.
pub trait Scalar: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static {
    /// Lossless-enough conversion from a usize count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static {}
