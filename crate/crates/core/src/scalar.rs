//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the Gramian, communicability and
/// scheduling kernels: `f32` or `f64`.
///
/// The associated thresholds are precision dependent. `f64` uses the
/// values the analysis was calibrated with; `f32` scales them to its
/// much shorter mantissa.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Default + Send + Sync + 'static
{
    /// Eigenvalues below `SINGULAR_REL * lambda_max` count as zero.
    fn singular_rel() -> Self;

    /// Relative tolerance for symmetry checks on Gramians.
    fn symmetry_rel() -> Self;

    /// Relative gap under which two centrality values are considered tied.
    fn tie_rel() -> Self;

    /// Condition number above which a Gramian is treated as not invertible.
    fn condition_cap() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn singular_rel() -> Self {
        1e-12
    }
    fn symmetry_rel() -> Self {
        1e-10
    }
    fn tie_rel() -> Self {
        1e-12
    }
    fn condition_cap() -> Self {
        1e9
    }
}

impl Scalar for f32 {
    fn singular_rel() -> Self {
        1e-6
    }
    fn symmetry_rel() -> Self {
        1e-5
    }
    fn tie_rel() -> Self {
        1e-6
    }
    fn condition_cap() -> Self {
        1e5
    }
}
