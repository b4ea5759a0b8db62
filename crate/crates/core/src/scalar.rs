//! Scalar abstraction shared by every numeric type in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point field underlying all complex matrices.
///
/// Implemented for `f32` and `f64`. Each implementation carries its own
/// default tolerances since `f32` cannot resolve the `f64` defaults.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Default `(eps_num, eps_dedup, eps_classical)`.
    const DEFAULT_TOLERANCES: (f64, f64, f64);

    /// Human-readable name used in serialized metadata.
    const NAME: &'static str;

    /// Lossy conversion from `f64`; total for finite inputs.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to every Real")
    }

    fn to_f64_lossless(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f64 {
    const DEFAULT_TOLERANCES: (f64, f64, f64) = (1e-9, 1e-7, 1e-7);
    const NAME: &'static str = "f64";
}

impl Real for f32 {
    const DEFAULT_TOLERANCES: (f64, f64, f64) = (2e-5, 1e-4, 1e-4);
    const NAME: &'static str = "f32";
}
