//! Floating-point abstraction shared by the learning and evaluation layers.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Numeric cell type for feature tables, standardizers and models.
///
/// Implemented for `f32` and `f64`. Text rendering goes through `Display`
/// and parsing through `FromStr`, both of which round-trip exactly for the
/// primitive floats.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal, saturating to infinity when out of range.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(|| if v < 0.0 { Self::neg_infinity() } else { Self::infinity() })
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::lit(v as f64)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
