//! Maximum-likelihood time-of-arrival estimation error across all SNR regimes.
//!
//! The library models the normalized autocorrelation (ACR) of baseband and
//! passband Gaussian pulses, approximates the MLE mean-squared-error with
//! interval-estimation machinery, extracts the a priori / begin-ambiguity /
//! end-ambiguity / asymptotic SNR thresholds both numerically and in closed
//! form (Lambert W), and uses the thresholds to pick the pulse bandwidth and
//! carrier that minimize the achievable MSE under band constraints.

pub mod bounds;
pub mod config;
pub mod design;
pub mod error;
pub mod mc;
pub mod mse;
pub mod mvn;
pub mod pulse;
pub mod quad;
pub mod special;
pub mod threshold;

pub use error::{Error, Result};

use num_traits::{Float, FromPrimitive};

/// Scalar type the closed-form math is written against: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + 'static {}
impl<T: Float + FromPrimitive + std::fmt::Debug + 'static> Real for T {}

/// Convert dB to a linear power ratio.
#[inline]
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert a linear power ratio to dB.
#[inline]
pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Default scalar for the numerical pipeline.
pub type Scalar = f64;
/// Single-precision alias for callers that want it.
pub type Scalar32 = f32;
