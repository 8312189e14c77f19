//! Benchmark toolkit for imputation of multivariate clinical time series.
//!
//! The pipeline is: load or synthesize a [`VitalsFrame`], split stays,
//! normalize, ampute with one of four missingness mechanisms, fit and apply
//! an imputer, and score the result on the amputed cells.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiation.

pub mod amputation;
pub mod analysis;
pub mod bench;
pub mod dataset;
pub mod error;
pub mod mask;
pub mod metrics;
pub mod scalar;
pub mod imputers;
pub mod seed;

pub use error::{Error, Result};
pub use mask::{AmputationMask, Mask, ObservationMask};
pub use scalar::Scalar;

pub use dataset::VitalsFrame;

pub type Frame = dataset::VitalsFrame<f64>;
pub type Frame32 = dataset::VitalsFrame<f32>;
pub type Stats = dataset::NormalizationStats<f64>;
