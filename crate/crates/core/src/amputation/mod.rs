//! Artificial missingness: MCAR, MAR, MNAR and blackout masks.
//!
//! Rates are fractions of the *originally observed* cells. Every mask is a
//! pure function of the frame and the config; each mechanism draws from its
//! own seeded streams keyed by (seed, mechanism, purpose, feature).

mod blackout;
pub mod logistic;
mod mar;
mod mcar;
mod mnar;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use blackout::blackout_mask;
pub use logistic::{calibrate_intercept, LogisticMaskModel};
pub use mar::{mar_amputation, mar_input_count, mar_mask, MAX_FEATURE_RATE};
pub use mcar::{mcar_mask, mcar_mask_count};
pub use mnar::{mnar_amputation, mnar_mask};

use crate::dataset::VitalsFrame;
use crate::error::{Error, Result};
use crate::mask::{AmputationMask, Mask, ObservationMask};
use crate::scalar::Scalar;

pub(crate) const STREAM_MCAR: u64 = 0xA1;
pub(crate) const STREAM_MAR: u64 = 0xA2;
pub(crate) const STREAM_MNAR: u64 = 0xA3;
pub(crate) const STREAM_BLACKOUT: u64 = 0xA4;
pub(crate) const TAG_SELECT: u64 = 1;
pub(crate) const TAG_COEF: u64 = 2;
pub(crate) const TAG_DRAW: u64 = 3;
pub(crate) const TAG_INPUT: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Mcar,
    Mar,
    Mnar,
    Bo,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [Mechanism::Mcar, Mechanism::Mar, Mechanism::Mnar, Mechanism::Bo];

    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Mcar => "MCAR",
            Mechanism::Mar => "MAR",
            Mechanism::Mnar => "MNAR",
            Mechanism::Bo => "BO",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mcar" => Ok(Mechanism::Mcar),
            "mar" => Ok(Mechanism::Mar),
            "mnar" => Ok(Mechanism::Mnar),
            "bo" | "blackout" => Ok(Mechanism::Bo),
            _ => Err(Error::invalid(format!("unknown mechanism `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmputationConfig {
    pub mechanism: Mechanism,
    /// Fraction of observed cells to remove, in (0, 1).
    pub rate: f64,
    pub seed: u64,
    /// Fraction of features kept fully observed under MAR.
    pub mar_observed_fraction: f64,
    /// Forces non-negative logistic coefficients (MAR/MNAR). Test hook.
    pub positive_coefficients: bool,
}

impl AmputationConfig {
    pub fn new(mechanism: Mechanism, rate: f64, seed: u64) -> Self {
        AmputationConfig {
            mechanism,
            rate,
            seed,
            mar_observed_fraction: 0.5,
            positive_coefficients: false,
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return Err(Error::invalid(format!("rate {} must lie in (0, 1)", self.rate)));
        }
        if self.mechanism == Mechanism::Mar {
            let k = mar_input_count(n_features, self.mar_observed_fraction);
            if !(self.mar_observed_fraction > 0.0) || k < 1 || k >= n_features {
                return Err(Error::invalid(format!(
                    "MAR observed fraction {} must keep >= 1 observed and >= 1 maskable feature",
                    self.mar_observed_fraction
                )));
            }
        }
        Ok(())
    }
}

/// Result of a logistic-model mechanism.
#[derive(Debug, Clone)]
pub struct LogisticAmputation<T> {
    pub mask: AmputationMask,
    /// Features driving the logistic models.
    pub input_features: Vec<usize>,
    pub models: Vec<LogisticMaskModel<T>>,
}

/// Generates the amputation mask for `config` and returns the amputed frame
/// (masked cells set absent) alongside it.
pub fn ampute_data<T: Scalar>(
    frame: &VitalsFrame<T>,
    obs: &ObservationMask,
    config: &AmputationConfig,
) -> Result<(VitalsFrame<T>, AmputationMask)> {
    let mask = amputation_mask(frame, obs, config)?;
    let amputed = frame.remove(&mask)?;
    Ok((amputed, mask))
}

pub fn amputation_mask<T: Scalar>(
    frame: &VitalsFrame<T>,
    obs: &ObservationMask,
    config: &AmputationConfig,
) -> Result<AmputationMask> {
    frame.check_mask(obs)?;
    if frame.n_rows() == 0 {
        return Err(Error::invalid("cannot ampute an empty frame"));
    }
    if !obs.is_subset_of(&frame.observation_mask()) {
        return Err(Error::invalid("observation mask marks absent cells as observed"));
    }
    if obs.count() == 0 {
        return Err(Error::invalid("frame has no observed cells"));
    }
    config.validate(frame.n_features())?;
    let mask = match config.mechanism {
        Mechanism::Mcar => mcar_mask(obs, config.rate, config.seed),
        Mechanism::Mar => {
            mar_amputation(
                frame,
                obs,
                config.rate,
                config.seed,
                config.mar_observed_fraction,
                config.positive_coefficients,
            )?
            .mask
        }
        Mechanism::Mnar => {
            mnar_amputation(frame, obs, config.rate, config.seed, config.positive_coefficients)?.mask
        }
        Mechanism::Bo => blackout_mask(obs, config.rate, config.seed),
    };
    debug_assert!(mask.is_subset_of(obs));
    Ok(mask)
}

/// `|mask| / |observed cells|`.
pub fn achieved_rate(mask: &Mask, obs: &Mask) -> f64 {
    mask.count() as f64 / obs.count().max(1) as f64
}
