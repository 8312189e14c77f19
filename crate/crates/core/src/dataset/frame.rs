use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub unit: String,
}

impl Feature {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Feature {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// The six vital signs in canonical column order.
pub fn default_features() -> Vec<Feature> {
    vec![
        Feature::new("hr", "bpm"),
        Feature::new("resp", "breaths/min"),
        Feature::new("o2sat", "%"),
        Feature::new("map", "mmHg"),
        Feature::new("sbp", "mmHg"),
        Feature::new("dbp", "mmHg"),
    ]
}

/// Stays × hours × features grid of optional measurements.
///
/// Stays may have different lengths; rows of all stays are stored
/// back-to-back and `offsets` marks where each stay begins. Every stay sits
/// on a contiguous 1-hour grid starting at its own `start_hour`.
#[derive(Debug, Clone, PartialEq)]
pub struct VitalsFrame<T> {
    stay_ids: Vec<String>,
    start_hours: Vec<i64>,
    offsets: Vec<usize>,
    features: Vec<Feature>,
    values: Vec<Option<T>>,
    outcome: Option<Vec<u8>>,
}

impl<T: Scalar> VitalsFrame<T> {
    /// Builds a frame from per-stay row counts and row-major values.
    pub fn new(
        stay_ids: Vec<String>,
        start_hours: Vec<i64>,
        stay_lengths: &[usize],
        features: Vec<Feature>,
        values: Vec<Option<T>>,
        outcome: Option<Vec<u8>>,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Shape("frame needs at least one feature".into()));
        }
        if stay_ids.len() != stay_lengths.len() || start_hours.len() != stay_lengths.len() {
            return Err(Error::Shape("stay metadata lengths disagree".into()));
        }
        let mut offsets = Vec::with_capacity(stay_lengths.len() + 1);
        offsets.push(0);
        for &len in stay_lengths {
            offsets.push(offsets.last().unwrap() + len);
        }
        let n_rows = *offsets.last().unwrap();
        if values.len() != n_rows * features.len() {
            return Err(Error::Shape(format!(
                "{} values for {} rows x {} features",
                values.len(),
                n_rows,
                features.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("present values must be finite"));
        }
        if let Some(out) = &outcome {
            if out.len() != stay_ids.len() {
                return Err(Error::Shape("outcome must be defined for every stay".into()));
            }
            if out.iter().any(|&o| o > 1) {
                return Err(Error::invalid("outcome labels must be 0 or 1"));
            }
        }
        Ok(VitalsFrame {
            stay_ids,
            start_hours,
            offsets,
            features,
            values,
            outcome,
        })
    }

    /// Equal-length stays with hours starting at 0.
    pub fn from_dense(
        n_stays: usize,
        n_hours: usize,
        features: Vec<Feature>,
        values: Vec<Option<T>>,
        outcome: Option<Vec<u8>>,
    ) -> Result<Self> {
        let ids = (1..=n_stays).map(|i| i.to_string()).collect();
        Self::new(
            ids,
            vec![0; n_stays],
            &vec![n_hours; n_stays],
            features,
            values,
            outcome,
        )
    }

    pub fn n_stays(&self) -> usize {
        self.stay_ids.len()
    }

    pub fn n_rows(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn stay_ids(&self) -> &[String] {
        &self.stay_ids
    }

    pub fn outcome(&self) -> Option<&[u8]> {
        self.outcome.as_deref()
    }

    pub fn stay_rows(&self, stay: usize) -> Range<usize> {
        self.offsets[stay]..self.offsets[stay + 1]
    }

    pub fn stay_ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.offsets.windows(2).map(|w| w[0]..w[1])
    }

    /// Stay index of every row.
    pub fn row_stays(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_rows());
        for (s, range) in self.stay_ranges().enumerate() {
            out.extend(std::iter::repeat_n(s, range.len()));
        }
        out
    }

    /// Timestamp (hours) of every row of one stay.
    pub fn time_grid(&self, stay: usize) -> Range<i64> {
        let start = self.start_hours[stay];
        start..start + self.stay_rows(stay).len() as i64
    }

    #[inline]
    pub fn get(&self, row: usize, feature: usize) -> Option<T> {
        self.values[row * self.features.len() + feature]
    }

    #[inline]
    pub fn set(&mut self, row: usize, feature: usize, value: Option<T>) {
        debug_assert!(value.is_none_or(|v| v.is_finite()));
        let nf = self.features.len();
        self.values[row * nf + feature] = value;
    }

    pub fn row(&self, row: usize) -> &[Option<T>] {
        let nf = self.features.len();
        &self.values[row * nf..(row + 1) * nf]
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    pub fn observation_mask(&self) -> Mask {
        Mask::from_bits(
            self.n_rows(),
            self.n_features(),
            self.values.iter().map(Option::is_some).collect(),
        )
        .expect("shape is consistent by construction")
    }

    pub fn check_mask(&self, mask: &Mask) -> Result<()> {
        if mask.n_rows() != self.n_rows() || mask.n_features() != self.n_features() {
            return Err(Error::Shape(format!(
                "mask is {}x{}, frame is {}x{}",
                mask.n_rows(),
                mask.n_features(),
                self.n_rows(),
                self.n_features()
            )));
        }
        Ok(())
    }

    /// Same layout and metadata, values replaced.
    pub fn with_values(&self, values: Vec<Option<T>>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::Shape("value count differs from frame".into()));
        }
        let mut out = self.clone();
        out.values = values;
        Ok(out)
    }

    /// Copy with every cell where `keep` is false set absent.
    pub fn retain(&self, keep: &Mask) -> Result<Self> {
        self.check_mask(keep)?;
        let values = self
            .values
            .iter()
            .zip(keep.bits())
            .map(|(v, &k)| if k { *v } else { None })
            .collect();
        self.with_values(values)
    }

    /// Copy with every cell where `remove` is true set absent.
    pub fn remove(&self, remove: &Mask) -> Result<Self> {
        self.check_mask(remove)?;
        let values = self
            .values
            .iter()
            .zip(remove.bits())
            .map(|(v, &r)| if r { None } else { *v })
            .collect();
        self.with_values(values)
    }

    /// Sub-frame holding the given stays, in the given order, plus the
    /// source row index of every output row.
    pub fn select_stays(&self, stays: &[usize]) -> (Self, Vec<usize>) {
        let nf = self.n_features();
        let mut row_map = Vec::new();
        let mut values = Vec::new();
        let mut lengths = Vec::with_capacity(stays.len());
        for &s in stays {
            let rows = self.stay_rows(s);
            lengths.push(rows.len());
            values.extend_from_slice(&self.values[rows.start * nf..rows.end * nf]);
            row_map.extend(rows);
        }
        let frame = VitalsFrame::new(
            stays.iter().map(|&s| self.stay_ids[s].clone()).collect(),
            stays.iter().map(|&s| self.start_hours[s]).collect(),
            &lengths,
            self.features.clone(),
            values,
            self.outcome
                .as_ref()
                .map(|o| stays.iter().map(|&s| o[s]).collect()),
        )
        .expect("subset of a valid frame is valid");
        (frame, row_map)
    }

    /// Dense copy with absent cells replaced by `fill`.
    pub fn to_dense(&self, fill: T) -> Vec<T> {
        self.values.iter().map(|v| v.unwrap_or(fill)).collect()
    }
}
