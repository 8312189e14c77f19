//! Per-feature constant fills: zero, mean, median, most frequent.

use super::params::Params;
use super::{feature_columns, FittedModel, Imputer, ImputerSpec};
use crate::dataset::VitalsFrame;
use crate::error::{Error, Result};
use crate::scalar::{total_cmp, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Zero,
    Mean,
    Median,
    MostFrequent,
}

#[derive(Debug, Clone, Copy)]
pub struct Baseline {
    kind: BaselineKind,
}

impl Baseline {
    pub fn new(kind: BaselineKind) -> Self {
        Baseline { kind }
    }

    pub fn from_spec(kind: BaselineKind, spec: &ImputerSpec) -> Result<Self> {
        Params::new(&spec.name, &spec.params).finish()?;
        Ok(Self::new(kind))
    }
}

/// One fill value per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantFill<T> {
    pub kind: BaselineKind,
    pub fill: Vec<T>,
}

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_count(xs.len())
}

pub fn median<T: Scalar>(xs: &[T]) -> T {
    let mut v = xs.to_vec();
    v.sort_by(total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Most frequent exact value; ties go to the smallest value.
pub fn most_frequent<T: Scalar>(xs: &[T]) -> T {
    let mut v = xs.to_vec();
    v.sort_by(total_cmp);
    let mut best = (v[0], 0usize);
    let mut i = 0;
    while i < v.len() {
        let j = v[i..].iter().take_while(|&&x| x == v[i]).count();
        if j > best.1 {
            best = (v[i], j);
        }
        i += j;
    }
    best.0
}

impl<T: Scalar> Imputer<T> for Baseline {
    fn fit(&self, train: &VitalsFrame<T>) -> Result<Box<dyn FittedModel<T>>> {
        let cols = feature_columns(train);
        let mut fill = Vec::with_capacity(cols.len());
        for (f, col) in cols.iter().enumerate() {
            if col.is_empty() && self.kind != BaselineKind::Zero {
                return Err(Error::EmptyFeature {
                    feature: train.features()[f].name.clone(),
                });
            }
            fill.push(match self.kind {
                BaselineKind::Zero => T::zero(),
                BaselineKind::Mean => mean(col),
                BaselineKind::Median => median(col),
                BaselineKind::MostFrequent => most_frequent(col),
            });
        }
        Ok(Box::new(ConstantFill {
            kind: self.kind,
            fill,
        }))
    }
}

impl<T: Scalar> FittedModel<T> for ConstantFill<T> {
    fn complete(&self, frame: &VitalsFrame<T>) -> Result<Vec<T>> {
        let nf = self.fill.len();
        Ok(frame
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| v.unwrap_or(self.fill[i % nf]))
            .collect())
    }
}
