//! Uniform fit/impute interface, method registry and built-in imputers.
//!
//! Methods never see hidden cells: [`fit`](Registry::fit) and
//! [`FittedImputer::impute`] hand each method a copy of the frame in which
//! exactly the visible cells are present. The wrapper then copies visible
//! cells through unchanged and checks the synthesized ones are finite.

pub mod baseline;
pub mod forest;
mod linalg;
pub mod locf;
pub mod mice;
pub mod missforest;
pub mod mlp;
pub mod params;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dataset::{NormalizationStats, VitalsFrame};
use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::scalar::Scalar;

pub use linalg::RidgeFit;
pub use params::parse_kv_pairs;

/// A method to train on the visible cells of a frame.
pub trait Imputer<T: Scalar>: Send + Sync {
    /// `train` holds exactly the visible training cells.
    fn fit(&self, train: &VitalsFrame<T>) -> Result<Box<dyn FittedModel<T>>>;
}

/// Trained state of a method. `Debug` output must reflect the full state;
/// it is how state equality is checked.
pub trait FittedModel<T: Scalar>: Send + Sync + Debug {
    /// Returns dense row-major values for every cell of `frame`, which holds
    /// exactly the visible cells.
    fn complete(&self, frame: &VitalsFrame<T>) -> Result<Vec<T>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImputerSpec {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
}

impl ImputerSpec {
    pub fn new(name: impl Into<String>) -> Self {
        ImputerSpec {
            name: name.into(),
            params: Map::new(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug)]
pub struct FittedImputer<T: Scalar> {
    method: String,
    n_features: usize,
    model: Box<dyn FittedModel<T>>,
    stats: Option<NormalizationStats<T>>,
}

impl<T: Scalar> FittedImputer<T> {
    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn model(&self) -> &dyn FittedModel<T> {
        self.model.as_ref()
    }

    /// Normalization the model was fitted under, when known.
    pub fn stats(&self) -> Option<&NormalizationStats<T>> {
        self.stats.as_ref()
    }

    pub fn with_stats(mut self, stats: NormalizationStats<T>) -> Self {
        self.stats = Some(stats);
        self
    }

    /// Fills every cell not in `visible`. Visible cells are returned bit-exact.
    pub fn impute(&self, frame: &VitalsFrame<T>, visible: &Mask) -> Result<VitalsFrame<T>> {
        if frame.n_features() != self.n_features {
            return Err(Error::Shape(format!(
                "{} was fitted on {} features, frame has {}",
                self.method,
                self.n_features,
                frame.n_features()
            )));
        }
        frame.check_mask(visible)?;
        if !visible.is_subset_of(&frame.observation_mask()) {
            return Err(Error::Shape("visible mask marks absent cells".into()));
        }
        let view = frame.retain(visible)?;
        let dense = self.model.complete(&view)?;
        if dense.len() != frame.values().len() {
            return Err(Error::Shape(format!(
                "{} returned {} values for {} cells",
                self.method,
                dense.len(),
                frame.values().len()
            )));
        }
        let mut out = Vec::with_capacity(dense.len());
        for ((orig, &vis), filled) in frame.values().iter().zip(visible.bits()).zip(dense) {
            if vis {
                out.push(*orig);
            } else if filled.is_finite() {
                out.push(Some(filled));
            } else {
                return Err(Error::NonConvergence {
                    method: self.method.clone(),
                    iterations: 0,
                });
            }
        }
        frame.with_values(out)
    }
}

pub type Constructor<T> = Arc<dyn Fn(&ImputerSpec) -> Result<Box<dyn Imputer<T>>> + Send + Sync>;

/// Name → constructor table. Built-ins are present in [`Registry::with_builtins`].
#[derive(Clone)]
pub struct Registry<T: Scalar> {
    entries: BTreeMap<String, Constructor<T>>,
}

pub const BUILTIN_METHODS: [&str; 8] = [
    "zero",
    "mean",
    "median",
    "most_frequent",
    "locf",
    "mice",
    "missforest",
    "mlp",
];

impl<T: Scalar> Default for Registry<T> {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl<T: Scalar> Registry<T> {
    pub fn empty() -> Self {
        Registry {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        use baseline::{Baseline, BaselineKind};
        let mut r = Self::empty();
        let kinds = [
            ("zero", BaselineKind::Zero),
            ("mean", BaselineKind::Mean),
            ("median", BaselineKind::Median),
            ("most_frequent", BaselineKind::MostFrequent),
        ];
        for (name, kind) in kinds {
            r.register_fn(name, move |spec| Ok(Box::new(Baseline::from_spec(kind, spec)?)))
                .expect("builtin names are unique");
        }
        r.register_fn("locf", |spec| Ok(Box::new(locf::Locf::from_spec(spec)?)))
            .expect("unique");
        r.register_fn("mice", |spec| Ok(Box::new(mice::Mice::from_spec(spec)?)))
            .expect("unique");
        r.register_fn("missforest", |spec| {
            Ok(Box::new(missforest::MissForest::from_spec(spec)?))
        })
        .expect("unique");
        r.register_fn("mlp", |spec| Ok(Box::new(mlp::MlpImputer::from_spec(spec)?)))
            .expect("unique");
        r
    }

    pub fn register(&mut self, name: &str, constructor: Constructor<T>) -> Result<()> {
        if self.entries.contains_key(name) {
            return Err(Error::DuplicateMethod(name.to_string()));
        }
        self.entries.insert(name.to_string(), constructor);
        Ok(())
    }

    pub fn register_fn<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: Fn(&ImputerSpec) -> Result<Box<dyn Imputer<T>>> + Send + Sync + 'static,
    {
        self.register(name, Arc::new(f))
    }

    pub fn lookup(&self, name: &str) -> Result<Constructor<T>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownMethod {
                name: name.to_string(),
                registered: self.names(),
            })
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    /// Resolves and validates a spec without training anything.
    pub fn build(&self, spec: &ImputerSpec) -> Result<Box<dyn Imputer<T>>> {
        (self.lookup(&spec.name)?)(spec)
    }

    /// Trains `spec` on the cells of `train` marked in `visible`.
    pub fn fit(
        &self,
        spec: &ImputerSpec,
        train: &VitalsFrame<T>,
        visible: &Mask,
    ) -> Result<FittedImputer<T>> {
        let imputer = self.build(spec)?;
        train.check_mask(visible)?;
        let view = train.retain(visible)?;
        let model = imputer.fit(&view)?;
        Ok(FittedImputer {
            method: spec.name.clone(),
            n_features: train.n_features(),
            model,
            stats: None,
        })
    }
}

/// Present values of every feature, in row order.
pub(crate) fn feature_columns<T: Scalar>(frame: &VitalsFrame<T>) -> Vec<Vec<T>> {
    let mut cols = vec![Vec::new(); frame.n_features()];
    for r in 0..frame.n_rows() {
        for (f, v) in frame.row(r).iter().enumerate() {
            if let Some(v) = v {
                cols[f].push(*v);
            }
        }
    }
    cols
}

/// Mean of the present values of every feature; errors on an empty feature.
pub(crate) fn feature_means<T: Scalar>(frame: &VitalsFrame<T>) -> Result<Vec<T>> {
    feature_columns(frame)
        .iter()
        .enumerate()
        .map(|(f, col)| {
            if col.is_empty() {
                Err(Error::EmptyFeature {
                    feature: frame.features()[f].name.clone(),
                })
            } else {
                Ok(col.iter().copied().sum::<T>() / T::from_count(col.len()))
            }
        })
        .collect()
}

/// Features in ascending order of their absent-cell count (ties by index).
pub(crate) fn missingness_order<T: Scalar>(frame: &VitalsFrame<T>) -> Vec<usize> {
    let obs = frame.observation_mask();
    let mut order: Vec<usize> = (0..frame.n_features()).collect();
    order.sort_by_key(|&f| (frame.n_rows() - obs.count_feature(f), f));
    order
}
