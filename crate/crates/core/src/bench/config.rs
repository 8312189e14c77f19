use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::amputation::Mechanism;
use crate::dataset::{generate_synthetic, load_csv, CsvOptions, SplitRatios, VitalsFrame};
use crate::error::{Error, Result};
use crate::imputers::Registry;
use crate::mask::ObservationMask;
use crate::metrics::EvalOptions;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    Path(PathBuf),
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub stays: usize,
    pub hours: usize,
    #[serde(default)]
    pub native_missing_rates: Vec<f64>,
    /// Generator seed; the master seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl MethodConfig {
    pub fn new(name: impl Into<String>) -> Self {
        MethodConfig {
            name: name.into(),
            params: Map::new(),
        }
    }
}

/// Either a run count (seeds `0..n`) or an explicit seed list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::Count(5)
    }
}

impl Seeds {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

fn default_mechanisms() -> Vec<Mechanism> {
    Mechanism::ALL.to_vec()
}

fn default_rates() -> Vec<f64> {
    vec![0.3, 0.5, 0.7]
}

/// The benchmark's experiment grid as read from a JSON config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGrid {
    pub dataset: DatasetSource,
    #[serde(default = "default_mechanisms")]
    pub mechanisms: Vec<Mechanism>,
    #[serde(default = "default_rates")]
    pub rates: Vec<f64>,
    pub methods: Vec<MethodConfig>,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub split: SplitRatios,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub metrics: EvalOptions,
}

pub(crate) fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

impl ExperimentGrid {
    /// Parses a config document. Errors carry the JSON pointer of the
    /// offending value.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            pointer: pointer(e.path()),
            message: e.inner().to_string(),
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid serializes")
    }

    pub fn seed_values(&self) -> Vec<u64> {
        self.seeds.values()
    }

    /// Checks axes and resolves every method before anything runs.
    pub fn validate<T: Scalar>(&self, registry: &Registry<T>) -> Result<()> {
        let cfg = |pointer: &str, message: String| Error::Config {
            pointer: pointer.into(),
            message,
        };
        if self.mechanisms.is_empty() {
            return Err(cfg("/mechanisms", "must not be empty".into()));
        }
        if self.rates.is_empty() {
            return Err(cfg("/rates", "must not be empty".into()));
        }
        if let Some((i, r)) = self.rates.iter().enumerate().find(|(_, r)| !(**r > 0.0 && **r < 1.0)) {
            return Err(cfg(&format!("/rates/{i}"), format!("rate {r} must lie in (0, 1)")));
        }
        if self.methods.is_empty() {
            return Err(cfg("/methods", "must not be empty".into()));
        }
        if self.seed_values().is_empty() {
            return Err(cfg("/seeds", "must not be empty".into()));
        }
        self.split
            .validate()
            .map_err(|e| cfg("/split", e.to_string()))?;
        if self.metrics.jsd_bins < 2 {
            return Err(cfg("/metrics/jsd_bins", "must be >= 2".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            let spec = crate::imputers::ImputerSpec {
                name: m.name.clone(),
                params: m.params.clone(),
                seed: 0,
            };
            if let Err(e) = registry.build(&spec) {
                return Err(cfg(&format!("/methods/{i}"), e.to_string()));
            }
        }
        if let DatasetSource::Synthetic(s) = &self.dataset {
            if s.stays == 0 || s.hours < 2 {
                return Err(cfg("/dataset/synthetic", "needs stays >= 1 and hours >= 2".into()));
            }
        }
        Ok(())
    }

    /// Short name for the dataset used in result tables.
    pub fn dataset_tag(&self) -> String {
        match &self.dataset {
            DatasetSource::Path(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "data".into()),
            DatasetSource::Synthetic(_) => "synthetic".into(),
        }
    }

    pub fn load_dataset<T: Scalar>(&self) -> Result<(VitalsFrame<T>, ObservationMask)> {
        match &self.dataset {
            DatasetSource::Path(p) => load_csv(p, &CsvOptions::default()),
            DatasetSource::Synthetic(s) => generate_synthetic(
                s.stays,
                s.hours,
                s.seed.unwrap_or(self.master_seed),
                &s.native_missing_rates,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOKE: &str = r#"{
        "dataset": {"synthetic": {"stays": 50, "hours": 24, "native_missing_rates": []}},
        "methods": [{"name": "mean"}, {"name": "mice", "params": {"max_iter": 3}}],
        "seeds": 2,
        "split": {"train": 0.7, "val": 0.15, "test": 0.15},
        "master_seed": 42,
        "metrics": {"jsd_bins": 50, "per_stay": false}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let g = ExperimentGrid::from_json(SMOKE).unwrap();
        assert_eq!(g.mechanisms.len(), 4);
        assert_eq!(g.rates, vec![0.3, 0.5, 0.7]);
        assert_eq!(g.seed_values(), vec![0, 1]);
        assert_eq!(g.dataset_tag(), "synthetic");
        g.validate(&Registry::<f64>::with_builtins()).unwrap();
        let back = ExperimentGrid::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn unknown_keys_named_with_pointer() {
        let text = SMOKE.replace("\"per_stay\"", "\"per_stya\"");
        let err = ExperimentGrid::from_json(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("per_stya") && msg.contains("/metrics"), "{msg}");
        let text = SMOKE.replacen("\"seeds\"", "\"sedes\"", 1);
        assert!(ExperimentGrid::from_json(&text).unwrap_err().to_string().contains("sedes"));
    }

    #[test]
    fn validation_points_at_offender() {
        let mut g = ExperimentGrid::from_json(SMOKE).unwrap();
        g.methods.push(MethodConfig::new("nope"));
        let msg = g.validate(&Registry::<f64>::with_builtins()).unwrap_err().to_string();
        assert!(msg.contains("/methods/2") && msg.contains("nope"), "{msg}");
        let mut g = ExperimentGrid::from_json(SMOKE).unwrap();
        g.rates.push(1.5);
        assert!(g.validate(&Registry::<f64>::with_builtins()).unwrap_err().to_string().contains("/rates/3"));
    }

    #[test]
    fn path_dataset_and_seed_list() {
        let g = ExperimentGrid::from_json(
            r#"{"dataset": {"path": "data/eicu_demo.csv"}, "methods": [{"name": "zero"}], "seeds": [3, 9]}"#,
        )
        .unwrap();
        assert_eq!(g.dataset_tag(), "eicu_demo");
        assert_eq!(g.seed_values(), vec![3, 9]);
    }
}
