use super::params::Params;
use super::{feature_means, FittedModel, Imputer, ImputerSpec};
use crate::dataset::VitalsFrame;
use crate::error::Result;
use crate::scalar::Scalar;

/// Last observation carried forward within each stay; leading gaps take the
/// training mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct Locf;

impl Locf {
    pub fn from_spec(spec: &ImputerSpec) -> Result<Self> {
        Params::new(&spec.name, &spec.params).finish()?;
        Ok(Locf)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocfModel<T> {
    pub means: Vec<T>,
}

impl<T: Scalar> Imputer<T> for Locf {
    fn fit(&self, train: &VitalsFrame<T>) -> Result<Box<dyn FittedModel<T>>> {
        Ok(Box::new(LocfModel {
            means: feature_means(train)?,
        }))
    }
}

impl<T: Scalar> FittedModel<T> for LocfModel<T> {
    fn complete(&self, frame: &VitalsFrame<T>) -> Result<Vec<T>> {
        let nf = frame.n_features();
        let mut out = frame.to_dense(T::zero());
        for rows in frame.stay_ranges() {
            for f in 0..nf {
                let mut last = self.means[f];
                for r in rows.clone() {
                    match frame.get(r, f) {
                        Some(v) => last = v,
                        None => out[r * nf + f] = last,
                    }
                }
            }
        }
        Ok(out)
    }
}
