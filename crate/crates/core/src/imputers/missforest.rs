//! Chained-equation imputation with a random forest per feature.
//!
//! Iterates like MICE but stops at the first pass whose summed squared
//! change of the hidden cells exceeds the previous pass's, keeping the
//! previous pass's forests and imputations, or after `max_iter` passes.

use super::forest::{Design, ForestParams, RandomForest, TreeParams};
use super::params::Params;
use super::{feature_means, missingness_order, FittedModel, Imputer, ImputerSpec};
use crate::dataset::VitalsFrame;
use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissForest {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub max_iter: usize,
    /// Candidate predictors per split; `None` = floor(sqrt(F - 1)).
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for MissForest {
    fn default() -> Self {
        MissForest {
            n_trees: 50,
            max_depth: 10,
            min_leaf: 3,
            max_iter: 5,
            max_features: None,
            seed: 0,
        }
    }
}

impl MissForest {
    pub fn from_spec(spec: &ImputerSpec) -> Result<Self> {
        let d = MissForest::default();
        let mut p = Params::new(&spec.name, &spec.params);
        let max_features = match p.usize("max_features", 0)? {
            0 => None,
            k => Some(k),
        };
        let m = MissForest {
            n_trees: p.usize("n_trees", d.n_trees)?,
            max_depth: p.usize("max_depth", d.max_depth)?,
            min_leaf: p.usize("min_leaf", d.min_leaf)?,
            max_iter: p.usize("max_iter", d.max_iter)?,
            max_features,
            seed: spec.seed,
        };
        p.finish()?;
        if m.n_trees == 0 || m.max_iter == 0 || m.min_leaf == 0 {
            return Err(Error::InvalidParam {
                method: spec.name.clone(),
                message: "n_trees, max_iter and min_leaf must be >= 1".into(),
            });
        }
        Ok(m)
    }

    fn forest_params(&self, n_features: usize) -> ForestParams {
        let p = n_features.saturating_sub(1).max(1);
        ForestParams {
            n_trees: self.n_trees,
            tree: TreeParams {
                max_depth: self.max_depth,
                min_leaf: self.min_leaf,
                max_features: self
                    .max_features
                    .unwrap_or_else(|| ((p as f64).sqrt().floor() as usize).max(1)),
            },
        }
    }

    pub fn fit_model<T: Scalar>(&self, train: &VitalsFrame<T>) -> Result<MissForestModel<T>> {
        let nf = train.n_features();
        let means = feature_means(train)?;
        let order = missingness_order(train);
        let visible = train.observation_mask();
        let params = self.forest_params(nf);
        let mut x = dense_with(train, &means);

        let mut accepted: Option<Vec<Option<RandomForest<T>>>> = None;
        let mut prev_change: Option<T> = None;
        let mut iterations = 0;
        for iter in 0..self.max_iter {
            let before = x.clone();
            let mut forests: Vec<Option<RandomForest<T>>> = vec![None; nf];
            for &f in &order {
                if nf < 2 {
                    break;
                }
                let (design, y) = training_rows(&x, &visible, nf, f);
                if y.is_empty() {
                    continue;
                }
                let forest = RandomForest::fit(
                    Design {
                        data: &design,
                        n_cols: nf - 1,
                    },
                    &y,
                    params,
                    self.seed,
                    &[iter as u64, f as u64],
                );
                update_hidden(&mut x, &visible, nf, f, &forest);
                forests[f] = Some(forest);
            }
            let change = squared_change(&before, &x);
            if !change.is_finite() {
                return Err(Error::NonConvergence {
                    method: "missforest".into(),
                    iterations: iter + 1,
                });
            }
            if let Some(prev) = prev_change {
                if change > prev {
                    break;
                }
            }
            iterations = iter + 1;
            accepted = Some(forests);
            prev_change = Some(change);
            if change == T::zero() {
                break;
            }
        }
        Ok(MissForestModel {
            means,
            order,
            forests: accepted.unwrap_or_else(|| vec![None; nf]),
            iterations,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissForestModel<T> {
    pub means: Vec<T>,
    pub order: Vec<usize>,
    /// Forest of each feature from the last accepted training pass.
    pub forests: Vec<Option<RandomForest<T>>>,
    pub iterations: usize,
}

fn dense_with<T: Scalar>(frame: &VitalsFrame<T>, fill: &[T]) -> Vec<T> {
    let nf = frame.n_features();
    frame
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v.unwrap_or(fill[i % nf]))
        .collect()
}

fn others_into<T: Scalar>(row: &[T], f: usize, out: &mut Vec<T>) {
    out.clear();
    out.extend(row.iter().enumerate().filter(|(j, _)| *j != f).map(|(_, v)| *v));
}

fn training_rows<T: Scalar>(x: &[T], visible: &Mask, nf: usize, f: usize) -> (Vec<T>, Vec<T>) {
    let mut design = Vec::new();
    let mut y = Vec::new();
    for (r, row) in x.chunks_exact(nf).enumerate() {
        if visible.get(r, f) {
            design.extend(row.iter().enumerate().filter(|(j, _)| *j != f).map(|(_, v)| *v));
            y.push(row[f]);
        }
    }
    (design, y)
}

fn update_hidden<T: Scalar>(x: &mut [T], visible: &Mask, nf: usize, f: usize, forest: &RandomForest<T>) {
    let mut buf = Vec::with_capacity(nf);
    for (r, row) in x.chunks_exact_mut(nf).enumerate() {
        if !visible.get(r, f) {
            others_into(row, f, &mut buf);
            row[f] = forest.predict(&buf);
        }
    }
}

fn squared_change<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

impl<T: Scalar> Imputer<T> for MissForest {
    fn fit(&self, train: &VitalsFrame<T>) -> Result<Box<dyn FittedModel<T>>> {
        Ok(Box::new(self.fit_model(train)?))
    }
}

impl<T: Scalar> FittedModel<T> for MissForestModel<T> {
    fn complete(&self, frame: &VitalsFrame<T>) -> Result<Vec<T>> {
        let nf = frame.n_features();
        let visible = frame.observation_mask();
        let mut x = dense_with(frame, &self.means);
        let mut prev_change: Option<T> = None;
        for _ in 0..self.iterations {
            let before = x.clone();
            for &f in &self.order {
                if let Some(forest) = &self.forests[f] {
                    update_hidden(&mut x, &visible, nf, f, forest);
                }
            }
            let change = squared_change(&before, &x);
            if prev_change.is_some_and(|p| change > p) {
                x = before;
                break;
            }
            prev_change = Some(change);
            if change == T::zero() {
                break;
            }
        }
        Ok(x)
    }
}
