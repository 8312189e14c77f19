//! Single-imputation chained equations with ridge regressions.
//!
//! Hidden cells start at the feature mean. Features are visited in ascending
//! order of missingness; each is regressed on all others over the rows where
//! it is visible and its hidden cells are replaced by the predictions. Passes
//! repeat until the largest change of any hidden cell drops below `tol` or
//! `max_iter` passes ran. The equations from the last training pass are kept
//! and replayed the same way on new frames.

use super::linalg::{ridge, RidgeFit};
use super::params::Params;
use super::{feature_means, missingness_order, FittedModel, Imputer, ImputerSpec};
use crate::dataset::VitalsFrame;
use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mice {
    pub max_iter: usize,
    pub tol: f64,
    pub ridge: f64,
}

impl Default for Mice {
    fn default() -> Self {
        Mice {
            max_iter: 10,
            tol: 1e-3,
            ridge: 1e-3,
        }
    }
}

impl Mice {
    pub fn from_spec(spec: &ImputerSpec) -> Result<Self> {
        let d = Mice::default();
        let mut p = Params::new(&spec.name, &spec.params);
        let m = Mice {
            max_iter: p.usize("max_iter", d.max_iter)?,
            tol: p.f64("tol", d.tol)?,
            ridge: p.f64("ridge", d.ridge)?,
        };
        p.finish()?;
        if m.max_iter == 0 || m.tol < 0.0 || m.ridge < 0.0 {
            return Err(Error::InvalidParam {
                method: spec.name.clone(),
                message: "max_iter must be >= 1; tol and ridge must be >= 0".into(),
            });
        }
        Ok(m)
    }

    /// Trains and returns the concrete model.
    pub fn fit_model<T: Scalar>(&self, train: &VitalsFrame<T>) -> Result<MiceModel<T>> {
        let nf = train.n_features();
        let means = feature_means(train)?;
        let order = missingness_order(train);
        let visible = train.observation_mask();
        let mut x = dense_with(train, &means);
        let lambda = T::lit(self.ridge);
        let tol = T::lit(self.tol);

        let mut equations: Vec<RidgeFit<T>> = means
            .iter()
            .map(|&m| RidgeFit {
                weights: vec![T::zero(); nf - 1],
                intercept: m,
            })
            .collect();
        let mut iterations = 0;
        for _ in 0..self.max_iter {
            iterations += 1;
            let mut max_change = T::zero();
            for &f in &order {
                let (design, y) = training_rows(&x, &visible, nf, f);
                equations[f] = ridge(&design, &y, nf - 1, lambda);
                max_change = max_change.max(update_hidden(&mut x, &visible, nf, f, &equations[f]));
            }
            if !max_change.is_finite() {
                return Err(Error::NonConvergence {
                    method: "mice".into(),
                    iterations,
                });
            }
            if max_change < tol {
                break;
            }
        }

        let r_squared = (0..nf)
            .map(|f| {
                let (design, y) = training_rows(&x, &visible, nf, f);
                r_squared(&equations[f], &design, &y, nf - 1)
            })
            .collect();
        Ok(MiceModel {
            means,
            order,
            equations,
            r_squared,
            iterations,
            max_iter: self.max_iter,
            tol,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiceModel<T> {
    pub means: Vec<T>,
    pub order: Vec<usize>,
    /// Equation of feature `f` over all other features in index order.
    pub equations: Vec<RidgeFit<T>>,
    /// Coefficient of determination of each equation on its training rows.
    pub r_squared: Vec<T>,
    /// Passes run during training.
    pub iterations: usize,
    max_iter: usize,
    tol: T,
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

fn others<T: Scalar>(row: &[T], f: usize) -> impl Iterator<Item = T> + '_ {
    row.iter()
        .enumerate()
        .filter(move |(j, _)| *j != f)
        .map(|(_, v)| *v)
}

fn training_rows<T: Scalar>(x: &[T], visible: &Mask, nf: usize, f: usize) -> (Vec<T>, Vec<T>) {
    let mut design = Vec::new();
    let mut y = Vec::new();
    for (r, row) in x.chunks_exact(nf).enumerate() {
        if visible.get(r, f) {
            design.extend(others(row, f));
            y.push(row[f]);
        }
    }
    (design, y)
}

/// Replaces hidden cells of feature `f`; returns the largest absolute change.
fn update_hidden<T: Scalar>(x: &mut [T], visible: &Mask, nf: usize, f: usize, eq: &RidgeFit<T>) -> T {
    let mut max_change = T::zero();
    for (r, row) in x.chunks_exact_mut(nf).enumerate() {
        if !visible.get(r, f) {
            let new = eq.predict(others(row, f));
            let change = (new - row[f]).abs();
            if change > max_change || change.is_nan() {
                max_change = change;
            }
            row[f] = new;
        }
    }
    max_change
}

fn r_squared<T: Scalar>(eq: &RidgeFit<T>, design: &[T], y: &[T], p: usize) -> T {
    if y.is_empty() {
        return T::zero();
    }
    let ym = y.iter().copied().sum::<T>() / T::from_count(y.len());
    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for (i, &yi) in y.iter().enumerate() {
        let pred = if p == 0 {
            eq.intercept
        } else {
            eq.predict(design[i * p..(i + 1) * p].iter().copied())
        };
        ss_res = ss_res + (yi - pred) * (yi - pred);
        ss_tot = ss_tot + (yi - ym) * (yi - ym);
    }
    if ss_tot == T::zero() {
        if ss_res == T::zero() {
            T::one()
        } else {
            T::zero()
        }
    } else {
        T::one() - ss_res / ss_tot
    }
}

impl<T: Scalar> Imputer<T> for Mice {
    fn fit(&self, train: &VitalsFrame<T>) -> Result<Box<dyn FittedModel<T>>> {
        Ok(Box::new(self.fit_model(train)?))
    }
}

impl<T: Scalar> FittedModel<T> for MiceModel<T> {
    fn complete(&self, frame: &VitalsFrame<T>) -> Result<Vec<T>> {
        let nf = frame.n_features();
        let visible = frame.observation_mask();
        let mut x = dense_with(frame, &self.means);
        for it in 1..=self.max_iter {
            let mut max_change = T::zero();
            for &f in &self.order {
                max_change = max_change.max(update_hidden(&mut x, &visible, nf, f, &self.equations[f]));
            }
            if !max_change.is_finite() {
                return Err(Error::NonConvergence {
                    method: "mice".into(),
                    iterations: it,
                });
            }
            if max_change < self.tol {
                break;
            }
        }
        Ok(x)
    }
}
