use serde::{Deserialize, Serialize};

use super::frame::VitalsFrame;
use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::scalar::Scalar;

pub const STD_FLOOR: f64 = 1e-8;

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

/// Fits stats on the cells of `stays` where `mask` is set.
pub fn fit_normalizer<T: Scalar>(
    frame: &VitalsFrame<T>,
    mask: &Mask,
    stays: &[usize],
) -> Result<NormalizationStats<T>> {
    frame.check_mask(mask)?;
    let nf = frame.n_features();
    let mut count = vec![0usize; nf];
    let mut sum = vec![T::zero(); nf];
    let mut cells = Vec::new();
    for &s in stays {
        for r in frame.stay_rows(s) {
            for f in 0..nf {
                if let (true, Some(v)) = (mask.get(r, f), frame.get(r, f)) {
                    count[f] += 1;
                    sum[f] = sum[f] + v;
                    cells.push((f, v));
                }
            }
        }
    }
    if let Some(f) = count.iter().position(|&c| c == 0) {
        return Err(Error::EmptyFeature {
            feature: frame.features()[f].name.clone(),
        });
    }
    let mean: Vec<T> = sum
        .iter()
        .zip(&count)
        .map(|(&s, &c)| s / T::from_count(c))
        .collect();
    let mut ss = vec![T::zero(); nf];
    for (f, v) in cells {
        let d = v - mean[f];
        ss[f] = ss[f] + d * d;
    }
    let floor = T::lit(STD_FLOOR);
    let std = ss
        .iter()
        .zip(&count)
        .map(|(&s, &c)| (s / T::from_count(c)).sqrt().max(floor))
        .collect();
    Ok(NormalizationStats { mean, std })
}

impl<T: Scalar> NormalizationStats<T> {
    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    #[inline]
    pub fn apply_value(&self, feature: usize, x: T) -> T {
        (x - self.mean[feature]) / self.std[feature]
    }

    #[inline]
    pub fn invert_value(&self, feature: usize, z: T) -> T {
        z * self.std[feature] + self.mean[feature]
    }

    fn map(&self, frame: &VitalsFrame<T>, f: impl Fn(usize, T) -> T) -> Result<VitalsFrame<T>> {
        if frame.n_features() != self.n_features() {
            return Err(Error::Shape(format!(
                "stats cover {} features, frame has {}",
                self.n_features(),
                frame.n_features()
            )));
        }
        let nf = frame.n_features();
        let values = frame
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| v.map(|x| f(i % nf, x)))
            .collect();
        frame.with_values(values)
    }

    /// Maps present cells to `(x - mean) / std`; absent cells stay absent.
    pub fn apply(&self, frame: &VitalsFrame<T>) -> Result<VitalsFrame<T>> {
        self.map(frame, |f, x| self.apply_value(f, x))
    }

    pub fn invert(&self, frame: &VitalsFrame<T>) -> Result<VitalsFrame<T>> {
        self.map(frame, |f, x| self.invert_value(f, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::frame::Feature;
    use proptest::prelude::*;

    fn one_feature(vals: &[Option<f64>]) -> VitalsFrame<f64> {
        VitalsFrame::from_dense(1, vals.len(), vec![Feature::new("x", "")], vals.to_vec(), None).unwrap()
    }

    #[test]
    fn two_point_population_std() {
        let f = one_feature(&[Some(1.0), Some(3.0), None]);
        let stats = fit_normalizer(&f, &f.observation_mask(), &[0]).unwrap();
        assert_eq!(stats.mean, vec![2.0]);
        assert_eq!(stats.std, vec![1.0]);
        let z = stats.apply(&f).unwrap();
        assert_eq!(z.values(), &[Some(-1.0), Some(1.0), None]);
    }

    #[test]
    fn constant_feature_floored() {
        let f = one_feature(&[Some(5.0), Some(5.0)]);
        let stats = fit_normalizer(&f, &f.observation_mask(), &[0]).unwrap();
        assert_eq!(stats.std, vec![STD_FLOOR]);
        assert!(stats.apply(&f).unwrap().values().iter().all(|v| *v == Some(0.0)));
    }

    #[test]
    fn empty_feature_rejected() {
        let f = one_feature(&[None, None]);
        assert!(matches!(
            fit_normalizer(&f, &f.observation_mask(), &[0]),
            Err(Error::EmptyFeature { .. })
        ));
    }

    proptest! {
        #[test]
        fn invert_apply_round_trip(
            cells in proptest::collection::vec(proptest::option::weighted(0.8, -500.0f64..500.0), 2..60)
        ) {
            let mut cells = cells;
            cells[0] = Some(1.0);
            let f = one_feature(&cells);
            let stats = fit_normalizer(&f, &f.observation_mask(), &[0]).unwrap();
            let back = stats.invert(&stats.apply(&f).unwrap()).unwrap();
            for (a, b) in f.values().iter().zip(back.values()) {
                match (a, b) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-9),
                    (None, None) => {}
                    _ => prop_assert!(false, "presence changed"),
                }
            }
        }
    }
}
