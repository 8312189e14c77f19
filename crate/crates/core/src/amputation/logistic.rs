use rand_distr::{Distribution, StandardNormal};

use crate::dataset::VitalsFrame;
use crate::mask::Mask;
use crate::scalar::{logit, sigmoid, Scalar};
use crate::seed::Rng;

const MAX_BISECTION_ITERS: usize = 100;
const CALIBRATION_TOL: f64 = 1e-12;

/// Logistic masking model: `P(mask) = sigmoid(w . (x - mean) + b)` over the
/// input features, for the cells of the target features.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticMaskModel<T> {
    pub coefficients: Vec<T>,
    pub intercept: T,
    pub input_features: Vec<usize>,
    pub target_features: Vec<usize>,
    /// Centering applied to each input before the dot product; absent
    /// inputs take this value (contribute zero).
    pub input_means: Vec<T>,
}

impl<T: Scalar> LogisticMaskModel<T> {
    /// Linear predictor `w . (x - mean)` for one row, without intercept.
    pub fn predictor(&self, frame: &VitalsFrame<T>, row: usize) -> T {
        self.input_features
            .iter()
            .zip(&self.coefficients)
            .zip(&self.input_means)
            .fold(T::zero(), |acc, ((&f, &w), &m)| {
                acc + w * (frame.get(row, f).unwrap_or(m) - m)
            })
    }

    pub fn probability(&self, frame: &VitalsFrame<T>, row: usize) -> T {
        sigmoid(self.predictor(frame, row) + self.intercept)
    }
}

fn mean_probability<T: Scalar>(predictors: &[T], b: T) -> T {
    predictors.iter().map(|&p| sigmoid(p + b)).sum::<T>() / T::from_count(predictors.len())
}

/// Intercept `b` with `mean(sigmoid(p + b)) == target_rate`, by bisection.
///
/// The objective is strictly increasing in `b`; the initial bracket is
/// `logit(target) -/+ (max|p| + 1)`, which always contains the root.
pub fn calibrate_intercept<T: Scalar>(predictors: &[T], target_rate: T) -> T {
    assert!(!predictors.is_empty(), "calibration needs at least one predictor");
    assert!(
        target_rate > T::zero() && target_rate < T::one(),
        "target rate must lie in (0, 1)"
    );
    let center = logit(target_rate);
    let spread = predictors
        .iter()
        .fold(T::zero(), |m, &p| m.max(p.abs()))
        + T::one();
    let (mut lo, mut hi) = (center - spread, center + spread);
    let tol = T::lit(CALIBRATION_TOL).max(T::epsilon());
    let mut mid = center;
    for i in 0..MAX_BISECTION_ITERS {
        mid = if i == 0 { center } else { (lo + hi) / T::lit(2.0) };
        let gap = mean_probability(predictors, mid) - target_rate;
        if gap.abs() <= tol {
            break;
        }
        if gap < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * (T::one() + mid.abs()) {
            break;
        }
    }
    mid
}

/// Per-feature means over observed cells; features with no observed cells get 0.
pub(crate) fn observed_means<T: Scalar>(frame: &VitalsFrame<T>, obs: &Mask) -> Vec<T> {
    (0..frame.n_features())
        .map(|f| {
            let (sum, n) = (0..frame.n_rows())
                .filter(|&r| obs.get(r, f))
                .filter_map(|r| frame.get(r, f))
                .fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                T::zero()
            } else {
                sum / T::from_count(n)
            }
        })
        .collect()
}

/// Draws coefficients, rescales them so the predictor has unit variance over
/// `rows`, and calibrates the intercept to `target_rate`.
pub(crate) fn fit_mask_model<T: Scalar>(
    frame: &VitalsFrame<T>,
    rows: &[usize],
    inputs: &[usize],
    target: usize,
    means: &[T],
    target_rate: T,
    positive: bool,
    rng: &mut Rng,
) -> LogisticMaskModel<T> {
    let mut coefficients: Vec<T> = inputs
        .iter()
        .map(|_| {
            let w: f64 = StandardNormal.sample(rng);
            T::lit(if positive { w.abs() } else { w })
        })
        .collect();
    let mut model = LogisticMaskModel {
        coefficients: coefficients.clone(),
        intercept: T::zero(),
        input_features: inputs.to_vec(),
        target_features: vec![target],
        input_means: inputs.iter().map(|&f| means[f]).collect(),
    };
    let raw: Vec<T> = rows.iter().map(|&r| model.predictor(frame, r)).collect();
    let var = variance(&raw);
    if var > T::zero() {
        let scale = var.sqrt().recip();
        coefficients.iter_mut().for_each(|w| *w = *w * scale);
        model.coefficients = coefficients;
    }
    let predictors: Vec<T> = rows.iter().map(|&r| model.predictor(frame, r)).collect();
    model.intercept = calibrate_intercept(&predictors, target_rate);
    model
}

pub(crate) fn variance<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let n = T::from_count(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng as _, SeedableRng};

    #[test]
    fn zero_predictors_target_half() {
        assert_eq!(calibrate_intercept(&[0.0f64; 5], 0.5), 0.0);
    }

    #[test]
    fn zero_predictors_closed_form_logit() {
        let b = calibrate_intercept(&[0.0f64; 3], 0.3);
        let oracle = (0.3f64 / 0.7).ln();
        assert!((b - oracle).abs() < 1e-9, "{b}");
        assert!((b - -0.8473).abs() < 1e-4);
    }

    #[test]
    fn random_predictors_hit_target() {
        let mut rng = Rng::seed_from_u64(9);
        for target in [0.05, 0.3, 0.7, 0.95] {
            let p: Vec<f64> = (0..1000).map(|_| rng.random_range(-4.0..4.0)).collect();
            let b = calibrate_intercept(&p, target);
            assert!((mean_probability(&p, b) - target).abs() < 1e-6);
        }
        let p: Vec<f32> = (0..100).map(|i| (i as f32 - 50.0) / 10.0).collect();
        let b = calibrate_intercept(&p, 0.7f32);
        assert!((mean_probability(&p, b) - 0.7).abs() < 1e-5);
    }
}
