use rand::seq::SliceRandom;

use super::logistic::{fit_mask_model, observed_means, LogisticMaskModel};
use super::{LogisticAmputation, STREAM_MAR, TAG_COEF, TAG_DRAW, TAG_SELECT};
use crate::dataset::VitalsFrame;
use crate::error::{Error, Result};
use crate::mask::{AmputationMask, Mask};
use crate::scalar::Scalar;
use crate::seed::rng_from;
use rand::Rng as _;

pub const MAX_FEATURE_RATE: f64 = 0.99;

/// Number of always-observed input features for `n_features` and `fraction`.
pub fn mar_input_count(n_features: usize, fraction: f64) -> usize {
    (n_features as f64 * fraction).ceil() as usize
}

/// MAR amputation: a seeded subset of features stays fully observed and
/// drives a logistic masking model for each remaining feature.
pub fn mar_mask<T: Scalar>(
    frame: &VitalsFrame<T>,
    obs: &Mask,
    rate: f64,
    seed: u64,
    observed_fraction: f64,
) -> Result<AmputationMask> {
    mar_amputation(frame, obs, rate, seed, observed_fraction, false).map(|a| a.mask)
}

/// As [`mar_mask`], also returning the fitted masking models.
/// `positive_coefficients` forces all logistic weights non-negative.
pub fn mar_amputation<T: Scalar>(
    frame: &VitalsFrame<T>,
    obs: &Mask,
    rate: f64,
    seed: u64,
    observed_fraction: f64,
    positive_coefficients: bool,
) -> Result<LogisticAmputation<T>> {
    frame.check_mask(obs)?;
    let nf = frame.n_features();
    if nf < 2 {
        return Err(Error::invalid("MAR needs at least 2 features"));
    }
    let n_inputs = mar_input_count(nf, observed_fraction);
    if n_inputs < 1 || n_inputs >= nf {
        return Err(Error::invalid(format!(
            "MAR observed fraction {observed_fraction} leaves {n_inputs} of {nf} features observed"
        )));
    }
    let mut order: Vec<usize> = (0..nf).collect();
    order.shuffle(&mut rng_from(seed, &[STREAM_MAR, TAG_SELECT]));
    let mut inputs = order[..n_inputs].to_vec();
    let mut targets = order[n_inputs..].to_vec();
    inputs.sort_unstable();
    targets.sort_unstable();

    let n_obs = obs.count();
    let n_maskable: usize = targets.iter().map(|&f| obs.count_feature(f)).sum();
    if n_maskable == 0 {
        return Err(Error::invalid("MAR target features have no observed cells"));
    }
    let per_feature = rate * n_obs as f64 / n_maskable as f64;
    if per_feature > MAX_FEATURE_RATE {
        return Err(Error::RateUnattainable {
            mechanism: "MAR",
            per_feature_rate: per_feature,
        });
    }

    let means = observed_means(frame, obs);
    let mut mask = Mask::new(frame.n_rows(), nf, false);
    let mut models: Vec<LogisticMaskModel<T>> = Vec::with_capacity(targets.len());
    for &target in &targets {
        let rows: Vec<usize> = (0..frame.n_rows()).filter(|&r| obs.get(r, target)).collect();
        if rows.is_empty() {
            continue;
        }
        let mut coef_rng = rng_from(seed, &[STREAM_MAR, TAG_COEF, target as u64]);
        let model = fit_mask_model(
            frame,
            &rows,
            &inputs,
            target,
            &means,
            T::lit(per_feature),
            positive_coefficients,
            &mut coef_rng,
        );
        let mut draw_rng = rng_from(seed, &[STREAM_MAR, TAG_DRAW, target as u64]);
        for &r in &rows {
            let p = model.probability(frame, r).as_f64();
            if draw_rng.random::<f64>() < p {
                mask.set(r, target, true);
            }
        }
        models.push(model);
    }
    Ok(LogisticAmputation {
        mask,
        input_features: inputs,
        models,
    })
}
