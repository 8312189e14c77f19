use rand::seq::SliceRandom;
use rand::Rng as _;

use super::logistic::{fit_mask_model, observed_means};
use super::mar::MAX_FEATURE_RATE;
use super::mcar::sample_cells;
use super::{LogisticAmputation, STREAM_MNAR, TAG_COEF, TAG_DRAW, TAG_INPUT, TAG_SELECT};
use crate::dataset::VitalsFrame;
use crate::error::{Error, Result};
use crate::mask::{AmputationMask, Mask};
use crate::scalar::Scalar;
use crate::seed::rng_from;

/// MNAR amputation. Features are split into an input set (`ceil(F/2)`) and an
/// output set. Output cells are masked by a logistic model of the input
/// values; input cells are then masked completely at random at the same
/// rate, so output missingness depends on values that may themselves be gone.
pub fn mnar_mask<T: Scalar>(
    frame: &VitalsFrame<T>,
    obs: &Mask,
    rate: f64,
    seed: u64,
) -> Result<AmputationMask> {
    mnar_amputation(frame, obs, rate, seed, false).map(|a| a.mask)
}

pub fn mnar_amputation<T: Scalar>(
    frame: &VitalsFrame<T>,
    obs: &Mask,
    rate: f64,
    seed: u64,
    positive_coefficients: bool,
) -> Result<LogisticAmputation<T>> {
    frame.check_mask(obs)?;
    let nf = frame.n_features();
    if nf < 2 {
        return Err(Error::invalid("MNAR needs at least 2 features"));
    }
    let n_inputs = nf.div_ceil(2);
    let mut order: Vec<usize> = (0..nf).collect();
    order.shuffle(&mut rng_from(seed, &[STREAM_MNAR, TAG_SELECT]));
    let mut inputs = order[..n_inputs].to_vec();
    let mut outputs = order[n_inputs..].to_vec();
    inputs.sort_unstable();
    outputs.sort_unstable();

    // Every feature is maskable, so the rescaled per-feature rate is the
    // overall rate.
    let n_obs = obs.count();
    if n_obs == 0 {
        return Err(Error::invalid("MNAR needs observed cells"));
    }
    let per_feature = rate;
    if per_feature > MAX_FEATURE_RATE {
        return Err(Error::RateUnattainable {
            mechanism: "MNAR",
            per_feature_rate: per_feature,
        });
    }

    let means = observed_means(frame, obs);
    let mut mask = Mask::new(frame.n_rows(), nf, false);
    let mut models = Vec::with_capacity(outputs.len());
    for &target in &outputs {
        let rows: Vec<usize> = (0..frame.n_rows()).filter(|&r| obs.get(r, target)).collect();
        if rows.is_empty() {
            continue;
        }
        let mut coef_rng = rng_from(seed, &[STREAM_MNAR, TAG_COEF, target as u64]);
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
        let mut draw_rng = rng_from(seed, &[STREAM_MNAR, TAG_DRAW, target as u64]);
        for &r in &rows {
            if draw_rng.random::<f64>() < model.probability(frame, r).as_f64() {
                mask.set(r, target, true);
            }
        }
        models.push(model);
    }

    for &f in &inputs {
        let feature_obs = obs.restrict_feature(f);
        let k = (per_feature * feature_obs.count() as f64).round() as usize;
        let mut rng = rng_from(seed, &[STREAM_MNAR, TAG_INPUT, f as u64]);
        let sampled = sample_cells(&feature_obs, k, &mut rng);
        for r in 0..frame.n_rows() {
            if sampled.get(r, f) {
                mask.set(r, f, true);
            }
        }
    }

    Ok(LogisticAmputation {
        mask,
        input_features: inputs,
        models,
    })
}
