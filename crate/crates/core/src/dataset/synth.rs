//! Synthetic vital signs.
//!
//! Each stay has its own baseline per vital and a shared latent AR(1) state
//! (coefficient 0.9) that moves all vitals together. Mean arterial pressure
//! is derived from the blood pressures, so conditional imputers have real
//! cross-feature structure to exploit.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::frame::{default_features, VitalsFrame};
use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::scalar::{sigmoid, Scalar};
use crate::seed::{rng_from, Rng};

pub const AR_COEFFICIENT: f64 = 0.9;

/// Plausibility bounds for the generated vitals.
pub const HR_RANGE: (f64, f64) = (30.0, 220.0);
pub const RESP_RANGE: (f64, f64) = (4.0, 60.0);
pub const O2SAT_RANGE: (f64, f64) = (50.0, 100.0);
pub const SBP_RANGE: (f64, f64) = (50.0, 250.0);
pub const DBP_RANGE: (f64, f64) = (20.0, 150.0);

const STREAM_VALUES: u64 = 1;
const STREAM_MISSING: u64 = 2;

fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn clip(x: f64, (lo, hi): (f64, f64)) -> f64 {
    x.clamp(lo, hi)
}

/// Generates `n_stays` stays of `n_hours` hourly rows over the six default
/// vitals. `native_missing_rates` holds one MCAR rate per feature, or is
/// empty for full observation.
pub fn generate_synthetic<T: Scalar>(
    n_stays: usize,
    n_hours: usize,
    seed: u64,
    native_missing_rates: &[f64],
) -> Result<(VitalsFrame<T>, ObservationMask)> {
    let features = default_features();
    let nf = features.len();
    if n_stays < 1 || n_hours < 2 {
        return Err(Error::invalid("synthetic data needs >= 1 stay and >= 2 hours"));
    }
    let rates: Vec<f64> = if native_missing_rates.is_empty() {
        vec![0.0; nf]
    } else if native_missing_rates.len() == nf {
        native_missing_rates.to_vec()
    } else {
        return Err(Error::invalid(format!(
            "expected {nf} native missing rates, got {}",
            native_missing_rates.len()
        )));
    };
    if rates.iter().any(|r| !(0.0..1.0).contains(r)) {
        return Err(Error::invalid("native missing rates must lie in [0, 1)"));
    }

    let innovation = (1.0 - AR_COEFFICIENT * AR_COEFFICIENT).sqrt();
    let mut values = Vec::with_capacity(n_stays * n_hours * nf);
    let mut outcome = Vec::with_capacity(n_stays);

    for stay in 0..n_stays {
        let mut rng = rng_from(seed, &[STREAM_VALUES, stay as u64]);
        let hr0 = 82.0 + 12.0 * normal(&mut rng);
        let resp0 = 18.0 + 3.0 * normal(&mut rng);
        let o2_0 = 96.5 + 1.5 * normal(&mut rng);
        let sbp0 = 122.0 + 14.0 * normal(&mut rng);
        let dbp0 = 68.0 + 9.0 * normal(&mut rng);

        let mut z = normal(&mut rng);
        let mut hr_sum = 0.0;
        for t in 0..n_hours {
            if t > 0 {
                z = AR_COEFFICIENT * z + innovation * normal(&mut rng);
            }
            let hr = clip(hr0 + 10.0 * z + 3.0 * normal(&mut rng), HR_RANGE);
            let resp = clip(resp0 + 2.5 * z + 1.2 * normal(&mut rng), RESP_RANGE);
            let o2 = clip(o2_0 - 1.2 * z + 0.8 * normal(&mut rng), O2SAT_RANGE);
            let sbp = clip(sbp0 + 11.0 * z + 5.0 * normal(&mut rng), SBP_RANGE);
            let dbp = clip(dbp0 + 7.0 * z + 3.5 * normal(&mut rng), DBP_RANGE);
            let map = (sbp + 2.0 * dbp) / 3.0 + 1.5 * normal(&mut rng);
            hr_sum += hr;
            for v in [hr, resp, o2, map, sbp, dbp] {
                values.push(Some(T::lit(v)));
            }
        }
        let mean_hr = hr_sum / n_hours as f64;
        let p_death = sigmoid((mean_hr - 100.0) / 10.0);
        outcome.push(u8::from(rng.random::<f64>() < p_death));
    }

    for stay in 0..n_stays {
        let mut rng = rng_from(seed, &[STREAM_MISSING, stay as u64]);
        for t in 0..n_hours {
            for (f, &rate) in rates.iter().enumerate() {
                let draw: f64 = rng.random();
                if rate > 0.0 && draw < rate {
                    values[(stay * n_hours + t) * nf + f] = None;
                }
            }
        }
    }

    let frame = VitalsFrame::from_dense(n_stays, n_hours, features, values, Some(outcome))?;
    let mask = frame.observation_mask();
    Ok((frame, mask))
}
