use rand::seq::index;

use super::STREAM_MCAR;
use crate::mask::{AmputationMask, Mask};
use crate::seed::rng_from;

/// Uniform sample without replacement of exactly `round(rate * N_obs)`
/// observed cells.
pub fn mcar_mask(obs: &Mask, rate: f64, seed: u64) -> AmputationMask {
    let n_obs = obs.count();
    let k = ((rate * n_obs as f64).round() as usize).min(n_obs);
    mcar_mask_count(obs, k, seed)
}

/// MCAR with an explicit cell count.
pub fn mcar_mask_count(obs: &Mask, k: usize, seed: u64) -> AmputationMask {
    sample_cells(obs, k, &mut rng_from(seed, &[STREAM_MCAR]))
}

pub(crate) fn sample_cells(obs: &Mask, k: usize, rng: &mut crate::seed::Rng) -> AmputationMask {
    let observed: Vec<usize> = obs
        .bits()
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    let mut out = Mask::new(obs.n_rows(), obs.n_features(), false);
    if k == 0 || observed.is_empty() {
        return out;
    }
    for i in index::sample(rng, observed.len(), k.min(observed.len())).into_iter() {
        out.bits_mut()[observed[i]] = true;
    }
    out
}
