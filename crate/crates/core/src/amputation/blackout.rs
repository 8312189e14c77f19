use rand::seq::SliceRandom;

use super::STREAM_BLACKOUT;
use crate::mask::{AmputationMask, Mask};
use crate::seed::rng_from;

/// Removes whole (stay, timestep) rows: rows are visited in seeded random
/// order and every observed cell of each visited row is masked, until the
/// masked count first reaches `round(rate * N_obs)`.
pub fn blackout_mask(obs: &Mask, rate: f64, seed: u64) -> AmputationMask {
    let n_obs = obs.count();
    let target = ((rate * n_obs as f64).round() as usize).min(n_obs);
    let nf = obs.n_features();
    let mut rows: Vec<usize> = (0..obs.n_rows())
        .filter(|&r| (0..nf).any(|f| obs.get(r, f)))
        .collect();
    rows.shuffle(&mut rng_from(seed, &[STREAM_BLACKOUT]));

    let mut out = Mask::new(obs.n_rows(), nf, false);
    let mut masked = 0;
    for r in rows {
        if masked >= target {
            break;
        }
        for f in 0..nf {
            if obs.get(r, f) {
                out.set(r, f, true);
                masked += 1;
            }
        }
    }
    out
}
