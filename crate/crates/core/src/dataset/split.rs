use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::frame::VitalsFrame;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::rng_from;

const SPLIT_STREAM: u64 = 0x5_9117;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.7,
            val: 0.15,
            test: 0.15,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let r = [self.train, self.val, self.test];
        if r.iter().any(|x| !x.is_finite() || *x < 0.0) || self.train <= 0.0 {
            return Err(Error::invalid("split ratios must be non-negative with train > 0"));
        }
        if (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("split ratios must sum to 1"));
        }
        Ok(())
    }
}

/// Stay indices per partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Seeded stay-level shuffle followed by contiguous slicing. Partition sizes
/// are `floor(ratio * n)` for val and test; train takes the remainder.
pub fn split_stays<T: Scalar>(
    frame: &VitalsFrame<T>,
    ratios: SplitRatios,
    seed: u64,
) -> Result<SplitAssignment> {
    ratios.validate()?;
    let n = frame.n_stays();
    let nonempty = [ratios.train, ratios.val, ratios.test]
        .iter()
        .filter(|&&r| r > 0.0)
        .count();
    if n < nonempty {
        return Err(Error::invalid(format!(
            "{n} stays cannot fill {nonempty} nonempty partitions"
        )));
    }
    let floor_or_one = |r: f64| {
        if r > 0.0 {
            ((r * n as f64).floor() as usize).max(1)
        } else {
            0
        }
    };
    let n_val = floor_or_one(ratios.val);
    let n_test = floor_or_one(ratios.test);
    let n_train = n - n_val - n_test;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(seed, &[SPLIT_STREAM]));
    let take = |k: usize, from: usize| {
        let mut part = order[from..from + k].to_vec();
        part.sort_unstable();
        part
    };
    Ok(SplitAssignment {
        train: take(n_train, 0),
        val: take(n_val, n_train),
        test: take(n_test, n_train + n_val),
        seed,
    })
}
