//! Data-characteristics analyses: co-missingness of features and
//! class-conditional missing rates.

use serde::Serialize;

use crate::dataset::VitalsFrame;
use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissingnessCorrelation {
    pub features: Vec<String>,
    /// Row-major F x F Pearson correlations of the missingness indicators.
    /// A constant indicator column correlates 0 with others and 1 with itself.
    pub matrix: Vec<f64>,
}

impl MissingnessCorrelation {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.features.len() + j]
    }
}

/// Pearson correlation between the per-feature missingness indicators,
/// pooled over all (stay, timestep) rows.
pub fn missingness_correlation<T: Scalar>(
    frame: &VitalsFrame<T>,
    obs: &ObservationMask,
) -> Result<MissingnessCorrelation> {
    frame.check_mask(obs)?;
    let n = obs.n_rows();
    if n < 2 {
        return Err(Error::invalid("missingness correlation needs at least 2 rows"));
    }
    let nf = obs.n_features();
    // Indicator sums and co-occurrence counts are integers, so the
    // correlation is exact up to the final division and independent of row order.
    let mut counts = vec![0u64; nf];
    let mut joint = vec![0u64; nf * nf];
    let mut missing = Vec::with_capacity(nf);
    for r in 0..n {
        missing.clear();
        missing.extend((0..nf).filter(|&f| !obs.get(r, f)));
        for &i in &missing {
            counts[i] += 1;
            for &j in &missing {
                joint[i * nf + j] += 1;
            }
        }
    }
    let nn = n as f64;
    let mut matrix = vec![0.0; nf * nf];
    for i in 0..nf {
        for j in 0..nf {
            matrix[i * nf + j] = if i == j {
                1.0
            } else {
                let (ci, cj) = (counts[i] as f64, counts[j] as f64);
                let cov = nn * joint[i * nf + j] as f64 - ci * cj;
                let var = (nn * ci - ci * ci) * (nn * cj - cj * cj);
                if var <= 0.0 {
                    0.0
                } else {
                    (cov / var.sqrt()).clamp(-1.0, 1.0)
                }
            };
        }
    }
    Ok(MissingnessCorrelation {
        features: frame.features().iter().map(|f| f.name.clone()).collect(),
        matrix,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureMissingness {
    pub feature: String,
    pub index: usize,
    pub rate_survivors: f64,
    pub rate_non_survivors: f64,
    /// `rate_survivors - rate_non_survivors`.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InformativeMissingnessReport {
    /// Every feature, sorted by descending |difference| (ties by index).
    pub ranked: Vec<FeatureMissingness>,
    pub top_k: usize,
}

impl InformativeMissingnessReport {
    pub fn top(&self) -> &[FeatureMissingness] {
        &self.ranked[..self.top_k.min(self.ranked.len())]
    }
}

/// Cell-level missing rates per outcome class (0 = survived, 1 = died).
pub fn informative_missingness<T: Scalar>(
    frame: &VitalsFrame<T>,
    obs: &ObservationMask,
    outcome: Option<&[u8]>,
    top_k: usize,
) -> Result<InformativeMissingnessReport> {
    frame.check_mask(obs)?;
    let outcome = outcome.or(frame.outcome()).ok_or(Error::MissingOutcome)?;
    if outcome.len() != frame.n_stays() {
        return Err(Error::Shape("outcome length differs from stay count".into()));
    }
    if top_k == 0 {
        return Err(Error::invalid("top_k must be >= 1"));
    }
    let nf = frame.n_features();
    let mut missing = [vec![0usize; nf], vec![0usize; nf]];
    let mut cells = [0usize; 2];
    for (s, rows) in frame.stay_ranges().enumerate() {
        let class = usize::from(outcome[s] == 1);
        cells[class] += rows.len();
        for r in rows {
            for f in 0..nf {
                if !obs.get(r, f) {
                    missing[class][f] += 1;
                }
            }
        }
    }
    if cells[0] == 0 || cells[1] == 0 {
        return Err(Error::SingleClass);
    }
    let mut ranked: Vec<FeatureMissingness> = (0..nf)
        .map(|f| {
            let rs = missing[0][f] as f64 / cells[0] as f64;
            let rn = missing[1][f] as f64 / cells[1] as f64;
            FeatureMissingness {
                feature: frame.features()[f].name.clone(),
                index: f,
                rate_survivors: rs,
                rate_non_survivors: rn,
                difference: rs - rn,
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.difference
            .abs()
            .total_cmp(&a.difference.abs())
            .then(a.index.cmp(&b.index))
    });
    Ok(InformativeMissingnessReport { ranked, top_k })
}
