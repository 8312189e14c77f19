//! Imputation scores on the amputed cells: MAE, RMSE (normalized and raw
//! scale) and a histogram Jensen-Shannon divergence, plus run aggregation.

use serde::{Deserialize, Serialize};

use crate::amputation::Mechanism;
use crate::dataset::{NormalizationStats, VitalsFrame};
use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::scalar::Scalar;

pub const DEFAULT_JSD_BINS: usize = 50;
pub const JSD_SMOOTHING: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset: String,
    pub mechanism: Option<Mechanism>,
    pub rate: Option<f64>,
    pub method: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mae_norm: f64,
    pub rmse_norm: f64,
    pub mae_raw: f64,
    pub rmse_raw: f64,
    pub jsd: f64,
    pub n_eval_cells: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalOptions {
    #[serde(default = "default_bins")]
    pub jsd_bins: usize,
    /// Average errors per stay first, then across stays.
    #[serde(default)]
    pub per_stay: bool,
}

fn default_bins() -> usize {
    DEFAULT_JSD_BINS
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            jsd_bins: DEFAULT_JSD_BINS,
            per_stay: false,
        }
    }
}

/// Per-feature sums of absolute and squared errors over a set of cells.
#[derive(Clone)]
struct ErrorSums {
    abs: Vec<f64>,
    sq: Vec<f64>,
    n: usize,
}

impl ErrorSums {
    fn new(nf: usize) -> Self {
        ErrorSums {
            abs: vec![0.0; nf],
            sq: vec![0.0; nf],
            n: 0,
        }
    }

    /// (mae_norm, rmse_norm, mae_raw, rmse_raw). Raw-scale errors are the
    /// normalized errors times the feature's std, accumulated per feature so
    /// that single-feature raw MAE is exactly `mae_norm * std`.
    fn finish(&self, std: &[f64]) -> [f64; 4] {
        let n = self.n as f64;
        let mae = self.abs.iter().sum::<f64>() / n;
        let mse = self.sq.iter().sum::<f64>() / n;
        let mae_raw = self
            .abs
            .iter()
            .zip(std)
            .map(|(a, s)| (a / n) * s)
            .sum::<f64>();
        let mse_raw = self
            .sq
            .iter()
            .zip(std)
            .map(|(q, s)| (q / n) * (s * s))
            .sum::<f64>();
        [mae, mse.sqrt(), mae_raw, mse_raw.sqrt()]
    }
}

/// Scores `imputed` against `truth` on `eval_mask`. Both frames are in the
/// normalized space described by `stats`.
pub fn evaluate<T: Scalar>(
    truth: &VitalsFrame<T>,
    imputed: &VitalsFrame<T>,
    eval_mask: &Mask,
    stats: &NormalizationStats<T>,
    options: &EvalOptions,
) -> Result<MetricReport> {
    truth.check_mask(eval_mask)?;
    imputed.check_mask(eval_mask)?;
    if stats.n_features() != truth.n_features() {
        return Err(Error::Shape("stats do not match frame features".into()));
    }
    let nf = truth.n_features();
    let std: Vec<f64> = stats.std.iter().map(|s| s.as_f64()).collect();
    let mut pooled = ErrorSums::new(nf);
    let mut per_stay = Vec::new();
    let mut truth_vals = vec![Vec::new(); nf];
    let mut imputed_vals = vec![Vec::new(); nf];

    for rows in truth.stay_ranges() {
        let mut stay = ErrorSums::new(nf);
        for r in rows {
            for f in 0..nf {
                if !eval_mask.get(r, f) {
                    continue;
                }
                let t = truth
                    .get(r, f)
                    .ok_or_else(|| Error::Shape(format!("no ground truth at row {r}, feature {f}")))?
                    .as_f64();
                let p = imputed
                    .get(r, f)
                    .ok_or_else(|| Error::Shape(format!("imputed frame missing row {r}, feature {f}")))?
                    .as_f64();
                let e = p - t;
                for s in [&mut pooled, &mut stay] {
                    s.abs[f] += e.abs();
                    s.sq[f] += e * e;
                    s.n += 1;
                }
                truth_vals[f].push(t);
                imputed_vals[f].push(p);
            }
        }
        if stay.n > 0 {
            per_stay.push(stay);
        }
    }
    if pooled.n == 0 {
        return Err(Error::EmptyEvaluation);
    }

    let [mae_norm, rmse_norm, mae_raw, rmse_raw] = if options.per_stay {
        let k = per_stay.len() as f64;
        let mut acc = [0.0; 4];
        for s in &per_stay {
            for (a, v) in acc.iter_mut().zip(s.finish(&std)) {
                *a += v;
            }
        }
        acc.map(|v| v / k)
    } else {
        pooled.finish(&std)
    };

    let mut jsd_sum = 0.0;
    let mut jsd_n = 0;
    for f in 0..nf {
        if truth_vals[f].is_empty() {
            continue;
        }
        jsd_sum += jsd_histogram(&truth_vals[f], &imputed_vals[f], options.jsd_bins)?;
        jsd_n += 1;
    }

    let report = MetricReport {
        mae_norm,
        rmse_norm,
        mae_raw,
        rmse_raw,
        jsd: jsd_sum / jsd_n as f64,
        n_eval_cells: pooled.n,
        provenance: Provenance::default(),
    };
    debug_assert!(report.rmse_norm >= report.mae_norm * (1.0 - 1e-12));
    Ok(report)
}

/// Jensen-Shannon divergence (base 2) between two probability vectors.
pub fn jsd_probabilities(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    let mut kl_p = 0.0;
    let mut kl_q = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let mi = 0.5 * (pi + qi);
        if pi > 0.0 {
            kl_p += pi * (pi / mi).log2();
        }
        if qi > 0.0 {
            kl_q += qi * (qi / mi).log2();
        }
    }
    (0.5 * kl_p + 0.5 * kl_q).clamp(0.0, 1.0)
}

/// Smoothed probability histogram of `xs` over `n_bins` equal bins on `[lo, hi]`.
fn histogram(xs: &[f64], lo: f64, hi: f64, n_bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; n_bins];
    let width = hi - lo;
    for &x in xs {
        let b = (((x - lo) / width) * n_bins as f64).floor();
        let b = if b.is_finite() { (b.max(0.0) as usize).min(n_bins - 1) } else { 0 };
        counts[b] += 1.0;
    }
    let n = xs.len() as f64;
    let mut p: Vec<f64> = counts.iter().map(|c| c / n + JSD_SMOOTHING).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    p
}

/// JSD between the empirical distributions of two samples, binned on shared
/// edges spanning the union of both samples.
pub fn jsd_histogram(truth: &[f64], imputed: &[f64], n_bins: usize) -> Result<f64> {
    if truth.is_empty() || imputed.is_empty() {
        return Err(Error::invalid("jsd needs two nonempty samples"));
    }
    if n_bins < 2 {
        return Err(Error::invalid("jsd needs at least 2 bins"));
    }
    let (lo, hi) = truth
        .iter()
        .chain(imputed)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(hi > lo) {
        return Ok(0.0);
    }
    let p = histogram(truth, lo, hi, n_bins);
    let q = histogram(imputed, lo, hi, n_bins);
    Ok(jsd_probabilities(&p, &q))
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample std divides by `n - 1`; a single value has std 0.
    pub fn of(xs: &[f64]) -> MeanStd {
        assert!(!xs.is_empty());
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCell {
    pub mae_norm: MeanStd,
    pub rmse_norm: MeanStd,
    pub mae_raw: MeanStd,
    pub rmse_raw: MeanStd,
    pub jsd: MeanStd,
    pub runs: usize,
}

impl AggregateCell {
    pub(crate) fn from_metrics(rows: &[[f64; 5]]) -> AggregateCell {
        // Fixed summation order: sort each metric's values before reducing
        // so the result is independent of input order.
        let col = |i: usize| {
            let mut v: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            v.sort_by(f64::total_cmp);
            MeanStd::of(&v)
        };
        AggregateCell {
            mae_norm: col(0),
            rmse_norm: col(1),
            mae_raw: col(2),
            rmse_raw: col(3),
            jsd: col(4),
            runs: rows.len(),
        }
    }
}

/// Aggregates runs that differ only in their seed.
pub fn aggregate_runs(reports: &[MetricReport]) -> Result<AggregateCell> {
    let first = reports
        .first()
        .ok_or_else(|| Error::invalid("aggregate needs at least one report"))?;
    for r in reports {
        let (a, b) = (&first.provenance, &r.provenance);
        if a.dataset != b.dataset || a.mechanism != b.mechanism || a.rate != b.rate || a.method != b.method {
            return Err(Error::MixedProvenance(format!("{a:?} vs {b:?}")));
        }
    }
    let rows: Vec<[f64; 5]> = reports
        .iter()
        .map(|r| [r.mae_norm, r.rmse_norm, r.mae_raw, r.rmse_raw, r.jsd])
        .collect();
    Ok(AggregateCell::from_metrics(&rows))
}
