use std::time::Instant;

use rayon::prelude::*;

use super::config::ExperimentGrid;
use crate::amputation::{ampute_data, AmputationConfig, Mechanism};
use crate::dataset::{fit_normalizer, split_stays, VitalsFrame};
use crate::error::{Error, Result};
use crate::imputers::{FittedImputer, ImputerSpec, Registry};
use crate::mask::ObservationMask;
use crate::metrics::{evaluate, MetricReport, Provenance};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, hash_str};

const STREAM_SPLIT: u64 = 0xB1;
const STREAM_AMPUTE: u64 = 0xB2;
const STREAM_METHOD: u64 = 0xB3;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record wall-clock fit/impute seconds. Off by default so that
    /// results are byte-reproducible.
    pub timing: bool,
}

/// One (mechanism, rate, method, seed) cell of the grid. Failed cells keep
/// their coordinates, carry `error`, and have NaN metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub mechanism: Mechanism,
    pub rate: f64,
    pub method: String,
    pub seed: u64,
    pub mae_norm: f64,
    pub rmse_norm: f64,
    pub mae_raw: f64,
    pub rmse_raw: f64,
    pub jsd: f64,
    pub n_eval_cells: usize,
    pub fit_seconds: f64,
    pub impute_seconds: f64,
    pub error: Option<String>,
}

impl ResultRow {
    fn failed(dataset: &str, mechanism: Mechanism, rate: f64, method: &str, seed: u64, msg: String) -> Self {
        ResultRow {
            dataset: dataset.to_string(),
            mechanism,
            rate,
            method: method.to_string(),
            seed,
            mae_norm: f64::NAN,
            rmse_norm: f64::NAN,
            mae_raw: f64::NAN,
            rmse_raw: f64::NAN,
            jsd: f64::NAN,
            n_eval_cells: 0,
            fit_seconds: 0.0,
            impute_seconds: 0.0,
            error: Some(msg),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn metrics(&self) -> [f64; 5] {
        [self.mae_norm, self.rmse_norm, self.mae_raw, self.rmse_raw, self.jsd]
    }

    pub fn report(&self) -> Option<MetricReport> {
        self.is_ok().then(|| MetricReport {
            mae_norm: self.mae_norm,
            rmse_norm: self.rmse_norm,
            mae_raw: self.mae_raw,
            rmse_raw: self.rmse_raw,
            jsd: self.jsd,
            n_eval_cells: self.n_eval_cells,
            provenance: Provenance {
                dataset: self.dataset.clone(),
                mechanism: Some(self.mechanism),
                rate: Some(self.rate),
                method: self.method.clone(),
                seed: self.seed,
            },
        })
    }
}

/// Seed for one method in one cell. Depends on the method's name and
/// params, never on its position in the grid.
pub fn method_seed(master: u64, name: &str, params: &serde_json::Map<String, serde_json::Value>, mechanism: Mechanism, rate: f64, seed: u64) -> u64 {
    let params = serde_json::to_string(params).unwrap_or_default();
    derive_seed(
        master,
        &[STREAM_METHOD, hash_str(name), hash_str(&params), mechanism as u64, rate.to_bits(), seed],
    )
}

pub fn amputation_seed(master: u64, mechanism: Mechanism, rate: f64, seed: u64) -> u64 {
    derive_seed(master, &[STREAM_AMPUTE, mechanism as u64, rate.to_bits(), seed])
}

pub fn split_seed(master: u64, seed: u64) -> u64 {
    derive_seed(master, &[STREAM_SPLIT, seed])
}

/// Loads the grid's dataset and runs every cell.
pub fn run_grid<T: Scalar>(grid: &ExperimentGrid, registry: &Registry<T>, options: RunOptions) -> Result<Vec<ResultRow>> {
    grid.validate(registry)?;
    let (frame, obs) = grid.load_dataset::<T>()?;
    run_grid_on(grid, registry, &frame, &obs, options)
}

/// Runs every cell against an already loaded frame. Cells execute in
/// parallel; rows come back ordered by mechanism, rate, method, seed.
pub fn run_grid_on<T: Scalar>(
    grid: &ExperimentGrid,
    registry: &Registry<T>,
    frame: &VitalsFrame<T>,
    obs: &ObservationMask,
    options: RunOptions,
) -> Result<Vec<ResultRow>> {
    grid.validate(registry)?;
    frame.check_mask(obs)?;
    let seeds = grid.seed_values();
    let mut slices = Vec::new();
    for mi in 0..grid.mechanisms.len() {
        for ri in 0..grid.rates.len() {
            for si in 0..seeds.len() {
                slices.push((mi, ri, si));
            }
        }
    }
    let tag = grid.dataset_tag();
    let mut keyed: Vec<((usize, usize, usize, usize), ResultRow)> = slices
        .par_iter()
        .flat_map_iter(|&(mi, ri, si)| {
            let rows = run_slice(grid, registry, frame, obs, &tag, grid.mechanisms[mi], grid.rates[ri], seeds[si], options);
            rows.into_iter()
                .enumerate()
                .map(move |(k, row)| ((mi, ri, k, si), row))
        })
        .collect();
    keyed.sort_by_key(|(k, _)| *k);
    Ok(keyed.into_iter().map(|(_, r)| r).collect())
}

/// One amputation shared by all methods of a (mechanism, rate, seed) slice.
#[allow(clippy::too_many_arguments)]
fn run_slice<T: Scalar>(
    grid: &ExperimentGrid,
    registry: &Registry<T>,
    frame: &VitalsFrame<T>,
    obs: &ObservationMask,
    tag: &str,
    mechanism: Mechanism,
    rate: f64,
    seed: u64,
    options: RunOptions,
) -> Vec<ResultRow> {
    let master = grid.master_seed;
    let prepared = prepare_slice(grid, frame, obs, mechanism, rate, seed);
    grid.methods
        .iter()
        .map(|m| {
            let fail = |e: &Error| ResultRow::failed(tag, mechanism, rate, &m.name, seed, e.to_string());
            let slice = match &prepared {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let spec = ImputerSpec {
                name: m.name.clone(),
                params: m.params.clone(),
                seed: method_seed(master, &m.name, &m.params, mechanism, rate, seed),
            };
            match run_method(registry, &spec, slice, grid, options) {
                Ok((report, fit_s, imp_s)) => ResultRow {
                    dataset: tag.to_string(),
                    mechanism,
                    rate,
                    method: m.name.clone(),
                    seed,
                    mae_norm: report.mae_norm,
                    rmse_norm: report.rmse_norm,
                    mae_raw: report.mae_raw,
                    rmse_raw: report.rmse_raw,
                    jsd: report.jsd,
                    n_eval_cells: report.n_eval_cells,
                    fit_seconds: fit_s,
                    impute_seconds: imp_s,
                    error: None,
                },
                Err(e) => fail(&e),
            }
        })
        .collect()
}

/// Fits method `method` of the grid exactly as the runner would for the
/// (mechanism, rate, seed) cell, without imputing or scoring.
#[allow(clippy::too_many_arguments)]
pub fn fit_cell<T: Scalar>(
    grid: &ExperimentGrid,
    registry: &Registry<T>,
    frame: &VitalsFrame<T>,
    obs: &ObservationMask,
    mechanism: Mechanism,
    rate: f64,
    seed: u64,
    method: usize,
) -> Result<FittedImputer<T>> {
    let m = grid
        .methods
        .get(method)
        .ok_or_else(|| Error::invalid(format!("grid has no method #{method}")))?;
    let slice = prepare_slice(grid, frame, obs, mechanism, rate, seed)?;
    let spec = ImputerSpec {
        name: m.name.clone(),
        params: m.params.clone(),
        seed: method_seed(grid.master_seed, &m.name, &m.params, mechanism, rate, seed),
    };
    registry.fit(&spec, &slice.train, &slice.train_visible)
}

struct Slice<T: Scalar> {
    stats: crate::dataset::NormalizationStats<T>,
    train: VitalsFrame<T>,
    train_visible: ObservationMask,
    test: VitalsFrame<T>,
    test_visible: ObservationMask,
    test_eval: ObservationMask,
}

fn prepare_slice<T: Scalar>(
    grid: &ExperimentGrid,
    frame: &VitalsFrame<T>,
    obs: &ObservationMask,
    mechanism: Mechanism,
    rate: f64,
    seed: u64,
) -> Result<Slice<T>> {
    let master = grid.master_seed;
    let split = split_stays(frame, grid.split, split_seed(master, seed))?;
    let cfg = AmputationConfig::new(mechanism, rate, amputation_seed(master, mechanism, rate, seed));
    let (_, amputed) = ampute_data(frame, obs, &cfg)?;
    let visible = obs.and_not(&amputed);
    let stats = fit_normalizer(frame, &visible, &split.train)?;
    let z = stats.apply(frame)?;
    let (train, train_rows) = z.select_stays(&split.train);
    let (test, test_rows) = z.select_stays(&split.test);
    Ok(Slice {
        stats,
        train,
        train_visible: visible.select_rows(&train_rows),
        test,
        test_visible: visible.select_rows(&test_rows),
        test_eval: amputed.select_rows(&test_rows),
    })
}

fn run_method<T: Scalar>(
    registry: &Registry<T>,
    spec: &ImputerSpec,
    slice: &Slice<T>,
    grid: &ExperimentGrid,
    options: RunOptions,
) -> Result<(MetricReport, f64, f64)> {
    let t0 = Instant::now();
    let fitted = registry.fit(spec, &slice.train, &slice.train_visible)?;
    let fit_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let imputed = fitted.impute(&slice.test, &slice.test_visible)?;
    let imp_s = t1.elapsed().as_secs_f64();
    let report = evaluate(&slice.test, &imputed, &slice.test_eval, &slice.stats, &grid.metrics)?;
    if options.timing {
        Ok((report, fit_s, imp_s))
    } else {
        Ok((report, 0.0, 0.0))
    }
}
