use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::ExperimentGrid;
use super::runner::ResultRow;
use crate::error::{Error, Result};
use crate::metrics::{AggregateCell, MeanStd};

pub const RESULTS_HEADER: [&str; 13] = [
    "dataset",
    "mechanism",
    "rate",
    "method",
    "seed",
    "mae_norm",
    "rmse_norm",
    "mae_raw",
    "rmse_raw",
    "jsd",
    "n_eval_cells",
    "fit_seconds",
    "impute_seconds",
];

const METRIC_NAMES: [&str; 5] = ["mae_norm", "rmse_norm", "mae_raw", "rmse_raw", "jsd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKey {
    Dataset,
    Mechanism,
    Rate,
    Method,
}

impl GroupKey {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupKey::Dataset => "dataset",
            GroupKey::Mechanism => "mechanism",
            GroupKey::Rate => "rate",
            GroupKey::Method => "method",
        }
    }

    fn value(self, row: &ResultRow) -> String {
        match self {
            GroupKey::Dataset => row.dataset.clone(),
            GroupKey::Mechanism => row.mechanism.to_string(),
            GroupKey::Rate => row.rate.to_string(),
            GroupKey::Method => row.method.clone(),
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dataset" => Ok(GroupKey::Dataset),
            "mechanism" => Ok(GroupKey::Mechanism),
            "rate" => Ok(GroupKey::Rate),
            "method" => Ok(GroupKey::Method),
            _ => Err(Error::UnknownGroupKey(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub key: Vec<String>,
    pub cell: AggregateCell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub group_by: Vec<GroupKey>,
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    /// File stem suffix, e.g. `method_rate`.
    pub fn name(&self) -> String {
        self.group_by
            .iter()
            .map(|k| k.as_str())
            .collect::<Vec<_>>()
            .join("_")
    }
}

/// Groups successful rows by `group_by` and aggregates everything else.
/// Groups are ordered by the first key's axis order, then the second's.
pub fn summarize(rows: &[ResultRow], group_by: &[GroupKey]) -> Result<Summary> {
    if rows.is_empty() {
        return Err(Error::invalid("nothing to summarize"));
    }
    if group_by.is_empty() {
        return Err(Error::invalid("group_by must name at least one key"));
    }
    for (i, k) in group_by.iter().enumerate() {
        if group_by[..i].contains(k) {
            return Err(Error::invalid(format!("group key `{k}` repeated")));
        }
    }
    let mut groups: Vec<(Vec<String>, Vec<[f64; 5]>)> = Vec::new();
    for row in rows.iter().filter(|r| r.is_ok()) {
        let key: Vec<String> = group_by.iter().map(|k| k.value(row)).collect();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(row.metrics()),
            None => groups.push((key, vec![row.metrics()])),
        }
    }
    // Order groups by each key's axis order (first appearance), keys
    // compared in `group_by` order.
    let axis_rank = |d: usize, v: &str| {
        let mut seen: Vec<String> = Vec::new();
        for row in rows {
            let x = group_by[d].value(row);
            if !seen.contains(&x) {
                seen.push(x);
            }
        }
        seen.iter().position(|x| x == v).unwrap_or(usize::MAX)
    };
    groups.sort_by_cached_key(|(key, _)| {
        key.iter()
            .enumerate()
            .map(|(d, v)| axis_rank(d, v))
            .collect::<Vec<_>>()
    });
    Ok(Summary {
        group_by: group_by.to_vec(),
        rows: groups
            .into_iter()
            .map(|(key, m)| SummaryRow {
                key,
                cell: AggregateCell::from_metrics(&m),
            })
            .collect(),
    })
}

/// Like [`summarize`] with keys given by name.
pub fn summarize_by(rows: &[ResultRow], group_by: &[&str]) -> Result<Summary> {
    let keys = group_by
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<GroupKey>>>()?;
    summarize(rows, &keys)
}

/// The three standard views: by rate, by mechanism, by dataset.
pub fn standard_summaries(rows: &[ResultRow]) -> Result<Vec<Summary>> {
    use GroupKey::*;
    [[Method, Rate], [Method, Mechanism], [Method, Dataset]]
        .iter()
        .map(|keys| summarize(rows, keys))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub toolkit: String,
    pub version: String,
    pub master_seed: u64,
    pub grid: ExperimentGrid,
}

impl Manifest {
    pub fn new(grid: &ExperimentGrid) -> Self {
        Manifest {
            toolkit: "gapbench".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            master_seed: grid.master_seed,
            grid: grid.clone(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            pointer: super::config::pointer(e.path()),
            message: e.inner().to_string(),
        })
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        String::new()
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 fields")
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = csv_line(&RESULTS_HEADER.map(String::from));
    for r in rows {
        out.push_str(&csv_line(&[
            r.dataset.clone(),
            r.mechanism.to_string(),
            r.rate.to_string(),
            r.method.clone(),
            r.seed.to_string(),
            fmt_f64(r.mae_norm),
            fmt_f64(r.rmse_norm),
            fmt_f64(r.mae_raw),
            fmt_f64(r.rmse_raw),
            fmt_f64(r.jsd),
            if r.is_ok() { r.n_eval_cells.to_string() } else { String::new() },
            r.fit_seconds.to_string(),
            r.impute_seconds.to_string(),
        ]));
    }
    out
}

pub fn errors_csv(rows: &[ResultRow]) -> String {
    let mut out = csv_line(&["dataset", "mechanism", "rate", "method", "seed", "message"].map(String::from));
    for r in rows {
        if let Some(msg) = &r.error {
            out.push_str(&csv_line(&[
                r.dataset.clone(),
                r.mechanism.to_string(),
                r.rate.to_string(),
                r.method.clone(),
                r.seed.to_string(),
                msg.clone(),
            ]));
        }
    }
    out
}

fn cell_fields(cell: &AggregateCell) -> [MeanStd; 5] {
    [cell.mae_norm, cell.rmse_norm, cell.mae_raw, cell.rmse_raw, cell.jsd]
}

/// Wide table: group keys, run count, then mean/std per metric.
pub fn summary_csv(summary: &Summary) -> String {
    let mut header: Vec<String> = summary.group_by.iter().map(|k| k.to_string()).collect();
    header.push("runs".into());
    for m in METRIC_NAMES {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_std"));
    }
    let mut out = csv_line(&header);
    for row in &summary.rows {
        let mut fields = row.key.clone();
        fields.push(row.cell.runs.to_string());
        for ms in cell_fields(&row.cell) {
            fields.push(fmt_f64(ms.mean));
            fields.push(fmt_f64(ms.std));
        }
        out.push_str(&csv_line(&fields));
    }
    out
}

/// Long table for plotting: one line per (group, metric).
pub fn plotdata_csv(summary: &Summary) -> String {
    let mut header: Vec<String> = summary.group_by.iter().map(|k| k.to_string()).collect();
    header.extend(["metric", "mean", "std", "runs"].map(String::from));
    let mut out = csv_line(&header);
    for row in &summary.rows {
        for (name, ms) in METRIC_NAMES.iter().zip(cell_fields(&row.cell)) {
            let mut fields = row.key.clone();
            fields.push(name.to_string());
            fields.push(fmt_f64(ms.mean));
            fields.push(fmt_f64(ms.std));
            fields.push(row.cell.runs.to_string());
            out.push_str(&csv_line(&fields));
        }
    }
    out
}

/// Writes `results.csv`, `errors.csv`, one `summary_<keys>.csv` per
/// summary, and `manifest.json`.
pub fn emit_results(rows: &[ResultRow], summaries: &[Summary], grid: &ExperimentGrid, out_dir: impl AsRef<Path>) -> Result<()> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join("results.csv"), &results_csv(rows))?;
    write_file(&dir.join("errors.csv"), &errors_csv(rows))?;
    for s in summaries {
        write_file(&dir.join(format!("summary_{}.csv", s.name())), &summary_csv(s))?;
    }
    let manifest = serde_json::to_string_pretty(&Manifest::new(grid)).expect("manifest serializes");
    write_file(&dir.join("manifest.json"), &(manifest + "\n"))
}

/// Writes `plotdata_rate.csv`, `plotdata_mechanism.csv` and
/// `plotdata_dataset.csv` from the standard views.
pub fn emit_plotdata(rows: &[ResultRow], out_dir: impl AsRef<Path>) -> Result<()> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (dim, key) in [("rate", GroupKey::Rate), ("mechanism", GroupKey::Mechanism), ("dataset", GroupKey::Dataset)] {
        let text = if rows.iter().any(|r| r.is_ok()) {
            plotdata_csv(&summarize(rows, &[GroupKey::Method, key])?)
        } else {
            csv_line(&["method", dim, "metric", "mean", "std", "runs"].map(String::from))
        };
        write_file(&dir.join(format!("plotdata_{dim}.csv")), &text)?;
    }
    Ok(())
}
