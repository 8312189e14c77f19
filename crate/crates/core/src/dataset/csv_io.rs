//! Long-format CSV: one row per (stay, hour).
//!
//! Header: `stay_id,time_hours,<feature>...[,outcome]`. Empty fields are
//! missing values. Values are written with the shortest decimal that
//! round-trips, so a write followed by a load is the identity.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::frame::{default_features, Feature, VitalsFrame};
use crate::error::{Error, Result};
use crate::mask::{Mask, ObservationMask};
use crate::scalar::Scalar;

const STAY_COL: &str = "stay_id";
const TIME_COL: &str = "time_hours";
const OUTCOME_COL: &str = "outcome";

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    /// When set, the feature columns must be exactly these names in order.
    pub expect_features: Option<Vec<String>>,
}

struct StayRows<T> {
    id: String,
    hours: Vec<i64>,
    lines: Vec<usize>,
    values: Vec<Option<T>>,
    outcome: Option<u8>,
}

fn unit_for(name: &str) -> String {
    default_features()
        .into_iter()
        .find(|f| f.name == name)
        .map(|f| f.unit)
        .unwrap_or_default()
}

pub fn load_csv<T: Scalar>(
    path: impl AsRef<Path>,
    options: &CsvOptions,
) -> Result<(VitalsFrame<T>, ObservationMask)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);

    let header_err = |message: String| Error::Header {
        path: path.to_path_buf(),
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| header_err(e.to_string()))?
        .clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 3 || cols[0] != STAY_COL || cols[1] != TIME_COL {
        return Err(header_err(format!(
            "expected `{STAY_COL},{TIME_COL},<features>...`, got `{}`",
            cols.join(",")
        )));
    }
    let outcome_col = cols.iter().position(|&c| c == OUTCOME_COL);
    if let Some(i) = outcome_col {
        if i != cols.len() - 1 {
            return Err(header_err("`outcome` must be the last column".into()));
        }
    }
    let feature_names: Vec<String> = cols[2..]
        .iter()
        .filter(|&&c| c != OUTCOME_COL)
        .map(|s| s.to_string())
        .collect();
    if feature_names.is_empty() {
        return Err(header_err("no feature columns".into()));
    }
    for (i, name) in feature_names.iter().enumerate() {
        if name.is_empty() || feature_names[..i].contains(name) {
            return Err(header_err(format!("empty or duplicate column `{name}`")));
        }
    }
    if let Some(expected) = &options.expect_features {
        if expected != &feature_names {
            return Err(header_err(format!(
                "feature columns `{}` do not match expected `{}`",
                feature_names.join(","),
                expected.join(",")
            )));
        }
    }
    let nf = feature_names.len();

    let mut stays: Vec<StayRows<T>> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Csv {
                path: path.to_path_buf(),
                row,
                message: e.to_string(),
            }
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let fail = |message: String| Error::Csv {
            path: path.to_path_buf(),
            row,
            message,
        };

        let id = record.get(0).unwrap_or_default();
        if id.is_empty() {
            return Err(fail("empty stay_id".into()));
        }
        let hour: i64 = record
            .get(1)
            .unwrap_or_default()
            .trim()
            .parse()
            .map_err(|_| fail("time_hours must be an integer".into()))?;

        let mut values = Vec::with_capacity(nf);
        for (j, name) in feature_names.iter().enumerate() {
            let field = record.get(2 + j).unwrap_or_default().trim();
            if field.is_empty() {
                values.push(None);
                continue;
            }
            let v: T = field
                .parse()
                .map_err(|_| fail(format!("non-numeric value `{field}` in column `{name}`")))?;
            if !v.is_finite() {
                return Err(fail(format!("non-finite value `{field}` in column `{name}`")));
            }
            values.push(Some(v));
        }
        let outcome = match outcome_col {
            Some(i) => match record.get(i).unwrap_or_default().trim() {
                "0" => Some(0u8),
                "1" => Some(1u8),
                other => return Err(fail(format!("outcome must be 0 or 1, got `{other}`"))),
            },
            None => None,
        };

        let slot = *index.entry(id.to_string()).or_insert_with(|| {
            stays.push(StayRows {
                id: id.to_string(),
                hours: Vec::new(),
                lines: Vec::new(),
                values: Vec::new(),
                outcome,
            });
            stays.len() - 1
        });
        let stay = &mut stays[slot];
        if let Some(&prev) = stay.hours.last() {
            if hour == prev {
                return Err(fail(format!("duplicate (stay, hour) pair ({id}, {hour})")));
            }
            if hour < prev {
                return Err(fail(format!(
                    "non-monotone timestamps in stay {id}: {hour} after {prev}"
                )));
            }
        }
        if stay.outcome != outcome {
            return Err(fail(format!("outcome is not constant within stay {id}")));
        }
        stay.hours.push(hour);
        stay.lines.push(row);
        stay.values.extend(values);
    }

    // Spacing is checked once ordering is known to hold for the whole file,
    // so an out-of-order hour is reported as such rather than as a gap.
    for stay in &stays {
        for (w, line) in stay.hours.windows(2).zip(&stay.lines[1..]) {
            if w[1] != w[0] + 1 {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    row: *line,
                    message: format!(
                        "hour grid must have 1-hour spacing in stay {}: {} after {}",
                        stay.id, w[1], w[0]
                    ),
                });
            }
        }
    }

    if stays.is_empty() {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            row: 1,
            message: "no data rows".into(),
        });
    }

    let features: Vec<Feature> = feature_names
        .iter()
        .map(|n| Feature::new(n.clone(), unit_for(n)))
        .collect();
    let lengths: Vec<usize> = stays.iter().map(|s| s.hours.len()).collect();
    let starts: Vec<i64> = stays.iter().map(|s| s.hours[0]).collect();
    let outcome = outcome_col.map(|_| stays.iter().map(|s| s.outcome.unwrap()).collect());
    let ids = stays.iter().map(|s| s.id.clone()).collect();
    let values = stays.into_iter().flat_map(|s| s.values).collect();
    let frame = VitalsFrame::new(ids, starts, &lengths, features, values, outcome)?;
    let mask = frame.observation_mask();
    Ok((frame, mask))
}

fn write_grid<T: Scalar>(
    frame: &VitalsFrame<T>,
    path: &Path,
    with_outcome: bool,
    cell: impl Fn(usize, usize) -> Option<String>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().from_writer(BufWriter::new(file));
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    };

    let mut header = vec![STAY_COL.to_string(), TIME_COL.to_string()];
    header.extend(frame.features().iter().map(|f| f.name.clone()));
    let outcome = frame.outcome().filter(|_| with_outcome);
    if outcome.is_some() {
        header.push(OUTCOME_COL.to_string());
    }
    w.write_record(&header).map_err(to_err)?;

    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for (s, rows) in frame.stay_ranges().enumerate() {
        for (row, hour) in rows.zip(frame.time_grid(s)) {
            record.clear();
            record.push(frame.stay_ids()[s].clone());
            record.push(hour.to_string());
            for f in 0..frame.n_features() {
                record.push(cell(row, f).unwrap_or_default());
            }
            if let Some(o) = outcome {
                record.push(o[s].to_string());
            }
            w.write_record(&record).map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes `frame`, emitting an empty field wherever `mask` is false.
pub fn write_csv<T: Scalar>(
    frame: &VitalsFrame<T>,
    mask: &ObservationMask,
    path: impl AsRef<Path>,
) -> Result<()> {
    frame.check_mask(mask)?;
    write_grid(frame, path.as_ref(), true, |r, f| {
        if mask.get(r, f) {
            frame.get(r, f).map(|v| v.to_string())
        } else {
            None
        }
    })
}

/// Writes a mask on the frame's grid: `1` where set, `0` elsewhere.
pub fn write_mask_csv<T: Scalar>(
    frame: &VitalsFrame<T>,
    mask: &Mask,
    path: impl AsRef<Path>,
) -> Result<()> {
    frame.check_mask(mask)?;
    write_grid(frame, path.as_ref(), false, |r, f| {
        Some(if mask.get(r, f) { "1" } else { "0" }.to_string())
    })
}

/// Reads a mask file written by [`write_mask_csv`].
pub fn load_mask_csv(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let (grid, _) = load_csv::<f64>(path, &CsvOptions::default())?;
    let mut bits = Vec::with_capacity(grid.values().len());
    for (i, v) in grid.values().iter().enumerate() {
        match v {
            Some(x) if *x == 1.0 => bits.push(true),
            Some(x) if *x == 0.0 => bits.push(false),
            _ => {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    row: i / grid.n_features() + 2,
                    message: "mask cells must be 0 or 1".into(),
                })
            }
        }
    }
    Mask::from_bits(grid.n_rows(), grid.n_features(), bits)
}
