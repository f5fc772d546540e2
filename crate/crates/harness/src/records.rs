//! Raw per-replicate records and their CSV form.
//!
//! Output is UTF-8 with LF line endings and a header row. Absent optional
//! values are empty cells. Floats are written in shortest round-trip form, so
//! reading a file back yields identical records.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub dataset: String,
    pub n: usize,
    pub method: String,
    pub m: Option<usize>,
    pub d: usize,
    pub replicate_index: usize,
    pub seed: u64,
    /// `‖f̂_S − f̂_n‖²_n`; zero for the exact fit.
    pub approx_error: f64,
    /// `‖f̂ − f*‖²_n` against the noiseless target (the response for real data).
    pub estimation_error: f64,
    pub test_mse: Option<f64>,
    pub sketch_time_ms: f64,
    pub fit_time_ms: f64,
    pub predict_time_ms: f64,
    /// Error message when this replicate failed; the error columns are then NaN.
    pub failure: Option<String>,
}

pub const RECORD_FIELDS: [&str; 15] = [
    "experiment",
    "dataset",
    "n",
    "method",
    "m",
    "d",
    "replicate_index",
    "seed",
    "approx_error",
    "estimation_error",
    "test_mse",
    "sketch_time_ms",
    "fit_time_ms",
    "predict_time_ms",
    "failure",
];

fn writer<W: Write>(sink: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink)
}

/// Writes `header` then one row per item.
pub fn write_rows<W: Write, T: Serialize>(sink: W, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_rows<R: Read, T: DeserializeOwned>(source: R) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    r.deserialize()
        .map(|row| row.map_err(HarnessError::from))
        .collect()
}

pub fn emit_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })?;
    write_rows(std::io::BufWriter::new(file), &RECORD_FIELDS, records)
}

pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let file = File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })?;
    read_rows(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(test_mse: Option<f64>) -> ExperimentRecord {
        ExperimentRecord {
            experiment: "tradeoff".into(),
            dataset: "bimodal".into(),
            n: 1000,
            method: "accumulation_m4".into(),
            m: Some(4),
            d: 15,
            replicate_index: 3,
            seed: u64::MAX - 5,
            approx_error: 1.0 / 3.0,
            estimation_error: 2.5e-7,
            test_mse,
            sketch_time_ms: 0.125,
            fit_time_ms: 12.0,
            predict_time_ms: 0.0,
            failure: None,
        }
    }

    #[test]
    fn header_only_for_no_records() {
        let mut buf = Vec::new();
        write_rows::<_, ExperimentRecord>(&mut buf, &RECORD_FIELDS, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            RECORD_FIELDS.join(",") + "\n"
        );
    }

    #[test]
    fn absent_optionals_are_empty_cells() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &RECORD_FIELDS, &[sample(None)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert!(!row.contains("NaN"));
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), RECORD_FIELDS.len());
        assert_eq!(cells[10], "");
        assert_eq!(cells[14], "");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn round_trip_is_lossless() {
        let mut failed = sample(Some(0.1 + 0.2));
        failed.failure = Some("singular system, even after jitter".into());
        failed.m = None;
        let records = vec![sample(None), sample(Some(0.1 + 0.2)), failed];
        let mut buf = Vec::new();
        write_rows(&mut buf, &RECORD_FIELDS, &records).unwrap();
        let back: Vec<ExperimentRecord> = read_rows(buf.as_slice()).unwrap();
        assert_eq!(back, records);
    }
}
