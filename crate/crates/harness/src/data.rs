//! Numeric CSV ingestion.

use std::path::Path;

use sketchkrr_core::synth::{split_and_normalize, RegressionDataset};
use sketchkrr_core::{DVector, InputMatrix};

use crate::config::TargetColumn;
use crate::error::{HarnessError, Result};
use crate::seed::rng_from;

/// Reads a comma-separated file with one header row and numeric cells.
///
/// All columns other than `target` become features. The response doubles as
/// `f_star` since real data has no noiseless target.
pub fn read_dataset(path: &Path, target: Option<&TargetColumn>) -> Result<RegressionDataset> {
    let data_err = |message: String| HarnessError::Data {
        path: path.to_owned(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_err(e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| data_err(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.len() < 2 {
        return Err(data_err(
            "need at least one feature column and a target column".into(),
        ));
    }
    let target_idx = match target {
        None => header.len() - 1,
        Some(TargetColumn::Index(i)) if *i < header.len() => *i,
        Some(TargetColumn::Index(i)) => {
            return Err(data_err(format!(
                "target index {i} out of range for {} columns",
                header.len()
            )))
        }
        Some(TargetColumn::Name(name)) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| data_err(format!("no column named {name:?}")))?,
    };

    let mut features = Vec::new();
    let mut response = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| data_err(e.to_string()))?;
        if row.len() != header.len() {
            return Err(data_err(format!(
                "row {} has {} cells, header has {}",
                line + 2,
                row.len(),
                header.len()
            )));
        }
        for (j, cell) in row.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    data_err(format!(
                        "non-numeric cell {cell:?} at row {}, column {:?}",
                        line + 2,
                        header[j]
                    ))
                })?;
            if j == target_idx {
                response.push(v);
            } else {
                features.push(v);
            }
        }
    }
    if response.is_empty() {
        return Err(data_err("no data rows".into()));
    }
    let n = response.len();
    let x = InputMatrix::from_row_major(n, header.len() - 1, features)?;
    let y = DVector::from_vec(response);
    Ok(RegressionDataset {
        x,
        f_star: y.clone(),
        y,
        noise_sd: 0.0,
    })
}

/// Reads `path`, splits off a test set and normalizes features by
/// training-split standard deviations.
pub fn load_csv(
    path: &Path,
    target: Option<&TargetColumn>,
    test_fraction: f64,
    seed: u64,
) -> Result<(RegressionDataset, RegressionDataset)> {
    let data = read_dataset(path, target)?;
    split_and_normalize(&data, test_fraction, &mut rng_from(seed)).map_err(|e| HarnessError::Data {
        path: path.to_owned(),
        message: e.to_string(),
    })
}
