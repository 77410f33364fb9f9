//! Dataset serialization: a JSON manifest referencing one CSV file per
//! trial.
//!
//! Trial CSVs have one row per channel, comma-separated time samples, and
//! no header. Floats are written with 17 significant digits so a
//! save/load round trip is bit-exact.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use mmcsp_core::{Condition, TrialSet};

use crate::error::{CliError, Result};

pub const MANIFEST_VERSION: u32 = 1;

/// Manifest describing a stored two-condition dataset. Trial paths are
/// relative to the manifest's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub channels: usize,
    /// Trials already centered and scaled.
    pub preprocessed: bool,
    pub minus: Vec<String>,
    pub plus: Vec<String>,
    /// Free-form provenance (generator, seed, noise level, ...).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<serde_json::Value>,
}

fn write_trial_csv(path: &Path, trial: &Array2<f64>) -> Result<()> {
    let mut out = String::with_capacity(trial.len() * 26);
    for row in trial.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            // 17 significant digits round-trip f64 exactly.
            out.push_str(&format!("{v:.16e}"));
            first = false;
        }
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| CliError::io(path, e))?;
    Ok(())
}

fn read_trial_csv(path: &Path, channels: usize) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("not a float: {:?}", field.trim()),
            })?;
            row.push(v);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(CliError::ShapeMismatch {
                    path: path.to_path_buf(),
                    expected: w,
                    found: row.len(),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "empty trial file".into(),
        });
    }
    if rows.len() != channels {
        return Err(CliError::Manifest {
            path: path.to_path_buf(),
            message: format!(
                "trial has {} rows but the manifest declares {} channels",
                rows.len(),
                channels
            ),
        });
    }
    let cols = width.unwrap();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(Array2::from_shape_vec((channels, cols), flat).expect("shape checked above"))
}

/// Writes both trial sets under `dir` (one CSV per trial, grouped in
/// `minus/` and `plus/` subdirectories) plus `manifest.json`. Returns the
/// manifest path.
pub fn save_dataset(
    dir: &Path,
    minus: &TrialSet,
    plus: &TrialSet,
    preprocessed: bool,
    notes: Option<serde_json::Value>,
) -> Result<PathBuf> {
    let channels = minus.channels();
    let mut lists: Vec<Vec<String>> = Vec::new();
    for set in [minus, plus] {
        let label = set.condition().label();
        let subdir = dir.join(label);
        fs::create_dir_all(&subdir).map_err(|e| CliError::io(&subdir, e))?;
        let mut files = Vec::with_capacity(set.len());
        for (i, trial) in set.trials().iter().enumerate() {
            let rel = format!("{label}/trial_{i:04}.csv");
            write_trial_csv(&dir.join(&rel), trial)?;
            files.push(rel);
        }
        lists.push(files);
    }
    let manifest = DatasetManifest {
        format_version: MANIFEST_VERSION,
        channels,
        preprocessed,
        minus: lists.remove(0),
        plus: lists.remove(0),
        notes,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Loads a dataset from its manifest.
pub fn load_dataset(manifest_path: &Path) -> Result<(DatasetManifest, TrialSet, TrialSet)> {
    let text = fs::read_to_string(manifest_path).map_err(|e| CliError::io(manifest_path, e))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Manifest {
            path: manifest_path.to_path_buf(),
            message: e.to_string(),
        })?;
    if manifest.format_version != MANIFEST_VERSION {
        return Err(CliError::Manifest {
            path: manifest_path.to_path_buf(),
            message: format!("unsupported format version {}", manifest.format_version),
        });
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut sets = Vec::new();
    for (condition, files) in [
        (Condition::Minus, &manifest.minus),
        (Condition::Plus, &manifest.plus),
    ] {
        let mut trials = Vec::with_capacity(files.len());
        for rel in files {
            trials.push(read_trial_csv(&base.join(rel), manifest.channels)?);
        }
        sets.push(TrialSet::new(condition, trials)?);
    }
    let plus = sets.pop().expect("two sets");
    let minus = sets.pop().expect("two sets");
    Ok((manifest, minus, plus))
}
