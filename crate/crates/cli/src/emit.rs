//! CSV and JSON rendering of result rows.

use std::path::{Path, PathBuf};

use crate::runner::ResultRow;

/// Column order of the CSV output.
pub const CSV_HEADER: [&str; 13] = [
    "label",
    "spin",
    "coupling",
    "convention",
    "jv",
    "kx0_over_pi",
    "sigma_over_k",
    "n",
    "fidelity",
    "cumulative_probability",
    "step_probability",
    "log_negativity",
    "purity",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Seventeen significant digits, enough to round-trip any `f64`.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String, EmitError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.spin.clone(),
            r.coupling.clone(),
            r.convention.clone(),
            float(r.jv),
            float(r.kx0_over_pi),
            r.sigma_over_k.map(float).unwrap_or_default(),
            r.n.to_string(),
            float(r.fidelity),
            float(r.cumulative_probability),
            float(r.step_probability),
            float(r.log_negativity),
            float(r.purity),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_json(rows: &[ResultRow]) -> Result<String, EmitError> {
    Ok(serde_json::to_string_pretty(rows)? + "\n")
}

pub fn from_json(text: &str) -> Result<Vec<ResultRow>, EmitError> {
    Ok(serde_json::from_str(text)?)
}

pub fn render(rows: &[ResultRow], format: Format) -> Result<String, EmitError> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}

pub fn emit(rows: &[ResultRow], format: Format, path: &Path) -> Result<(), EmitError> {
    let text = render(rows, format)?;
    std::fs::write(path, text).map_err(|source| EmitError::Io {
        path: path.to_owned(),
        source,
    })
}
