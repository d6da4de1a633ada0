//! CSV ingestion: header-based column lookup, listwise deletion of rows
//! with missing values, response validation against the declared scale.

use std::path::Path;

use anyhow::{bail, Context, Result};

use idbr::model::Dataset;
use idbr::scale::ScaleSpec;

/// Field values treated as missing (after trimming).
fn is_missing(field: &str) -> bool {
    let f = field.trim();
    f.is_empty() || f.eq_ignore_ascii_case("na") || f.eq_ignore_ascii_case("nan")
}

/// Result of reading a CSV against a scale and a column plan.
#[derive(Debug)]
pub struct Ingested {
    pub data: Dataset,
    /// Rows dropped because a used column was missing.
    pub dropped: usize,
    /// Kept data-row indices (0-based, in file order). Prediction streams
    /// are numbered by position in this list.
    pub kept_rows: Vec<usize>,
}

/// Read a CSV with a response column, returning a validated dataset.
///
/// `covariates` lists the used columns in dataset order; `dummies` are
/// validated to be 0/1.
pub fn ingest_csv(
    path: &Path,
    response: &str,
    covariates: &[String],
    dummies: &[String],
    scale: &ScaleSpec,
) -> Result<Ingested> {
    let (header, records) = read_records(path)?;
    let response_idx = find_column(&header, response, path)?;
    let cov_idx = covariates
        .iter()
        .map(|name| find_column(&header, name, path))
        .collect::<Result<Vec<_>>>()?;
    let dummy_flags: Vec<bool> = covariates.iter().map(|c| dummies.contains(c)).collect();

    let mut y = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); covariates.len()];
    let mut dropped = 0usize;
    let mut kept_rows = Vec::new();

    for (row, record) in records.iter().enumerate() {
        let fields: Vec<&str> = {
            let mut f = Vec::with_capacity(cov_idx.len() + 1);
            f.push(record.get(response_idx).unwrap_or(""));
            for &c in &cov_idx {
                f.push(record.get(c).unwrap_or(""));
            }
            f
        };
        if fields.iter().any(|f| is_missing(f)) {
            dropped += 1;
            continue;
        }
        let y_star = parse_response(fields[0], scale, row)?;
        let reduced = scale
            .to_reduced_at(y_star, Some(row))
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        for (j, field) in fields[1..].iter().enumerate() {
            let value: f64 = field.trim().parse().with_context(|| {
                format!("{}: row {row}, column {}: cannot parse {field:?}", path.display(), covariates[j])
            })?;
            if dummy_flags[j] && value != 0.0 && value != 1.0 {
                bail!(
                    "{}: row {row}: dummy column {} must be 0/1, got {value}",
                    path.display(),
                    covariates[j]
                );
            }
            cols[j].push(value);
        }
        y.push(reduced);
        kept_rows.push(row);
    }
    if y.is_empty() {
        bail!("{}: no usable rows after dropping {dropped} incomplete rows", path.display());
    }
    let columns = covariates.iter().cloned().zip(cols).collect();
    let data = Dataset::new(y, columns, scale).map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(Ingested { data, dropped, kept_rows })
}

/// Read covariate rows only (for prediction): no response required.
pub fn ingest_covariates(
    path: &Path,
    covariates: &[String],
    dummies: &[String],
) -> Result<(Vec<Vec<f64>>, usize, Vec<usize>)> {
    let (header, records) = read_records(path)?;
    let cov_idx = covariates
        .iter()
        .map(|name| find_column(&header, name, path))
        .collect::<Result<Vec<_>>>()?;
    let dummy_flags: Vec<bool> = covariates.iter().map(|c| dummies.contains(c)).collect();

    let mut rows = Vec::new();
    let mut dropped = 0usize;
    let mut kept_rows = Vec::new();
    for (row, record) in records.iter().enumerate() {
        let fields: Vec<&str> = cov_idx.iter().map(|&c| record.get(c).unwrap_or("")).collect();
        if fields.iter().any(|f| is_missing(f)) {
            dropped += 1;
            continue;
        }
        let mut values = Vec::with_capacity(fields.len());
        for (j, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().with_context(|| {
                format!("{}: row {row}, column {}: cannot parse {field:?}", path.display(), covariates[j])
            })?;
            if dummy_flags[j] && value != 0.0 && value != 1.0 {
                bail!(
                    "{}: row {row}: dummy column {} must be 0/1, got {value}",
                    path.display(),
                    covariates[j]
                );
            }
            values.push(value);
        }
        rows.push(values);
        kept_rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: no usable rows after dropping {dropped} incomplete rows", path.display());
    }
    Ok((rows, dropped, kept_rows))
}

fn read_records(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let header: Vec<String> =
        reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let records = reader.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((header, records))
}

fn find_column(header: &[String], name: &str, path: &Path) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| {
        anyhow::anyhow!("{}: column {name:?} not found (header: {header:?})", path.display())
    })
}

/// Parse a response field: numeric, or a declared label.
fn parse_response(field: &str, scale: &ScaleSpec, row: usize) -> Result<f64> {
    let trimmed = field.trim();
    if let Ok(v) = trimmed.parse::<f64>() {
        return Ok(v);
    }
    for index in 1..=scale.levels() {
        if scale.label(index) == Some(trimmed) {
            return Ok(scale.original_level(index));
        }
    }
    bail!("row {row}: response {trimmed:?} is neither numeric nor a declared label")
}
