//! CSV persistence for experiment tables.
//!
//! Layout: `theta.<name>` columns in space order, then `S.<name>` columns,
//! one row per run. The seed and the parameter space live in a JSON sidecar
//! next to the CSV (`train.csv` -> `train.manifest.json`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentTable, Parameter, ParameterSpace, Row};
use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

pub const THETA_PREFIX: &str = "theta.";
pub const STAT_PREFIX: &str = "S.";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableManifest {
    pub schema_version: u32,
    pub seed: u64,
    pub n: usize,
    pub space: Vec<Parameter>,
    #[serde(default)]
    pub lineage: String,
}

pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest.json")
}

pub fn write_table(table: &ExperimentTable, csv_path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(csv_path)?;
    let header: Vec<String> = table
        .space()
        .params()
        .iter()
        .map(|p| format!("{THETA_PREFIX}{}", p.name))
        .chain(
            table
                .statistic_names()
                .iter()
                .map(|s| format!("{STAT_PREFIX}{s}")),
        )
        .collect();
    writer.write_record(&header)?;
    for row in table.rows() {
        writer.write_record(row.theta.iter().chain(&row.stats).map(|v| v.to_string()))?;
    }
    writer.flush()?;

    let manifest = TableManifest {
        schema_version: SCHEMA_VERSION,
        seed: table.seed(),
        n: table.len(),
        space: table.space().params().to_vec(),
        lineage: table.lineage().to_string(),
    };
    fs::write(
        manifest_path(csv_path),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(())
}

pub fn read_table(csv_path: &Path) -> Result<ExperimentTable> {
    let manifest: TableManifest = serde_json::from_str(&fs::read_to_string(manifest_path(csv_path))?)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaMismatch {
            column: "schema_version".into(),
            detail: format!(
                "manifest has version {}, expected {SCHEMA_VERSION}",
                manifest.schema_version
            ),
        });
    }
    let space = ParameterSpace::new(manifest.space.clone())?;
    let mut reader = csv::Reader::from_path(csv_path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let k = space.len();
    for (i, p) in space.params().iter().enumerate() {
        let expected = format!("{THETA_PREFIX}{}", p.name);
        match header.get(i) {
            Some(col) if *col == expected => {}
            Some(col) => {
                return Err(Error::SchemaMismatch {
                    column: col.clone(),
                    detail: format!("expected `{expected}`"),
                })
            }
            None => {
                return Err(Error::SchemaMismatch {
                    column: expected,
                    detail: "column missing".into(),
                })
            }
        }
    }
    let mut statistic_names = Vec::with_capacity(header.len() - k);
    for col in &header[k..] {
        match col.strip_prefix(STAT_PREFIX) {
            Some(name) if !name.is_empty() => statistic_names.push(name.to_string()),
            _ => {
                return Err(Error::SchemaMismatch {
                    column: col.clone(),
                    detail: format!("expected a `{STAT_PREFIX}<name>` statistic column"),
                })
            }
        }
    }

    let mut rows = Vec::with_capacity(manifest.n);
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field.trim().parse::<f64>().map_err(|_| Error::SchemaMismatch {
                    column: header.get(j).cloned().unwrap_or_default(),
                    detail: format!("row {line}: `{field}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != header.len() {
            return Err(Error::DimensionMismatch(format!(
                "row {line} has {} fields, header has {}",
                values.len(),
                header.len()
            )));
        }
        rows.push(Row {
            theta: values[..k].to_vec(),
            stats: values[k..].to_vec(),
        });
    }
    if rows.len() != manifest.n {
        return Err(Error::SchemaMismatch {
            column: "n".into(),
            detail: format!("manifest declares {} rows, csv has {}", manifest.n, rows.len()),
        });
    }
    let lineage = manifest.lineage.clone();
    let table = ExperimentTable::from_rows(space, statistic_names, rows, manifest.seed)?;
    Ok(if lineage.is_empty() {
        table
    } else {
        table.with_lineage(lineage)
    })
}
