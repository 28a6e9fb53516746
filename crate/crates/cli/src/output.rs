//! File emission. All writes go through here so a run either produces
//! complete files or fails.

use std::fs;
use std::path::Path;

use serde::Serialize;
use tempo_core::table::Table;

use crate::error::CliError;

pub fn write_table(path: &Path, t: &Table) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&t.header)?;
    for row in &t.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut t = Table::new(header);
    for rec in r.records() {
        let rec = rec?;
        t.push(rec.iter().map(str::to_string).collect());
    }
    Ok(t)
}
