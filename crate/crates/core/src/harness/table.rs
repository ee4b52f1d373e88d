use std::fs;
use std::path::Path;

use crate::error::Result;

/// A result type that can be flattened into CSV rows.
pub trait CsvTable {
    fn header(&self) -> Vec<&'static str>;
    fn records(&self) -> Vec<Vec<String>>;
}

/// CSV text with a header row, even when there are no records.
pub fn to_csv_string(table: &dyn CsvTable) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(table.header())?;
    for rec in table.records() {
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_csv(table: &dyn CsvTable, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_csv_string(table)?)?;
    Ok(())
}
