use std::io::{self, Write};

use anyhow::Result;
use serde::Serialize;

use crate::Format;

/// Prints flat records as CSV (with header) or as a JSON array.
pub fn records<T: Serialize>(format: Format, rows: &[T]) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn record<T: Serialize>(format: Format, row: &T) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, row)?;
            writeln!(out)?;
            Ok(())
        }
        Format::Csv => records(format, std::slice::from_ref(row)),
    }
}
