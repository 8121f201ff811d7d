use std::io::Write;
use std::path::Path;

use cog_core::io::Table;
use cog_core::Result;
use serde_json::Value;

use crate::Format;

pub enum Output {
    Table(Table),
    Json(Value),
}

fn write_bytes(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s.into_bytes()
}

/// Tables follow `format`; JSON documents are always written as JSON.
pub fn emit(out: Output, format: Format, path: Option<&Path>) -> Result<()> {
    match (out, format) {
        (Output::Table(t), Format::Csv) => write_bytes(t.to_csv_string().as_bytes(), path),
        (Output::Table(t), Format::Json) => write_bytes(&json_bytes(&t.to_json()), path),
        (Output::Json(v), _) => write_bytes(&json_bytes(&v), path),
    }
}
