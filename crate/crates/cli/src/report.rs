//! Report assembly and emission.
//!
//! JSON reports carry a `meta` header (tool version, seed, effective config,
//! wall time) and a command-specific `data` payload. Floats are written with
//! 17 significant digits so every f64 round-trips exactly. CSV output is the
//! bare data table with RFC 4180 quoting; the metadata goes to stderr so the
//! table stays plot-ready.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct Meta {
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub elapsed_ms: u64,
}

impl Meta {
    pub fn new<C: Serialize>(
        command: &str,
        seed: Option<u64>,
        config: &C,
        elapsed_ms: u64,
    ) -> Result<Self, CliError> {
        Ok(Meta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config: serde_json::to_value(config).map_err(|e| CliError::Internal(e.to_string()))?,
            elapsed_ms,
        })
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport<T: Serialize> {
    pub meta: Meta,
    pub data: T,
}

/// Complex amplitude serialized as a {re, im} pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<gxor_sim::C64> for ComplexPair {
    fn from(z: gxor_sim::C64) -> Self {
        ComplexPair { re: z.re, im: z.im }
    }
}

/// JSON formatter printing every f64 with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a report to the 17-significant-digit JSON encoding.
pub fn to_json_string<T: Serialize>(report: &RunReport<T>) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    report
        .serialize(&mut ser)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
}

fn open_sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => Ok(Box::new(File::create(path)?)),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

pub fn emit_json<T: Serialize>(report: &RunReport<T>, out: Option<&Path>) -> Result<(), CliError> {
    let text = to_json_string(report)?;
    let mut sink = open_sink(out)?;
    writeln!(sink, "{text}")?;
    Ok(())
}

/// Writes the rows as a CSV table and echoes the metadata to stderr.
pub fn emit_csv<R: Serialize>(meta: &Meta, rows: &[R], out: Option<&Path>) -> Result<(), CliError> {
    let sink = open_sink(out)?;
    let mut writer = csv::Writer::from_writer(sink);
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    eprintln!(
        "meta: {}",
        serde_json::to_string(meta).map_err(|e| CliError::Internal(e.to_string()))?
    );
    Ok(())
}
