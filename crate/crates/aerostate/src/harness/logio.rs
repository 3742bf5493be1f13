use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{FlightLog, LogRecord, LOG_SCHEMA_VERSION};

/// One JSONL line: schema version plus the tagged record.
#[derive(Serialize, Deserialize)]
struct LogLine {
    v: u32,
    #[serde(flatten)]
    record: LogRecord,
}

/// Version probe read before the full parse so an unknown schema fails
/// with the right error rather than an arbitrary field mismatch.
#[derive(Deserialize)]
struct VersionProbe {
    v: u32,
}

pub fn log_to_jsonl(log: &FlightLog) -> String {
    let mut out = String::new();
    for record in &log.records {
        let line = LogLine { v: LOG_SCHEMA_VERSION, record: record.clone() };
        out.push_str(&serde_json::to_string(&line).expect("log records always serialize"));
        out.push('\n');
    }
    out
}

pub fn log_from_jsonl(text: &str) -> Result<FlightLog> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let probe: VersionProbe = serde_json::from_str(line).map_err(|e| Error::MalformedLog {
            line: line_no,
            message: e.to_string(),
        })?;
        if probe.v != LOG_SCHEMA_VERSION {
            return Err(Error::VersionMismatch { line: line_no, found: probe.v });
        }
        let parsed: LogLine = serde_json::from_str(line).map_err(|e| Error::MalformedLog {
            line: line_no,
            message: e.to_string(),
        })?;
        records.push(parsed.record);
    }
    Ok(FlightLog { records })
}

pub fn write_log(path: impl AsRef<Path>, log: &FlightLog) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(log_to_jsonl(log).as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_log(path: impl AsRef<Path>) -> Result<FlightLog> {
    let text = std::fs::read_to_string(path)?;
    log_from_jsonl(&text)
}
