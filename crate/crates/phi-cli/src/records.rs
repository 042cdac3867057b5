//! Line-delimited structured report records.
//!
//! Every run emits a `meta` record first, then one or more payload
//! records. Records are JSON objects with a `record` discriminator and a
//! `version` field on the meta line; field order is fixed by the struct
//! definitions, so identical runs produce byte-identical output.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use crate::CliError;

pub const REPORT_VERSION: u32 = 1;

#[derive(Serialize)]
struct MetaRecord<'a> {
    record: &'static str,
    version: u32,
    track: &'a str,
    seed: u64,
}

enum Output {
    Stdout,
    File(File),
}

/// Writes records to `--out` (or stdout) and keeps human-readable summary
/// lines apart from the structured stream.
pub struct RecordSink {
    output: Output,
    to_file: bool,
    summaries: Vec<String>,
}

impl RecordSink {
    pub fn open(path: Option<PathBuf>) -> Result<Self, CliError> {
        match path {
            Some(p) => {
                let file = File::create(&p).map_err(|e| {
                    CliError::Parse(format!("cannot create report file {}: {e}", p.display()))
                })?;
                Ok(Self { output: Output::File(file), to_file: true, summaries: Vec::new() })
            }
            None => Ok(Self { output: Output::Stdout, to_file: false, summaries: Vec::new() }),
        }
    }

    pub fn meta(&mut self, track: &str, seed: u64) -> Result<(), CliError> {
        self.record(&MetaRecord { record: "meta", version: REPORT_VERSION, track, seed })
    }

    /// Serialize one record as a JSON line.
    pub fn record<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let line = serde_json::to_string(value)
            .map_err(|e| CliError::Precondition(format!("serialization failed: {e}")))?;
        let out: &mut dyn Write = match &mut self.output {
            Output::Stdout => return writeln_stdout(&line),
            Output::File(f) => f,
        };
        writeln!(out, "{line}")
            .map_err(|e| CliError::Precondition(format!("report write failed: {e}")))
    }

    /// Human-readable one-liner; printed on stdout when records go to a
    /// file, on stderr otherwise.
    pub fn summary(&mut self, line: String) {
        self.summaries.push(line);
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        if let Output::File(f) = &mut self.output {
            f.flush()
                .map_err(|e| CliError::Precondition(format!("report flush failed: {e}")))?;
        }
        for line in &self.summaries {
            if self.to_file {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
        }
        Ok(())
    }
}

fn writeln_stdout(line: &str) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    writeln!(lock, "{line}")
        .map_err(|e| CliError::Precondition(format!("report write failed: {e}")))
}
