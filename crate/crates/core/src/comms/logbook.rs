//! Append-only onboard log, one JSON record per line.
//!
//! Records are written with their fields in declaration order, `t` first.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sensors::SensorKind;

#[derive(Debug, Error)]
pub enum LogbookError {
    #[error("record at t={t} precedes the last record at t={last}")]
    NonMonotone { t: f64, last: f64 },
    #[error("logbook line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("logbook i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Encode(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Sample {
        t: f64,
        kind: SensorKind,
        value: f64,
        x: f64,
        y: f64,
        depth: f64,
    },
    State {
        t: f64,
        x: f64,
        y: f64,
        heading: f64,
        surge_speed: f64,
        heave: f64,
        rudder: f64,
        tension: f64,
        soc: f64,
        sea_state: Option<f64>,
        capsized: bool,
    },
    Frame {
        t: f64,
        direction: String,
        msg_type: String,
        seq: u16,
        bytes: String,
    },
    Mission {
        t: f64,
        version: u16,
        waypoints: usize,
    },
    Event {
        t: f64,
        name: String,
    },
}

impl LogRecord {
    pub fn t(&self) -> f64 {
        match self {
            LogRecord::Sample { t, .. }
            | LogRecord::State { t, .. }
            | LogRecord::Frame { t, .. }
            | LogRecord::Mission { t, .. }
            | LogRecord::Event { t, .. } => *t,
        }
    }
}

/// In-memory or file-backed logbook.
#[derive(Debug)]
pub struct Logbook {
    writer: Option<(PathBuf, BufWriter<File>)>,
    lines: Vec<String>,
    last_t: f64,
    count: u64,
}

impl Default for Logbook {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl Logbook {
    pub fn in_memory() -> Self {
        Self {
            writer: None,
            lines: Vec::new(),
            last_t: f64::NEG_INFINITY,
            count: 0,
        }
    }

    /// Opens `path` for appending, resuming after any existing records.
    pub fn open(path: &Path) -> Result<Self, LogbookError> {
        let io = |source| LogbookError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut last_t = f64::NEG_INFINITY;
        let mut count = 0;
        if path.exists() {
            for rec in read_records(path)? {
                last_t = rec.t();
                count += 1;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok(Self {
            writer: Some((path.to_path_buf(), BufWriter::new(file))),
            lines: Vec::new(),
            last_t,
            count,
        })
    }

    pub fn append(&mut self, record: &LogRecord) -> Result<(), LogbookError> {
        let t = record.t();
        if !(t >= self.last_t) {
            return Err(LogbookError::NonMonotone { t, last: self.last_t });
        }
        let line = serde_json::to_string(record)?;
        match &mut self.writer {
            Some((path, w)) => {
                w.write_all(line.as_bytes())
                    .and_then(|_| w.write_all(b"\n"))
                    .map_err(|source| LogbookError::Io {
                        path: path.clone(),
                        source,
                    })?;
            }
            None => self.lines.push(line),
        }
        self.last_t = t;
        self.count += 1;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), LogbookError> {
        if let Some((path, w)) = &mut self.writer {
            w.flush().map_err(|source| LogbookError::Io {
                path: path.clone(),
                source,
            })?;
        }
        Ok(())
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Lines held in memory (empty when file-backed).
    pub fn lines(&self) -> &[String] {
        &self.lines
    }
}

impl Drop for Logbook {
    fn drop(&mut self) {
        let _ = self.flush();
    }
}

pub fn read_records(path: &Path) -> Result<Vec<LogRecord>, LogbookError> {
    let file = File::open(path).map_err(|source| LogbookError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| LogbookError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| LogbookError::Parse { line: i + 1, source })?);
    }
    Ok(out)
}
