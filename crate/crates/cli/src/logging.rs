//! JSON-lines logging to stderr, plus a progress-counting reader wrapper.

use std::io::{Read, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Deserialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
}

impl LogLevel {
    fn as_str(self) -> &'static str {
        match self {
            LogLevel::Error => "error",
            LogLevel::Warn => "warn",
            LogLevel::Info => "info",
            LogLevel::Debug => "debug",
        }
    }
}

/// Writes one JSON object per line to stderr for every message at or above
/// the configured level.
#[derive(Debug, Clone, Copy)]
pub struct Logger {
    level: LogLevel,
}

impl Logger {
    pub fn new(level: LogLevel) -> Self {
        Logger { level }
    }

    pub fn log(&self, level: LogLevel, event: &str, fields: Value) {
        if level > self.level {
            return;
        }
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let mut line = Map::new();
        line.insert("ts".into(), json!(ts));
        line.insert("level".into(), json!(level.as_str()));
        line.insert("event".into(), json!(event));
        if let Value::Object(extra) = fields {
            line.extend(extra);
        }
        let mut stderr = std::io::stderr().lock();
        let _ = serde_json::to_writer(&mut stderr, &Value::Object(line));
        let _ = stderr.write_all(b"\n");
    }

    pub fn error(&self, event: &str, fields: Value) {
        self.log(LogLevel::Error, event, fields);
    }

    pub fn warn(&self, event: &str, fields: Value) {
        self.log(LogLevel::Warn, event, fields);
    }

    pub fn info(&self, event: &str, fields: Value) {
        self.log(LogLevel::Info, event, fields);
    }

    pub fn debug(&self, event: &str, fields: Value) {
        self.log(LogLevel::Debug, event, fields);
    }
}

/// Counts newline-terminated records flowing through a reader and emits a
/// progress log line every `every` records. Wrap it in a `BufReader` to get
/// a `BufRead` back.
pub struct ProgressReader<R> {
    inner: R,
    logger: Logger,
    stage: &'static str,
    every: u64,
    records: u64,
    next_report: u64,
}

impl<R: Read> ProgressReader<R> {
    pub fn new(inner: R, logger: Logger, stage: &'static str, every: u64) -> Self {
        let every = every.max(1);
        ProgressReader {
            inner,
            logger,
            stage,
            every,
            records: 0,
            next_report: every,
        }
    }
}

impl<R: Read> Read for ProgressReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.records += buf[..n].iter().filter(|&&b| b == b'\n').count() as u64;
        while self.records >= self.next_report {
            self.logger.info(
                "progress",
                json!({ "stage": self.stage, "records": self.next_report }),
            );
            self.next_report += self.every;
        }
        Ok(n)
    }
}
