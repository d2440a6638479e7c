//! Domain filtering over JSONL streams, with crash-safe checkpointing.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ioutil;
use crate::seed::DomainSet;

use super::{host_of, matching_member, parse_record, MatchMode, TokenCounter};

/// Counters for one filtering run. `per_domain_counts` is keyed by the
/// matched set member (not the raw host), so its size is bounded by the
/// domain set regardless of stream length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterStats {
    pub records_in: u64,
    pub records_out: u64,
    pub records_rejected_unparseable: u64,
    pub records_nonmatching: u64,
    pub tokens_out: u64,
    pub unique_domains_matched: u64,
    pub per_domain_counts: HashMap<String, u64>,
    pub token_counter: String,
}

impl FilterStats {
    fn new(counter: TokenCounter) -> FilterStats {
        FilterStats {
            records_in: 0,
            records_out: 0,
            records_rejected_unparseable: 0,
            records_nonmatching: 0,
            tokens_out: 0,
            unique_domains_matched: 0,
            per_domain_counts: HashMap::new(),
            token_counter: counter.name().to_string(),
        }
    }

    /// Matched members with counts, highest count first, names breaking ties.
    pub fn top_domains(&self, n: usize) -> Vec<(String, u64)> {
        let mut rows: Vec<(String, u64)> = self
            .per_domain_counts
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        rows.truncate(n);
        rows
    }
}

/// Processes one raw line against the stats and set; returns true when the
/// line should be emitted.
fn filter_line(
    content: &[u8],
    set: &DomainSet,
    mode: MatchMode,
    counter: TokenCounter,
    stats: &mut FilterStats,
) -> bool {
    stats.records_in += 1;
    let Some(record) = parse_record(content) else {
        stats.records_rejected_unparseable += 1;
        return false;
    };
    let Ok(host) = host_of(&record.url) else {
        stats.records_rejected_unparseable += 1;
        return false;
    };
    let Some(member) = matching_member(&host, set, mode) else {
        stats.records_nonmatching += 1;
        return false;
    };
    stats.records_out += 1;
    stats.tokens_out += counter.count(&record.text);
    *stats
        .per_domain_counts
        .entry(member.to_string())
        .or_insert(0) += 1;
    true
}

/// Filters a JSONL stream, emitting matching lines byte-for-byte.
///
/// Memory use is bounded by the domain-set size: each line is processed and
/// dropped, and per-domain counters are keyed by set members.
pub fn filter_stream(
    mut reader: impl BufRead,
    mut writer: impl Write,
    set: &DomainSet,
    mode: MatchMode,
    counter: TokenCounter,
) -> Result<FilterStats> {
    let mut stats = FilterStats::new(counter);
    let mut line = Vec::new();
    loop {
        line.clear();
        if ioutil::next_line(&mut reader, &mut line)
            .map_err(Error::from)?
            .is_none()
        {
            break;
        }
        let content = ioutil::trim_line_end(&line);
        if content.is_empty() {
            continue;
        }
        if filter_line(content, set, mode, counter, &mut stats) {
            writer.write_all(&line).map_err(Error::from)?;
        }
    }
    writer.flush().map_err(Error::from)?;
    stats.unique_domains_matched = stats.per_domain_counts.len() as u64;
    Ok(stats)
}

/// Where and how often to persist resume state.
#[derive(Debug, Clone)]
pub struct CheckpointSpec {
    pub path: PathBuf,
    /// Checkpoint after every `interval_records` input records.
    pub interval_records: u64,
}

/// On-disk resume state. `output_bytes` pins the exact output length the
/// counted records produced, so a resumed run truncates any partial trailing
/// write and stays byte-identical to an uninterrupted one.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct Checkpoint<S> {
    pub offset_records: u64,
    pub output_bytes: u64,
    pub stats: S,
    pub digest_state_path: Option<PathBuf>,
}

pub(crate) fn load_checkpoint<S: serde::de::DeserializeOwned>(
    path: &Path,
) -> Result<Option<Checkpoint<S>>> {
    match std::fs::read(path) {
        Ok(bytes) => {
            let cp = serde_json::from_slice(&bytes).map_err(|e| Error::Format {
                path: path.to_path_buf(),
                msg: format!("invalid checkpoint: {e}"),
            })?;
            Ok(Some(cp))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Opens (or re-opens) the output for a checkpointed run, truncated to the
/// resume point.
pub(crate) fn open_output_at(path: &Path, output_bytes: u64) -> Result<File> {
    let io = |e| Error::io(path, e);
    if output_bytes == 0 {
        return File::create(path).map_err(io);
    }
    let file = OpenOptions::new()
        .read(true)
        .write(true)
        .open(path)
        .map_err(io)?;
    let len = file.metadata().map_err(io)?.len();
    if len < output_bytes {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: format!(
                "output is {len} bytes but the checkpoint recorded {output_bytes}; \
                 the checkpoint does not belong to this output"
            ),
        });
    }
    file.set_len(output_bytes).map_err(io)?;
    let mut file = file;
    file.seek(SeekFrom::End(0)).map_err(io)?;
    Ok(file)
}

/// Flushes buffered output, syncs it, then atomically replaces the
/// checkpoint. Called only at record boundaries.
pub(crate) fn write_checkpoint<S: Serialize>(
    writer: &mut BufWriter<File>,
    spec: &CheckpointSpec,
    checkpoint: &Checkpoint<S>,
) -> Result<()> {
    writer.flush().map_err(Error::from)?;
    writer.get_ref().sync_data().map_err(Error::from)?;
    ioutil::atomic_write_json(&spec.path, checkpoint)
}

pub(crate) fn remove_if_exists(path: &Path) -> Result<()> {
    match std::fs::remove_file(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// File-based filter with optional checkpoint/resume.
///
/// With a checkpoint spec, progress is persisted every `interval_records`
/// records; an interrupted run re-invoked with the same arguments resumes
/// after the last checkpoint and produces output and stats identical to an
/// uninterrupted run. The checkpoint file is removed on success.
pub fn filter_file(
    input: &Path,
    output: &Path,
    set: &DomainSet,
    mode: MatchMode,
    counter: TokenCounter,
    checkpoint: Option<&CheckpointSpec>,
) -> Result<FilterStats> {
    let mut stats = FilterStats::new(counter);
    let mut skip_records = 0u64;
    let mut output_bytes = 0u64;
    if let Some(spec) = checkpoint {
        if spec.interval_records == 0 {
            return Err(Error::Contract(
                "checkpoint interval must be at least 1 record".into(),
            ));
        }
        if let Some(cp) = load_checkpoint::<FilterStats>(&spec.path)? {
            skip_records = cp.offset_records;
            output_bytes = cp.output_bytes;
            stats = cp.stats;
        }
    }

    let mut reader = ioutil::open_text(input)?;
    let file = open_output_at(output, output_bytes)?;
    let mut writer = BufWriter::new(file);

    let mut line = Vec::new();
    let mut seen = 0u64;
    loop {
        line.clear();
        if ioutil::next_line(&mut reader, &mut line)
            .map_err(Error::from)?
            .is_none()
        {
            break;
        }
        let content = ioutil::trim_line_end(&line);
        if content.is_empty() {
            continue;
        }
        seen += 1;
        if seen <= skip_records {
            continue;
        }
        if filter_line(content, set, mode, counter, &mut stats) {
            writer.write_all(&line).map_err(Error::from)?;
            output_bytes += line.len() as u64;
        }
        if let Some(spec) = checkpoint {
            if stats.records_in.is_multiple_of(spec.interval_records) {
                stats.unique_domains_matched = stats.per_domain_counts.len() as u64;
                let cp = Checkpoint {
                    offset_records: seen,
                    output_bytes,
                    stats: stats.clone(),
                    digest_state_path: None,
                };
                write_checkpoint(&mut writer, spec, &cp)?;
            }
        }
    }
    writer.flush().map_err(Error::from)?;
    stats.unique_domains_matched = stats.per_domain_counts.len() as u64;
    if let Some(spec) = checkpoint {
        remove_if_exists(&spec.path)?;
    }
    Ok(stats)
}
