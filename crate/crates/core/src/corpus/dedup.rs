//! Exact deduplication of JSONL corpora by text-content digest.

use std::collections::HashSet;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ioutil;

use super::filter::{
    load_checkpoint, open_output_at, remove_if_exists, write_checkpoint, Checkpoint, CheckpointSpec,
};
use super::{parse_record, TokenCounter};

/// 128-bit content digest of a record's trimmed text.
type TextDigest = [u8; 16];

fn text_digest(text: &str) -> TextDigest {
    let digest = Sha256::digest(text.trim().as_bytes());
    let mut out = [0u8; 16];
    out.copy_from_slice(&digest[..16]);
    out
}

/// Counters for one deduplication run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupStats {
    pub records_in: u64,
    pub records_out: u64,
    pub duplicates_removed: u64,
    pub records_rejected_unparseable: u64,
    pub tokens_out: u64,
    pub token_counter: String,
}

impl DedupStats {
    fn new(counter: TokenCounter) -> DedupStats {
        DedupStats {
            records_in: 0,
            records_out: 0,
            duplicates_removed: 0,
            records_rejected_unparseable: 0,
            tokens_out: 0,
            token_counter: counter.name().to_string(),
        }
    }
}

fn dedup_line(
    content: &[u8],
    seen: &mut HashSet<TextDigest>,
    counter: TokenCounter,
    stats: &mut DedupStats,
) -> bool {
    stats.records_in += 1;
    let Some(record) = parse_record(content) else {
        stats.records_rejected_unparseable += 1;
        return false;
    };
    if !seen.insert(text_digest(&record.text)) {
        stats.duplicates_removed += 1;
        return false;
    }
    stats.records_out += 1;
    stats.tokens_out += counter.count(&record.text);
    true
}

/// Removes records whose trimmed text was already seen (first occurrence
/// wins). Memory is proportional to the number of unique texts (16 bytes of
/// digest each), not to corpus bytes.
pub fn dedup_stream(
    mut reader: impl BufRead,
    mut writer: impl Write,
    counter: TokenCounter,
) -> Result<DedupStats> {
    let mut stats = DedupStats::new(counter);
    let mut seen: HashSet<TextDigest> = HashSet::new();
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
        if dedup_line(content, &mut seen, counter, &mut stats) {
            writer.write_all(&line).map_err(Error::from)?;
        }
    }
    writer.flush().map_err(Error::from)?;
    Ok(stats)
}

fn digest_state_path_for(spec: &CheckpointSpec) -> PathBuf {
    let mut name = spec.path.file_name().unwrap_or_default().to_os_string();
    name.push(".digests");
    spec.path.with_file_name(name)
}

fn save_digests(path: &Path, seen: &HashSet<TextDigest>) -> Result<()> {
    let mut bytes = Vec::with_capacity(seen.len() * 16);
    for d in seen {
        bytes.extend_from_slice(d);
    }
    ioutil::atomic_write(path, &bytes)
}

fn load_digests(path: &Path) -> Result<HashSet<TextDigest>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: format!(
                "digest state length {} is not a multiple of 16",
                bytes.len()
            ),
        });
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let mut d = [0u8; 16];
            d.copy_from_slice(c);
            d
        })
        .collect())
}

/// File-based dedup with optional checkpoint/resume. The digest set is
/// snapshotted next to the checkpoint so a resumed run still honors
/// first-occurrence-wins across the interruption.
pub fn dedup_file(
    input: &Path,
    output: &Path,
    counter: TokenCounter,
    checkpoint: Option<&CheckpointSpec>,
) -> Result<DedupStats> {
    let mut stats = DedupStats::new(counter);
    let mut seen: HashSet<TextDigest> = HashSet::new();
    let mut skip_records = 0u64;
    let mut output_bytes = 0u64;
    if let Some(spec) = checkpoint {
        if spec.interval_records == 0 {
            return Err(Error::Contract(
                "checkpoint interval must be at least 1 record".into(),
            ));
        }
        if let Some(cp) = load_checkpoint::<DedupStats>(&spec.path)? {
            skip_records = cp.offset_records;
            output_bytes = cp.output_bytes;
            stats = cp.stats;
            let digests = cp.digest_state_path.ok_or_else(|| Error::Format {
                path: spec.path.clone(),
                msg: "dedup checkpoint lacks digest_state_path".into(),
            })?;
            seen = load_digests(&digests)?;
        }
    }

    let mut reader = ioutil::open_text(input)?;
    let file = open_output_at(output, output_bytes)?;
    let mut writer = BufWriter::new(file);

    let mut line = Vec::new();
    let mut seen_lines = 0u64;
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
        seen_lines += 1;
        if seen_lines <= skip_records {
            continue;
        }
        if dedup_line(content, &mut seen, counter, &mut stats) {
            writer.write_all(&line).map_err(Error::from)?;
            output_bytes += line.len() as u64;
        }
        if let Some(spec) = checkpoint {
            if stats.records_in.is_multiple_of(spec.interval_records) {
                let digests = digest_state_path_for(spec);
                save_digests(&digests, &seen)?;
                let cp = Checkpoint {
                    offset_records: seen_lines,
                    output_bytes,
                    stats: stats.clone(),
                    digest_state_path: Some(digests),
                };
                write_checkpoint(&mut writer, spec, &cp)?;
            }
        }
    }
    writer.flush().map_err(Error::from)?;
    if let Some(spec) = checkpoint {
        remove_if_exists(&spec.path)?;
        remove_if_exists(&digest_state_path_for(spec))?;
    }
    Ok(stats)
}
