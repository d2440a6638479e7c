//! Two-pass CSR construction from edge-list splits.
//!
//! Pass 1 streams every split and counts degrees; pass 2 streams them again
//! and places targets into a scratch file at precomputed offsets. Neighbor
//! runs are then sorted (and deduplicated) in place before the final file is
//! written. Peak resident memory is O(node_count + split line), never
//! O(edge_count): the raw targets live in an anonymous temp file that is
//! only touched through a memory map.

use std::fs::File;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use memmap2::MmapMut;

use crate::error::{Error, Result};
use crate::graph::csr::{CsrFlags, CsrWriter};
use crate::ioutil;

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Store the reverse arc of every input arc (u, v) with u ≠ v.
    pub symmetrize: bool,
    /// Collapse repeated targets within a neighbor run.
    pub dedupe: bool,
    /// Drop arcs (u, u) entirely.
    pub drop_self_loops: bool,
    /// Counting-pass parallelism over splits. Placement stays single-writer,
    /// and the merged counts are order-independent, so any value keeps the
    /// output deterministic.
    pub threads: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            symmetrize: true,
            dedupe: true,
            drop_self_loops: true,
            threads: 1,
        }
    }
}

impl BuildOptions {
    fn flags(&self) -> CsrFlags {
        CsrFlags {
            symmetrized: self.symmetrize,
            deduplicated: self.dedupe,
            self_loops_removed: self.drop_self_loops,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildReport {
    pub node_count: u64,
    /// Stored directed arcs after symmetrization and dedup.
    pub edge_count: u64,
    /// Arcs read from the input splits, before any transformation.
    pub input_arcs: u64,
    /// Process RSS high-water mark right after the counting pass, before any
    /// scratch pages are dirtied. This is the number the out-of-core memory
    /// contract is about: counting holds O(node_count) state, never the
    /// targets themselves.
    pub counting_peak_rss_bytes: Option<u64>,
    /// Process RSS high-water mark after the whole build, when available.
    /// Includes resident scratch-map pages, so it may approach the size of
    /// the raw target array; the placement pass touches those pages through
    /// the kernel's cache, and they are reclaimable at any time.
    pub peak_rss_bytes: Option<u64>,
}

/// Builds a CSR graph at `out_path` from edge-list `splits`.
///
/// The output is bit-identical for any partitioning of the same edge
/// multiset into splits: counting is additive and every run is sorted
/// before it is written.
pub fn build_csr(
    splits: &[PathBuf],
    node_count: u64,
    options: &BuildOptions,
    out_path: &Path,
) -> Result<BuildReport> {
    let (degrees, input_arcs) = count_degrees(splits, node_count, options)?;
    let counting_peak_rss_bytes = ioutil::peak_rss_bytes();

    let mut raw_offsets = vec![0u64; node_count as usize + 1];
    for i in 0..node_count as usize {
        raw_offsets[i + 1] = raw_offsets[i] + degrees[i];
    }
    let raw_total = raw_offsets[node_count as usize];
    drop(degrees);

    let scratch_dir = out_path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut scratch = Scratch::create(scratch_dir.unwrap_or(Path::new(".")), raw_total)?;

    // Placement pass: cursor[i] tracks how much of node i's run is filled.
    let mut cursors = vec![0u64; node_count as usize];
    for split in splits {
        for_each_arc(split, node_count, |u, v| {
            emit_arcs(u, v, options, |src, dst| {
                let pos = raw_offsets[src as usize] + cursors[src as usize];
                scratch.put(pos, dst);
                cursors[src as usize] += 1;
            });
            Ok(())
        })?;
    }
    drop(cursors);

    // Sort each run in the scratch map and compact duplicates in place.
    let mut final_offsets = vec![0u64; node_count as usize + 1];
    let mut run: Vec<u64> = Vec::new();
    for i in 0..node_count as usize {
        let start = raw_offsets[i];
        let end = raw_offsets[i + 1];
        run.clear();
        run.extend((start..end).map(|k| scratch.get(k)));
        run.sort_unstable();
        if options.dedupe {
            run.dedup();
        }
        for (j, &t) in run.iter().enumerate() {
            scratch.put(start + j as u64, t);
        }
        final_offsets[i + 1] = final_offsets[i] + run.len() as u64;
    }

    // Stream the final file next to its destination, then rename into place
    // so failures never leave a partial .csrg behind.
    let tmp = tempfile::NamedTempFile::new_in(scratch_dir.unwrap_or(Path::new(".")))
        .map_err(|e| Error::io(out_path, e))?;
    let mut writer = CsrWriter::create(tmp.path(), options.flags(), node_count, &final_offsets)?;
    for i in 0..node_count as usize {
        let start = raw_offsets[i];
        let len = final_offsets[i + 1] - final_offsets[i];
        run.clear();
        run.extend((start..start + len).map(|k| scratch.get(k)));
        writer.write_run(&run)?;
    }
    writer.finish()?;
    tmp.persist(out_path)
        .map_err(|e| Error::io(out_path, e.error))?;

    Ok(BuildReport {
        node_count,
        edge_count: final_offsets[node_count as usize],
        input_arcs,
        counting_peak_rss_bytes,
        peak_rss_bytes: ioutil::peak_rss_bytes(),
    })
}

fn emit_arcs(u: u64, v: u64, options: &BuildOptions, mut sink: impl FnMut(u64, u64)) {
    if u == v {
        if !options.drop_self_loops {
            sink(u, u);
        }
        return;
    }
    sink(u, v);
    if options.symmetrize {
        sink(v, u);
    }
}

fn count_degrees(
    splits: &[PathBuf],
    node_count: u64,
    options: &BuildOptions,
) -> Result<(Vec<u64>, u64)> {
    let threads = options.threads.max(1).min(splits.len().max(1));
    if threads <= 1 {
        let mut degrees = vec![0u64; node_count as usize];
        let mut input_arcs = 0u64;
        for split in splits {
            input_arcs += count_one_split(split, node_count, options, &mut degrees)?;
        }
        return Ok((degrees, input_arcs));
    }

    // Per-thread partial degree arrays, merged by addition afterwards;
    // the merge is order-independent so the result matches a serial count.
    let chunks: Vec<&[PathBuf]> = splits.chunks(splits.len().div_ceil(threads)).collect();
    let partials: Vec<Result<(Vec<u64>, u64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                scope.spawn(move || {
                    let mut degrees = vec![0u64; node_count as usize];
                    let mut arcs = 0u64;
                    for split in chunk {
                        arcs += count_one_split(split, node_count, options, &mut degrees)?;
                    }
                    Ok((degrees, arcs))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("counting thread panicked"))
            .collect()
    });

    let mut degrees = vec![0u64; node_count as usize];
    let mut input_arcs = 0u64;
    for partial in partials {
        let (part, arcs) = partial?;
        for (d, p) in degrees.iter_mut().zip(part) {
            *d += p;
        }
        input_arcs += arcs;
    }
    Ok((degrees, input_arcs))
}

fn count_one_split(
    split: &Path,
    node_count: u64,
    options: &BuildOptions,
    degrees: &mut [u64],
) -> Result<u64> {
    let mut arcs = 0u64;
    for_each_arc(split, node_count, |u, v| {
        arcs += 1;
        emit_arcs(u, v, options, |src, _| degrees[src as usize] += 1);
        Ok(())
    })?;
    Ok(arcs)
}

/// Parses one split (gzip accepted), invoking `f` per arc. Endpoints are
/// range-checked against `node_count` here so both passes report the same
/// split name and line number.
fn for_each_arc(
    path: &Path,
    node_count: u64,
    mut f: impl FnMut(u64, u64) -> Result<()>,
) -> Result<()> {
    let source_name = path.display().to_string();
    let mut reader = ioutil::open_text(path)?;
    let mut buf = Vec::new();
    let mut line_no = 0u64;

    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Ok(());
        }
        line_no += 1;
        let line = ioutil::trim_line_end(&buf);
        if line.is_empty() {
            continue;
        }
        let (u, v) = parse_edge_line(line, &source_name, line_no)?;
        for id in [u, v] {
            if id >= node_count {
                return Err(Error::NodeRange {
                    source_name: source_name.clone(),
                    line: line_no,
                    id,
                    node_count,
                });
            }
        }
        f(u, v)?;
    }
}

fn parse_edge_line(line: &[u8], source_name: &str, line_no: u64) -> Result<(u64, u64)> {
    let err = |msg: String| Error::Parse {
        source_name: source_name.to_string(),
        line: line_no,
        msg,
    };
    let tab = line
        .iter()
        .position(|&b| b == b'\t')
        .ok_or_else(|| err("missing tab separator".to_string()))?;
    let u = parse_u64(&line[..tab])
        .ok_or_else(|| err(format!("non-integer source id {:?}", lossy(&line[..tab]))))?;
    let v = parse_u64(&line[tab + 1..]).ok_or_else(|| {
        err(format!(
            "non-integer target id {:?}",
            lossy(&line[tab + 1..])
        ))
    })?;
    Ok((u, v))
}

fn parse_u64(bytes: &[u8]) -> Option<u64> {
    if bytes.is_empty() {
        return None;
    }
    let mut value: u64 = 0;
    for &b in bytes {
        if !b.is_ascii_digit() {
            return None;
        }
        value = value.checked_mul(10)?.checked_add((b - b'0') as u64)?;
    }
    Some(value)
}

fn lossy(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

/// Raw-targets scratch backed by an anonymous temp file. Values are stored
/// little-endian; the file is unlinked as soon as it is created, so nothing
/// leaks on failure.
struct Scratch {
    map: Option<MmapMut>,
}

impl Scratch {
    fn create(dir: &Path, len: u64) -> Result<Self> {
        if len == 0 {
            return Ok(Scratch { map: None });
        }
        let file: File = tempfile::tempfile_in(dir).map_err(|e| Error::io(dir, e))?;
        file.set_len(len * 8).map_err(Error::from)?;
        let map = unsafe { MmapMut::map_mut(&file) }.map_err(Error::from)?;
        Ok(Scratch { map: Some(map) })
    }

    #[inline]
    fn put(&mut self, index: u64, value: u64) {
        let map = self.map.as_mut().expect("scratch sized for placement");
        let pos = index as usize * 8;
        map[pos..pos + 8].copy_from_slice(&value.to_le_bytes());
    }

    #[inline]
    fn get(&self, index: u64) -> u64 {
        let map = self.map.as_ref().expect("scratch sized for placement");
        let pos = index as usize * 8;
        u64::from_le_bytes(map[pos..pos + 8].try_into().expect("8-byte slice"))
    }
}
