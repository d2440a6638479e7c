//! Binary CSR adjacency store.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   b"CSRG"          4 bytes
//! version u16 = 1          2 bytes
//! flags   u16 bitfield     2 bytes   (bit 0 symmetrized, bit 1 deduplicated,
//!                                     bit 2 self loops removed)
//! node_count u64           8 bytes
//! edge_count u64           8 bytes   (stored directed arcs)
//! offsets u64 * (node_count + 1)
//! targets u64 * edge_count
//! ```
//!
//! The fixed-width layout lets an opened graph be served straight from a
//! read-only memory map; neighbor runs are decoded on the fly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use memmap2::Mmap;

use crate::error::{Error, Result};

pub const CSR_MAGIC: [u8; 4] = *b"CSRG";
pub const CSR_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 24;

const FLAG_SYMMETRIZED: u16 = 1 << 0;
const FLAG_DEDUPLICATED: u16 = 1 << 1;
const FLAG_SELF_LOOPS_REMOVED: u16 = 1 << 2;

/// Structural properties the builder guaranteed for a stored graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CsrFlags {
    pub symmetrized: bool,
    pub deduplicated: bool,
    pub self_loops_removed: bool,
}

impl CsrFlags {
    pub(crate) fn to_bits(self) -> u16 {
        let mut bits = 0;
        if self.symmetrized {
            bits |= FLAG_SYMMETRIZED;
        }
        if self.deduplicated {
            bits |= FLAG_DEDUPLICATED;
        }
        if self.self_loops_removed {
            bits |= FLAG_SELF_LOOPS_REMOVED;
        }
        bits
    }

    pub(crate) fn from_bits(bits: u16) -> Self {
        CsrFlags {
            symmetrized: bits & FLAG_SYMMETRIZED != 0,
            deduplicated: bits & FLAG_DEDUPLICATED != 0,
            self_loops_removed: bits & FLAG_SELF_LOOPS_REMOVED != 0,
        }
    }
}

/// A memory-mapped compressed-sparse-row adjacency structure.
///
/// Immutable once opened; shareable across threads.
pub struct CsrGraph {
    node_count: u64,
    edge_count: u64,
    flags: CsrFlags,
    map: Mmap,
    path: PathBuf,
}

impl CsrGraph {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let map = unsafe { Mmap::map(&file) }.map_err(|e| Error::io(path, e))?;
        let bad = |msg: &str| Error::Format {
            path: path.to_path_buf(),
            msg: msg.to_string(),
        };

        if map.len() < HEADER_LEN {
            return Err(bad("file shorter than CSR header"));
        }
        if map[0..4] != CSR_MAGIC {
            return Err(bad("bad magic bytes, not a CSR graph file"));
        }
        let version = u16::from_le_bytes([map[4], map[5]]);
        if version != CSR_VERSION {
            return Err(bad(&format!("unsupported CSR version {version}")));
        }
        let flags = CsrFlags::from_bits(u16::from_le_bytes([map[6], map[7]]));
        let node_count = le_u64(&map[8..16]);
        let edge_count = le_u64(&map[16..24]);

        let expected = HEADER_LEN as u64 + 8 * (node_count + 1) + 8 * edge_count;
        if map.len() as u64 != expected {
            return Err(bad(&format!(
                "file length {} does not match header (expected {expected})",
                map.len()
            )));
        }

        Ok(CsrGraph {
            node_count,
            edge_count,
            flags,
            map,
            path: path.to_path_buf(),
        })
    }

    pub fn node_count(&self) -> u64 {
        self.node_count
    }

    /// Stored directed arcs. For a symmetrized simple graph this is twice
    /// the undirected edge count.
    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn flags(&self) -> CsrFlags {
        self.flags
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn offset_at(&self, i: u64) -> u64 {
        debug_assert!(i <= self.node_count);
        let pos = HEADER_LEN + 8 * i as usize;
        le_u64(&self.map[pos..pos + 8])
    }

    pub fn target_at(&self, k: u64) -> u64 {
        debug_assert!(k < self.edge_count);
        let pos = HEADER_LEN + 8 * (self.node_count as usize + 1) + 8 * k as usize;
        le_u64(&self.map[pos..pos + 8])
    }

    pub fn degree(&self, node: u64) -> Result<u64> {
        self.check_node(node)?;
        Ok(self.offset_at(node + 1) - self.offset_at(node))
    }

    /// Neighbor run of `node`, decoded lazily from the map.
    pub fn neighbors(&self, node: u64) -> Result<Neighbors<'_>> {
        self.check_node(node)?;
        let start = self.offset_at(node) as usize;
        let end = self.offset_at(node + 1) as usize;
        let base = HEADER_LEN + 8 * (self.node_count as usize + 1);
        Ok(Neighbors {
            data: &self.map[base + 8 * start..base + 8 * end],
        })
    }

    /// Binary search for `target` within `node`'s (sorted) run.
    pub fn has_arc(&self, node: u64, target: u64) -> Result<bool> {
        self.check_node(node)?;
        let mut lo = self.offset_at(node);
        let mut hi = self.offset_at(node + 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let v = self.target_at(mid);
            if v == target {
                return Ok(true);
            } else if v < target {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(false)
    }

    fn check_node(&self, node: u64) -> Result<()> {
        if node >= self.node_count {
            return Err(Error::Contract(format!(
                "node {node} out of range (node count {})",
                self.node_count
            )));
        }
        Ok(())
    }
}

impl std::fmt::Debug for CsrGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CsrGraph")
            .field("node_count", &self.node_count)
            .field("edge_count", &self.edge_count)
            .field("flags", &self.flags)
            .field("path", &self.path)
            .finish()
    }
}

pub struct Neighbors<'a> {
    data: &'a [u8],
}

impl Iterator for Neighbors<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.data.is_empty() {
            return None;
        }
        let v = le_u64(&self.data[..8]);
        self.data = &self.data[8..];
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.data.len() / 8;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Neighbors<'_> {}

fn le_u64(b: &[u8]) -> u64 {
    u64::from_le_bytes(b[..8].try_into().expect("8-byte slice"))
}

/// Streams a CSR file: header, offsets, then per-node target runs.
/// Used by the builder, which knows final lengths before it has targets.
pub(crate) struct CsrWriter {
    out: BufWriter<File>,
    path: PathBuf,
    written_targets: u64,
    edge_count: u64,
}

impl CsrWriter {
    pub fn create(
        path: &Path,
        flags: CsrFlags,
        node_count: u64,
        final_offsets: &[u64],
    ) -> Result<Self> {
        debug_assert_eq!(final_offsets.len() as u64, node_count + 1);
        let edge_count = *final_offsets.last().unwrap_or(&0);
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::with_capacity(1 << 20, file);
        let io_err = |e| Error::io(path, e);

        out.write_all(&CSR_MAGIC).map_err(io_err)?;
        out.write_all(&CSR_VERSION.to_le_bytes()).map_err(io_err)?;
        out.write_all(&flags.to_bits().to_le_bytes())
            .map_err(io_err)?;
        out.write_all(&node_count.to_le_bytes()).map_err(io_err)?;
        out.write_all(&edge_count.to_le_bytes()).map_err(io_err)?;
        for off in final_offsets {
            out.write_all(&off.to_le_bytes()).map_err(io_err)?;
        }

        Ok(CsrWriter {
            out,
            path: path.to_path_buf(),
            written_targets: 0,
            edge_count,
        })
    }

    pub fn write_run(&mut self, targets: &[u64]) -> Result<()> {
        for t in targets {
            self.out
                .write_all(&t.to_le_bytes())
                .map_err(|e| Error::io(&self.path, e))?;
        }
        self.written_targets += targets.len() as u64;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if self.written_targets != self.edge_count {
            return Err(Error::Internal(format!(
                "csr writer got {} targets, offsets promised {}",
                self.written_targets, self.edge_count
            )));
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        self.out
            .get_ref()
            .sync_all()
            .map_err(|e| Error::io(&self.path, e))?;
        Ok(())
    }
}
