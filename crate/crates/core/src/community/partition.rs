//! Node-to-community assignments.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Assignment of every node to exactly one community.
///
/// Community ids are canonical: renumbered by order of first appearance
/// over node ids 0..n, so two equal clusterings always compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    community_count: usize,
    community_sizes: Vec<usize>,
}

impl Partition {
    /// Builds a partition from an arbitrary assignment, canonicalizing ids.
    pub fn from_assignment(raw: Vec<usize>) -> Self {
        let mut remap: Vec<usize> = Vec::new();
        let max_raw = raw.iter().max().copied().unwrap_or(0);
        let mut seen = vec![usize::MAX; max_raw + 1];
        let mut assignment = Vec::with_capacity(raw.len());
        for &c in &raw {
            let canon = if seen[c] == usize::MAX {
                let id = remap.len();
                seen[c] = id;
                remap.push(c);
                id
            } else {
                seen[c]
            };
            assignment.push(canon);
        }
        let community_count = remap.len();
        let mut community_sizes = vec![0usize; community_count];
        for &c in &assignment {
            community_sizes[c] += 1;
        }
        Partition {
            assignment,
            community_count,
            community_sizes,
        }
    }

    /// Every node in its own community.
    pub fn singletons(node_count: usize) -> Self {
        Partition {
            assignment: (0..node_count).collect(),
            community_count: node_count,
            community_sizes: vec![1; node_count],
        }
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_sizes(&self) -> &[usize] {
        &self.community_sizes
    }

    /// Member lists, indexed by community id, nodes ascending.
    pub fn members_by_community(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.community_count];
        for (node, &c) in self.assignment.iter().enumerate() {
            members[c].push(node);
        }
        members
    }

    /// Checks this partition against a graph of `node_count` nodes.
    pub fn check_for(&self, node_count: u64) -> Result<()> {
        if self.assignment.len() as u64 != node_count {
            return Err(Error::Contract(format!(
                "partition covers {} nodes, graph has {node_count}",
                self.assignment.len()
            )));
        }
        Ok(())
    }
}

/// Provenance sidecar written next to a partition TSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionSidecar {
    pub quality: f64,
    pub community_count: usize,
    pub config: super::QualityConfig,
}

/// Writes `<node_id>\t<community_id>` lines, node ids ascending.
pub fn write_partition_tsv(mut out: impl Write, partition: &Partition) -> Result<()> {
    let mut buf = String::new();
    for (node, &c) in partition.assignment.iter().enumerate() {
        buf.clear();
        buf.push_str(&format!("{node}\t{c}\n"));
        out.write_all(buf.as_bytes()).map_err(Error::from)?;
    }
    out.flush().map_err(Error::from)?;
    Ok(())
}

/// Reads a partition TSV written by [`write_partition_tsv`].
/// Node ids must be contiguous from 0; community ids are re-canonicalized.
pub fn read_partition_tsv(reader: impl BufRead, source_name: &str) -> Result<Partition> {
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(Error::from)?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            source_name: source_name.to_string(),
            line: line_no,
            msg,
        };
        let (node, comm) = line
            .split_once('\t')
            .ok_or_else(|| err("missing tab separator".into()))?;
        let node: usize = node
            .parse()
            .map_err(|_| err(format!("non-integer node id {node:?}")))?;
        let comm: usize = comm
            .parse()
            .map_err(|_| err(format!("non-integer community id {comm:?}")))?;
        if node != raw.len() {
            return Err(err(format!(
                "non-contiguous node id {node} (expected {})",
                raw.len()
            )));
        }
        raw.push(comm);
    }
    Ok(Partition::from_assignment(raw))
}

pub fn load_partition(path: &Path) -> Result<Partition> {
    let reader = crate::ioutil::open_text(path)?;
    read_partition_tsv(reader, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_by_first_appearance() {
        let p = Partition::from_assignment(vec![7, 7, 3, 7, 3, 9]);
        assert_eq!(p.assignment(), &[0, 0, 1, 0, 1, 2]);
        assert_eq!(p.community_count(), 3);
        assert_eq!(p.community_sizes(), &[3, 2, 1]);
    }

    #[test]
    fn singletons_are_identity() {
        let p = Partition::singletons(4);
        assert_eq!(p.assignment(), &[0, 1, 2, 3]);
        assert_eq!(p.community_count(), 4);
    }

    #[test]
    fn tsv_round_trip() {
        let p = Partition::from_assignment(vec![0, 1, 0, 2, 1]);
        let mut buf = Vec::new();
        write_partition_tsv(&mut buf, &p).unwrap();
        let back = read_partition_tsv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn tsv_rejects_gap() {
        let err = read_partition_tsv("0\t0\n2\t0\n".as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
