//! Vertex file parsing and the id ⟷ name table.
//!
//! Vertex files follow the web-graph release convention: one
//! `<id>\t<reversed host name>` line per node, ids contiguous from 0.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ioutil;

/// One parsed vertex line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexRecord {
    pub node_id: u64,
    /// Host in reversed-domain order, e.g. `org.example.www`.
    pub name: String,
}

/// Bidirectional mapping between node ids and reversed host names.
#[derive(Debug, Default)]
pub struct VertexTable {
    id_to_name: Vec<String>,
    name_to_id: HashMap<String, u64>,
}

impl VertexTable {
    pub fn len(&self) -> usize {
        self.id_to_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_name.is_empty()
    }

    pub fn name(&self, node_id: u64) -> Option<&str> {
        self.id_to_name.get(node_id as usize).map(|s| s.as_str())
    }

    /// Exact match on a reversed host name.
    pub fn id(&self, name: &str) -> Option<u64> {
        self.name_to_id.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = (u64, &str)> {
        self.id_to_name
            .iter()
            .enumerate()
            .map(|(i, n)| (i as u64, n.as_str()))
    }

    fn push(&mut self, record: VertexRecord) -> Result<()> {
        let expected = self.id_to_name.len() as u64;
        if record.node_id != expected {
            return Err(Error::Contract(format!(
                "non-contiguous node id {} (expected {expected})",
                record.node_id
            )));
        }
        self.name_to_id.insert(record.name.clone(), record.node_id);
        self.id_to_name.push(record.name);
        Ok(())
    }
}

/// Parses a vertex stream into a [`VertexTable`].
///
/// `source_name` only labels error messages.
pub fn parse_vertices(reader: impl BufRead, source_name: &str) -> Result<VertexTable> {
    let mut table = VertexTable::default();
    let mut line_no: u64 = 0;

    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(Error::from)?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let record = parse_vertex_line(line, source_name, line_no)?;
        table.push(record).map_err(|e| match e {
            Error::Contract(msg) => Error::Parse {
                source_name: source_name.to_string(),
                line: line_no,
                msg,
            },
            other => other,
        })?;
    }

    Ok(table)
}

/// Convenience wrapper opening `path` (gzip accepted) and parsing it.
pub fn load_vertices(path: &Path) -> Result<VertexTable> {
    let reader = ioutil::open_text(path)?;
    parse_vertices(reader, &path.display().to_string())
}

/// Validates a vertex stream and returns the node count without storing
/// names. Accepts exactly the inputs [`parse_vertices`] accepts; use it when
/// only the count matters (e.g. sizing a graph build) so memory stays flat.
pub fn count_vertices(reader: impl BufRead, source_name: &str) -> Result<u64> {
    let mut next_id: u64 = 0;
    let mut line_no: u64 = 0;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(Error::from)?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let record = parse_vertex_line(line, source_name, line_no)?;
        if record.node_id != next_id {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line: line_no,
                msg: format!(
                    "non-contiguous node id {} (expected {next_id})",
                    record.node_id
                ),
            });
        }
        next_id += 1;
    }
    Ok(next_id)
}

/// Convenience wrapper opening `path` (gzip accepted) and counting it.
pub fn count_vertices_file(path: &Path) -> Result<u64> {
    let reader = ioutil::open_text(path)?;
    count_vertices(reader, &path.display().to_string())
}

fn parse_vertex_line(line: &str, source_name: &str, line_no: u64) -> Result<VertexRecord> {
    let err = |msg: String| Error::Parse {
        source_name: source_name.to_string(),
        line: line_no,
        msg,
    };

    let (id_part, name) = line
        .split_once('\t')
        .ok_or_else(|| err("missing tab separator".to_string()))?;
    let node_id: u64 = id_part
        .parse()
        .map_err(|_| err(format!("non-integer node id {id_part:?}")))?;

    if name.is_empty() {
        return Err(err("empty vertex name".to_string()));
    }
    if name.chars().any(|c| c.is_whitespace()) {
        return Err(err(format!("vertex name {name:?} contains whitespace")));
    }
    if name.chars().any(|c| c.is_ascii_uppercase()) {
        return Err(err(format!("vertex name {name:?} is not lowercase")));
    }

    Ok(VertexRecord {
        node_id,
        name: name.to_string(),
    })
}
