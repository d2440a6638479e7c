//! Splitting an edge list into bounded chunks for out-of-core processing.

use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ioutil;

/// Splits `input` into files of at most `max_edges_per_split` lines each,
/// named `<prefix>-00000.tsv`, `<prefix>-00001.tsv`, … under `out_dir`.
///
/// Lines are copied byte-for-byte, so concatenating the returned files in
/// order reproduces the input stream exactly. For gzip inputs "the input
/// stream" means the decompressed bytes.
pub fn split_edge_list(
    input: impl BufRead,
    max_edges_per_split: u64,
    out_dir: &Path,
    prefix: &str,
) -> Result<Vec<PathBuf>> {
    if max_edges_per_split == 0 {
        return Err(Error::Contract(
            "max_edges_per_split must be at least 1".to_string(),
        ));
    }

    let mut input = input;
    let mut paths = Vec::new();
    let mut current: Option<BufWriter<File>> = None;
    let mut lines_in_current = 0u64;
    let mut line = Vec::new();

    while ioutil::next_line(&mut input, &mut line)?.is_some() {
        if current.is_none() || lines_in_current == max_edges_per_split {
            if let Some(mut w) = current.take() {
                w.flush().map_err(Error::from)?;
            }
            let path = out_dir.join(format!("{prefix}-{:05}.tsv", paths.len()));
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            current = Some(BufWriter::with_capacity(1 << 20, file));
            paths.push(path);
            lines_in_current = 0;
        }
        let w = current.as_mut().expect("split writer present");
        w.write_all(&line)
            .map_err(|e| Error::io(paths.last().expect("path recorded"), e))?;
        lines_in_current += 1;
    }

    if let Some(mut w) = current.take() {
        w.flush().map_err(Error::from)?;
    }
    Ok(paths)
}
