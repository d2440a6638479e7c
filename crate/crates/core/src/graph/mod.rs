//! Out-of-core web-graph storage: vertex tables, edge-list splitting, and a
//! memory-mapped CSR adjacency structure.

mod build;
mod csr;
mod split;
mod validate;
mod vertex;

pub use build::{build_csr, BuildOptions, BuildReport};
pub use csr::{CsrFlags, CsrGraph, Neighbors, CSR_MAGIC, CSR_VERSION, HEADER_LEN};
pub use split::split_edge_list;
pub use validate::{validate_csr, ValidationReport, Violation, ViolationKind};
pub use vertex::{
    count_vertices, count_vertices_file, load_vertices, parse_vertices, VertexRecord, VertexTable,
};
