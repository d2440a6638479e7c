//! Community detection over stored hyperlink graphs: partitions, quality
//! functions (modularity / CPM), and a deterministic Leiden-style detector.

mod leiden;
mod partition;
mod quality;
mod weighted;

pub(crate) use leiden::leiden_on;
pub use leiden::{aggregate_graph, leiden, leiden_trace, PassStat};
pub use partition::{
    load_partition, read_partition_tsv, write_partition_tsv, Partition, PartitionSidecar,
};
pub use quality::{quality, QualityConfig, QualityFn, QualityValue};
pub use weighted::WeightedGraph;
