//! In-memory weighted undirected graph used by the detector and for
//! community aggregation.

use crate::error::{Error, Result};
use crate::graph::CsrGraph;

use super::Partition;

/// Undirected weighted graph in adjacency-list form.
///
/// Conventions:
/// - every undirected edge {u, v}, u != v, is stored as two arcs;
/// - a self-loop on v is stored as one arc (v, v) carrying **twice** its
///   edge weight.
///
/// Under these conventions a node's strength is the plain sum of its arc
/// weights, the total arc weight equals 2m, and the intra-community arc
/// weight of a community equals twice its internal edge weight. Aggregation
/// then conserves all three quantities without special cases.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    /// Number of original nodes folded into each node (1 before aggregation).
    node_sizes: Vec<u64>,
    /// Cached per-node strength (row sums).
    strengths: Vec<f64>,
    /// Sum of all arc weights == 2m.
    total_weight: f64,
}

impl WeightedGraph {
    /// Loads a stored graph into memory with unit edge weights.
    ///
    /// Requires the symmetrized flag: community quality is only defined on
    /// undirected graphs.
    pub fn from_csr(graph: &CsrGraph) -> Result<WeightedGraph> {
        if !graph.flags().symmetrized {
            return Err(Error::Contract(
                "graph is not symmetrized; community detection requires an undirected graph".into(),
            ));
        }
        let n = graph.node_count() as usize;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(graph.edge_count() as usize);
        let mut weights = Vec::with_capacity(graph.edge_count() as usize);
        offsets.push(0);
        for v in 0..graph.node_count() {
            for t in graph.neighbors(v)? {
                targets.push(t as usize);
                // A stored self arc represents one self-loop edge.
                weights.push(if t == v { 2.0 } else { 1.0 });
            }
            offsets.push(targets.len());
        }
        Ok(Self::assemble(offsets, targets, weights, vec![1; n]))
    }

    fn assemble(
        offsets: Vec<usize>,
        targets: Vec<usize>,
        weights: Vec<f64>,
        node_sizes: Vec<u64>,
    ) -> WeightedGraph {
        let n = offsets.len() - 1;
        let mut strengths = vec![0.0; n];
        let mut total_weight = 0.0;
        for v in 0..n {
            let mut s = 0.0;
            for w in &weights[offsets[v]..offsets[v + 1]] {
                s += w;
            }
            strengths[v] = s;
            total_weight += s;
        }
        WeightedGraph {
            offsets,
            targets,
            weights,
            node_sizes,
            strengths,
            total_weight,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Sum of all arc weights (2m).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Total undirected edge weight m.
    pub fn edge_weight(&self) -> f64 {
        self.total_weight / 2.0
    }

    pub fn strength(&self, v: usize) -> f64 {
        self.strengths[v]
    }

    pub fn node_size(&self, v: usize) -> u64 {
        self.node_sizes[v]
    }

    pub fn node_sizes(&self) -> &[u64] {
        &self.node_sizes
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Collapses each community to a single node.
    ///
    /// Arc weights between community pairs are summed; intra-community
    /// weight (including twice-counted internal edges) lands on the
    /// aggregate node's self arc, preserving the doubled-self-weight
    /// convention. Node sizes are summed. Total weight is conserved.
    pub fn aggregate(&self, partition: &Partition) -> Result<WeightedGraph> {
        partition.check_for(self.node_count() as u64)?;
        let c = partition.community_count();
        let members = partition.members_by_community();

        let mut offsets = Vec::with_capacity(c + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut node_sizes = vec![0u64; c];
        offsets.push(0);

        // Scratch accumulator indexed by target community, reset per source
        // community via the touched list so accumulation order (and thus
        // float rounding) is deterministic.
        let mut acc = vec![0.0f64; c];
        let mut touched: Vec<usize> = Vec::new();
        for (cid, member_nodes) in members.iter().enumerate() {
            for &v in member_nodes {
                node_sizes[cid] += self.node_sizes[v];
                for (t, w) in self.neighbors(v) {
                    let tc = partition.community_of(t);
                    if acc[tc] == 0.0 && !touched.contains(&tc) {
                        touched.push(tc);
                    }
                    acc[tc] += w;
                }
            }
            touched.sort_unstable();
            for &tc in &touched {
                if acc[tc] != 0.0 {
                    targets.push(tc);
                    weights.push(acc[tc]);
                    acc[tc] = 0.0;
                }
            }
            touched.clear();
            offsets.push(targets.len());
        }
        Ok(Self::assemble(offsets, targets, weights, node_sizes))
    }

    /// Splits every community into its connected components (with respect
    /// to this graph), returning the refined raw assignment. Communities
    /// that are already connected keep a single id.
    pub(crate) fn split_into_components(&self, partition: &Partition) -> Vec<usize> {
        let n = self.node_count();
        let mut out = vec![usize::MAX; n];
        let mut next_id = 0usize;
        let mut stack = Vec::new();
        for start in 0..n {
            if out[start] != usize::MAX {
                continue;
            }
            let comm = partition.community_of(start);
            let id = next_id;
            next_id += 1;
            out[start] = id;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for (t, _) in self.neighbors(v) {
                    if out[t] == usize::MAX && partition.community_of(t) == comm {
                        out[t] = id;
                        stack.push(t);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Builds a WeightedGraph directly from undirected (u, v, w) edges.
    pub(crate) fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> WeightedGraph {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            if u == v {
                adj[u].push((u, 2.0 * w));
            } else {
                adj[u].push((v, w));
                adj[v].push((u, w));
            }
        }
        let mut offsets = vec![0usize];
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        for row in &mut adj {
            row.sort_by_key(|&(t, _)| t);
            for &(t, w) in row.iter() {
                targets.push(t);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        WeightedGraph::assemble(offsets, targets, weights, vec![1; n])
    }

    #[test]
    fn strengths_and_total() {
        // Triangle plus a self-loop on node 0.
        let g = from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (0, 0, 1.0)]);
        assert_eq!(g.strength(0), 4.0); // two edges + doubled self-loop
        assert_eq!(g.strength(1), 2.0);
        assert_eq!(g.total_weight(), 8.0); // 2m with m = 4 edges
    }

    #[test]
    fn aggregate_conserves_weight_and_sizes() {
        // Two triangles joined by one edge.
        let g = from_edges(
            6,
            &[
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
                (2, 3, 1.0),
            ],
        );
        let p = Partition::from_assignment(vec![0, 0, 0, 1, 1, 1]);
        let agg = g.aggregate(&p).unwrap();
        assert_eq!(agg.node_count(), 2);
        assert_eq!(agg.total_weight(), g.total_weight());
        assert_eq!(agg.node_sizes(), &[3, 3]);
        // Self arc carries 2 * 3 internal edges; cross arc carries 1.
        let arcs0: Vec<(usize, f64)> = agg.neighbors(0).collect();
        assert_eq!(arcs0, vec![(0, 6.0), (1, 1.0)]);
        assert_eq!(agg.strength(0), 7.0);
    }

    #[test]
    fn component_split_separates_disconnected_community() {
        // Nodes 0-1 and 2-3 are two disjoint edges forced into one community.
        let g = from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let p = Partition::from_assignment(vec![0, 0, 0, 0]);
        let split = g.split_into_components(&p);
        assert_eq!(split[0], split[1]);
        assert_eq!(split[2], split[3]);
        assert_ne!(split[0], split[2]);
    }
}
