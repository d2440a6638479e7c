//! Community detection: seeded local moving, deterministic refinement, and
//! aggregation, iterated until quality stops improving.
//!
//! The variant implemented here is fully deterministic for a fixed
//! `rng_seed`: node visit order comes from a seeded shuffle, move and merge
//! choices are greedy, and gain ties break toward the lowest community id.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::graph::CsrGraph;

use super::{Partition, QualityConfig, QualityFn, WeightedGraph};

/// One row of the per-pass trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassStat {
    /// 1-based pass index.
    pub pass: usize,
    /// Quality of the partition after this pass, evaluated on the original graph.
    pub quality: f64,
    pub community_count: usize,
}

/// Runs community detection and returns the final flat partition.
pub fn leiden(graph: &CsrGraph, config: &QualityConfig) -> Result<Partition> {
    leiden_trace(graph, config).map(|(partition, _)| partition)
}

/// Like [`leiden`] but also returns per-pass quality statistics.
pub fn leiden_trace(
    graph: &CsrGraph,
    config: &QualityConfig,
) -> Result<(Partition, Vec<PassStat>)> {
    config.validate()?;
    let base = WeightedGraph::from_csr(graph)?;
    leiden_on(&base, config)
}

enum Level<'a> {
    Base(&'a WeightedGraph),
    Owned(WeightedGraph),
}

impl Level<'_> {
    fn get(&self) -> &WeightedGraph {
        match self {
            Level::Base(g) => g,
            Level::Owned(g) => g,
        }
    }
}

/// Detection over an in-memory weighted graph (shared by the resolution sweep,
/// which converts the stored graph once).
pub(crate) fn leiden_on(
    base: &WeightedGraph,
    config: &QualityConfig,
) -> Result<(Partition, Vec<PassStat>)> {
    config.validate()?;
    let n0 = base.node_count();
    // Errors on degenerate (m = 0) graphs and establishes the baseline the
    // first pass must improve on.
    let mut prev_quality = base.quality(&Partition::singletons(n0), config)?.value();

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut level = Level::Base(base);
    // original node -> current level node; None while still at the base level
    let mut mapping: Option<Vec<usize>> = None;
    let mut seed: Vec<usize> = (0..n0).collect();
    let mut partition = Partition::singletons(n0);
    let mut trace = Vec::new();

    for pass in 1..=config.max_passes {
        let g = level.get();
        let at_base = matches!(level, Level::Base(_));
        let assign = local_move(g, &seed, &mut rng, config);
        let level_partition = Partition::from_assignment(assign);
        // Flatten onto original nodes so quality is always measured there.
        let flat_raw = match &mapping {
            None => level_partition.assignment().to_vec(),
            Some(map) => map
                .iter()
                .map(|&node| level_partition.community_of(node))
                .collect(),
        };
        partition = Partition::from_assignment(flat_raw);
        let q = base.quality(&partition, config)?.value();
        trace.push(PassStat {
            pass,
            quality: q,
            community_count: partition.community_count(),
        });
        let improved = q - prev_quality > config.min_quality_gain;
        prev_quality = q;
        if pass == config.max_passes || partition.community_count() == 1 {
            break;
        }

        // Decide how to continue: descend one aggregation level, or — when a
        // level has stopped improving — restart the descent from the original
        // graph seeded with the current partition, so individual nodes can
        // move again. Terminate once a restart itself yields no improvement.
        let refined = if improved {
            Some(refine(g, &level_partition, &mut rng, config))
        } else {
            None
        };
        let descend = match &refined {
            Some(r) => r.community_count() < g.node_count(),
            None => false,
        };
        if descend {
            let refined = refined.expect("descend implies a refinement");
            // Seed the next level with the phase-1 communities: every refined
            // sub-community lies inside exactly one of them.
            let seed_raw: Vec<usize> = refined
                .members_by_community()
                .iter()
                .map(|members| level_partition.community_of(members[0]))
                .collect();
            let aggregate = g.aggregate(&refined)?;
            mapping = Some(match mapping {
                None => refined.assignment().to_vec(),
                Some(prev) => prev
                    .into_iter()
                    .map(|node| refined.community_of(node))
                    .collect(),
            });
            seed = Partition::from_assignment(seed_raw).assignment().to_vec();
            level = Level::Owned(aggregate);
        } else {
            if !improved && at_base {
                // A pass over the original graph itself made no progress:
                // converged.
                break;
            }
            level = Level::Base(base);
            mapping = None;
            seed = partition.assignment().to_vec();
        }
    }

    // Local moving can leave a community disconnected (moving a cut node out
    // splits what remains). Splitting such a community into its components
    // never lowers either quality function, so enforce connectivity here.
    let split = Partition::from_assignment(base.split_into_components(&partition));
    if split.community_count() != partition.community_count() {
        partition = split;
    }
    let final_quality = base.quality(&partition, config)?.value();
    if let Some(last) = trace.last_mut() {
        last.quality = final_quality;
        last.community_count = partition.community_count();
    }
    Ok((partition, trace))
}

/// Phase 1: greedy local moving over a seeded-shuffled work queue.
///
/// Each node moves to the neighboring community (or a fresh singleton) with
/// the largest quality gain, provided that gain exceeds `min_quality_gain`;
/// the node's neighbors outside the chosen community are then re-queued.
/// Returns a raw (non-canonical) assignment.
fn local_move(
    g: &WeightedGraph,
    seed: &[usize],
    rng: &mut ChaCha8Rng,
    config: &QualityConfig,
) -> Vec<usize> {
    let n = g.node_count();
    let m = g.edge_weight();
    let gamma = config.resolution;

    let mut assign = seed.to_vec();
    let mut comm_strength = vec![0.0f64; n];
    let mut comm_nodes = vec![0u64; n];
    let mut comm_members = vec![0usize; n];
    let mut seed_count = 0usize;
    for (v, &c) in assign.iter().enumerate() {
        comm_strength[c] += g.strength(v);
        comm_nodes[c] += g.node_size(v);
        comm_members[c] += 1;
        seed_count = seed_count.max(c + 1);
    }
    // Ids of currently-empty communities; a node escaping to a fresh
    // singleton takes the most recently freed id. All live ids stay < n.
    let mut free: Vec<usize> = (seed_count..n).rev().collect();

    let mut queue: VecDeque<usize> = {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        order.into()
    };
    let mut in_queue = vec![true; n];

    // Scratch: weight from the current node to each touched community.
    let mut weight_to = vec![0.0f64; n];
    let mut touched_mark = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();

    while let Some(v) = queue.pop_front() {
        in_queue[v] = false;
        let cur = assign[v];
        let k_v = g.strength(v);
        let s_v = g.node_size(v) as f64;
        for (t, w) in g.neighbors(v) {
            if t == v {
                continue;
            }
            let c = assign[t];
            if !touched_mark[c] {
                touched_mark[c] = true;
                touched.push(c);
            }
            weight_to[c] += w;
        }
        let w_cur = weight_to[cur];
        let strength_rest = comm_strength[cur] - k_v;
        let nodes_rest = (comm_nodes[cur] - g.node_size(v)) as f64;
        // Gain of moving v out of its current community into a target with
        // the given aggregates (all-zero target = fresh singleton).
        let gain_to = |w_c: f64, strength_c: f64, nodes_c: f64| match config.quality_fn {
            QualityFn::Modularity => {
                (w_c - w_cur) / m - gamma * k_v * (strength_c - strength_rest) / (2.0 * m * m)
            }
            QualityFn::Cpm => ((w_c - w_cur) - gamma * s_v * (nodes_c - nodes_rest)) / m,
        };

        let mut best: Option<usize> = None;
        let mut best_gain = config.min_quality_gain;
        for &c in &touched {
            if c != cur {
                let gain = gain_to(weight_to[c], comm_strength[c], comm_nodes[c] as f64);
                let better = match best {
                    None => gain > best_gain,
                    Some(b) => gain > best_gain || (gain == best_gain && c < b),
                };
                if better {
                    best = Some(c);
                    best_gain = gain;
                }
            }
        }
        // Fresh singleton escape: only meaningful when v has company, and it
        // loses gain ties to existing communities (lowest-id rule).
        let mut to_fresh = false;
        if comm_members[cur] > 1 {
            let gain = gain_to(0.0, 0.0, 0.0);
            if gain > best_gain && gain > config.min_quality_gain {
                to_fresh = true;
            }
        }
        for &c in &touched {
            touched_mark[c] = false;
            weight_to[c] = 0.0;
        }
        touched.clear();

        let target = if to_fresh {
            Some(
                free.pop()
                    .expect("an empty community id is always available"),
            )
        } else {
            best
        };
        let Some(target) = target else { continue };

        comm_strength[cur] -= k_v;
        comm_nodes[cur] -= g.node_size(v);
        comm_members[cur] -= 1;
        if comm_members[cur] == 0 {
            free.push(cur);
        }
        comm_strength[target] += k_v;
        comm_nodes[target] += g.node_size(v);
        comm_members[target] += 1;
        assign[v] = target;
        for (t, _) in g.neighbors(v) {
            if t != v && assign[t] != target && !in_queue[t] {
                in_queue[t] = true;
                queue.push_back(t);
            }
        }
    }
    assign
}

/// Phase 2: deterministic refinement.
///
/// Within each phase-1 community all nodes restart as singletons; in seeded
/// shuffle order, each still-singleton node may merge into a sub-community
/// of the same phase-1 community when the connectivity threshold is met,
/// taking the gain-maximizing candidate (ties to the lowest sub-community
/// id, negative-gain merges rejected).
fn refine(
    g: &WeightedGraph,
    phase1: &Partition,
    rng: &mut ChaCha8Rng,
    config: &QualityConfig,
) -> Partition {
    let n = g.node_count();
    let m = g.edge_weight();
    let two_m = g.total_weight();
    let gamma = config.resolution;

    let mut sub: Vec<usize> = (0..n).collect();
    let mut sub_strength: Vec<f64> = (0..n).map(|v| g.strength(v)).collect();
    let mut sub_nodes: Vec<u64> = (0..n).map(|v| g.node_size(v)).collect();
    let mut sub_members: Vec<usize> = vec![1; n];

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut weight_to = vec![0.0f64; n];
    let mut touched_mark = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();

    for &v in &order {
        if sub_members[sub[v]] != 1 {
            continue;
        }
        let comm = phase1.community_of(v);
        let k_v = g.strength(v);
        let s_v = g.node_size(v) as f64;
        for (t, w) in g.neighbors(v) {
            if t == v || phase1.community_of(t) != comm {
                continue;
            }
            let sc = sub[t];
            if sc == sub[v] {
                continue;
            }
            if !touched_mark[sc] {
                touched_mark[sc] = true;
                touched.push(sc);
            }
            weight_to[sc] += w;
        }
        let mut best: Option<usize> = None;
        let mut best_gain = f64::NEG_INFINITY;
        for &sc in &touched {
            let w_c = weight_to[sc];
            // Only merge into sub-communities the node is well connected to.
            let threshold = match config.quality_fn {
                QualityFn::Modularity => gamma * k_v * sub_strength[sc] / two_m,
                QualityFn::Cpm => gamma * s_v * sub_nodes[sc] as f64,
            };
            if w_c < threshold {
                continue;
            }
            // v is a singleton, so the departure terms of the move gain vanish.
            let gain = match config.quality_fn {
                QualityFn::Modularity => w_c / m - gamma * k_v * sub_strength[sc] / (2.0 * m * m),
                QualityFn::Cpm => (w_c - gamma * s_v * sub_nodes[sc] as f64) / m,
            };
            if gain < 0.0 {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => gain > best_gain || (gain == best_gain && sc < b),
            };
            if better {
                best = Some(sc);
                best_gain = gain;
            }
        }
        for &sc in &touched {
            touched_mark[sc] = false;
            weight_to[sc] = 0.0;
        }
        touched.clear();

        if let Some(target) = best {
            sub_members[sub[v]] = 0;
            sub[v] = target;
            sub_strength[target] += k_v;
            sub_nodes[target] += g.node_size(v);
            sub_members[target] += 1;
        }
    }
    Partition::from_assignment(sub)
}

/// Collapses each community of `partition` into a single weighted node.
/// Exposed for testing the quality-preservation property of the hierarchy.
pub fn aggregate_graph(graph: &CsrGraph, partition: &Partition) -> Result<WeightedGraph> {
    let wg = WeightedGraph::from_csr(graph)?;
    wg.aggregate(partition)
}
