//! Seed-domain mining: resolve seed hosts to graph nodes, pull out the
//! communities that contain them, sweep resolutions, and compare the
//! resulting domain sets.

mod host;

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::community::{leiden_on, Partition, QualityConfig, WeightedGraph};
use crate::error::{Error, Result};
use crate::graph::{CsrGraph, VertexTable};

pub use host::{normalize_host, reverse_host};

/// An ordered list of normalized, unique seed hosts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList {
    domains: Vec<String>,
}

impl SeedList {
    /// Builds a seed list from raw host strings, normalizing each and
    /// dropping duplicates while preserving first-seen order.
    pub fn from_hosts<I, S>(hosts: I) -> Result<SeedList>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut domains = Vec::new();
        let mut seen = HashSet::new();
        for raw in hosts {
            let host = normalize_host(raw.as_ref())?;
            if seen.insert(host.clone()) {
                domains.push(host);
            }
        }
        Ok(SeedList { domains })
    }

    /// Parses the seed-list file format: one domain per line, blank lines
    /// skipped, `#` starts a comment line.
    pub fn read(reader: impl BufRead, source_name: &str) -> Result<SeedList> {
        let mut raw = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(Error::from)?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            normalize_host(trimmed).map_err(|e| Error::Parse {
                source_name: source_name.to_string(),
                line: idx as u64 + 1,
                msg: e.to_string(),
            })?;
            raw.push(trimmed.to_string());
        }
        SeedList::from_hosts(raw)
    }

    pub fn load(path: &Path) -> Result<SeedList> {
        let reader = crate::ioutil::open_text(path)?;
        SeedList::read(reader, &path.display().to_string())
    }

    pub fn domains(&self) -> &[String] {
        &self.domains
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    /// Hash of the normalized list (newline-joined), for provenance records.
    pub fn sha256_hex(&self) -> String {
        let mut hasher = Sha256::new();
        for d in &self.domains {
            hasher.update(d.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// How a single seed resolved against the vertex table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedResolution {
    /// The reversed seed name is itself a vertex.
    Exact {
        node_id: u64,
    },
    /// No exact vertex; matched the lowest-id vertex under the seed's
    /// reversed-name prefix (a subdomain of the seed).
    Fallback {
        node_id: u64,
    },
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResolvedSeed {
    pub seed: String,
    pub resolution: SeedResolution,
}

impl ResolvedSeed {
    pub fn node_id(&self) -> Option<u64> {
        match self.resolution {
            SeedResolution::Exact { node_id } | SeedResolution::Fallback { node_id } => {
                Some(node_id)
            }
            SeedResolution::Unresolved => None,
        }
    }
}

/// Maps each seed host to a graph node via the reversed-name convention.
///
/// Exact lookup first; with `fallback_suffix_match`, a seed with no exact
/// vertex matches the lowest-id vertex whose reversed name starts with
/// `reversed(seed) + "."` (i.e. any subdomain). Unresolved seeds are
/// reported in place; only a fully unresolved list is an error.
pub fn resolve_seeds(
    table: &VertexTable,
    seeds: &SeedList,
    fallback_suffix_match: bool,
) -> Result<Vec<ResolvedSeed>> {
    let mut out = Vec::with_capacity(seeds.len());
    let mut resolved = 0usize;
    for seed in seeds.domains() {
        let reversed = reverse_host(seed);
        let resolution = if let Some(node_id) = table.id(&reversed) {
            SeedResolution::Exact { node_id }
        } else if fallback_suffix_match {
            let prefix = format!("{reversed}.");
            // Vertex ids ascend with names() order, so the first hit is the
            // lowest id.
            match table
                .names()
                .find(|(_, name)| name.starts_with(&prefix))
                .map(|(id, _)| id)
            {
                Some(node_id) => SeedResolution::Fallback { node_id },
                None => SeedResolution::Unresolved,
            }
        } else {
            SeedResolution::Unresolved
        };
        if !matches!(resolution, SeedResolution::Unresolved) {
            resolved += 1;
        }
        out.push(ResolvedSeed {
            seed: seed.clone(),
            resolution,
        });
    }
    if resolved == 0 {
        return Err(Error::NoSeedsResolved {
            attempted: seeds.len(),
        });
    }
    Ok(out)
}

/// Which communities to keep when seeds land in more than one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExtractPolicy {
    /// Members of every community containing at least one seed.
    Union,
    /// Members of the single community containing the most seeds
    /// (ties break to the lowest community id).
    #[default]
    Majority,
}

impl ExtractPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtractPolicy::Union => "union",
            ExtractPolicy::Majority => "majority",
        }
    }
}

impl std::str::FromStr for ExtractPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" => Ok(ExtractPolicy::Union),
            "majority" => Ok(ExtractPolicy::Majority),
            other => Err(Error::Contract(format!(
                "unknown policy {other:?} (expected \"union\" or \"majority\")"
            ))),
        }
    }
}

/// Where a domain set came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSetProvenance {
    pub community_ids: Vec<usize>,
    /// Resolution γ of the partition the set was extracted from, when known.
    pub resolution: Option<f64>,
    pub seed_list_sha256: String,
}

/// Caller-supplied provenance for [`extract_community`]: the partition's
/// resolution (when known) and the seed-list hash.
#[derive(Debug, Clone)]
pub struct ProvenanceContext {
    pub resolution: Option<f64>,
    pub seed_list_sha256: String,
}

/// A set of normalized host names (natural label order), sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSet {
    members: Vec<String>,
    pub provenance: Option<DomainSetProvenance>,
}

impl DomainSet {
    /// Builds a set from raw hosts, normalizing, sorting and deduplicating.
    pub fn from_hosts<I, S>(hosts: I) -> Result<DomainSet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut members: Vec<String> = hosts
            .into_iter()
            .map(|h| normalize_host(h.as_ref()))
            .collect::<Result<_>>()?;
        members.sort_unstable();
        members.dedup();
        Ok(DomainSet {
            members,
            provenance: None,
        })
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, host: &str) -> bool {
        self.members
            .binary_search_by(|m| m.as_str().cmp(host))
            .is_ok()
    }

    /// One host per line, sorted.
    pub fn write_text(&self, mut out: impl Write) -> Result<()> {
        for m in &self.members {
            out.write_all(m.as_bytes()).map_err(Error::from)?;
            out.write_all(b"\n").map_err(Error::from)?;
        }
        out.flush().map_err(Error::from)?;
        Ok(())
    }

    pub fn read(reader: impl BufRead, source_name: &str) -> Result<DomainSet> {
        let mut raw = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(Error::from)?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            normalize_host(trimmed).map_err(|e| Error::Parse {
                source_name: source_name.to_string(),
                line: idx as u64 + 1,
                msg: e.to_string(),
            })?;
            raw.push(trimmed.to_string());
        }
        DomainSet::from_hosts(raw)
    }

    pub fn load(path: &Path) -> Result<DomainSet> {
        let reader = crate::ioutil::open_text(path)?;
        DomainSet::read(reader, &path.display().to_string())
    }
}

/// Number of resolved seeds in each community, ascending community id.
/// Useful for reporting how a majority decision was made.
pub fn seed_community_counts(partition: &Partition, seed_nodes: &[u64]) -> Vec<(usize, usize)> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &node in seed_nodes {
        *counts
            .entry(partition.community_of(node as usize))
            .or_insert(0) += 1;
    }
    let mut rows: Vec<(usize, usize)> = counts.into_iter().collect();
    rows.sort_unstable();
    rows
}

/// Extracts the domain set anchored by the resolved seeds.
///
/// The result depends only on (partition, seed set, policy); seed order is
/// irrelevant. Member names are emitted in natural (un-reversed) label
/// order, sorted.
pub fn extract_community(
    partition: &Partition,
    table: &VertexTable,
    seed_nodes: &[u64],
    policy: ExtractPolicy,
    provenance: Option<ProvenanceContext>,
) -> Result<DomainSet> {
    if seed_nodes.is_empty() {
        return Err(Error::Contract("no resolved seeds to extract from".into()));
    }
    partition.check_for(table.len() as u64)?;
    for &node in seed_nodes {
        if node as usize >= partition.node_count() {
            return Err(Error::Contract(format!(
                "seed node {node} out of range for partition of {} nodes",
                partition.node_count()
            )));
        }
    }
    let counts = seed_community_counts(partition, seed_nodes);
    let chosen: Vec<usize> = match policy {
        ExtractPolicy::Union => counts.iter().map(|&(c, _)| c).collect(),
        ExtractPolicy::Majority => {
            let best = counts
                .iter()
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .expect("seed_nodes is non-empty");
            vec![best.0]
        }
    };
    let chosen_set: HashSet<usize> = chosen.iter().copied().collect();
    let mut members = Vec::new();
    for (id, name) in table.names() {
        if chosen_set.contains(&partition.community_of(id as usize)) {
            members.push(reverse_host(name));
        }
    }
    members.sort_unstable();
    members.dedup();
    Ok(DomainSet {
        members,
        provenance: provenance.map(|ctx| DomainSetProvenance {
            community_ids: chosen,
            resolution: ctx.resolution,
            seed_list_sha256: ctx.seed_list_sha256,
        }),
    })
}

/// Set-overlap summary of two domain sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapStats {
    pub size_a: usize,
    pub size_b: usize,
    pub intersection: usize,
    pub jaccard: f64,
}

/// Exact set arithmetic over normalized members.
/// Two empty sets have jaccard 0 (0/0 is taken as no overlap).
pub fn overlap(a: &DomainSet, b: &DomainSet) -> OverlapStats {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let intersection = small.members().iter().filter(|m| large.contains(m)).count();
    let union = a.len() + b.len() - intersection;
    OverlapStats {
        size_a: a.len(),
        size_b: b.len(),
        intersection,
        jaccard: if union == 0 {
            0.0
        } else {
            intersection as f64 / union as f64
        },
    }
}

/// One row of a resolution sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub resolution: f64,
    pub community_count: Option<usize>,
    pub extracted_size: Option<usize>,
    pub quality: Option<f64>,
    pub error: Option<String>,
}

/// Runs detection once per resolution (same rng seed each time) and reports
/// the extracted-set footprint at each γ. Rows are ordered by γ ascending;
/// a failing row is marked and the sweep continues.
pub fn sweep_resolutions(
    graph: &CsrGraph,
    table: &VertexTable,
    seeds: &SeedList,
    resolutions: &[f64],
    base: &QualityConfig,
    policy: ExtractPolicy,
    fallback_suffix_match: bool,
) -> Result<Vec<SweepRow>> {
    if resolutions.is_empty() {
        return Err(Error::Contract("resolution sweep list is empty".into()));
    }
    for &gamma in resolutions {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Contract(format!(
                "sweep resolutions must be positive finite numbers, got {gamma}"
            )));
        }
    }
    let resolved = resolve_seeds(table, seeds, fallback_suffix_match)?;
    let seed_nodes: Vec<u64> = resolved.iter().filter_map(|r| r.node_id()).collect();
    let seed_hash = seeds.sha256_hex();
    let weighted = WeightedGraph::from_csr(graph)?;

    let mut gammas = resolutions.to_vec();
    gammas.sort_unstable_by(|a, b| a.partial_cmp(b).expect("validated finite"));

    let mut rows = Vec::with_capacity(gammas.len());
    for gamma in gammas {
        let config = QualityConfig {
            resolution: gamma,
            ..base.clone()
        };
        let row = match leiden_on(&weighted, &config) {
            Ok((partition, trace)) => {
                let set = extract_community(
                    &partition,
                    table,
                    &seed_nodes,
                    policy,
                    Some(ProvenanceContext {
                        resolution: Some(gamma),
                        seed_list_sha256: seed_hash.clone(),
                    }),
                )?;
                SweepRow {
                    resolution: gamma,
                    community_count: Some(partition.community_count()),
                    extracted_size: Some(set.len()),
                    quality: trace.last().map(|s| s.quality),
                    error: None,
                }
            }
            Err(e) => SweepRow {
                resolution: gamma,
                community_count: None,
                extracted_size: None,
                quality: None,
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    Ok(rows)
}
