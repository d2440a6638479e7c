//! Structural validation of a stored CSR graph.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::csr::CsrGraph;

/// One violated invariant, with the first offending index.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Index of the first offending entry: a node index for per-node checks,
    /// a target-array index for per-arc checks.
    pub index: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// offsets[0] != 0.
    OffsetStart,
    /// offsets[i] > offsets[i+1] at node index i.
    OffsetMonotonicity,
    /// offsets[node_count] != edge_count.
    OffsetTotal,
    /// targets[k] >= node_count.
    TargetRange,
    /// A neighbor run that is not sorted ascending.
    RunNotSorted,
    /// Repeated target within a run despite the deduplicated flag.
    DuplicateTarget,
    /// targets[k] == owner despite the self_loops_removed flag.
    SelfLoop,
    /// Arc (u, v) without its mirror (v, u) despite the symmetrized flag.
    SymmetryBroken,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scans every invariant the CSR layout promises. Each violated invariant
/// is reported once, with the first index where it fails.
pub fn validate_csr(graph: &CsrGraph) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let n = graph.node_count();
    let e = graph.edge_count();
    let flags = graph.flags();

    if graph.offset_at(0) != 0 {
        report.violations.push(Violation {
            kind: ViolationKind::OffsetStart,
            index: 0,
        });
    }
    for i in 0..n {
        if graph.offset_at(i) > graph.offset_at(i + 1) {
            report.violations.push(Violation {
                kind: ViolationKind::OffsetMonotonicity,
                index: i,
            });
            break;
        }
    }
    if graph.offset_at(n) != e {
        report.violations.push(Violation {
            kind: ViolationKind::OffsetTotal,
            index: n,
        });
    }

    // Per-arc scans only make sense when the offsets are usable.
    if report.violations.iter().any(|v| {
        matches!(
            v.kind,
            ViolationKind::OffsetMonotonicity | ViolationKind::OffsetTotal
        )
    }) {
        return Ok(report);
    }

    let mut first_range: Option<u64> = None;
    let mut first_unsorted: Option<u64> = None;
    let mut first_duplicate: Option<u64> = None;
    let mut first_self_loop: Option<u64> = None;

    for i in 0..n {
        let start = graph.offset_at(i);
        let end = graph.offset_at(i + 1);
        let mut prev: Option<u64> = None;
        for k in start..end {
            let t = graph.target_at(k);
            if t >= n && first_range.is_none() {
                first_range = Some(k);
            }
            if let Some(p) = prev {
                if t < p && first_unsorted.is_none() {
                    first_unsorted = Some(k);
                }
                if flags.deduplicated && t == p && first_duplicate.is_none() {
                    first_duplicate = Some(k);
                }
            }
            if flags.self_loops_removed && t == i && first_self_loop.is_none() {
                first_self_loop = Some(k);
            }
            prev = Some(t);
        }
    }

    let mut push = |kind, index: Option<u64>| {
        if let Some(index) = index {
            report.violations.push(Violation { kind, index });
        }
    };
    push(ViolationKind::TargetRange, first_range);
    push(ViolationKind::RunNotSorted, first_unsorted);
    push(ViolationKind::DuplicateTarget, first_duplicate);
    push(ViolationKind::SelfLoop, first_self_loop);

    // Symmetry needs valid runs to binary-search against.
    if flags.symmetrized && first_range.is_none() && first_unsorted.is_none() {
        'outer: for i in 0..n {
            let start = graph.offset_at(i);
            let end = graph.offset_at(i + 1);
            for k in start..end {
                let t = graph.target_at(k);
                if t != i && !graph.has_arc(t, i)? {
                    report.violations.push(Violation {
                        kind: ViolationKind::SymmetryBroken,
                        index: k,
                    });
                    break 'outer;
                }
            }
        }
    }

    Ok(report)
}
