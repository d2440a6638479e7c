//! Partition quality functions: modularity and the constant Potts model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CsrGraph;

use super::{Partition, WeightedGraph};

/// Which objective the detector optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum QualityFn {
    #[default]
    Modularity,
    Cpm,
}

impl QualityFn {
    pub fn as_str(self) -> &'static str {
        match self {
            QualityFn::Modularity => "modularity",
            QualityFn::Cpm => "cpm",
        }
    }
}

impl std::str::FromStr for QualityFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modularity" => Ok(QualityFn::Modularity),
            "cpm" => Ok(QualityFn::Cpm),
            other => Err(Error::Contract(format!(
                "unknown quality function {other:?} (expected \"modularity\" or \"cpm\")"
            ))),
        }
    }
}

/// Detector configuration. Also serialized into partition sidecars so runs
/// are reproducible from their outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityConfig {
    pub quality_fn: QualityFn,
    pub resolution: f64,
    pub rng_seed: u64,
    pub max_passes: usize,
    pub min_quality_gain: f64,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            quality_fn: QualityFn::Modularity,
            resolution: 1.0,
            rng_seed: 0,
            max_passes: 32,
            min_quality_gain: 1e-10,
        }
    }
}

impl QualityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(Error::Contract(format!(
                "resolution must be a positive finite number, got {}",
                self.resolution
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::Contract("max_passes must be at least 1".into()));
        }
        if !(self.min_quality_gain.is_finite() && self.min_quality_gain >= 0.0) {
            return Err(Error::Contract(format!(
                "min_quality_gain must be a non-negative finite number, got {}",
                self.min_quality_gain
            )));
        }
        Ok(())
    }
}

/// A computed quality score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityValue(pub f64);

impl QualityValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Computes the configured quality of `partition` on a stored graph.
///
/// The graph must be symmetrized and non-empty (m >= 1).
pub fn quality(
    graph: &CsrGraph,
    partition: &Partition,
    config: &QualityConfig,
) -> Result<QualityValue> {
    config.validate()?;
    let wg = WeightedGraph::from_csr(graph)?;
    wg.quality(partition, config)
}

impl WeightedGraph {
    /// Quality of `partition` on this graph.
    ///
    /// Modularity: sum over communities of e_c/m - gamma * (K_c / 2m)^2.
    /// CPM: sum over communities of e_c - gamma * n_c (n_c - 1) / 2,
    /// normalized by m so values are comparable across graph sizes.
    pub fn quality(&self, partition: &Partition, config: &QualityConfig) -> Result<QualityValue> {
        config.validate()?;
        partition.check_for(self.node_count() as u64)?;
        let two_m = self.total_weight();
        if two_m <= 0.0 {
            return Err(Error::DegenerateGraph);
        }
        let m = two_m / 2.0;
        let c = partition.community_count();
        // Twice the internal edge weight of each community.
        let mut intra2 = vec![0.0f64; c];
        // Sum of member strengths (K_c).
        let mut comm_strength = vec![0.0f64; c];
        // Sum of member node sizes (n_c).
        let mut comm_size = vec![0u64; c];
        for v in 0..self.node_count() {
            let cv = partition.community_of(v);
            comm_strength[cv] += self.strength(v);
            comm_size[cv] += self.node_size(v);
            for (t, w) in self.neighbors(v) {
                if partition.community_of(t) == cv {
                    intra2[cv] += w;
                }
            }
        }
        let gamma = config.resolution;
        let mut total = 0.0f64;
        match config.quality_fn {
            QualityFn::Modularity => {
                for i in 0..c {
                    let e_c = intra2[i] / 2.0;
                    let frac = comm_strength[i] / two_m;
                    total += e_c / m - gamma * frac * frac;
                }
            }
            QualityFn::Cpm => {
                for i in 0..c {
                    let e_c = intra2[i] / 2.0;
                    let n_c = comm_size[i] as f64;
                    total += e_c - gamma * n_c * (n_c - 1.0) / 2.0;
                }
                total /= m;
            }
        }
        Ok(QualityValue(total))
    }
}
