//! Pipeline configuration file: TOML, merged *under* command-line flags
//! (a flag given on the command line always wins over the file).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use webmine::ioutil::resolve_relative;
use webmine::{Error, Result};

use crate::logging::LogLevel;

/// Everything a config file may set. All fields are optional; absent values
/// fall back to each flag's built-in default. Relative paths are resolved
/// against the config file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub threads: Option<usize>,
    #[serde(default)]
    pub log: LogSection,
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub detect: DetectSection,
    #[serde(default)]
    pub mine: MineSection,
    #[serde(default)]
    pub filter: FilterSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSection {
    pub level: Option<LogLevel>,
    pub progress_every: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub vertices: Option<PathBuf>,
    pub edges: Option<Vec<PathBuf>>,
    pub graph: Option<PathBuf>,
    pub partition: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub domains: Option<PathBuf>,
    pub corpus_in: Option<PathBuf>,
    pub corpus_out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectSection {
    pub resolution: Option<f64>,
    pub quality: Option<String>,
    pub rng_seed: Option<u64>,
    pub max_passes: Option<usize>,
    pub min_quality_gain: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MineSection {
    pub policy: Option<String>,
    pub fallback_suffix: Option<bool>,
    pub sweep: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub mode: Option<String>,
    pub token_counter: Option<String>,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_interval: Option<u64>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Contract(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Error::Contract(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent();
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(value) = p.take() {
                *p = Some(resolve_relative(base, &value));
            }
        };
        fix(&mut config.paths.vertices);
        fix(&mut config.paths.graph);
        fix(&mut config.paths.partition);
        fix(&mut config.paths.seeds);
        fix(&mut config.paths.domains);
        fix(&mut config.paths.corpus_in);
        fix(&mut config.paths.corpus_out);
        fix(&mut config.filter.checkpoint);
        if let Some(edges) = config.paths.edges.take() {
            config.paths.edges = Some(
                edges
                    .into_iter()
                    .map(|p| resolve_relative(base, &p))
                    .collect(),
            );
        }
        Ok(config)
    }
}

/// Resolves one required setting: the flag wins, then the config value, and
/// a missing setting is a usage error naming the flag.
pub fn required<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T> {
    flag.or(config)
        .ok_or_else(|| Error::Contract(format!("missing required setting {name}")))
}

/// Checks an input path exists before a command starts streaming from it.
pub fn require_input(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "input file not found: {}",
            path.display()
        )))
    }
}
