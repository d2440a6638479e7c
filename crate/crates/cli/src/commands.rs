//! Subcommand implementations: flag/config merging, structured logging, and
//! stdout JSON reports.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;

use webmine::community::{
    leiden_trace, load_partition, write_partition_tsv, PartitionSidecar, QualityConfig,
};
use webmine::corpus::{
    corpus_stats, dedup_file, dedup_stream, filter_file, filter_stream, CheckpointSpec,
    CorpusReport, DedupStats, FilterStats, MatchMode, TokenCounter,
};
use webmine::graph::{
    build_csr, count_vertices_file, load_vertices, split_edge_list, validate_csr, BuildOptions,
    CsrGraph,
};
use webmine::ioutil;
use webmine::seed::{
    extract_community, overlap, resolve_seeds, sweep_resolutions, DomainSet, ExtractPolicy,
    ProvenanceContext, SeedList,
};
use webmine::{Error, Result};

use crate::config::{require_input, required, DetectSection, PipelineConfig};
use crate::logging::{LogLevel, Logger, ProgressReader};
use crate::{Cli, Command};

/// Settings every command shares once flags and config file are merged.
struct Ctx {
    logger: Logger,
    threads: usize,
    progress_every: u64,
    config: PipelineConfig,
}

pub fn execute(cli: Cli) -> Result<i32> {
    let config = match &cli.global.config {
        Some(path) => {
            require_input(path)?;
            PipelineConfig::load(path)?
        }
        None => PipelineConfig::default(),
    };
    let level = cli
        .global
        .log_level
        .or(config.log.level)
        .unwrap_or(LogLevel::Info);
    let threads = cli.global.threads.or(config.threads).unwrap_or(1);
    if threads == 0 {
        return Err(Error::Contract("--threads must be at least 1".into()));
    }
    let progress_every = cli
        .global
        .progress_every
        .or(config.log.progress_every)
        .unwrap_or(100_000);
    if progress_every == 0 {
        return Err(Error::Contract(
            "--progress-every must be at least 1".into(),
        ));
    }
    let ctx = Ctx {
        logger: Logger::new(level),
        threads,
        progress_every,
        config,
    };
    match cli.command {
        Command::BuildGraph(args) => build_graph(args, ctx),
        Command::Detect(args) => detect(args, ctx),
        Command::Mine(args) => mine(args, ctx),
        Command::Filter(args) => filter(args, ctx),
        Command::Dedup(args) => dedup(args, ctx),
        Command::Stats(args) => stats(args, ctx),
        Command::Overlap(args) => overlap_cmd(args, ctx),
        Command::Validate(args) => validate(args, ctx),
    }
}

/// Pretty-prints one JSON report to stdout; every command emits exactly one.
fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value)
        .map_err(|e| Error::Internal(format!("stdout report serialization failed: {e}")))?;
    stdout.write_all(b"\n").map_err(Error::from)?;
    Ok(())
}

/// Parses a flag-or-config string setting, falling back to the type default.
fn parse_or_default<T>(value: Option<String>) -> Result<T>
where
    T: Default + std::str::FromStr<Err = Error>,
{
    match value {
        Some(s) => s.parse(),
        None => Ok(T::default()),
    }
}

/// `<path>.json`: sidecar naming convention for partitions and domain sets.
fn sidecar_path_for(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    path.with_file_name(name)
}

fn create_output(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).map_err(|e| Error::Io {
        path: Some(path.to_path_buf()),
        source: e,
    })?;
    Ok(BufWriter::new(file))
}

// ---------------------------------------------------------------------------
// build-graph

#[derive(Args)]
pub struct BuildGraphArgs {
    /// Vertex table: one "<id>\t<reversed-host>" line per node, ids from 0.
    pub vertices: Option<PathBuf>,
    /// Edge lists: "<src>\t<dst>" lines; plain text or gzip.
    pub edges: Vec<PathBuf>,
    /// Output graph file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Re-split the edge inputs into chunks of at most N edges and build
    /// from the chunks (output is byte-identical for any N).
    #[arg(long, value_name = "N")]
    pub split_size: Option<u64>,
    /// Store each input arc one-directional instead of adding its mirror.
    #[arg(long)]
    pub no_symmetrize: bool,
    /// Keep repeated arcs instead of collapsing duplicates.
    #[arg(long)]
    pub no_dedupe: bool,
    /// Keep self-loop arcs instead of dropping them.
    #[arg(long)]
    pub keep_self_loops: bool,
}

fn build_graph(args: BuildGraphArgs, ctx: Ctx) -> Result<i32> {
    let vertices = required(
        args.vertices,
        ctx.config.paths.vertices.clone(),
        "<VERTICES> (or [paths] vertices in the config)",
    )?;
    let edges = if args.edges.is_empty() {
        ctx.config.paths.edges.clone().unwrap_or_default()
    } else {
        args.edges
    };
    if edges.is_empty() {
        return Err(Error::Contract(
            "no edge files given (pass them after the vertex file, or set [paths] edges)".into(),
        ));
    }
    let out = required(
        args.out,
        ctx.config.paths.graph.clone(),
        "--out (or [paths] graph)",
    )?;
    require_input(&vertices)?;
    for edge_file in &edges {
        require_input(edge_file)?;
    }

    ctx.logger.info(
        "start",
        json!({ "command": "build-graph", "vertices": vertices, "edges": edges, "out": out }),
    );

    // Only the count matters here; the name table would dominate the peak
    // memory this command is supposed to keep flat.
    let node_count = count_vertices_file(&vertices)?;
    ctx.logger
        .info("vertices_counted", json!({ "node_count": node_count }));

    let options = BuildOptions {
        symmetrize: !args.no_symmetrize,
        dedupe: !args.no_dedupe,
        drop_self_loops: !args.keep_self_loops,
        threads: ctx.threads,
    };

    // When re-splitting, the chunks live in a temp dir next to the output
    // (same filesystem) and are removed when the build finishes.
    let mut split_dir: Option<tempfile::TempDir> = None;
    let splits: Vec<PathBuf> = match args.split_size {
        Some(max_edges) => {
            let parent = out
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let dir = tempfile::tempdir_in(parent).map_err(|e| Error::Io {
                path: Some(parent.to_path_buf()),
                source: e,
            })?;
            let mut all = Vec::new();
            for (i, input) in edges.iter().enumerate() {
                let reader = ioutil::open_text(input)?;
                all.extend(split_edge_list(
                    reader,
                    max_edges,
                    dir.path(),
                    &format!("part{i:03}"),
                )?);
            }
            ctx.logger.info(
                "edges_split",
                json!({ "splits": all.len(), "max_edges_per_split": max_edges }),
            );
            split_dir = Some(dir);
            all
        }
        None => edges,
    };

    let report = build_csr(&splits, node_count, &options, &out)?;
    drop(split_dir);

    let summary = json!({
        "out": out,
        "node_count": report.node_count,
        "edge_count": report.edge_count,
        "input_arcs": report.input_arcs,
        "counting_peak_rss_bytes": report.counting_peak_rss_bytes,
        "peak_rss_bytes": report.peak_rss_bytes,
    });
    ctx.logger.info("graph_built", summary.clone());
    print_json(&summary)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// detect

#[derive(Args)]
pub struct DetectArgs {
    /// Stored graph to cluster.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Output partition TSV ("<node>\t<community>"); a "<out>.json" sidecar
    /// records quality, community count, and the full configuration.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Resolution gamma (> 0); higher values give more, smaller communities.
    #[arg(long, value_name = "GAMMA")]
    pub resolution: Option<f64>,
    /// Quality function: "modularity" or "cpm".
    #[arg(long, value_name = "FN")]
    pub quality: Option<String>,
    /// RNG seed; identical seeds give bit-identical outputs.
    #[arg(long, value_name = "SEED")]
    pub seed_rng: Option<u64>,
    /// Upper bound on optimization passes.
    #[arg(long, value_name = "N")]
    pub max_passes: Option<usize>,
    /// Smallest quality increase still counted as an improvement.
    #[arg(long, value_name = "GAIN")]
    pub min_gain: Option<f64>,
}

/// Merges detection settings: flag wins, then config file, then defaults.
fn merge_quality_config(
    quality: Option<String>,
    resolution: Option<f64>,
    seed_rng: Option<u64>,
    max_passes: Option<usize>,
    min_gain: Option<f64>,
    section: &DetectSection,
) -> Result<QualityConfig> {
    let default = QualityConfig::default();
    let quality_fn = match quality.or_else(|| section.quality.clone()) {
        Some(name) => name.parse()?,
        None => default.quality_fn,
    };
    let config = QualityConfig {
        quality_fn,
        resolution: resolution
            .or(section.resolution)
            .unwrap_or(default.resolution),
        rng_seed: seed_rng.or(section.rng_seed).unwrap_or(default.rng_seed),
        max_passes: max_passes
            .or(section.max_passes)
            .unwrap_or(default.max_passes),
        min_quality_gain: min_gain
            .or(section.min_quality_gain)
            .unwrap_or(default.min_quality_gain),
    };
    config.validate()?;
    Ok(config)
}

fn detect(args: DetectArgs, ctx: Ctx) -> Result<i32> {
    let graph_path = required(
        args.graph,
        ctx.config.paths.graph.clone(),
        "--graph (or [paths] graph)",
    )?;
    let out = required(
        args.out,
        ctx.config.paths.partition.clone(),
        "--out (or [paths] partition)",
    )?;
    let config = merge_quality_config(
        args.quality,
        args.resolution,
        args.seed_rng,
        args.max_passes,
        args.min_gain,
        &ctx.config.detect,
    )?;
    require_input(&graph_path)?;

    ctx.logger.info(
        "start",
        json!({
            "command": "detect",
            "graph": graph_path,
            "out": out,
            "quality_fn": config.quality_fn.as_str(),
            "resolution": config.resolution,
            "rng_seed": config.rng_seed,
        }),
    );

    let graph = CsrGraph::open(&graph_path)?;
    ctx.logger.info(
        "graph_opened",
        json!({ "node_count": graph.node_count(), "edge_count": graph.edge_count() }),
    );
    let (partition, trace) = leiden_trace(&graph, &config)?;
    for stat in &trace {
        ctx.logger.debug(
            "pass",
            json!({
                "pass": stat.pass,
                "quality": stat.quality,
                "community_count": stat.community_count,
            }),
        );
    }
    let quality = trace.last().map(|s| s.quality).unwrap_or(0.0);

    let mut tsv = Vec::new();
    write_partition_tsv(&mut tsv, &partition)?;
    ioutil::atomic_write(&out, &tsv)?;
    let sidecar = PartitionSidecar {
        quality,
        community_count: partition.community_count(),
        config,
    };
    let sidecar_path = sidecar_path_for(&out);
    ioutil::atomic_write_json(&sidecar_path, &sidecar)?;

    let summary = json!({
        "out": out,
        "sidecar": sidecar_path,
        "quality": quality,
        "community_count": partition.community_count(),
        "node_count": partition.node_count(),
        "passes": trace.len(),
    });
    ctx.logger.info("partition_written", summary.clone());
    print_json(&summary)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// mine

#[derive(Args)]
pub struct MineArgs {
    /// Vertex table the partition's node ids index into.
    #[arg(long, value_name = "FILE")]
    pub vertices: Option<PathBuf>,
    /// Seed list: one domain per line, "#" starts a comment.
    #[arg(long, value_name = "FILE")]
    pub seeds: Option<PathBuf>,
    /// Partition TSV from `detect` (extraction mode).
    #[arg(long, value_name = "FILE")]
    pub partition: Option<PathBuf>,
    /// Stored graph; required with --sweep, which re-runs detection per gamma.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Comma-separated resolutions to sweep. Emits a report of community
    /// count and extracted-set size per gamma instead of a domain-set file.
    #[arg(long, value_delimiter = ',', value_name = "G,G,...")]
    pub sweep: Vec<f64>,
    /// Which communities to keep when seeds span several: "majority" keeps
    /// the community with the most seeds, "union" keeps all of them.
    #[arg(long, value_name = "POLICY")]
    pub policy: Option<String>,
    /// Resolve a seed with no exact vertex to the lowest-id vertex of one of
    /// its subdomains (true/false).
    #[arg(long, value_name = "BOOL")]
    pub fallback_suffix: Option<bool>,
    /// Output file: domain set (extraction mode) or sweep report JSON. The
    /// sweep report always also goes to stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Quality function for --sweep detection runs: "modularity" or "cpm".
    #[arg(long, value_name = "FN")]
    pub quality: Option<String>,
    /// RNG seed for --sweep detection runs.
    #[arg(long, value_name = "SEED")]
    pub seed_rng: Option<u64>,
    /// Pass bound for --sweep detection runs.
    #[arg(long, value_name = "N")]
    pub max_passes: Option<usize>,
    /// Improvement threshold for --sweep detection runs.
    #[arg(long, value_name = "GAIN")]
    pub min_gain: Option<f64>,
}

fn mine(args: MineArgs, ctx: Ctx) -> Result<i32> {
    let vertices = required(
        args.vertices,
        ctx.config.paths.vertices.clone(),
        "--vertices (or [paths] vertices)",
    )?;
    let seeds_path = required(
        args.seeds,
        ctx.config.paths.seeds.clone(),
        "--seeds (or [paths] seeds)",
    )?;
    let policy: ExtractPolicy =
        parse_or_default(args.policy.or_else(|| ctx.config.mine.policy.clone()))?;
    let fallback = args
        .fallback_suffix
        .or(ctx.config.mine.fallback_suffix)
        .unwrap_or(true);
    let sweep = if args.sweep.is_empty() {
        ctx.config.mine.sweep.clone().unwrap_or_default()
    } else {
        args.sweep
    };
    if !sweep.is_empty() && args.partition.is_some() {
        return Err(Error::Contract(
            "--sweep re-runs detection per resolution; it cannot be combined with --partition"
                .into(),
        ));
    }
    require_input(&vertices)?;
    require_input(&seeds_path)?;

    let table = load_vertices(&vertices)?;
    let seeds = SeedList::load(&seeds_path)?;
    if seeds.is_empty() {
        return Err(Error::Contract(format!(
            "seed list {} contains no domains",
            seeds_path.display()
        )));
    }

    if !sweep.is_empty() {
        let graph_path = required(
            args.graph,
            ctx.config.paths.graph.clone(),
            "--graph (required with --sweep)",
        )?;
        let base = merge_quality_config(
            args.quality,
            Some(1.0), // placeholder; the sweep overwrites resolution per row
            args.seed_rng,
            args.max_passes,
            args.min_gain,
            &ctx.config.detect,
        )?;
        require_input(&graph_path)?;
        ctx.logger.info(
            "start",
            json!({
                "command": "mine",
                "mode": "sweep",
                "graph": graph_path,
                "seeds": seeds_path,
                "resolutions": sweep,
                "policy": policy.as_str(),
            }),
        );
        let graph = CsrGraph::open(&graph_path)?;
        let rows = sweep_resolutions(&graph, &table, &seeds, &sweep, &base, policy, fallback)?;
        for row in &rows {
            if let Some(error) = &row.error {
                ctx.logger.warn(
                    "sweep_row_failed",
                    json!({ "resolution": row.resolution, "error": error }),
                );
            }
        }
        let report = json!({
            "policy": policy.as_str(),
            "fallback_suffix": fallback,
            "quality_fn": base.quality_fn.as_str(),
            "rng_seed": base.rng_seed,
            "seed_count": seeds.len(),
            "rows": rows,
        });
        if let Some(out) = &args.out {
            let mut bytes = serde_json::to_vec_pretty(&report)
                .map_err(|e| Error::Internal(format!("report serialization failed: {e}")))?;
            bytes.push(b'\n');
            ioutil::atomic_write(out, &bytes)?;
            ctx.logger
                .info("sweep_report_written", json!({ "out": out }));
        }
        print_json(&report)?;
        return Ok(0);
    }

    // Extraction mode: one partition, one domain set.
    let partition_path = required(
        args.partition,
        ctx.config.paths.partition.clone(),
        "--partition (or [paths] partition)",
    )?;
    let out = required(
        args.out,
        ctx.config.paths.domains.clone(),
        "--out (or [paths] domains)",
    )?;
    require_input(&partition_path)?;
    ctx.logger.info(
        "start",
        json!({
            "command": "mine",
            "mode": "extract",
            "partition": partition_path,
            "seeds": seeds_path,
            "out": out,
            "policy": policy.as_str(),
        }),
    );

    let partition = load_partition(&partition_path)?;
    // The detect sidecar, when present, pins the resolution into provenance.
    let sidecar_path = sidecar_path_for(&partition_path);
    let resolution = match std::fs::read(&sidecar_path) {
        Ok(bytes) => match serde_json::from_slice::<PartitionSidecar>(&bytes) {
            Ok(sidecar) => Some(sidecar.config.resolution),
            Err(e) => {
                ctx.logger.warn(
                    "sidecar_unreadable",
                    json!({ "path": sidecar_path, "error": e.to_string() }),
                );
                None
            }
        },
        Err(_) => None,
    };

    let resolved = resolve_seeds(&table, &seeds, fallback)?;
    let unresolved: Vec<&str> = resolved
        .iter()
        .filter(|r| r.node_id().is_none())
        .map(|r| r.seed.as_str())
        .collect();
    for seed in &unresolved {
        ctx.logger.warn("seed_unresolved", json!({ "seed": seed }));
    }
    let seed_nodes: Vec<u64> = resolved.iter().filter_map(|r| r.node_id()).collect();
    let set = extract_community(
        &partition,
        &table,
        &seed_nodes,
        policy,
        Some(ProvenanceContext {
            resolution,
            seed_list_sha256: seeds.sha256_hex(),
        }),
    )?;

    let mut text = Vec::new();
    set.write_text(&mut text)?;
    ioutil::atomic_write(&out, &text)?;
    let provenance = set
        .provenance
        .as_ref()
        .expect("provenance context supplied");
    let provenance_path = sidecar_path_for(&out);
    ioutil::atomic_write_json(&provenance_path, provenance)?;

    let summary = json!({
        "out": out,
        "provenance": provenance_path,
        "set_size": set.len(),
        "policy": policy.as_str(),
        "community_ids": provenance.community_ids,
        "seeds": resolved,
        "unresolved_seeds": unresolved.len(),
    });
    ctx.logger.info(
        "domain_set_written",
        json!({ "out": out, "set_size": set.len(), "unresolved_seeds": unresolved.len() }),
    );
    print_json(&summary)?;
    // Partial resolution is visible but not fatal: outputs exist, exit 1.
    Ok(if unresolved.is_empty() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// filter

#[derive(Args)]
pub struct FilterArgs {
    /// Domain-set file: one host per line.
    #[arg(long, value_name = "FILE")]
    pub domains: Option<PathBuf>,
    /// Input JSONL corpus (plain text or gzip).
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Output JSONL corpus; kept records are copied byte-for-byte.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Host matching: "suffix" (members also match their subdomains) or
    /// "exact".
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,
    /// Token counter stamped into the stats: "whitespace" or "bytes".
    #[arg(long, value_name = "COUNTER")]
    pub token_counter: Option<String>,
    /// Checkpoint file. If it exists the run resumes after the last
    /// checkpointed record; on success it is removed.
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Input records between checkpoints.
    #[arg(long, value_name = "N")]
    pub checkpoint_interval: Option<u64>,
}

/// Stats for stdout: the per-domain map is replaced by a top-20 list so the
/// report is bounded and deterministically ordered.
fn filter_stats_json(stats: &FilterStats) -> Result<serde_json::Value> {
    let mut value = serde_json::to_value(stats)
        .map_err(|e| Error::Internal(format!("stats serialization failed: {e}")))?;
    let object = value
        .as_object_mut()
        .ok_or_else(|| Error::Internal("filter stats did not serialize to an object".into()))?;
    object.remove("per_domain_counts");
    let top: Vec<serde_json::Value> = stats
        .top_domains(20)
        .into_iter()
        .map(|(domain, records)| json!({ "domain": domain, "records": records }))
        .collect();
    object.insert("top_domains".into(), json!(top));
    Ok(value)
}

fn filter(args: FilterArgs, ctx: Ctx) -> Result<i32> {
    let domains = required(
        args.domains,
        ctx.config.paths.domains.clone(),
        "--domains (or [paths] domains)",
    )?;
    let input = required(
        args.input,
        ctx.config.paths.corpus_in.clone(),
        "--in (or [paths] corpus_in)",
    )?;
    let out = required(
        args.out,
        ctx.config.paths.corpus_out.clone(),
        "--out (or [paths] corpus_out)",
    )?;
    let mode: MatchMode = parse_or_default(args.mode.or_else(|| ctx.config.filter.mode.clone()))?;
    let counter: TokenCounter = parse_or_default(
        args.token_counter
            .or_else(|| ctx.config.filter.token_counter.clone()),
    )?;
    let checkpoint_path = args
        .checkpoint
        .or_else(|| ctx.config.filter.checkpoint.clone());
    require_input(&domains)?;
    require_input(&input)?;

    ctx.logger.info(
        "start",
        json!({
            "command": "filter",
            "domains": domains,
            "in": input,
            "out": out,
            "mode": mode.as_str(),
            "token_counter": counter.name(),
        }),
    );

    let set = DomainSet::load(&domains)?;
    ctx.logger
        .info("domain_set_loaded", json!({ "members": set.len() }));

    let stats = match checkpoint_path {
        Some(path) => {
            let interval = args
                .checkpoint_interval
                .or(ctx.config.filter.checkpoint_interval)
                .unwrap_or(10_000);
            log_resume_point(&ctx.logger, &path);
            let spec = CheckpointSpec {
                path,
                interval_records: interval,
            };
            filter_file(&input, &out, &set, mode, counter, Some(&spec))?
        }
        None => {
            let reader = ioutil::open_text(&input)?;
            let reader = BufReader::new(ProgressReader::new(
                reader,
                ctx.logger,
                "filter",
                ctx.progress_every,
            ));
            let mut writer = create_output(&out)?;
            filter_stream(reader, &mut writer, &set, mode, counter)?
        }
    };

    let summary = filter_stats_json(&stats)?;
    ctx.logger.info(
        "filtered",
        json!({ "records_in": stats.records_in, "records_out": stats.records_out }),
    );
    print_json(&summary)?;
    Ok(0)
}

/// Logs where a checkpointed run will resume, if a checkpoint exists.
fn log_resume_point(logger: &Logger, path: &Path) {
    let Ok(bytes) = std::fs::read(path) else {
        return;
    };
    if let Ok(value) = serde_json::from_slice::<serde_json::Value>(&bytes) {
        logger.info(
            "resuming",
            json!({ "checkpoint": path, "offset_records": value.get("offset_records") }),
        );
    }
}

// ---------------------------------------------------------------------------
// dedup

#[derive(Args)]
pub struct DedupArgs {
    /// Input JSONL corpus (plain text or gzip).
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Output JSONL corpus; first occurrence of each text is kept verbatim.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Token counter stamped into the stats: "whitespace" or "bytes".
    #[arg(long, value_name = "COUNTER")]
    pub token_counter: Option<String>,
    /// Checkpoint file (a ".digests" sibling snapshots the seen-text state).
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Input records between checkpoints.
    #[arg(long, value_name = "N")]
    pub checkpoint_interval: Option<u64>,
}

fn dedup(args: DedupArgs, ctx: Ctx) -> Result<i32> {
    let input = required(
        args.input,
        ctx.config.paths.corpus_in.clone(),
        "--in (or [paths] corpus_in)",
    )?;
    let out = required(
        args.out,
        ctx.config.paths.corpus_out.clone(),
        "--out (or [paths] corpus_out)",
    )?;
    let counter: TokenCounter = parse_or_default(
        args.token_counter
            .or_else(|| ctx.config.filter.token_counter.clone()),
    )?;
    let checkpoint_path = args
        .checkpoint
        .or_else(|| ctx.config.filter.checkpoint.clone());
    require_input(&input)?;

    ctx.logger.info(
        "start",
        json!({ "command": "dedup", "in": input, "out": out, "token_counter": counter.name() }),
    );

    let stats: DedupStats = match checkpoint_path {
        Some(path) => {
            let interval = args
                .checkpoint_interval
                .or(ctx.config.filter.checkpoint_interval)
                .unwrap_or(10_000);
            log_resume_point(&ctx.logger, &path);
            let spec = CheckpointSpec {
                path,
                interval_records: interval,
            };
            dedup_file(&input, &out, counter, Some(&spec))?
        }
        None => {
            let reader = ioutil::open_text(&input)?;
            let reader = BufReader::new(ProgressReader::new(
                reader,
                ctx.logger,
                "dedup",
                ctx.progress_every,
            ));
            let mut writer = create_output(&out)?;
            dedup_stream(reader, &mut writer, counter)?
        }
    };

    let summary = serde_json::to_value(&stats)
        .map_err(|e| Error::Internal(format!("stats serialization failed: {e}")))?;
    ctx.logger.info(
        "deduplicated",
        json!({
            "records_in": stats.records_in,
            "records_out": stats.records_out,
            "duplicates_removed": stats.duplicates_removed,
        }),
    );
    print_json(&summary)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// stats

#[derive(Args)]
pub struct StatsArgs {
    /// JSONL corpora to summarize; each becomes one report row named by its
    /// file stem.
    pub corpora: Vec<PathBuf>,
    /// Token counter: "whitespace" or "bytes".
    #[arg(long, value_name = "COUNTER")]
    pub token_counter: Option<String>,
}

fn stats(args: StatsArgs, ctx: Ctx) -> Result<i32> {
    let corpora = if args.corpora.is_empty() {
        ctx.config
            .paths
            .corpus_in
            .clone()
            .map(|p| vec![p])
            .unwrap_or_default()
    } else {
        args.corpora
    };
    if corpora.is_empty() {
        return Err(Error::Contract(
            "no corpus files given (pass them as arguments, or set [paths] corpus_in)".into(),
        ));
    }
    let counter: TokenCounter = parse_or_default(
        args.token_counter
            .or_else(|| ctx.config.filter.token_counter.clone()),
    )?;
    for path in &corpora {
        require_input(path)?;
    }

    ctx.logger.info(
        "start",
        json!({ "command": "stats", "corpora": corpora, "token_counter": counter.name() }),
    );

    let mut rows = Vec::with_capacity(corpora.len());
    for path in &corpora {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let reader = ioutil::open_text(path)?;
        let reader = BufReader::new(ProgressReader::new(
            reader,
            ctx.logger,
            "stats",
            ctx.progress_every,
        ));
        rows.push(corpus_stats(reader, &name, counter)?);
    }
    let report = CorpusReport {
        token_counter: counter.name().to_string(),
        corpora: rows,
    };
    let summary = serde_json::to_value(&report)
        .map_err(|e| Error::Internal(format!("report serialization failed: {e}")))?;
    print_json(&summary)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// overlap

#[derive(Args)]
pub struct OverlapArgs {
    /// First domain-set file.
    pub set_a: PathBuf,
    /// Second domain-set file.
    pub set_b: PathBuf,
}

fn overlap_cmd(args: OverlapArgs, ctx: Ctx) -> Result<i32> {
    require_input(&args.set_a)?;
    require_input(&args.set_b)?;
    ctx.logger.info(
        "start",
        json!({ "command": "overlap", "set_a": args.set_a, "set_b": args.set_b }),
    );
    let a = DomainSet::load(&args.set_a)?;
    let b = DomainSet::load(&args.set_b)?;
    let stats = overlap(&a, &b);
    let summary = serde_json::to_value(stats)
        .map_err(|e| Error::Internal(format!("report serialization failed: {e}")))?;
    print_json(&summary)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// validate

#[derive(Args)]
pub struct ValidateArgs {
    /// Stored graph file to check.
    pub graph: Option<PathBuf>,
}

fn validate(args: ValidateArgs, ctx: Ctx) -> Result<i32> {
    let path = required(
        args.graph,
        ctx.config.paths.graph.clone(),
        "<GRAPH> (or [paths] graph)",
    )?;
    require_input(&path)?;
    ctx.logger
        .info("start", json!({ "command": "validate", "graph": path }));
    let graph = CsrGraph::open(&path)?;
    let report = validate_csr(&graph)?;
    let summary = json!({
        "path": path,
        "node_count": graph.node_count(),
        "edge_count": graph.edge_count(),
        "clean": report.is_clean(),
        "violations": report.violations,
    });
    print_json(&summary)?;
    if report.is_clean() {
        Ok(0)
    } else {
        ctx.logger.error(
            "graph_invalid",
            json!({ "path": path, "violations": report.violations.len() }),
        );
        // A stored file contradicting its own header is a broken internal
        // invariant of the artifact, not a usage or I/O failure.
        Ok(4)
    }
}
