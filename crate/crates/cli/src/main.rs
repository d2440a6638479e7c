//! `webmine`: build hyperlink graphs, detect communities, mine seed-anchored
//! domain sets, and filter JSONL corpora down to those domains.

mod commands;
mod config;
mod logging;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use webmine::Category;

use crate::logging::{LogLevel, Logger};

const EXIT_USAGE: i32 = 2;
const EXIT_IO: i32 = 3;
const EXIT_INTERNAL: i32 = 4;

#[derive(Parser)]
#[command(
    name = "webmine",
    version,
    about = "Web-graph community mining and corpus filtering pipeline",
    after_help = "Exit codes: 0 success, 2 usage or validation error, 3 I/O error, \
                  4 internal invariant violation."
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<std::path::PathBuf>,
    /// Stderr log verbosity (one JSON object per line).
    #[arg(long, global = true, value_enum, value_name = "LEVEL")]
    log_level: Option<LogLevel>,
    /// Worker threads where a stage supports them (1 = fully sequential;
    /// outputs are identical at any value).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Emit a progress log line every N input records (at info level).
    #[arg(long, global = true, value_name = "N")]
    progress_every: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a memory-mapped CSR graph from vertex and edge files.
    BuildGraph(commands::BuildGraphArgs),
    /// Detect communities in a stored graph (deterministic, seeded).
    Detect(commands::DetectArgs),
    /// Resolve seed domains and extract their community as a domain set.
    Mine(commands::MineArgs),
    /// Keep corpus records whose URL host matches a domain set.
    Filter(commands::FilterArgs),
    /// Drop corpus records whose text content was already seen.
    Dedup(commands::DedupArgs),
    /// Summarize JSONL corpora: examples, tokens, unique hosts.
    Stats(commands::StatsArgs),
    /// Compare two domain sets: sizes, intersection, Jaccard.
    Overlap(commands::OverlapArgs),
    /// Check a stored graph against every invariant its header claims.
    Validate(commands::ValidateArgs),
}

fn main() {
    let cli = Cli::parse();
    let code = match commands::execute(cli) {
        Ok(code) => code,
        Err(e) => {
            Logger::new(LogLevel::Error).error("fatal", json!({ "error": e.to_string() }));
            match e.category() {
                Category::Input => EXIT_USAGE,
                Category::Io => EXIT_IO,
                Category::Internal => EXIT_INTERNAL,
            }
        }
    };
    std::process::exit(code);
}
