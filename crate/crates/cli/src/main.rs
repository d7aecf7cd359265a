//! `htmlforge` — batch front end for the corpus, denoising, attention-layout,
//! snippet, and agent pipelines.
//!
//! Every run emits a manifest recording the command, resolved-config hash,
//! seed, inputs, outputs, and counters; identical invocations produce
//! byte-identical artifacts. Exit codes: 0 ok, 2 config/usage error,
//! 3 domain error, 1 internal error. Failures print one machine-readable
//! JSON line (`{"error": code, "message": ...}`) to stderr. Set
//! `HTMLFORGE_LOG` (error/warn/info/debug/trace) to control diagnostics.

mod cmd;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::run::Failure;

#[derive(Debug, Parser)]
#[command(name = "htmlforge", version, about = "HTML corpus engineering toolkit")]
struct Cli {
    /// Base seed for all randomness; equal seeds reproduce runs exactly.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for data-parallel stages (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Inline JSON overriding the subcommand's default configuration.
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest a directory or WARC file into a cleaned, anchored corpus.
    Corpus(CorpusArgs),
    /// Generate mixture-of-denoisers examples from a corpus JSONL file.
    Denoise(DenoiseArgs),
    /// Build a local/transient-global attention layout.
    Layout(LayoutArgs),
    /// Extract budget-bounded snippets around data-ref anchors in a page.
    Snippet(SnippetArgs),
    /// Run task instructions over a fixture site and print the score table.
    Agent(AgentArgs),
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Directory of .html files, or a WARC file (optionally gzip-compressed).
    #[arg(long)]
    input: String,
    /// Directory receiving corpus.jsonl, stats.json, and manifest.json.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    /// Corpus JSONL file as written by the corpus subcommand.
    #[arg(long)]
    input: String,
    /// Directory receiving examples.jsonl and manifest.json.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct LayoutArgs {
    /// Sequence length in tokens.
    #[arg(long = "L", value_name = "TOKENS")]
    l: Option<usize>,
    /// Local attention radius (default 127).
    #[arg(long = "r", value_name = "TOKENS")]
    r: Option<usize>,
    /// Tokens per transient-global block (default 16).
    #[arg(long = "k", value_name = "TOKENS")]
    k: Option<usize>,
    /// Directory receiving layout.json, layout.coo, and manifest.json.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SnippetArgs {
    /// HTML page to clean, anchor, and extract from.
    #[arg(long)]
    input: String,
    /// data-ref anchors to extract around.
    #[arg(long, value_delimiter = ',', value_name = "REF,...")]
    refs: Vec<u32>,
    /// Total token budget across all requested refs (default 64).
    #[arg(long)]
    budget: Option<usize>,
    /// Directory receiving snippets.jsonl and manifest.json.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AgentArgs {
    /// Task definition JSON file.
    #[arg(long, visible_alias = "task")]
    input: String,
    /// File with one instruction per line; defaults to sampling from the
    /// task's templates.
    #[arg(long)]
    instructions: Option<String>,
    /// Number of instructions to sample when no file is given.
    #[arg(long)]
    sample: Option<usize>,
    /// Directory receiving runs.jsonl, episodes.jsonl, demos.jsonl, and
    /// manifest.json.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[cfg(feature = "parallel")]
fn configure_jobs(jobs: usize) {
    if jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            log::debug!("thread pool already configured: {e}");
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_jobs(jobs: usize) {
    if jobs > 0 {
        log::debug!("--jobs {jobs} ignored: sequential build");
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Corpus(args) => {
            cmd::corpus::run(&args.input, &args.output, cli.seed, cli.config.as_deref())
        }
        Command::Denoise(args) => {
            cmd::denoise::run(&args.input, &args.output, cli.seed, cli.config.as_deref())
        }
        Command::Layout(args) => cmd::layout::run(cmd::layout::LayoutArgs {
            l: args.l,
            r: args.r,
            k: args.k,
            output: args.output.as_ref(),
            seed: cli.seed,
            config: cli.config.as_deref(),
        }),
        Command::Snippet(args) => cmd::snippet::run(cmd::snippet::SnippetArgs {
            input: &args.input,
            refs: &args.refs,
            budget: args.budget,
            output: args.output.as_ref(),
            seed: cli.seed,
            config: cli.config.as_deref(),
        }),
        Command::Agent(args) => cmd::agent::run(cmd::agent::AgentArgs {
            input: &args.input,
            instructions: args.instructions.as_deref(),
            sample: args.sample,
            output: args.output.as_ref(),
            seed: cli.seed,
            config: cli.config.as_deref(),
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HTMLFORGE_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    configure_jobs(cli.jobs);
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.to_json_line());
            ExitCode::from(failure.exit as u8)
        }
    }
}
