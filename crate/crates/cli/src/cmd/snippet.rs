//! `htmlforge snippet`: clean and anchor one page, then extract
//! budget-bounded snippets around the requested data-ref anchors.

use std::fs;
use std::path::PathBuf;

use htmlforge_core::dom::{annotate_refs, clean, parse, CleaningConfig, HtmlTokenizer};
use htmlforge_core::snippet::{batch_extract, SnippetError};
use serde::{Deserialize, Serialize};

use crate::run::{finish, parse_config, require_input, resolved_json, Failure, RunManifest};

const DEFAULT_BUDGET: usize = 64;

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnippetCliConfig {
    pub refs: Vec<u32>,
    pub budget: usize,
}

impl Default for SnippetCliConfig {
    fn default() -> Self {
        SnippetCliConfig { refs: Vec::new(), budget: DEFAULT_BUDGET }
    }
}

fn map_snippet_error(err: SnippetError) -> Failure {
    match err {
        SnippetError::UnknownRef(_) | SnippetError::AllRefsFailed(_) => {
            Failure::domain("retriever-error", err.to_string())
        }
        SnippetError::BudgetTooSmall { .. } | SnippetError::NoRefs => {
            Failure::config_invalid(err.to_string())
        }
    }
}

pub struct SnippetArgs<'a> {
    pub input: &'a str,
    pub refs: &'a [u32],
    pub budget: Option<usize>,
    pub output: Option<&'a PathBuf>,
    pub seed: u64,
    pub config: Option<&'a str>,
}

pub fn run(args: SnippetArgs<'_>) -> Result<(), Failure> {
    let mut cli_config: SnippetCliConfig = parse_config(args.config)?;
    if !args.refs.is_empty() {
        cli_config.refs = args.refs.to_vec();
    }
    if let Some(budget) = args.budget {
        cli_config.budget = budget;
    }
    if cli_config.refs.is_empty() {
        return Err(Failure::config_invalid(
            "refs: required (comma-separated data-ref anchors)",
        ));
    }
    let resolved = resolved_json(&cli_config);
    let mut manifest = RunManifest::new("snippet", &resolved, args.seed);
    manifest.inputs.push(args.input.to_string());

    require_input(args.input)?;
    let html = fs::read_to_string(args.input)
        .map_err(|e| Failure::domain("input-invalid", format!("read {}: {e}", args.input)))?;
    let doc = annotate_refs(&clean(&parse(&html), &CleaningConfig::default()));

    let batch = batch_extract(&doc, &cli_config.refs, cli_config.budget, &HtmlTokenizer)
        .map_err(map_snippet_error)?;
    if !batch.failed_refs.is_empty() {
        log::warn!("{} of {} refs failed to resolve", batch.failed_refs.len(), cli_config.refs.len());
    }

    let mut snippets_jsonl = String::new();
    for snippet in &batch.snippets {
        snippets_jsonl.push_str(&snippet.to_json().to_string());
        snippets_jsonl.push('\n');
    }

    manifest.count("refs", cli_config.refs.len() as u64);
    manifest.count("snippets", batch.snippets.len() as u64);
    manifest.count("failed-refs", batch.failed_refs.len() as u64);
    manifest.count("budget", cli_config.budget as u64);

    match args.output {
        Some(dir) => {
            println!(
                "snippet: {} snippets for {} refs within {} tokens",
                batch.snippets.len(),
                cli_config.refs.len(),
                cli_config.budget
            );
            finish(Some(dir), manifest, &[("snippets.jsonl", &snippets_jsonl)])
        }
        None => {
            print!("{snippets_jsonl}");
            finish(None, manifest, &[])
        }
    }
}
