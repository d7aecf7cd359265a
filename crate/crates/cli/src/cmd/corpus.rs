//! `htmlforge corpus`: ingest a directory or WARC file, filter, clean,
//! annotate, extract label subtrees, and write the corpus plus its stats.

use std::io::ErrorKind;
use std::path::PathBuf;

use htmlforge_core::corpus::{build_corpus, ingest, CorpusError, CorpusSource};
use htmlforge_core::dom::{CleaningConfig, HtmlTokenizer};
use serde::{Deserialize, Serialize};

use crate::run::{finish, parse_config, require_input, resolved_json, Failure, RunManifest};

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusCliConfig {
    pub remove_tags: Vec<String>,
    pub keep_attrs: Vec<String>,
}

impl Default for CorpusCliConfig {
    fn default() -> Self {
        let defaults = CleaningConfig::default();
        CorpusCliConfig {
            remove_tags: defaults.remove_tags.into_iter().collect(),
            keep_attrs: defaults.keep_attrs.into_iter().collect(),
        }
    }
}

fn map_ingest_error(err: CorpusError, input: &str) -> Failure {
    match err {
        CorpusError::Io { ref source, .. } if source.kind() == ErrorKind::NotFound => {
            Failure::input_not_found(input)
        }
        CorpusError::Io { .. } => Failure::internal(err.to_string()),
        CorpusError::Warc { .. } => Failure::domain("malformed-warc", err.to_string()),
    }
}

pub fn run(input: &str, output: &PathBuf, seed: u64, config: Option<&str>) -> Result<(), Failure> {
    let cli_config: CorpusCliConfig = parse_config(config)?;
    let resolved = resolved_json(&cli_config);
    let mut manifest = RunManifest::new("corpus", &resolved, seed);
    manifest.inputs.push(input.to_string());

    require_input(input)?;
    let source = CorpusSource::auto(input);
    let ingested = ingest(&source).map_err(|e| map_ingest_error(e, input))?;
    log::info!("ingested {} records ({} warnings)", ingested.records.len(), ingested.warnings);

    let cleaning = CleaningConfig {
        remove_tags: cli_config.remove_tags.iter().cloned().collect(),
        keep_attrs: cli_config.keep_attrs.iter().cloned().collect(),
    };
    let build = build_corpus(&ingested.records, &HtmlTokenizer, &cleaning);

    let mut corpus_jsonl = String::new();
    let mut token_total = 0u64;
    for entry in &build.entries {
        corpus_jsonl.push_str(&entry.to_jsonl_line());
        corpus_jsonl.push('\n');
        token_total += entry.token_count;
    }
    let mut stats_json = build.stats.to_json();
    stats_json.push('\n');

    let dropped: u64 = build.drop_counts.values().map(|&n| n as u64).sum();
    manifest.count("records", ingested.records.len() as u64);
    manifest.count("warnings", ingested.warnings as u64);
    manifest.count("docs-kept", ingested.records.len() as u64 - dropped);
    for (reason, n) in &build.drop_counts {
        manifest.count(&format!("dropped-{reason}"), *n as u64);
    }
    manifest.count("entries", build.entries.len() as u64);
    manifest.count("token-total", token_total);

    println!(
        "corpus: {} entries from {} records ({} dropped, {} ingest warnings)",
        build.entries.len(),
        ingested.records.len(),
        dropped,
        ingested.warnings
    );
    finish(
        Some(output),
        manifest,
        &[("corpus.jsonl", &corpus_jsonl), ("stats.json", &stats_json)],
    )
}
