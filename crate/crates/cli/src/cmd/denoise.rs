//! `htmlforge denoise`: turn a corpus JSONL file into mixture-of-denoisers
//! training examples.

use std::fs;
use std::path::PathBuf;

use htmlforge_core::corpus::CorpusEntry;
use htmlforge_core::denoise::{emit_mixture, BudgetPolicy, DenoiseConfig, DenoiseError};
use htmlforge_core::dom::{tokenize, HtmlTokenizer, TokenSeq};
use serde::{Deserialize, Serialize};

use crate::run::{finish, parse_config, require_input, resolved_json, Failure, RunManifest};

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseCliConfig {
    pub span_means: Vec<f64>,
    pub corruption_rate: f64,
    pub input_len: usize,
    pub output_len: usize,
    pub prefix_lm: bool,
    /// `"exact"` or `"expected-rate"`.
    pub budget: String,
}

impl Default for DenoiseCliConfig {
    fn default() -> Self {
        let defaults = DenoiseConfig::default();
        DenoiseCliConfig {
            span_means: defaults.span_means,
            corruption_rate: defaults.corruption_rate,
            input_len: defaults.input_len,
            output_len: defaults.output_len,
            prefix_lm: defaults.prefix_lm,
            budget: "exact".to_string(),
        }
    }
}

impl DenoiseCliConfig {
    fn budget_policy(&self) -> Result<BudgetPolicy, Failure> {
        match self.budget.as_str() {
            "exact" => Ok(BudgetPolicy::Exact),
            "expected-rate" => Ok(BudgetPolicy::ExpectedRate),
            other => Err(Failure::config_invalid(format!(
                "budget: expected \"exact\" or \"expected-rate\", got {other:?}"
            ))),
        }
    }
}

fn read_corpus(input: &str) -> Result<Vec<TokenSeq>, Failure> {
    let text = fs::read_to_string(input)
        .map_err(|e| Failure::internal(format!("read {input}: {e}")))?;
    let mut docs = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: CorpusEntry = serde_json::from_str(line).map_err(|e| {
            Failure::domain("corpus-parse", format!("{input} line {}: {e}", index + 1))
        })?;
        docs.push(tokenize(&entry.doc_id, &entry.subtree_html, &HtmlTokenizer));
    }
    Ok(docs)
}

fn map_denoise_error(err: DenoiseError) -> Failure {
    match err {
        DenoiseError::InvalidConfig(_) => Failure::config_invalid(err.to_string()),
        _ => Failure::domain("denoise-error", err.to_string()),
    }
}

pub fn run(input: &str, output: &PathBuf, seed: u64, config: Option<&str>) -> Result<(), Failure> {
    let cli_config: DenoiseCliConfig = parse_config(config)?;
    let budget = cli_config.budget_policy()?;
    let resolved = resolved_json(&cli_config);
    let mut manifest = RunManifest::new("denoise", &resolved, seed);
    manifest.inputs.push(input.to_string());

    require_input(input)?;
    let docs = read_corpus(input)?;

    let denoise_config = DenoiseConfig {
        span_means: cli_config.span_means.clone(),
        corruption_rate: cli_config.corruption_rate,
        input_len: cli_config.input_len,
        output_len: cli_config.output_len,
        seed,
        prefix_lm: cli_config.prefix_lm,
        budget,
    };
    let mixture = emit_mixture(&docs, &denoise_config).map_err(map_denoise_error)?;

    let mut examples_jsonl = String::new();
    for example in &mixture.examples {
        examples_jsonl.push_str(&example.to_jsonl_line());
        examples_jsonl.push('\n');
    }

    manifest.count("docs", docs.len() as u64);
    manifest.count("examples", mixture.examples.len() as u64);
    manifest.count("skipped-short", mixture.skipped_short as u64);
    for (tag, n) in &mixture.component_counts {
        manifest.count(&format!("objective-{tag}"), *n as u64);
    }

    let components: Vec<String> = mixture
        .component_counts
        .iter()
        .map(|(tag, n)| format!("{tag}={n}"))
        .collect();
    println!(
        "denoise: {} examples from {} docs ({}; {} skipped short)",
        mixture.examples.len(),
        docs.len(),
        components.join(" "),
        mixture.skipped_short
    );
    finish(Some(output), manifest, &[("examples.jsonl", &examples_jsonl)])
}
