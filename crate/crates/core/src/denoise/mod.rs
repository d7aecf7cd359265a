//! Span-corruption and prefix training examples over token sequences.
//!
//! [`emit_mixture`] is the batch entry point: each document draws one
//! objective uniformly from the configured components (the span means, plus
//! the prefix objective when enabled), samples a mask, and becomes a single
//! example. All randomness flows from a per-document generator seeded by
//! `hash(seed, doc_id)`, so results do not depend on the execution schedule
//! and identical inputs produce byte-identical output.

mod mask;
mod spans;

pub use mask::{apply_mask, reconstruct, sentinel, truncate_example, MAX_SPANS};
pub use spans::{sample_spans, sample_spans_with, BudgetPolicy, Span, SpanMask};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dom::TokenSeq;
use crate::par;

#[derive(Debug, Error)]
pub enum DenoiseError {
    #[error("invalid denoising config: {0}")]
    InvalidConfig(String),
    #[error("sequence of {len} tokens is too short for a prefix example")]
    TooShort { len: usize },
    #[error(
        "could not place spans after {attempts} attempts (length {seq_len}, budget {budget})"
    )]
    PlacementInfeasible {
        seq_len: usize,
        budget: usize,
        attempts: usize,
    },
    #[error("mask invalid for sequence of {len} tokens: {reason}")]
    InvalidMask { len: usize, reason: String },
    #[error("{spans} spans exceed the {cap}-sentinel cap")]
    TooManySpans { spans: usize, cap: usize },
}

/// The objective an example was generated under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Span corruption with the given mean span length.
    Span { mean: f64 },
    /// Prefix continuation: input is a prefix, target the rest.
    Prefix,
}

impl Objective {
    /// Stable tag used in output records: "span8", "span64", "prefix", ...
    pub fn tag(&self) -> String {
        match self {
            Objective::Prefix => "prefix".to_string(),
            Objective::Span { mean } => {
                if mean.fract() == 0.0 {
                    format!("span{}", *mean as i64)
                } else {
                    format!("span{mean}")
                }
            }
        }
    }
}

/// Generation settings. The default is the two-component long-span mixture
/// at a 15% corruption rate with 4096-token inputs and 910-token outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseConfig {
    pub span_means: Vec<f64>,
    pub corruption_rate: f64,
    pub input_len: usize,
    pub output_len: usize,
    pub seed: u64,
    pub prefix_lm: bool,
    pub budget: BudgetPolicy,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig {
            span_means: vec![8.0, 64.0],
            corruption_rate: 0.15,
            input_len: 4096,
            output_len: 910,
            seed: 0,
            prefix_lm: false,
            budget: BudgetPolicy::Exact,
        }
    }
}

impl DenoiseConfig {
    pub fn validate(&self) -> Result<(), DenoiseError> {
        let fail = |msg: String| Err(DenoiseError::InvalidConfig(msg));
        if self.span_means.is_empty() && !self.prefix_lm {
            return fail("no mixture components: span_means empty and prefix_lm off".into());
        }
        if let Some(mean) = self.span_means.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
            return fail(format!("span mean {mean} is not a positive finite number"));
        }
        if self.input_len == 0 || self.output_len == 0 {
            return fail("input_len and output_len must be positive".into());
        }
        if !self.span_means.is_empty() {
            if !(self.corruption_rate > 0.0 && self.corruption_rate < 1.0) {
                return fail(format!(
                    "corruption_rate {} outside (0, 1)",
                    self.corruption_rate
                ));
            }
            if self.corruption_rate * (self.input_len as f64) < 1.0 {
                return fail(format!(
                    "corruption_rate {} times input_len {} is below one token",
                    self.corruption_rate, self.input_len
                ));
            }
        }
        Ok(())
    }

    fn components(&self) -> Vec<Objective> {
        let mut components: Vec<Objective> = self
            .span_means
            .iter()
            .map(|&mean| Objective::Span { mean })
            .collect();
        if self.prefix_lm {
            components.push(Objective::Prefix);
        }
        components
    }
}

/// One generated example. Until [`truncate_example`] runs, splicing the
/// target spans back into the input reproduces the source tokens exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoisingExample {
    pub doc_id: String,
    pub objective: Objective,
    pub input_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
    pub mask: SpanMask,
    /// Source tokens that looked like sentinels and were escaped.
    pub escaped_sentinels: usize,
    pub truncated_input: bool,
    pub truncated_target: bool,
}

impl DenoisingExample {
    pub fn to_jsonl_line(&self) -> String {
        let value = json!({
            "doc_id": self.doc_id,
            "objective": self.objective.tag(),
            "input": self.input_tokens,
            "target": self.target_tokens,
            "truncated_input": self.truncated_input,
            "truncated_target": self.truncated_target,
        });
        serde_json::to_string(&value).expect("example serializes")
    }
}

/// Per-document generator: ChaCha seeded with SHA-256(seed, doc_id).
pub fn doc_rng(seed: u64, doc_id: &str) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(doc_id.as_bytes());
    ChaCha20Rng::from_seed(hasher.finalize().into())
}

/// Split a sequence at a uniform point in [1, len-1]: prefix in, rest out.
pub fn make_prefix_example<R: Rng + ?Sized>(
    seq: &TokenSeq,
    rng: &mut R,
) -> Result<DenoisingExample, DenoiseError> {
    let len = seq.tokens.len();
    if len < 2 {
        return Err(DenoiseError::TooShort { len });
    }
    let split = rng.random_range(1..len);
    Ok(DenoisingExample {
        doc_id: seq.doc_id.clone(),
        objective: Objective::Prefix,
        input_tokens: seq.tokens[..split].to_vec(),
        target_tokens: seq.tokens[split..].to_vec(),
        mask: SpanMask::default(),
        escaped_sentinels: 0,
        truncated_input: false,
        truncated_target: false,
    })
}

/// Batch output: examples in input order plus per-component counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureOutput {
    pub examples: Vec<DenoisingExample>,
    pub component_counts: BTreeMap<String, usize>,
    /// Documents skipped for being too short to split.
    pub skipped_short: usize,
}

/// Generate one example per document under the configured mixture.
pub fn emit_mixture(docs: &[TokenSeq], cfg: &DenoiseConfig) -> Result<MixtureOutput, DenoiseError> {
    cfg.validate()?;
    let components = cfg.components();
    collect_results(par::map_batch(docs, |doc| emit_one(doc, cfg, &components)))
}

/// Sequential twin of [`emit_mixture`] with identical output.
pub fn emit_mixture_seq(
    docs: &[TokenSeq],
    cfg: &DenoiseConfig,
) -> Result<MixtureOutput, DenoiseError> {
    cfg.validate()?;
    let components = cfg.components();
    collect_results(par::map_batch_seq(docs, |doc| emit_one(doc, cfg, &components)))
}

fn collect_results(
    results: Vec<Result<Option<DenoisingExample>, DenoiseError>>,
) -> Result<MixtureOutput, DenoiseError> {
    let mut out = MixtureOutput {
        examples: Vec::with_capacity(results.len()),
        component_counts: BTreeMap::new(),
        skipped_short: 0,
    };
    for result in results {
        match result? {
            None => out.skipped_short += 1,
            Some(example) => {
                *out.component_counts.entry(example.objective.tag()).or_insert(0) += 1;
                out.examples.push(example);
            }
        }
    }
    Ok(out)
}

fn emit_one(
    doc: &TokenSeq,
    cfg: &DenoiseConfig,
    components: &[Objective],
) -> Result<Option<DenoisingExample>, DenoiseError> {
    if doc.tokens.is_empty() {
        return Ok(None);
    }
    let mut rng = doc_rng(cfg.seed, &doc.doc_id);
    let objective = components[rng.random_range(0..components.len())];
    let example = match objective {
        Objective::Span { mean } => {
            let mask = sample_spans_with(
                doc.tokens.len(),
                mean,
                cfg.corruption_rate,
                cfg.budget,
                &mut rng,
            )?;
            apply_mask(doc, &mask, objective)?
        }
        Objective::Prefix => match make_prefix_example(doc, &mut rng) {
            Ok(example) => example,
            Err(DenoiseError::TooShort { .. }) => return Ok(None),
            Err(e) => return Err(e),
        },
    };
    Ok(Some(truncate_example(&example, cfg.input_len, cfg.output_len)))
}
