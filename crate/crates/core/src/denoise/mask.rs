//! Applying a mask to a token sequence.
//!
//! The i-th span is replaced in the input by the sentinel `<extra_id_i>`;
//! the target lists each sentinel followed by the tokens it hid and ends
//! with one trailing sentinel. Source tokens that already look like
//! sentinels are escaped with a leading backslash (and un-escaped by
//! [`reconstruct`]), so the mapping stays invertible on any input.

use std::sync::OnceLock;

use regex::Regex;

use super::{DenoiseError, DenoisingExample, Objective, SpanMask};
use crate::dom::TokenSeq;

/// Largest span count one example may carry (sentinel vocabulary size).
pub const MAX_SPANS: usize = 100;

/// The i-th sentinel token.
pub fn sentinel(i: usize) -> String {
    format!("<extra_id_{i}>")
}

/// Matches sentinels and already-escaped forms of them.
fn sentinel_like() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\\*<extra_id_[0-9]+>$").expect("valid pattern"))
}

fn escape_token(token: &str, escaped: &mut usize) -> String {
    if sentinel_like().is_match(token) {
        *escaped += 1;
        format!("\\{token}")
    } else {
        token.to_string()
    }
}

fn unescape_token(token: &str) -> String {
    match token.strip_prefix('\\') {
        Some(rest) if sentinel_like().is_match(rest) => rest.to_string(),
        _ => token.to_string(),
    }
}

/// Index of an (unescaped) sentinel token, if this is one.
fn sentinel_index(token: &str) -> Option<usize> {
    token
        .strip_prefix("<extra_id_")?
        .strip_suffix('>')?
        .parse()
        .ok()
}

/// Replace masked spans with sentinels and build the target sequence.
/// The result is untruncated; see [`truncate_example`].
pub fn apply_mask(
    seq: &TokenSeq,
    mask: &SpanMask,
    objective: Objective,
) -> Result<DenoisingExample, DenoiseError> {
    mask.validate(seq.tokens.len())?;
    if mask.spans.len() > MAX_SPANS {
        return Err(DenoiseError::TooManySpans {
            spans: mask.spans.len(),
            cap: MAX_SPANS,
        });
    }
    let mut escaped = 0usize;
    let mut input = Vec::with_capacity(seq.tokens.len());
    let mut target = Vec::with_capacity(mask.total_masked() + mask.spans.len() + 1);
    let mut pos = 0usize;
    for (i, span) in mask.spans.iter().enumerate() {
        for token in &seq.tokens[pos..span.start] {
            input.push(escape_token(token, &mut escaped));
        }
        input.push(sentinel(i));
        target.push(sentinel(i));
        for token in &seq.tokens[span.start..span.end()] {
            target.push(escape_token(token, &mut escaped));
        }
        pos = span.end();
    }
    for token in &seq.tokens[pos..] {
        input.push(escape_token(token, &mut escaped));
    }
    if !mask.spans.is_empty() {
        target.push(sentinel(mask.spans.len()));
    }
    Ok(DenoisingExample {
        doc_id: seq.doc_id.clone(),
        objective,
        input_tokens: input,
        target_tokens: target,
        mask: mask.clone(),
        escaped_sentinels: escaped,
        truncated_input: false,
        truncated_target: false,
    })
}

/// Span contents keyed by sentinel index, read back out of a target.
fn split_target(target: &[String], span_count: usize) -> Vec<Vec<String>> {
    let mut buckets: Vec<Vec<String>> = Vec::new();
    for token in target {
        if sentinel_index(token).is_some() {
            buckets.push(Vec::new());
        } else if let Some(last) = buckets.last_mut() {
            last.push(token.clone());
        }
    }
    buckets.truncate(span_count);
    buckets
}

/// Enforce the input and output length limits. When the input is cut, the
/// target is rebuilt from the spans whose sentinels survived, so sentinel
/// numbering stays aligned with what the input still shows. Prefix examples
/// and empty masks are cut directly.
pub fn truncate_example(
    example: &DenoisingExample,
    input_len: usize,
    output_len: usize,
) -> DenoisingExample {
    let mut out = example.clone();
    if out.input_tokens.len() > input_len {
        out.input_tokens.truncate(input_len);
        out.truncated_input = true;
        if !out.mask.spans.is_empty() {
            let surviving = out
                .input_tokens
                .iter()
                .filter(|t| sentinel_index(t).is_some())
                .count();
            let contents = split_target(&example.target_tokens, example.mask.spans.len());
            let mut target = Vec::new();
            for (i, content) in contents.iter().take(surviving).enumerate() {
                target.push(sentinel(i));
                target.extend(content.iter().cloned());
            }
            if surviving > 0 {
                target.push(sentinel(surviving));
            }
            out.target_tokens = target;
            out.mask.spans.truncate(surviving);
        }
    }
    if out.target_tokens.len() > output_len {
        out.target_tokens.truncate(output_len);
        out.truncated_target = true;
    }
    out
}

/// Splice the target spans back into the input. For an untruncated span
/// example this is exactly the source token sequence; for a truncated one
/// it rebuilds the surviving prefix.
pub fn reconstruct(example: &DenoisingExample) -> Vec<String> {
    if example.objective == Objective::Prefix {
        let mut out: Vec<String> = example.input_tokens.clone();
        out.extend(example.target_tokens.iter().cloned());
        return out;
    }
    let contents = split_target(&example.target_tokens, example.mask.spans.len());
    let mut out = Vec::new();
    for token in &example.input_tokens {
        match sentinel_index(token) {
            Some(i) => {
                if let Some(content) = contents.get(i) {
                    out.extend(content.iter().map(|t| unescape_token(t)));
                }
            }
            None => out.push(unescape_token(token)),
        }
    }
    out
}
