//! Instruction templating: `<placeholder>` slot-filling with seeded sampling.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::AgentError;

/// An instruction template with `<placeholder>` slots and candidate values per slot.
///
/// Example: `"Show me the way from <start> to <goal> by <n-th> <transportation> at map website."`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionTemplate {
    /// Template text containing zero or more `<placeholder>` slots.
    pub template: String,
    /// Candidate values per placeholder name. Every placeholder occurring in
    /// `template` must have a non-empty candidate list.
    pub slot_values: BTreeMap<String, Vec<String>>,
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<([A-Za-z0-9_-]+)>").expect("static regex"))
}

impl InstructionTemplate {
    pub fn new(template: impl Into<String>, slot_values: BTreeMap<String, Vec<String>>) -> Self {
        Self { template: template.into(), slot_values }
    }

    /// Distinct placeholder names in order of first occurrence.
    pub fn placeholders(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for cap in placeholder_re().captures_iter(&self.template) {
            let name = cap[1].to_string();
            if !seen.contains(&name) {
                seen.push(name);
            }
        }
        seen
    }

    /// Checks that every placeholder has a non-empty candidate list.
    pub fn validate(&self) -> Result<(), AgentError> {
        for name in self.placeholders() {
            match self.slot_values.get(&name) {
                Some(values) if !values.is_empty() => {}
                _ => return Err(AgentError::UnknownPlaceholder(name)),
            }
        }
        Ok(())
    }
}

/// Instantiates a template by sampling one candidate per distinct placeholder.
///
/// Every occurrence of the same placeholder receives the same sampled value.
/// Deterministic for a fixed RNG state. Errors if a placeholder has no
/// candidate list (or an empty one).
pub fn sample_instruction<R: Rng + ?Sized>(
    t: &InstructionTemplate,
    rng: &mut R,
) -> Result<String, AgentError> {
    t.validate()?;
    let mut chosen: BTreeMap<String, String> = BTreeMap::new();
    for name in t.placeholders() {
        let values = &t.slot_values[&name];
        let pick = values[rng.random_range(0..values.len())].clone();
        chosen.insert(name, pick);
    }
    let out = placeholder_re().replace_all(&t.template, |cap: &regex::Captures<'_>| {
        chosen[&cap[1]].clone()
    });
    Ok(out.into_owned())
}

/// Lowercase-alphanumeric slug: runs of alphanumeric characters joined by `-`.
///
/// Used as the convention linking spoken element names to fixture element ids:
/// `"max rent"` → `"max-rent"`, `"r/Python"` → `"r-python"`,
/// `"Info | Mod Post"` → `"info-mod-post"`, `"1+"` → `"1"`.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    let mut pending_sep = false;
    for ch in name.chars() {
        if ch.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('-');
            }
            pending_sep = false;
            for lower in ch.to_lowercase() {
                out.push(lower);
            }
        } else {
            pending_sep = true;
        }
    }
    out
}
