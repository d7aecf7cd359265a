//! Extractive snippets around `data-ref` anchors.
//!
//! A predicted anchor resolves to its element; context then expands two
//! levels up when the token budget allows: grandparent first, then parent,
//! then the element itself, and as a last resort the element's serialized
//! form is tail-truncated to fit. Failed lookups are retriever errors, the
//! class of fault that episode filtering downstream keys on.

use serde_json::json;
use thiserror::Error;

use crate::dom::{Document, Element, Node, Tokenizer};

#[derive(Debug, Error)]
pub enum SnippetError {
    #[error("retriever error: no element with data-ref {0}")]
    UnknownRef(u32),
    #[error("retriever error: none of the {0} requested refs resolve")]
    AllRefsFailed(usize),
    #[error("snippet budget of {budget} tokens cannot cover {refs} refs")]
    BudgetTooSmall { budget: usize, refs: usize },
    #[error("no refs requested")]
    NoRefs,
}

/// An extracted fragment. `expansion_level`: 0 element, 1 parent,
/// 2 grandparent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snippet {
    pub anchor_ref: u32,
    pub html: String,
    pub token_count: usize,
    pub expansion_level: u8,
    pub tail_truncated: bool,
}

impl Snippet {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "anchor_ref": self.anchor_ref,
            "expansion_level": self.expansion_level,
            "tail_truncated": self.tail_truncated,
            "html": self.html,
        })
    }
}

/// Output of [`batch_extract`]: snippets in request order plus the refs
/// that did not resolve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchExtract {
    pub snippets: Vec<Snippet>,
    pub failed_refs: Vec<u32>,
}

/// Find the unique element carrying the given anchor.
pub fn resolve_ref(doc: &Document, data_ref: u32) -> Result<&Element, SnippetError> {
    doc.find_by_ref(data_ref)
        .ok_or(SnippetError::UnknownRef(data_ref))
}

/// Path of child indices to the anchor element, if present.
fn path_to_ref(children: &[Node], data_ref: u32, path: &mut Vec<usize>) -> bool {
    for (i, node) in children.iter().enumerate() {
        if let Node::Element(element) = node {
            path.push(i);
            if element.data_ref == Some(data_ref)
                || path_to_ref(&element.children, data_ref, path)
            {
                return true;
            }
            path.pop();
        }
    }
    false
}

fn element_at<'a>(doc: &'a Document, path: &[usize]) -> &'a Element {
    let mut element = match &doc.children[path[0]] {
        Node::Element(e) => e,
        Node::Text(_) => unreachable!("paths only traverse elements"),
    };
    for &i in &path[1..] {
        element = match &element.children[i] {
            Node::Element(e) => e,
            Node::Text(_) => unreachable!("paths only traverse elements"),
        };
    }
    element
}

fn fragment_html(element: &Element) -> String {
    crate::dom::serialize(&Document {
        children: vec![Node::Element(element.clone())],
    })
}

/// Expand the anchor's context to the largest of {grandparent, parent,
/// element} that fits the budget, tail-truncating the element if none does.
pub fn expand_to_budget(
    doc: &Document,
    data_ref: u32,
    budget: usize,
    tokenizer: &dyn Tokenizer,
) -> Result<Snippet, SnippetError> {
    if budget == 0 {
        return Err(SnippetError::BudgetTooSmall { budget, refs: 1 });
    }
    let mut path = Vec::new();
    if !path_to_ref(&doc.children, data_ref, &mut path) {
        return Err(SnippetError::UnknownRef(data_ref));
    }
    let deepest_level = 2.min(path.len() - 1);
    for level in (0..=deepest_level).rev() {
        let ancestor = element_at(doc, &path[..path.len() - level]);
        let html = fragment_html(ancestor);
        let token_count = tokenizer.tokenize(&html).len();
        if token_count <= budget {
            return Ok(Snippet {
                anchor_ref: data_ref,
                html,
                token_count,
                expansion_level: level as u8,
                tail_truncated: false,
            });
        }
    }
    // Even the element alone is over budget: cut its token tail.
    let element = element_at(doc, &path);
    let mut tokens = tokenizer.tokenize(&fragment_html(element));
    tokens.truncate(budget);
    Ok(Snippet {
        anchor_ref: data_ref,
        html: tokenizer.detokenize(&tokens),
        token_count: tokens.len(),
        expansion_level: 0,
        tail_truncated: true,
    })
}

/// One snippet per resolvable ref, the budget split equally across refs
/// with the remainder going to the earlier ones.
pub fn batch_extract(
    doc: &Document,
    refs: &[u32],
    budget: usize,
    tokenizer: &dyn Tokenizer,
) -> Result<BatchExtract, SnippetError> {
    if refs.is_empty() {
        return Err(SnippetError::NoRefs);
    }
    if budget < refs.len() {
        return Err(SnippetError::BudgetTooSmall {
            budget,
            refs: refs.len(),
        });
    }
    let per = budget / refs.len();
    let remainder = budget % refs.len();
    let mut out = BatchExtract {
        snippets: Vec::with_capacity(refs.len()),
        failed_refs: Vec::new(),
    };
    for (i, &data_ref) in refs.iter().enumerate() {
        let ref_budget = per + usize::from(i < remainder);
        match expand_to_budget(doc, data_ref, ref_budget, tokenizer) {
            Ok(snippet) => out.snippets.push(snippet),
            Err(SnippetError::UnknownRef(_)) => out.failed_refs.push(data_ref),
            Err(other) => return Err(other),
        }
    }
    if out.snippets.is_empty() {
        return Err(SnippetError::AllRefsFailed(refs.len()));
    }
    Ok(out)
}

/// Whole-document fallback: keep the leading `budget` tokens of the
/// serialized document, no anchor resolution at all. `anchor_ref` is
/// reported as 0 and `expansion_level` as 0 in this mode.
pub fn truncate_only(
    doc: &Document,
    budget: usize,
    tokenizer: &dyn Tokenizer,
) -> Result<Snippet, SnippetError> {
    if budget == 0 {
        return Err(SnippetError::BudgetTooSmall { budget, refs: 1 });
    }
    let html = crate::dom::serialize(doc);
    let mut tokens = tokenizer.tokenize(&html);
    let tail_truncated = tokens.len() > budget;
    tokens.truncate(budget);
    Ok(Snippet {
        anchor_ref: 0,
        html: if tail_truncated {
            tokenizer.detokenize(&tokens)
        } else {
            html
        },
        token_count: tokens.len(),
        expansion_level: 0,
        tail_truncated,
    })
}
