//! Element-tree model for HTML documents.
//!
//! The tree is produced by the forgiving [`parse`] function, transformed by
//! [`clean`] / [`annotate_refs`], and turned back into text by [`serialize`].
//! Values are immutable after construction; all transforms return new trees,
//! so they are safe to share across worker threads.

mod clean;
mod parse;
mod serialize;
mod token;

pub use clean::{annotate_refs, clean, CleaningConfig};
pub use parse::{parse, parse_bytes};
pub use serialize::serialize;
pub use token::{tokenize, HtmlTokenizer, TokenSeq, Tokenizer};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DomError {
    #[error("input is not valid UTF-8: {0}")]
    InvalidUtf8(#[from] std::str::Utf8Error),
}

/// Tags that never take children and serialize in self-closing form.
pub(crate) const VOID_TAGS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

pub(crate) fn is_void(tag: &str) -> bool {
    VOID_TAGS.contains(&tag)
}

/// A single node: an element or a run of text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

/// An element with its tag, attributes in document order, children and an
/// optional `data-ref` anchor assigned by [`annotate_refs`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    pub tag: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
    pub data_ref: Option<u32>,
}

impl Element {
    pub fn new(tag: impl Into<String>) -> Self {
        Element {
            tag: tag.into(),
            ..Default::default()
        }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn set_attr(&mut self, name: &str, value: &str) {
        match self.attrs.iter_mut().find(|(k, _)| k == name) {
            Some((_, v)) => *v = value.to_string(),
            None => self.attrs.push((name.to_string(), value.to_string())),
        }
    }

    /// Concatenated text content of the subtree, text runs joined by a space.
    pub fn text_content(&self) -> String {
        let mut parts = Vec::new();
        collect_text(&self.children, &mut parts);
        parts.join(" ")
    }
}

fn collect_text(children: &[Node], out: &mut Vec<String>) {
    for child in children {
        match child {
            Node::Text(t) => out.push(t.clone()),
            Node::Element(e) => collect_text(&e.children, out),
        }
    }
}

/// A parsed document. The implicit root holds the top-level nodes and is not
/// itself an element: it carries no tag, takes no anchor and is never
/// serialized.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub children: Vec<Node>,
}

impl Document {
    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    /// Concatenated text content of the document, runs joined by a space.
    pub fn text_content(&self) -> String {
        let mut parts = Vec::new();
        collect_text(&self.children, &mut parts);
        parts.join(" ")
    }

    /// Pre-order traversal over element nodes (text runs skipped).
    pub fn elements(&self) -> PreOrder<'_> {
        PreOrder {
            stack: self.children.iter().rev().collect(),
        }
    }

    pub fn element_count(&self) -> usize {
        self.elements().count()
    }

    /// The unique element annotated with the given `data-ref`, if any.
    pub fn find_by_ref(&self, data_ref: u32) -> Option<&Element> {
        self.elements().find(|e| e.data_ref == Some(data_ref))
    }

    pub fn find_by_id(&self, id: &str) -> Option<&Element> {
        self.elements().find(|e| e.attr("id") == Some(id))
    }
}

/// Iterator behind [`Document::elements`].
pub struct PreOrder<'a> {
    stack: Vec<&'a Node>,
}

impl<'a> Iterator for PreOrder<'a> {
    type Item = &'a Element;

    fn next(&mut self) -> Option<&'a Element> {
        while let Some(node) = self.stack.pop() {
            if let Node::Element(e) = node {
                for child in e.children.iter().rev() {
                    self.stack.push(child);
                }
                return Some(e);
            }
        }
        None
    }
}

/// Collapse whitespace runs to a single space and trim the ends.
pub(crate) fn normalize_ws(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for ch in s.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(ch);
        }
    }
    out
}
