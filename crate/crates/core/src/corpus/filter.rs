//! Document filtering.
//!
//! Two drop rules: bodies that do not decode as UTF-8, and documents whose
//! text (all text runs after markup is stripped, script and style bodies
//! included) contains nothing but alphanumeric characters and whitespace.
//! The second rule reads an empty text as vacuously alphanumeric-only, so
//! text-free pages are dropped too.

use super::{CorpusRecord, RawRecord};
use crate::dom::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    NonUnicode,
    AlphanumericOnly,
}

impl DropReason {
    pub fn label(&self) -> &'static str {
        match self {
            DropReason::NonUnicode => "non-unicode",
            DropReason::AlphanumericOnly => "alphanumeric-only",
        }
    }
}

impl std::fmt::Display for DropReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Keep/drop decision for one record.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterOutcome {
    Keep(CorpusRecord),
    Drop { doc_id: String, reason: DropReason },
}

/// Decide whether a raw record enters the corpus.
pub fn filter_doc(record: &RawRecord) -> FilterOutcome {
    let drop = |reason| FilterOutcome::Drop {
        doc_id: record.doc_id.clone(),
        reason,
    };
    let Ok(html) = std::str::from_utf8(&record.body) else {
        return drop(DropReason::NonUnicode);
    };
    let text = parse(html).text_content();
    if text
        .chars()
        .all(|c| c.is_alphanumeric() || c.is_whitespace())
    {
        return drop(DropReason::AlphanumericOnly);
    }
    FilterOutcome::Keep(CorpusRecord {
        doc_id: record.doc_id.clone(),
        url: record.url.clone(),
        html: html.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(body: &[u8]) -> RawRecord {
        RawRecord {
            doc_id: "doc".to_string(),
            url: Some("http://example.com/".to_string()),
            body: body.to_vec(),
        }
    }

    #[test]
    fn invalid_utf8_is_dropped() {
        let outcome = filter_doc(&raw(&[0x3c, 0x70, 0x3e, 0xff]));
        assert!(matches!(
            outcome,
            FilterOutcome::Drop {
                reason: DropReason::NonUnicode,
                ..
            }
        ));
    }

    #[test]
    fn alphanumeric_only_text_is_dropped() {
        for body in [
            "abc123",
            "<div>abc 123</div>",
            "<p>words without marks</p>",
            "<div><span></span></div>",
            "",
        ] {
            let outcome = filter_doc(&raw(body.as_bytes()));
            assert!(
                matches!(
                    outcome,
                    FilterOutcome::Drop {
                        reason: DropReason::AlphanumericOnly,
                        ..
                    }
                ),
                "expected drop for {body:?}"
            );
        }
    }

    #[test]
    fn punctuated_text_is_kept() {
        let outcome = filter_doc(&raw(b"<p>Hello, world!</p>"));
        match outcome {
            FilterOutcome::Keep(record) => {
                assert_eq!(record.doc_id, "doc");
                assert_eq!(record.html, "<p>Hello, world!</p>");
                assert_eq!(record.url.as_deref(), Some("http://example.com/"));
            }
            other => panic!("expected keep, got {other:?}"),
        }
    }

    #[test]
    fn non_ascii_punctuation_counts_as_structure() {
        // CJK ideographs are alphanumeric per Unicode; the comma is not.
        assert!(matches!(
            filter_doc(&raw("<p>中文 123</p>".as_bytes())),
            FilterOutcome::Drop { .. }
        ));
        assert!(matches!(
            filter_doc(&raw("<p>中文、123</p>".as_bytes())),
            FilterOutcome::Keep(_)
        ));
    }

    #[test]
    fn decision_is_deterministic() {
        let record = raw(b"<p>stable? yes.</p>");
        assert_eq!(filter_doc(&record), filter_doc(&record));
    }
}
