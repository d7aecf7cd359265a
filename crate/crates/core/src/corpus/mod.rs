//! Corpus construction.
//!
//! The pipeline runs ingest -> filter -> clean and annotate -> label-subtree
//! extraction -> serialize and tokenize, and reports statistics over the
//! emitted token counts. Records are processed independently (and in
//! parallel under the `parallel` feature); output order always follows
//! input order, so a build is byte-reproducible for a given source.

mod filter;
mod ingest;
mod label;
mod stats;

pub use filter::{filter_doc, DropReason, FilterOutcome};
pub use ingest::{ingest, CorpusSource, IngestOutput};
pub use label::extract_label_subtrees;
pub use stats::{compute_stats, compute_stats_seq, CorpusStats, StatsAccumulator};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dom::{annotate_refs, clean, parse, serialize, CleaningConfig, Tokenizer};
use crate::par;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o failure on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed WARC stream in {path}: {message}")]
    Warc { path: String, message: String },
}

/// An ingested document before decoding: raw bytes plus provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    /// WARC record id or file path.
    pub doc_id: String,
    pub url: Option<String>,
    pub body: Vec<u8>,
}

/// A document that passed the filter; `html` is guaranteed UTF-8.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub doc_id: String,
    pub url: Option<String>,
    pub html: String,
}

/// One emitted subtree, the unit of the corpus JSONL output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    /// `{source doc_id}#{subtree index}`.
    pub doc_id: String,
    pub subtree_html: String,
    pub token_count: u64,
}

impl CorpusEntry {
    pub fn to_jsonl_line(&self) -> String {
        serde_json::to_string(self).expect("corpus entry serializes")
    }
}

/// Result of a corpus build over a batch of records.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusBuild {
    pub entries: Vec<CorpusEntry>,
    pub stats: CorpusStats,
    /// Dropped documents per filter reason label.
    pub drop_counts: BTreeMap<String, usize>,
}

/// Filter, clean, annotate and extract over a batch of raw records.
pub fn build_corpus(
    records: &[RawRecord],
    tokenizer: &dyn Tokenizer,
    cleaning: &CleaningConfig,
) -> CorpusBuild {
    collect_build(par::map_batch(records, |record| {
        process_record(record, tokenizer, cleaning)
    }))
}

/// Sequential twin of [`build_corpus`] with identical output.
pub fn build_corpus_seq(
    records: &[RawRecord],
    tokenizer: &dyn Tokenizer,
    cleaning: &CleaningConfig,
) -> CorpusBuild {
    collect_build(par::map_batch_seq(records, |record| {
        process_record(record, tokenizer, cleaning)
    }))
}

fn collect_build(results: Vec<Result<Vec<CorpusEntry>, DropReason>>) -> CorpusBuild {
    let mut entries = Vec::new();
    let mut drop_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut acc = StatsAccumulator::default();
    for result in results {
        match result {
            Ok(batch) => {
                for entry in batch {
                    acc.add(entry.token_count);
                    entries.push(entry);
                }
            }
            Err(reason) => *drop_counts.entry(reason.label().to_string()).or_insert(0) += 1,
        }
    }
    CorpusBuild {
        entries,
        stats: acc.finalize(),
        drop_counts,
    }
}

fn process_record(
    record: &RawRecord,
    tokenizer: &dyn Tokenizer,
    cleaning: &CleaningConfig,
) -> Result<Vec<CorpusEntry>, DropReason> {
    let record = match filter_doc(record) {
        FilterOutcome::Keep(record) => record,
        FilterOutcome::Drop { reason, .. } => return Err(reason),
    };
    let doc = annotate_refs(&clean(&parse(&record.html), cleaning));
    Ok(extract_label_subtrees(&doc)
        .iter()
        .enumerate()
        .map(|(i, subtree)| {
            let subtree_html = serialize(subtree);
            let token_count = tokenizer.tokenize(&subtree_html).len() as u64;
            CorpusEntry {
                doc_id: format!("{}#{}", record.doc_id, i),
                subtree_html,
                token_count,
            }
        })
        .collect())
}
