//! Corpus engineering toolkit for HTML-centric sequence models.
//!
//! The crate covers the deterministic data path around such models:
//!
//! * [`dom`]: forgiving parsing, structure-preserving cleaning, `data-ref`
//!   anchor annotation, canonical serialization and tokenization.
//! * [`corpus`]: directory and WARC ingestion, document filtering,
//!   label-subtree extraction and corpus statistics.
//! * [`denoise`]: span-corruption and prefix objectives over token streams.
//! * [`snippet`]: anchor-based extractive snippets under token budgets.
//! * [`attention`]: local plus block-global sparse attention layouts.
//! * [`agent`]: a scripted web-agent harness over fixture sites, with
//!   episode filtering and attribute-coverage scoring.
//!
//! All randomized procedures are seeded and reproducible; batch entry
//! points run data-parallel under the `parallel` feature (on by default)
//! and have sequential `_seq` twins with identical results.

pub mod agent;
pub mod attention;
pub mod corpus;
pub mod denoise;
pub mod dom;
pub mod snippet;

pub(crate) mod par;
