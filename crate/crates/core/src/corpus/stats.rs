//! Corpus statistics.
//!
//! Mean and max are exact; the 90th percentile is nearest-rank over the
//! full multiset of lengths (the ceil(0.9 n)-th smallest), so partial
//! accumulators carry every length and merge by concatenation. Merging is
//! associative and commutative up to multiset equality, which makes any
//! parallel reduction schedule safe.

use serde::{Deserialize, Serialize};

use crate::dom::TokenSeq;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub example_count: u64,
    pub token_mean: f64,
    pub token_p90: f64,
    pub token_max: u64,
}

impl CorpusStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }
}

/// Mergeable partial state: (count, sum, max, all lengths).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StatsAccumulator {
    count: u64,
    sum: u128,
    max: u64,
    lengths: Vec<u64>,
}

impl StatsAccumulator {
    pub fn add(&mut self, token_count: u64) {
        self.count += 1;
        self.sum += u128::from(token_count);
        self.max = self.max.max(token_count);
        self.lengths.push(token_count);
    }

    pub fn merge(mut self, other: StatsAccumulator) -> StatsAccumulator {
        self.count += other.count;
        self.sum += other.sum;
        self.max = self.max.max(other.max);
        self.lengths.extend(other.lengths);
        self
    }

    pub fn finalize(&self) -> CorpusStats {
        if self.count == 0 {
            return CorpusStats {
                example_count: 0,
                token_mean: 0.0,
                token_p90: 0.0,
                token_max: 0,
            };
        }
        let mut sorted = self.lengths.clone();
        sorted.sort_unstable();
        // Nearest rank: the ceil(0.9 n)-th smallest, 1-indexed.
        let rank = (9 * self.count as usize).div_ceil(10);
        CorpusStats {
            example_count: self.count,
            token_mean: self.sum as f64 / self.count as f64,
            token_p90: sorted[rank - 1] as f64,
            token_max: self.max,
        }
    }
}

/// Exact statistics over a batch of token sequences.
pub fn compute_stats(seqs: &[TokenSeq]) -> CorpusStats {
    // Accumulate in chunks, then merge: the merge path is the one that runs
    // under any parallel schedule.
    let chunk = (seqs.len() / 8).max(1);
    let chunks: Vec<&[TokenSeq]> = seqs.chunks(chunk).collect();
    par::map_batch(&chunks, |chunk| accumulate(chunk))
        .into_iter()
        .fold(StatsAccumulator::default(), StatsAccumulator::merge)
        .finalize()
}

/// Sequential twin of [`compute_stats`] with identical output.
pub fn compute_stats_seq(seqs: &[TokenSeq]) -> CorpusStats {
    accumulate(seqs).finalize()
}

fn accumulate(seqs: &[TokenSeq]) -> StatsAccumulator {
    let mut acc = StatsAccumulator::default();
    for seq in seqs {
        acc.add(seq.tokens.len() as u64);
    }
    acc
}
