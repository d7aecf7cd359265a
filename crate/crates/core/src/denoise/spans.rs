//! Mask sampling.
//!
//! Span lengths are drawn from a Gaussian with mean `mu` and deviation
//! `mu / 2`, rounded and floored at one token, until the masked budget
//! `round(rate * L)` is reached. Under the default exact-budget policy the
//! final span is truncated so the total hits the budget exactly. Each span
//! start is then drawn uniformly among the positions that keep all spans
//! disjoint and separated by at least one unmasked token; if placement runs
//! out of room the whole draw is retried a bounded number of times.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::DenoiseError;

/// Placement retries before giving up with a diagnostic.
const MAX_ATTEMPTS: usize = 64;

/// How the masked budget is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetPolicy {
    /// Truncate the final span so the total equals `round(rate * L)`.
    #[default]
    Exact,
    /// Keep the final span whole; the total may overshoot the budget.
    ExpectedRate,
}

/// One masked region: tokens `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub len: usize,
}

impl Span {
    /// Exclusive end index.
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// An ordered, disjoint, non-adjacent set of spans.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpanMask {
    pub spans: Vec<Span>,
}

impl SpanMask {
    pub fn total_masked(&self) -> usize {
        self.spans.iter().map(|s| s.len).sum()
    }

    /// Check the mask invariants against a sequence length.
    pub fn validate(&self, seq_len: usize) -> Result<(), DenoiseError> {
        let fail = |reason: String| {
            Err(DenoiseError::InvalidMask {
                len: seq_len,
                reason,
            })
        };
        let mut prev_end: Option<usize> = None;
        for span in &self.spans {
            if span.len == 0 {
                return fail(format!("zero-length span at {}", span.start));
            }
            if span.end() > seq_len {
                return fail(format!(
                    "span [{}, {}) out of bounds",
                    span.start,
                    span.end()
                ));
            }
            if let Some(end) = prev_end {
                if span.start < end {
                    return fail(format!("span at {} overlaps or is unsorted", span.start));
                }
                if span.start == end {
                    return fail(format!("span at {} is adjacent to the previous", span.start));
                }
            }
            prev_end = Some(span.end());
        }
        Ok(())
    }
}

/// Sample a mask under the exact-budget policy.
pub fn sample_spans<R: Rng + ?Sized>(
    seq_len: usize,
    mean: f64,
    rate: f64,
    rng: &mut R,
) -> Result<SpanMask, DenoiseError> {
    sample_spans_with(seq_len, mean, rate, BudgetPolicy::Exact, rng)
}

/// Sample a mask with an explicit budget policy.
pub fn sample_spans_with<R: Rng + ?Sized>(
    seq_len: usize,
    mean: f64,
    rate: f64,
    policy: BudgetPolicy,
    rng: &mut R,
) -> Result<SpanMask, DenoiseError> {
    if seq_len == 0 {
        return Err(DenoiseError::InvalidConfig(
            "sequence length must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&rate) {
        return Err(DenoiseError::InvalidConfig(format!(
            "corruption rate {rate} outside [0, 1)"
        )));
    }
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(DenoiseError::InvalidConfig(format!(
            "span mean {mean} is not a positive finite number"
        )));
    }
    let budget = (rate * seq_len as f64).round() as usize;
    if budget == 0 {
        return Ok(SpanMask::default());
    }
    let normal = Normal::new(mean, mean / 2.0).expect("positive deviation");
    for _ in 0..MAX_ATTEMPTS {
        if let Some(mask) = try_draw(seq_len, budget, policy, &normal, rng) {
            debug_assert!(mask.validate(seq_len).is_ok());
            return Ok(mask);
        }
    }
    Err(DenoiseError::PlacementInfeasible {
        seq_len,
        budget,
        attempts: MAX_ATTEMPTS,
    })
}

fn draw_len<R: Rng + ?Sized>(normal: &Normal<f64>, rng: &mut R) -> usize {
    normal.sample(rng).round().max(1.0) as usize
}

/// One full attempt: draw lengths to fill the budget, then place each span
/// uniformly among the starts still legal. `None` means out of room.
fn try_draw<R: Rng + ?Sized>(
    seq_len: usize,
    budget: usize,
    policy: BudgetPolicy,
    normal: &Normal<f64>,
    rng: &mut R,
) -> Option<SpanMask> {
    let mut lengths = Vec::new();
    let mut total = 0usize;
    while total < budget {
        let mut len = draw_len(normal, rng);
        if policy == BudgetPolicy::Exact {
            len = len.min(budget - total);
        }
        lengths.push(len);
        total += len;
    }
    // Minimal footprint: the spans plus one separating token between each.
    if total + lengths.len() - 1 > seq_len {
        return None;
    }

    let mut placed: Vec<Span> = Vec::new();
    for &len in &lengths {
        let windows = start_windows(seq_len, len, &placed);
        let total_starts: usize = windows.iter().map(|(_, n)| n).sum();
        if total_starts == 0 {
            return None;
        }
        let mut pick = rng.random_range(0..total_starts);
        for (lo, count) in windows {
            if pick < count {
                let span = Span {
                    start: lo + pick,
                    len,
                };
                let at = placed.partition_point(|s| s.start < span.start);
                placed.insert(at, span);
                break;
            }
            pick -= count;
        }
    }
    Some(SpanMask { spans: placed })
}

/// Legal start windows `(lo, count)` for a span of `len` given the spans
/// already placed (sorted). Starts keep one unmasked token on each side of
/// every neighbor.
fn start_windows(seq_len: usize, len: usize, placed: &[Span]) -> Vec<(usize, usize)> {
    let mut windows = Vec::with_capacity(placed.len() + 1);
    let mut lo = 0usize;
    let mut push = |lo: usize, end_limit: usize| {
        // start + len <= end_limit
        if end_limit >= len {
            let hi = end_limit - len;
            if hi >= lo {
                windows.push((lo, hi - lo + 1));
            }
        }
    };
    for span in placed {
        // Leave the token just before `span` unmasked.
        push(lo, span.start.saturating_sub(1));
        lo = span.end() + 1;
    }
    push(lo, seq_len);
    windows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::doc_rng;

    #[test]
    fn zero_rate_gives_empty_mask() {
        let mut rng = doc_rng(0, "d");
        let mask = sample_spans(1000, 8.0, 0.0, &mut rng).unwrap();
        assert!(mask.spans.is_empty());
    }

    #[test]
    fn tiny_budget_rounds_to_zero() {
        let mut rng = doc_rng(0, "d");
        // round(0.15 * 3) = 0
        let mask = sample_spans(3, 8.0, 0.15, &mut rng).unwrap();
        assert!(mask.spans.is_empty());
    }

    #[test]
    fn budget_is_exact_across_seeds() {
        for seed in 0..50u64 {
            let mut rng = doc_rng(seed, "doc");
            let mask = sample_spans(1000, 8.0, 0.15, &mut rng).unwrap();
            assert_eq!(mask.total_masked(), 150, "seed {seed}");
            mask.validate(1000).unwrap();
        }
    }

    #[test]
    fn budget_caps_a_long_span() {
        // round(0.15 * 10) = 2: the 64-mean span is cut to the whole budget.
        for seed in 0..20u64 {
            let mut rng = doc_rng(seed, "doc");
            let mask = sample_spans(10, 64.0, 0.15, &mut rng).unwrap();
            assert_eq!(mask.total_masked(), 2, "seed {seed}");
            assert_eq!(mask.spans.len(), 1, "seed {seed}");
            assert_eq!(mask.spans[0].len, 2, "seed {seed}");
        }
    }

    #[test]
    fn masks_are_valid_across_geometries() {
        for (seq_len, mean, rate) in [
            (50usize, 3.0, 0.3),
            (200, 8.0, 0.15),
            (128, 64.0, 0.15),
            (1000, 20.0, 0.5),
            (17, 2.0, 0.25),
        ] {
            for seed in 0..20u64 {
                let mut rng = doc_rng(seed, "doc");
                let mask = sample_spans(seq_len, mean, rate, &mut rng).unwrap();
                mask.validate(seq_len).unwrap();
                let budget = (rate * seq_len as f64).round() as usize;
                assert_eq!(mask.total_masked(), budget);
            }
        }
    }

    #[test]
    fn expected_rate_policy_may_overshoot_but_never_undershoots() {
        let mut rng = doc_rng(3, "doc");
        for _ in 0..50 {
            let mask =
                sample_spans_with(400, 8.0, 0.15, BudgetPolicy::ExpectedRate, &mut rng).unwrap();
            assert!(mask.total_masked() >= 60);
            mask.validate(400).unwrap();
        }
    }

    #[test]
    fn infeasible_placement_reports_a_diagnostic() {
        // Budget 2 out of 2 tokens with mean 0.25: lengths are almost surely
        // [1, 1], which cannot be separated in a 2-token sequence.
        let mut rng = doc_rng(0, "doc");
        let err = sample_spans(2, 0.25, 0.8, &mut rng).unwrap_err();
        assert!(matches!(
            err,
            DenoiseError::PlacementInfeasible {
                seq_len: 2,
                budget: 2,
                ..
            }
        ));
    }

    #[test]
    fn same_seed_same_mask() {
        let mut a = doc_rng(9, "x");
        let mut b = doc_rng(9, "x");
        assert_eq!(
            sample_spans(500, 8.0, 0.15, &mut a).unwrap(),
            sample_spans(500, 8.0, 0.15, &mut b).unwrap()
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut rng = doc_rng(0, "d");
        assert!(sample_spans(0, 8.0, 0.15, &mut rng).is_err());
        assert!(sample_spans(100, 8.0, 1.0, &mut rng).is_err());
        assert!(sample_spans(100, 8.0, -0.1, &mut rng).is_err());
        assert!(sample_spans(100, 0.0, 0.15, &mut rng).is_err());
        assert!(sample_spans(100, f64::NAN, 0.15, &mut rng).is_err());
    }

    #[test]
    fn validate_rejects_broken_masks() {
        let mask = |spans: Vec<(usize, usize)>| SpanMask {
            spans: spans
                .into_iter()
                .map(|(start, len)| Span { start, len })
                .collect(),
        };
        assert!(mask(vec![(0, 0)]).validate(10).is_err(), "zero length");
        assert!(mask(vec![(8, 3)]).validate(10).is_err(), "out of bounds");
        assert!(mask(vec![(0, 2), (1, 2)]).validate(10).is_err(), "overlap");
        assert!(mask(vec![(0, 2), (2, 2)]).validate(10).is_err(), "adjacent");
        assert!(mask(vec![(5, 2), (0, 2)]).validate(10).is_err(), "unsorted");
        mask(vec![(0, 2), (3, 2), (6, 4)]).validate(10).unwrap();
    }
}
