//! Local plus transient-global sparse attention layouts.
//!
//! A layout describes encoder connectivity only: each token attends to the
//! tokens within a symmetric window of radius `r`, and to one summary node
//! per block of `k` consecutive tokens. Block nodes are virtual, indexed
//! after the last token (block `b` exports as column `L + b`), so token
//! indices stay stable for consumers. The representation is the
//! configuration itself; edges are enumerated lazily, never materialized as
//! a dense matrix.

use std::io::{self, Write};

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("layout dimensions must be positive: L={seq_len}, r={local_radius}, k={block_size}")]
    InvalidConfig {
        seq_len: usize,
        local_radius: usize,
        block_size: usize,
    },
    #[error("token index {index} out of range for sequence length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Sequence geometry for a layout. Defaults: radius 127, block size 16.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutConfig {
    pub seq_len: usize,
    pub local_radius: usize,
    pub block_size: usize,
}

pub const DEFAULT_LOCAL_RADIUS: usize = 127;
pub const DEFAULT_BLOCK_SIZE: usize = 16;

impl LayoutConfig {
    pub fn new(seq_len: usize) -> Self {
        LayoutConfig {
            seq_len,
            local_radius: DEFAULT_LOCAL_RADIUS,
            block_size: DEFAULT_BLOCK_SIZE,
        }
    }

    fn validate(&self) -> Result<(), LayoutError> {
        if self.seq_len == 0 || self.local_radius == 0 || self.block_size == 0 {
            return Err(LayoutError::InvalidConfig {
                seq_len: self.seq_len,
                local_radius: self.local_radius,
                block_size: self.block_size,
            });
        }
        Ok(())
    }
}

/// One connectivity edge. `target` is a token index for local edges and
/// `L + block` for global edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Local,
    Global,
}

impl EdgeKind {
    fn letter(self) -> char {
        match self {
            EdgeKind::Local => 'L',
            EdgeKind::Global => 'G',
        }
    }
}

/// Immutable connectivity for one `(L, r, k)` geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttentionLayout {
    cfg: LayoutConfig,
}

/// Construct a layout, validating the configuration.
pub fn build_layout(cfg: LayoutConfig) -> Result<AttentionLayout, LayoutError> {
    cfg.validate()?;
    Ok(AttentionLayout { cfg })
}

impl AttentionLayout {
    pub fn config(&self) -> LayoutConfig {
        self.cfg
    }

    pub fn seq_len(&self) -> usize {
        self.cfg.seq_len
    }

    /// Number of global summary blocks: ceil(L / k).
    pub fn global_blocks(&self) -> usize {
        self.cfg.seq_len.div_ceil(self.cfg.block_size)
    }

    /// Block owning token `i`: floor(i / k).
    pub fn block_of(&self, i: usize) -> Result<usize, LayoutError> {
        self.check_index(i)?;
        Ok(i / self.cfg.block_size)
    }

    /// Token range of the local window around `i` (inclusive ends).
    pub fn local_window(&self, i: usize) -> Result<(usize, usize), LayoutError> {
        self.check_index(i)?;
        let lo = i.saturating_sub(self.cfg.local_radius);
        let hi = (i + self.cfg.local_radius).min(self.cfg.seq_len - 1);
        Ok((lo, hi))
    }

    /// Whether token `i` has a local edge to token `j`: |i - j| <= r.
    pub fn attends_local(&self, i: usize, j: usize) -> Result<bool, LayoutError> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(i.abs_diff(j) <= self.cfg.local_radius)
    }

    /// Per-token degrees: (local window size, global block count).
    pub fn degree(&self, i: usize) -> Result<(usize, usize), LayoutError> {
        self.check_index(i)?;
        let r = self.cfg.local_radius;
        let local = i.min(r) + (self.cfg.seq_len - 1 - i).min(r) + 1;
        Ok((local, self.global_blocks()))
    }

    /// Total edge count, by closed form:
    /// sum of local degrees (L + 2 * sum_i min(i, r)) plus L * ceil(L / k).
    pub fn nnz(&self) -> u64 {
        let len = self.cfg.seq_len as u64;
        let r = self.cfg.local_radius as u64;
        // sum_{i=0}^{L-1} min(i, r)
        let capped = if len - 1 <= r {
            len * (len - 1) / 2
        } else {
            r * (r + 1) / 2 + (len - 1 - r) * r
        };
        let local = len + 2 * capped;
        local + len * self.global_blocks() as u64
    }

    /// Lazy edge enumeration: for each token in order, its local edges by
    /// ascending target, then its global edges by ascending block.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let blocks = self.global_blocks();
        let len = self.cfg.seq_len;
        (0..len).flat_map(move |i| {
            let (lo, hi) = self.local_window(i).expect("index in range");
            let local = (lo..=hi).map(move |j| Edge {
                source: i,
                target: j,
                kind: EdgeKind::Local,
            });
            let global = (0..blocks).map(move |b| Edge {
                source: i,
                target: len + b,
                kind: EdgeKind::Global,
            });
            local.chain(global)
        })
    }

    /// Write the coordinate list, one `i j kind` line per edge.
    pub fn write_coo<W: Write>(&self, mut out: W) -> io::Result<()> {
        for edge in self.edges() {
            writeln!(out, "{} {} {}", edge.source, edge.target, edge.kind.letter())?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        json!({
            "L": self.cfg.seq_len,
            "r": self.cfg.local_radius,
            "k": self.cfg.block_size,
            "global_blocks": self.global_blocks(),
            "nnz": self.nnz(),
        })
    }

    fn check_index(&self, i: usize) -> Result<(), LayoutError> {
        if i >= self.cfg.seq_len {
            return Err(LayoutError::IndexOutOfRange {
                index: i,
                len: self.cfg.seq_len,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn layout(l: usize, r: usize, k: usize) -> AttentionLayout {
        build_layout(LayoutConfig {
            seq_len: l,
            local_radius: r,
            block_size: k,
        })
        .unwrap()
    }

    /// O(L^2) reference: enumerate every pair, then every (token, block).
    fn brute_force_edges(l: usize, r: usize, k: usize) -> BTreeSet<(usize, usize, char)> {
        let mut edges = BTreeSet::new();
        for i in 0..l {
            for j in 0..l {
                if i.abs_diff(j) <= r {
                    edges.insert((i, j, 'L'));
                }
            }
            for b in 0..l.div_ceil(k) {
                edges.insert((i, l + b, 'G'));
            }
        }
        edges
    }

    fn layout_edges(layout: &AttentionLayout) -> BTreeSet<(usize, usize, char)> {
        layout
            .edges()
            .map(|e| (e.source, e.target, e.kind.letter()))
            .collect()
    }

    #[test]
    fn rejects_zero_dimensions() {
        for (l, r, k) in [(0, 1, 1), (1, 0, 1), (1, 1, 0)] {
            assert!(build_layout(LayoutConfig {
                seq_len: l,
                local_radius: r,
                block_size: k,
            })
            .is_err());
        }
    }

    #[test]
    fn single_token_layout() {
        let layout = layout(1, 1, 1);
        assert_eq!(layout.global_blocks(), 1);
        assert_eq!(layout.degree(0).unwrap(), (1, 1));
        assert_eq!(layout.nnz(), 2);
        let edges: Vec<Edge> = layout.edges().collect();
        assert_eq!(edges.len(), 2);
        assert_eq!((edges[0].source, edges[0].target), (0, 0));
        assert_eq!((edges[1].source, edges[1].target), (0, 1));
    }

    #[test]
    fn boundary_and_interior_degrees() {
        let layout = layout(100, 3, 16);
        assert_eq!(layout.degree(0).unwrap().0, 4);
        assert_eq!(layout.degree(50).unwrap().0, 7);
        assert_eq!(layout.degree(99).unwrap().0, 4);
    }

    #[test]
    fn interior_degree_with_small_geometry() {
        let layout = layout(16, 2, 4);
        assert_eq!(layout.degree(8).unwrap(), (5, 4));
    }

    #[test]
    fn nnz_matches_brute_force_count() {
        for (l, r, k) in [(16, 2, 4), (1, 1, 1), (7, 3, 2), (64, 5, 16), (5, 9, 3)] {
            let layout = layout(l, r, k);
            let brute = brute_force_edges(l, r, k);
            assert_eq!(layout.nnz(), brute.len() as u64, "L={l} r={r} k={k}");
        }
    }

    #[test]
    fn small_geometry_edge_count_is_138() {
        // 74 local edges (3+4+12*5+4+3) plus 16*4 global edges.
        assert_eq!(layout(16, 2, 4).nnz(), 138);
    }

    #[test]
    fn edges_match_brute_force_exactly() {
        for (l, r, k) in [(1, 1, 1), (2, 1, 1), (16, 2, 4), (33, 4, 5), (64, 70, 9)] {
            let layout = layout(l, r, k);
            assert_eq!(
                layout_edges(&layout),
                brute_force_edges(l, r, k),
                "L={l} r={r} k={k}"
            );
            assert_eq!(layout.nnz() as usize, layout.edges().count());
        }
    }

    #[test]
    fn local_edges_are_symmetric() {
        let layout = layout(40, 6, 8);
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(
                    layout.attends_local(i, j).unwrap(),
                    layout.attends_local(j, i).unwrap()
                );
            }
        }
    }

    #[test]
    fn blocks_partition_the_sequence() {
        let layout = layout(37, 3, 5);
        let mut seen = vec![0usize; layout.global_blocks()];
        for i in 0..37 {
            let b = layout.block_of(i).unwrap();
            assert_eq!(b, i / 5);
            seen[b] += 1;
        }
        assert_eq!(seen.iter().sum::<usize>(), 37);
        // Every block owns at least one token and at most k.
        assert!(seen.iter().all(|&n| n >= 1 && n <= 5));
    }

    #[test]
    fn full_scale_default_block_count() {
        let layout = build_layout(LayoutConfig::new(4096)).unwrap();
        assert_eq!(layout.global_blocks(), 256);
        assert_eq!(layout.degree(2048).unwrap(), (255, 256));
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let layout = layout(8, 2, 2);
        assert!(layout.degree(8).is_err());
        assert!(layout.block_of(100).is_err());
        assert!(layout.attends_local(0, 8).is_err());
    }

    #[test]
    fn coo_export_format() {
        let layout = layout(3, 1, 2);
        let mut buf = Vec::new();
        layout.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len() as u64, layout.nnz());
        assert_eq!(lines[0], "0 0 L");
        assert_eq!(lines[1], "0 1 L");
        // Token 0's global edges target the virtual columns 3 and 4.
        assert_eq!(lines[2], "0 3 G");
        assert_eq!(lines[3], "0 4 G");
    }

    #[test]
    fn summary_json_fields() {
        let value = layout(16, 2, 4).summary_json();
        assert_eq!(value["L"], 16);
        assert_eq!(value["r"], 2);
        assert_eq!(value["k"], 4);
        assert_eq!(value["global_blocks"], 4);
        assert_eq!(value["nnz"], 138);
    }
}
