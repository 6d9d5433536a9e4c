//! Synthetic planted-partition graphs for experiments and tests.
//!
//! Vertices are grouped into blocks; each unordered pair gets an edge with
//! probability `p_in` (same block) or `p_out` (different blocks), with an
//! integer weight drawn uniformly from a configurable range. The binary
//! ground truth marks membership in the first block, and a seeded sample of
//! the truth is revealed as labels. Everything is driven by one seed, so a
//! spec reproduces its data exactly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, WeightedGraph};
use crate::predict::LabelAssignment;
use crate::seed;
use crate::weight::ParsedWeight;

/// Parameters of one synthetic graph.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub block_sizes: Vec<usize>,
    /// Edge probability within a block.
    pub p_in: f64,
    /// Edge probability across blocks. Must not exceed `p_in` (equal is
    /// allowed: that is the null model without community structure).
    pub p_out: f64,
    /// Inclusive integer weight range for generated edges.
    pub weight_range: (u32, u32),
    /// Fraction of vertices whose truth is revealed as labels (at least one
    /// vertex is always revealed).
    pub label_fraction: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(Error::InvalidInput(
                "need at least one block, all nonempty".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_in) || !(0.0..=1.0).contains(&self.p_out) {
            return Err(Error::InvalidInput(
                "edge probabilities must lie in [0, 1]".into(),
            ));
        }
        if self.p_out > self.p_in {
            return Err(Error::InvalidInput(format!(
                "cross-block probability {} exceeds in-block probability {}",
                self.p_out, self.p_in
            )));
        }
        let (lo, hi) = self.weight_range;
        if lo < 1 || lo > hi {
            return Err(Error::InvalidInput(format!(
                "invalid weight range {lo}..={hi}"
            )));
        }
        if !(self.label_fraction > 0.0 && self.label_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "label fraction must lie in (0, 1], got {}",
                self.label_fraction
            )));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.block_sizes.iter().sum()
    }
}

/// A generated graph with its ground truth and revealed labels.
#[derive(Clone, Debug)]
pub struct SynthData {
    pub graph: WeightedGraph,
    /// Block index per vertex, in vertex order.
    pub blocks: Vec<u32>,
    /// Binary truth per vertex: membership in block 0.
    pub truth: Vec<bool>,
    /// Seeded sample of the truth.
    pub revealed: LabelAssignment,
}

/// Generates the graph described by `spec`. Vertex ids are `v` plus a
/// zero-padded index (`v00`, `v01`, ...), numbered block by block.
pub fn synth_planted(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let n = spec.vertex_count();
    let width = (n.max(2) - 1).to_string().len();
    let blocks: Vec<u32> = spec
        .block_sizes
        .iter()
        .enumerate()
        .flat_map(|(bi, &size)| std::iter::repeat_n(bi as u32, size))
        .collect();

    let mut rng = seed::rng(spec.seed);
    let mut builder = GraphBuilder::new();
    for i in 0..n {
        builder.vertex(&format!("v{i:0width$}"));
    }
    let (lo, hi) = spec.weight_range;
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            let p = if blocks[i as usize] == blocks[j as usize] {
                spec.p_in
            } else {
                spec.p_out
            };
            if rng.random::<f64>() < p {
                let w = rng.random_range(lo..=hi);
                builder.add_edge_ids(i, j, ParsedWeight::integer(u64::from(w)))?;
            }
        }
    }
    let graph = builder.build()?;

    let truth: Vec<bool> = blocks.iter().map(|&b| b == 0).collect();
    let reveal = ((spec.label_fraction * n as f64).floor() as usize).clamp(1, n);
    let mut picked = rand::seq::index::sample(&mut rng, n, reveal).into_vec();
    picked.sort_unstable();
    let revealed = LabelAssignment::new(
        &graph,
        picked.iter().map(|&i| (i as u32, truth[i])),
    )?;
    Ok(SynthData {
        graph,
        blocks,
        truth,
        revealed,
    })
}
