//! Vertex orderings, boundary profiles and widths.
//!
//! For an ordering `(v_1, ..., v_n)` of a connected graph, the *boundary
//! profile* is the sequence `b_1, ..., b_{n-1}` where `b_i` is the boundary
//! weight of the prefix `{v_1, ..., v_i}`. The *width* of the ordering is
//! the profile sorted descending; orderings are ranked by comparing widths
//! lexicographically, smaller meaning better. Cutting the ordering at every
//! local minimum of the profile yields this crate's clusters: consecutive
//! blocks separated at the positions where the running boundary dips.

use std::cmp;

use crate::error::{Error, Result};
use crate::graph::{VertexId, VertexSet, WeightedGraph};

/// A permutation of the vertices of one connected graph.
#[derive(Clone, Debug)]
pub struct Ordering<'g> {
    graph: &'g WeightedGraph,
    seq: Vec<VertexId>,
}

impl<'g> Ordering<'g> {
    /// Wraps `seq`, checking it is a permutation of the vertices of `graph`
    /// and that `graph` is connected (profiles of disconnected graphs hit
    /// zero in the interior and would make every component split spurious).
    pub fn new(graph: &'g WeightedGraph, seq: Vec<VertexId>) -> Result<Self> {
        let n = graph.vertex_count();
        if seq.len() != n {
            return Err(Error::Domain(format!(
                "ordering length {} does not match graph order {n}",
                seq.len()
            )));
        }
        let mut seen = vec![false; n];
        for &v in &seq {
            if (v as usize) >= n || seen[v as usize] {
                return Err(Error::Domain(format!("sequence is not a permutation: {v}")));
            }
            seen[v as usize] = true;
        }
        if graph.connected_components().len() > 1 {
            return Err(Error::Domain("ordering requires a connected graph".into()));
        }
        Ok(Ordering { graph, seq })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn seq(&self) -> &[VertexId] {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// Position (0-based) of each vertex in the sequence.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0usize; self.seq.len()];
        for (i, &v) in self.seq.iter().enumerate() {
            pos[v as usize] = i;
        }
        pos
    }

    pub fn reversed(&self) -> Ordering<'g> {
        Ordering {
            graph: self.graph,
            seq: self.seq.iter().rev().copied().collect(),
        }
    }
}

/// Prefix boundary weights `b_1, ..., b_{n-1}` in scaled units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryProfile {
    values: Vec<u64>,
    scale: u64,
}

impl BoundaryProfile {
    pub(crate) fn from_scaled(values: Vec<u64>, scale: u64) -> Self {
        BoundaryProfile { values, scale }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Scaled integer values; divide by [`Self::scale`] for weight units.
    pub fn values_scaled(&self) -> &[u64] {
        &self.values
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64 / self.scale as f64).collect()
    }
}

/// A boundary profile sorted descending; the sort key of an ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Width {
    values: Vec<u64>,
    scale: u64,
}

impl Width {
    pub fn values_scaled(&self) -> &[u64] {
        &self.values
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64 / self.scale as f64).collect()
    }
}

/// Computes the boundary profile of an ordering incrementally: extending
/// the prefix by `v` adds the weight from `v` to later vertices and removes
/// the weight from `v` to earlier ones. Integer arithmetic makes this exact,
/// so it agrees with summing each prefix boundary from scratch.
///
/// Fails on orderings of fewer than two vertices, whose profile is empty.
pub fn boundary_profile(o: &Ordering) -> Result<BoundaryProfile> {
    let n = o.len();
    if n < 2 {
        return Err(Error::Domain(
            "boundary profile needs at least two vertices".into(),
        ));
    }
    let g = o.graph();
    let pos = o.positions();
    let mut values = Vec::with_capacity(n - 1);
    let mut b: u64 = 0;
    for (i, &v) in o.seq().iter().enumerate().take(n - 1) {
        let mut later: u64 = 0;
        let mut earlier: u64 = 0;
        for &(w, wt) in g.neighbors(v) {
            if pos[w as usize] > i {
                later += wt;
            } else {
                earlier += wt;
            }
        }
        b = b + later - earlier;
        values.push(b);
    }
    Ok(BoundaryProfile::from_scaled(values, g.scale()))
}

/// The width of a profile: its values sorted descending.
pub fn width_of(profile: &BoundaryProfile) -> Width {
    let mut values = profile.values_scaled().to_vec();
    values.sort_unstable_by(|a, b| b.cmp(a));
    Width {
        values,
        scale: profile.scale(),
    }
}

/// Lexicographic comparison of two widths of equal length. The widths may
/// come from graphs with different weight scales; entries are compared as
/// exact rationals.
pub fn compare_widths(a: &Width, b: &Width) -> Result<cmp::Ordering> {
    if a.values.len() != b.values.len() {
        return Err(Error::Domain(format!(
            "widths of different lengths ({} vs {}) are not comparable",
            a.values.len(),
            b.values.len()
        )));
    }
    for (&x, &y) in a.values.iter().zip(&b.values) {
        let lhs = u128::from(x) * u128::from(b.scale);
        let rhs = u128::from(y) * u128::from(a.scale);
        match lhs.cmp(&rhs) {
            cmp::Ordering::Equal => continue,
            other => return Ok(other),
        }
    }
    Ok(cmp::Ordering::Equal)
}

/// Positions of the local minima of a profile, as 1-based prefix lengths.
///
/// Runs of equal values collapse to one candidate reported at its leftmost
/// index; a candidate is a minimum iff both neighboring runs are strictly
/// larger. The first and last entries are never minima, and a constant
/// profile has none.
pub fn local_minima(profile: &BoundaryProfile) -> Vec<usize> {
    let vals = profile.values_scaled();
    let mut runs: Vec<(u64, usize)> = Vec::new(); // (value, leftmost 1-based index)
    for (i, &v) in vals.iter().enumerate() {
        match runs.last() {
            Some(&(last, _)) if last == v => {}
            _ => runs.push((v, i + 1)),
        }
    }
    let mut minima = Vec::new();
    for r in 1..runs.len().saturating_sub(1) {
        if runs[r - 1].0 > runs[r].0 && runs[r + 1].0 > runs[r].0 {
            minima.push(runs[r].1);
        }
    }
    minima
}

/// Consecutive blocks of an ordering obtained by cutting after every local
/// minimum of its boundary profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    cuts: Vec<usize>,
    blocks: Vec<Vec<VertexId>>,
}

impl Partition {
    /// Prefix lengths after which the ordering was cut.
    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    /// Blocks in order; within each block vertices keep their sequence
    /// positions. Every vertex of the ordering is in exactly one block.
    pub fn blocks(&self) -> &[Vec<VertexId>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index per vertex of the underlying graph.
    pub fn block_of(&self, universe: usize) -> Vec<u32> {
        let mut out = vec![u32::MAX; universe];
        for (k, block) in self.blocks.iter().enumerate() {
            for &v in block {
                out[v as usize] = k as u32;
            }
        }
        out
    }

    /// Members of block `k` as a set over `universe` vertices.
    pub fn block_set(&self, k: usize, universe: usize) -> VertexSet {
        VertexSet::from_indices(universe, self.blocks[k].iter().copied())
            .expect("partition blocks lie inside the universe")
    }
}

/// Cuts `o` at every local minimum of its boundary profile. A single-vertex
/// ordering (or one whose profile has no minima) yields one block.
pub fn extract_clusters(o: &Ordering) -> Result<Partition> {
    if o.len() <= 1 {
        return Ok(Partition {
            cuts: Vec::new(),
            blocks: vec![o.seq().to_vec()],
        });
    }
    let profile = boundary_profile(o)?;
    let cuts = local_minima(&profile);
    let mut blocks = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0usize;
    for &c in &cuts {
        blocks.push(o.seq()[start..c].to_vec());
        start = c;
    }
    blocks.push(o.seq()[start..].to_vec());
    Ok(Partition { cuts, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::weight::ParsedWeight;

    fn path(n: usize) -> WeightedGraph {
        let mut b = GraphBuilder::new();
        for i in 0..n.saturating_sub(1) {
            b.add_edge(&format!("v{i}"), &format!("v{}", i + 1), ParsedWeight::integer(1))
                .unwrap();
        }
        b.build().unwrap()
    }

    fn profile(vals: &[u64]) -> BoundaryProfile {
        BoundaryProfile::from_scaled(vals.to_vec(), 1)
    }

    #[test]
    fn ordering_validates_input() {
        let g = path(3);
        assert!(Ordering::new(&g, vec![0, 1, 2]).is_ok());
        assert!(Ordering::new(&g, vec![0, 1]).is_err());
        assert!(Ordering::new(&g, vec![0, 1, 1]).is_err());
        assert!(Ordering::new(&g, vec![0, 1, 3]).is_err());

        let mut b = GraphBuilder::new();
        b.add_edge("a", "b", ParsedWeight::integer(1)).unwrap();
        b.add_edge("c", "d", ParsedWeight::integer(1)).unwrap();
        let disconnected = b.build().unwrap();
        assert!(Ordering::new(&disconnected, vec![0, 1, 2, 3]).is_err());
    }

    #[test]
    fn profile_of_path_orderings() {
        let g = path(3);
        let natural = Ordering::new(&g, vec![0, 1, 2]).unwrap();
        assert_eq!(boundary_profile(&natural).unwrap().values_scaled(), &[1, 1]);
        let ends_first = Ordering::new(&g, vec![0, 2, 1]).unwrap();
        assert_eq!(boundary_profile(&ends_first).unwrap().values_scaled(), &[1, 2]);
    }

    #[test]
    fn profile_matches_direct_prefix_boundaries() {
        // Weighted 5-cycle with a chord; checks the incremental profile
        // against boundary_scaled of each prefix.
        let mut b = GraphBuilder::new();
        let w = |n| ParsedWeight::integer(n);
        b.add_edge("a", "b", w(2)).unwrap();
        b.add_edge("b", "c", w(1)).unwrap();
        b.add_edge("c", "d", w(3)).unwrap();
        b.add_edge("d", "e", w(1)).unwrap();
        b.add_edge("e", "a", w(2)).unwrap();
        b.add_edge("b", "d", w(5)).unwrap();
        let g = b.build().unwrap();
        let o = Ordering::new(&g, vec![3, 0, 4, 1, 2]).unwrap();
        let prof = boundary_profile(&o).unwrap();
        for i in 1..g.vertex_count() {
            let prefix = VertexSet::from_indices(
                g.vertex_count(),
                o.seq()[..i].iter().copied(),
            )
            .unwrap();
            assert_eq!(prof.values_scaled()[i - 1], g.boundary_scaled(&prefix).unwrap());
        }
    }

    #[test]
    fn profile_needs_two_vertices() {
        let mut b = GraphBuilder::new();
        b.vertex("only");
        let g = b.build().unwrap();
        let o = Ordering::new(&g, vec![0]).unwrap();
        assert!(boundary_profile(&o).is_err());
    }

    #[test]
    fn width_sorts_descending() {
        let w = width_of(&profile(&[3, 1, 2, 1, 3]));
        assert_eq!(w.values_scaled(), &[3, 3, 2, 1, 1]);
    }

    #[test]
    fn width_comparison_is_lexicographic() {
        let a = width_of(&profile(&[2, 1, 1]));
        let b = width_of(&profile(&[2, 2, 0]));
        assert_eq!(compare_widths(&a, &b).unwrap(), cmp::Ordering::Less);
        assert_eq!(compare_widths(&b, &a).unwrap(), cmp::Ordering::Greater);
        assert_eq!(compare_widths(&a, &a).unwrap(), cmp::Ordering::Equal);
        let short = width_of(&profile(&[1]));
        assert!(compare_widths(&a, &short).is_err());
    }

    #[test]
    fn width_comparison_across_scales() {
        // (1.5, 0.5) at scale 2 versus (1.4, 0.9) at scale 10.
        let a = Width {
            values: vec![3, 1],
            scale: 2,
        };
        let b = Width {
            values: vec![14, 9],
            scale: 10,
        };
        assert_eq!(compare_widths(&a, &b).unwrap(), cmp::Ordering::Greater);
        // Equal rationals at different scales compare equal: 3/2 == 15/10.
        let c = Width {
            values: vec![15, 5],
            scale: 10,
        };
        assert_eq!(compare_widths(&a, &c).unwrap(), cmp::Ordering::Equal);
    }

    #[test]
    fn local_minima_on_frozen_profiles() {
        assert_eq!(local_minima(&profile(&[3, 1, 2, 1, 3])), vec![2, 4]);
        assert_eq!(local_minima(&profile(&[2, 2, 1, 1, 2, 2])), vec![3]);
        assert_eq!(local_minima(&profile(&[2, 2])), Vec::<usize>::new());
        assert_eq!(local_minima(&profile(&[1, 2, 1])), Vec::<usize>::new());
        assert_eq!(local_minima(&profile(&[2, 1, 2, 2, 1, 2])), vec![2, 5]);
        assert_eq!(local_minima(&profile(&[5])), Vec::<usize>::new());
        assert_eq!(local_minima(&profile(&[])), Vec::<usize>::new());
        // A plateau at the end is not a minimum even if entered by a descent.
        assert_eq!(local_minima(&profile(&[3, 2, 1, 1])), Vec::<usize>::new());
        assert_eq!(local_minima(&profile(&[1, 1, 3, 1, 1])), Vec::<usize>::new());
    }

    #[test]
    fn extract_clusters_cuts_at_minima() {
        // Path a-b-c-d in natural order has profile (1,1,1): no interior
        // minimum, one block.
        let g = path(4);
        let o = Ordering::new(&g, vec![0, 1, 2, 3]).unwrap();
        let p = extract_clusters(&o).unwrap();
        assert_eq!(p.blocks().len(), 1);
        assert!(p.cuts().is_empty());
    }

    #[test]
    fn extract_clusters_respects_sequence_order() {
        // Two triangles joined by one light edge: ordering both triangles
        // consecutively gives profile (2,2,1,2,2) -> cut after position 3.
        let mut b = GraphBuilder::new();
        let w = ParsedWeight::integer(1);
        for (u, v) in [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f"), ("c", "d")] {
            b.add_edge(u, v, w).unwrap();
        }
        let g = b.build().unwrap();
        let o = Ordering::new(&g, vec![0, 1, 2, 3, 4, 5]).unwrap();
        let prof = boundary_profile(&o).unwrap();
        assert_eq!(prof.values_scaled(), &[2, 2, 1, 2, 2]);
        let p = extract_clusters(&o).unwrap();
        assert_eq!(p.cuts(), &[3]);
        assert_eq!(p.blocks(), &[vec![0, 1, 2], vec![3, 4, 5]]);
        let ids: Vec<u32> = p.block_of(6);
        assert_eq!(ids, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn singleton_ordering_yields_single_block() {
        let mut b = GraphBuilder::new();
        b.vertex("x");
        let g = b.build().unwrap();
        let o = Ordering::new(&g, vec![0]).unwrap();
        let p = extract_clusters(&o).unwrap();
        assert_eq!(p.blocks(), &[vec![0]]);
    }

    #[test]
    fn reversed_profile_is_reversed() {
        let g = path(5);
        let o = Ordering::new(&g, vec![0, 1, 2, 3, 4]).unwrap();
        let r = o.reversed();
        let pf: Vec<u64> = boundary_profile(&o).unwrap().values_scaled().to_vec();
        let pr: Vec<u64> = boundary_profile(&r).unwrap().values_scaled().to_vec();
        let mut flipped = pf.clone();
        flipped.reverse();
        assert_eq!(pr, flipped);
    }
}
