//! Weighted undirected graphs with exact arithmetic.
//!
//! All edge weights of a graph are stored as `u64` numerators over one
//! shared denominator (`scale`), reduced so the numerators and scale have
//! no common factor. Boundary sizes are therefore plain integer sums and
//! two boundaries compare exactly. Construction enforces the invariants the
//! rest of the crate relies on:
//!
//! * no self-loops, no duplicate vertex pairs, no negative weights;
//! * zero-weight edges are dropped;
//! * the total scaled weight stays below `u64::MAX / 4`, leaving headroom
//!   for the sums formed during ordering searches;
//! * the edge list is sorted by vertex pair `(u, v)` with `u < v`, and
//!   adjacency lists are sorted by neighbor, so iteration order (and with
//!   it every seeded downstream result) is reproducible.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::weight::ParsedWeight;

/// Index of a vertex within one [`WeightedGraph`].
pub type VertexId = u32;

/// Largest admissible total scaled weight.
const TOTAL_WEIGHT_LIMIT: u64 = u64::MAX / 4;

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// One undirected edge; `u < v` and `weight` is in scaled units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: u64,
}

/// A subset of the vertices of a fixed universe `0..universe`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet {
    bits: Vec<bool>,
    len: usize,
}

impl VertexSet {
    pub fn new(universe: usize) -> Self {
        VertexSet {
            bits: vec![false; universe],
            len: 0,
        }
    }

    pub fn from_indices<I: IntoIterator<Item = VertexId>>(universe: usize, iter: I) -> Result<Self> {
        let mut set = VertexSet::new(universe);
        for v in iter {
            if v as usize >= universe {
                return Err(Error::Domain(format!(
                    "vertex {v} outside universe of size {universe}"
                )));
            }
            set.insert(v);
        }
        Ok(set)
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.bits.get(v as usize).copied().unwrap_or(false)
    }

    /// Inserts `v`; returns whether it was newly added.
    pub fn insert(&mut self, v: VertexId) -> bool {
        let slot = &mut self.bits[v as usize];
        let added = !*slot;
        *slot = true;
        self.len += usize::from(added);
        added
    }

    /// Removes `v`; returns whether it was present.
    pub fn remove(&mut self, v: VertexId) -> bool {
        let slot = &mut self.bits[v as usize];
        let removed = *slot;
        *slot = false;
        self.len -= usize::from(removed);
        removed
    }

    pub fn complement(&self) -> VertexSet {
        VertexSet {
            bits: self.bits.iter().map(|b| !b).collect(),
            len: self.bits.len() - self.len,
        }
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as VertexId)
    }
}

/// Connected components, each listed in ascending vertex order; blocks are
/// ordered by their smallest vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentDecomposition {
    blocks: Vec<Vec<VertexId>>,
    block_of: Vec<u32>,
}

impl ComponentDecomposition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<VertexId>] {
        &self.blocks
    }

    /// Index of the block containing `v`.
    pub fn block_of(&self, v: VertexId) -> usize {
        self.block_of[v as usize] as usize
    }
}

/// Component/vertex/edge counts with isolated vertices excluded: only
/// components of at least two vertices (and their members) are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GraphStats {
    pub components: usize,
    pub vertices: usize,
    pub edges: usize,
}

/// Accumulates vertices and edges, then validates and canonicalizes into a
/// [`WeightedGraph`].
#[derive(Default)]
pub struct GraphBuilder {
    ids: Vec<String>,
    index: HashMap<String, VertexId>,
    edges: Vec<(VertexId, VertexId, ParsedWeight)>,
    seen: HashSet<(VertexId, VertexId)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        GraphBuilder::default()
    }

    /// Returns the id for `name`, creating the vertex on first sight.
    pub fn vertex(&mut self, name: &str) -> VertexId {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.ids.len() as VertexId;
        self.ids.push(name.to_string());
        self.index.insert(name.to_string(), v);
        v
    }

    pub fn add_edge(&mut self, u: &str, v: &str, weight: ParsedWeight) -> Result<()> {
        let (u, v) = (self.vertex(u), self.vertex(v));
        self.add_edge_ids(u, v, weight)
    }

    pub fn add_edge_ids(&mut self, u: VertexId, v: VertexId, weight: ParsedWeight) -> Result<()> {
        let n = self.ids.len() as u32;
        if u >= n || v >= n {
            return Err(Error::InvalidInput(format!(
                "edge endpoint {} out of range (graph has {n} vertices)",
                u.max(v)
            )));
        }
        if u == v {
            return Err(Error::InvalidInput(format!(
                "self-loop on vertex {:?}",
                self.ids[u as usize]
            )));
        }
        let key = (u.min(v), u.max(v));
        if !self.seen.insert(key) {
            return Err(Error::InvalidInput(format!(
                "duplicate edge {:?} -- {:?}",
                self.ids[key.0 as usize], self.ids[key.1 as usize]
            )));
        }
        self.edges.push((key.0, key.1, weight));
        Ok(())
    }

    pub fn build(self) -> Result<WeightedGraph> {
        let max_frac = self
            .edges
            .iter()
            .filter(|(_, _, w)| w.numerator != 0)
            .map(|(_, _, w)| w.frac_digits)
            .max()
            .unwrap_or(0);
        if max_frac > 18 {
            return Err(Error::Capacity(format!(
                "weight precision 10^-{max_frac} not supported"
            )));
        }
        let scale = 10u128.pow(max_frac);
        let mut edges: Vec<(VertexId, VertexId, u128)> = Vec::new();
        for (u, v, w) in &self.edges {
            if w.numerator == 0 {
                continue;
            }
            let scaled = u128::from(w.numerator) * 10u128.pow(max_frac - w.frac_digits);
            edges.push((*u, *v, scaled));
        }
        edges.sort_unstable_by_key(|&(u, v, _)| (u, v));
        WeightedGraph::from_scaled(self.ids, self.index, edges, scale)
    }
}

/// An undirected graph with exact nonnegative edge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, VertexId>,
    adj: Vec<Vec<(VertexId, u64)>>,
    edges: Vec<Edge>,
    scale: u64,
    total_weight: u64,
}

impl WeightedGraph {
    /// Canonicalizes pre-scaled edges: reduces by the common gcd, checks
    /// capacity, builds adjacency. `edges` must already be deduplicated,
    /// loop-free, zero-free and sorted by `(u, v)` with `u < v`.
    fn from_scaled(
        ids: Vec<String>,
        index: HashMap<String, VertexId>,
        edges: Vec<(VertexId, VertexId, u128)>,
        scale: u128,
    ) -> Result<WeightedGraph> {
        let mut common = scale;
        for &(_, _, w) in &edges {
            common = gcd(common, w);
        }
        debug_assert!(common > 0);
        let scale = scale / common;
        if scale > u64::MAX as u128 {
            return Err(Error::Capacity("weight denominator overflow".into()));
        }
        let mut total: u128 = 0;
        let mut reduced = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            let w = w / common;
            if w > u64::MAX as u128 {
                return Err(Error::Capacity(format!(
                    "edge weight overflow between vertices {u} and {v}"
                )));
            }
            total += w;
            reduced.push(Edge {
                u,
                v,
                weight: w as u64,
            });
        }
        if total > TOTAL_WEIGHT_LIMIT as u128 {
            return Err(Error::Capacity(format!(
                "total weight {total} exceeds supported limit"
            )));
        }
        let mut adj: Vec<Vec<(VertexId, u64)>> = vec![Vec::new(); ids.len()];
        for e in &reduced {
            adj[e.u as usize].push((e.v, e.weight));
            adj[e.v as usize].push((e.u, e.weight));
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(v, _)| v);
        }
        Ok(WeightedGraph {
            ids,
            index,
            adj,
            edges: reduced,
            scale: scale as u64,
            total_weight: total as u64,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertex names, indexed by [`VertexId`].
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: VertexId) -> &str {
        &self.ids[v as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    /// Canonically ordered edge list, weights in scaled units.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Common denominator of all edge weights.
    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn weight_f64(&self, scaled: u64) -> f64 {
        scaled as f64 / self.scale as f64
    }

    pub fn total_weight_scaled(&self) -> u64 {
        self.total_weight
    }

    /// Neighbors of `v` with scaled weights, ascending by neighbor id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, u64)] {
        &self.adj[v as usize]
    }

    /// Sum of scaled weights incident to `v`.
    pub fn degree_scaled(&self, v: VertexId) -> u64 {
        self.adj[v as usize].iter().map(|&(_, w)| w).sum()
    }

    pub fn is_isolated(&self, v: VertexId) -> bool {
        self.adj[v as usize].is_empty()
    }

    /// Total scaled weight of edges with exactly one endpoint in `a`.
    pub fn boundary_scaled(&self, a: &VertexSet) -> Result<u64> {
        if a.universe() != self.vertex_count() {
            return Err(Error::Domain(format!(
                "vertex set universe {} does not match graph order {}",
                a.universe(),
                self.vertex_count()
            )));
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| a.contains(e.u) != a.contains(e.v))
            .map(|e| e.weight)
            .sum())
    }

    /// [`Self::boundary_scaled`] in weight units.
    pub fn boundary_size(&self, a: &VertexSet) -> Result<f64> {
        Ok(self.weight_f64(self.boundary_scaled(a)?))
    }

    /// Connected components via breadth-first search from ascending roots.
    pub fn connected_components(&self) -> ComponentDecomposition {
        let n = self.vertex_count();
        let mut block_of = vec![u32::MAX; n];
        let mut blocks = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for root in 0..n as VertexId {
            if block_of[root as usize] != u32::MAX {
                continue;
            }
            let id = blocks.len() as u32;
            let mut members = vec![root];
            block_of[root as usize] = id;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in self.neighbors(v) {
                    if block_of[w as usize] == u32::MAX {
                        block_of[w as usize] = id;
                        members.push(w);
                        queue.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            blocks.push(members);
        }
        ComponentDecomposition { blocks, block_of }
    }

    /// Counts with isolated vertices excluded.
    pub fn stats(&self) -> GraphStats {
        let comps = self.connected_components();
        let big = comps.blocks().iter().filter(|b| b.len() >= 2);
        GraphStats {
            components: big.clone().count(),
            vertices: big.map(|b| b.len()).sum(),
            edges: self.edge_count(),
        }
    }

    /// The subgraph induced by `vertices` (strictly ascending, in range).
    /// Vertex `k` of the result is `vertices[k]`, so the caller's slice
    /// doubles as the new-to-old id map. The weight scale is inherited
    /// unchanged, which keeps weights comparable across subgraphs and makes
    /// the full-set induced subgraph equal to the original graph.
    pub fn induced_subgraph(&self, vertices: &[VertexId]) -> Result<WeightedGraph> {
        let n = self.vertex_count();
        let mut back = vec![u32::MAX; n];
        let mut prev: Option<VertexId> = None;
        for (k, &v) in vertices.iter().enumerate() {
            if v as usize >= n {
                return Err(Error::Domain(format!("vertex {v} outside graph of order {n}")));
            }
            if prev.is_some_and(|p| p >= v) {
                return Err(Error::Domain(
                    "induced subgraph vertices must be strictly ascending".into(),
                ));
            }
            prev = Some(v);
            back[v as usize] = k as u32;
        }
        let ids: Vec<String> = vertices.iter().map(|&v| self.ids[v as usize].clone()).collect();
        let index = ids
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), k as VertexId))
            .collect();
        let mut edges = Vec::new();
        for e in &self.edges {
            let (u, v) = (back[e.u as usize], back[e.v as usize]);
            if u != u32::MAX && v != u32::MAX {
                edges.push(Edge {
                    u,
                    v,
                    weight: e.weight,
                });
            }
        }
        edges.sort_unstable_by_key(|e| (e.u, e.v));
        let mut adj: Vec<Vec<(VertexId, u64)>> = vec![Vec::new(); ids.len()];
        let mut total = 0u64;
        for e in &edges {
            adj[e.u as usize].push((e.v, e.weight));
            adj[e.v as usize].push((e.u, e.weight));
            total += e.weight;
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(v, _)| v);
        }
        Ok(WeightedGraph {
            ids,
            index,
            adj,
            edges,
            scale: self.scale,
            total_weight: total,
        })
    }

    /// Pointwise mean of the adjacency matrices of `graphs`, all of which
    /// must share one vertex universe (same names in the same order). An
    /// edge of the result carries `(w_1 + ... + w_k) / k`; pairs missing
    /// from a graph contribute zero.
    pub fn integrate(graphs: &[&WeightedGraph]) -> Result<WeightedGraph> {
        let Some(first) = graphs.first() else {
            return Err(Error::Domain("integrate needs at least one graph".into()));
        };
        for g in &graphs[1..] {
            if g.ids != first.ids {
                return Err(Error::InvalidInput(
                    "graphs to integrate have different vertex universes".into(),
                ));
            }
        }
        let k = graphs.len() as u128;
        let mut lcm: u128 = 1;
        for g in graphs {
            let s = u128::from(g.scale);
            lcm = lcm / gcd(lcm, s) * s;
            if lcm > u64::MAX as u128 {
                return Err(Error::Capacity("combined weight denominator overflow".into()));
            }
        }
        let scale = lcm * k;
        let mut sums: std::collections::BTreeMap<(VertexId, VertexId), u128> =
            std::collections::BTreeMap::new();
        for g in graphs {
            let factor = lcm / u128::from(g.scale);
            for e in &g.edges {
                *sums.entry((e.u, e.v)).or_insert(0) += u128::from(e.weight) * factor;
            }
        }
        let edges: Vec<(VertexId, VertexId, u128)> =
            sums.into_iter().map(|((u, v), w)| (u, v, w)).collect();
        WeightedGraph::from_scaled(first.ids.clone(), first.index.clone(), edges, scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::parse;

    fn build(edges: &[(&str, &str, &str)]) -> WeightedGraph {
        let mut b = GraphBuilder::new();
        for (u, v, w) in edges {
            b.add_edge(u, v, parse(w).unwrap()).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn builds_and_canonicalizes() {
        let g = build(&[("b", "a", "2"), ("a", "c", "0.5")]);
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        // Common gcd of {20, 5} and scale 10 is 5.
        assert_eq!(g.scale(), 2);
        let ws: Vec<u64> = g.edges().iter().map(|e| e.weight).collect();
        assert_eq!(ws, vec![4, 1]);
        assert_eq!(g.weight_f64(g.edges()[1].weight), 0.5);
        // Edges are canonical: (0,1) before (0,2) regardless of insert order.
        assert!(g.edges().windows(2).all(|w| (w[0].u, w[0].v) < (w[1].u, w[1].v)));
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        let mut b = GraphBuilder::new();
        assert!(b.add_edge("x", "x", ParsedWeight::integer(1)).is_err());
        b.add_edge("x", "y", ParsedWeight::integer(1)).unwrap();
        let dup = b.add_edge("y", "x", ParsedWeight::integer(2));
        assert!(matches!(dup, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn drops_zero_weight_edges() {
        let g = build(&[("a", "b", "0"), ("b", "c", "1")]);
        assert_eq!(g.edge_count(), 1);
        assert!(g.is_isolated(g.lookup("a").unwrap()));
    }

    #[test]
    fn boundary_of_path() {
        let g = build(&[("a", "b", "1"), ("b", "c", "1")]);
        let a = g.lookup("a").unwrap();
        let c = g.lookup("c").unwrap();
        let single = VertexSet::from_indices(3, [a]).unwrap();
        assert_eq!(g.boundary_scaled(&single).unwrap(), 1);
        let ends = VertexSet::from_indices(3, [a, c]).unwrap();
        assert_eq!(g.boundary_scaled(&ends).unwrap(), 2);
        assert_eq!(g.boundary_scaled(&VertexSet::new(3)).unwrap(), 0);
        assert_eq!(g.boundary_scaled(&ends.complement().complement()).unwrap(), 2);
        let wrong_universe = VertexSet::new(2);
        assert!(g.boundary_size(&wrong_universe).is_err());
    }

    #[test]
    fn boundary_complement_symmetry() {
        let g = build(&[("a", "b", "1.5"), ("b", "c", "2"), ("c", "d", "0.5"), ("a", "d", "1")]);
        let s = VertexSet::from_indices(4, [0, 2]).unwrap();
        assert_eq!(
            g.boundary_scaled(&s).unwrap(),
            g.boundary_scaled(&s.complement()).unwrap()
        );
    }

    #[test]
    fn components_ordered_by_smallest_vertex() {
        // Vertex ids by first sight: p=0, q=1, x=2, y=3, r=4.
        let g = build(&[("p", "q", "1"), ("x", "y", "1"), ("q", "r", "1")]);
        let comps = g.connected_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps.blocks()[0], vec![0, 1, 4]);
        assert_eq!(comps.blocks()[1], vec![2, 3]);
        assert_eq!(comps.block_of(4), 0);
        assert_eq!(comps.block_of(3), 1);
    }

    #[test]
    fn stats_exclude_isolated_vertices() {
        let mut b = GraphBuilder::new();
        b.vertex("lonely");
        b.add_edge("a", "b", ParsedWeight::integer(1)).unwrap();
        b.add_edge("c", "d", ParsedWeight::integer(1)).unwrap();
        b.add_edge("d", "e", ParsedWeight::integer(1)).unwrap();
        let g = b.build().unwrap();
        assert_eq!(
            g.stats(),
            GraphStats {
                components: 2,
                vertices: 5,
                edges: 3
            }
        );
    }

    #[test]
    fn induced_subgraph_keeps_scale_and_order() {
        let g = build(&[("a", "b", "0.5"), ("b", "c", "1"), ("a", "c", "2")]);
        let sub = g.induced_subgraph(&[0, 2]).unwrap();
        assert_eq!(sub.vertex_count(), 2);
        assert_eq!(sub.edge_count(), 1);
        assert_eq!(sub.scale(), g.scale());
        assert_eq!(sub.ids(), &["a".to_string(), "c".to_string()]);
        assert_eq!(g.weight_f64(sub.edges()[0].weight), 2.0);

        let full = g.induced_subgraph(&[0, 1, 2]).unwrap();
        assert_eq!(full, g);

        assert!(g.induced_subgraph(&[2, 0]).is_err());
        assert!(g.induced_subgraph(&[0, 7]).is_err());
    }

    #[test]
    fn integrate_averages_pointwise() {
        let g1 = build(&[("a", "b", "1"), ("b", "c", "2")]);
        // The shared universe includes c even though g2 has no edge to it.
        let mut b = GraphBuilder::new();
        b.vertex("a");
        b.vertex("b");
        b.vertex("c");
        b.add_edge("a", "b", parse("2").unwrap()).unwrap();
        let g2 = b.build().unwrap();

        let avg = WeightedGraph::integrate(&[&g1, &g2]).unwrap();
        let ab = avg.edges()[0];
        let bc = avg.edges()[1];
        assert_eq!(avg.weight_f64(ab.weight), 1.5);
        assert_eq!(avg.weight_f64(bc.weight), 1.0);

        // Averaging a single graph is the identity.
        assert_eq!(WeightedGraph::integrate(&[&g1]).unwrap(), g1);

        let other = build(&[("x", "y", "1")]);
        assert!(WeightedGraph::integrate(&[&g1, &other]).is_err());
        assert!(WeightedGraph::integrate(&[]).is_err());
    }

    #[test]
    fn integrate_mixed_scales_is_exact() {
        let mk = |w: &str| {
            let mut b = GraphBuilder::new();
            b.vertex("a");
            b.vertex("b");
            b.add_edge("a", "b", parse(w).unwrap()).unwrap();
            b.build().unwrap()
        };
        let (g1, g2, g3) = (mk("0.1"), mk("0.2"), mk("0.4"));
        let avg = WeightedGraph::integrate(&[&g1, &g2, &g3]).unwrap();
        // (0.1 + 0.2 + 0.4) / 3 = 7/30 exactly.
        assert_eq!(avg.edges()[0].weight as u128 * 30, 7 * avg.scale() as u128);
    }

    #[test]
    fn capacity_limit_enforced() {
        let mut b = GraphBuilder::new();
        let huge = ParsedWeight {
            numerator: u64::MAX / 4,
            frac_digits: 0,
        };
        b.add_edge("a", "b", huge).unwrap();
        b.add_edge("b", "c", ParsedWeight::integer(7)).unwrap();
        assert!(matches!(b.build(), Err(Error::Capacity(_))));
    }
}
