//! Semisupervised label prediction from cluster structure.
//!
//! Each connected component is driven to a fixed-point ordering and cut
//! into clusters; every unlabeled vertex in a cluster that contains labeled
//! vertices receives their label mean as its probability of carrying label
//! one. Vertices out of reach of any labeled cluster (clusters with no
//! labels, singleton components, isolated vertices) fall back to the
//! majority label of the labeled set, with ties resolved to zero.
//!
//! Bagging repeats this on induced subgraphs: each run keeps every labeled
//! vertex plus a fixed-size uniform sample of the unlabeled ones, and a
//! vertex's final probability is the mean over the runs that sampled it.
//! All seeds derive from one master seed, so results are reproducible and
//! independent of execution order.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{VertexId, WeightedGraph};
use crate::search::cluster_graph;
use crate::seed;

/// Binary labels for a subset of a graph's vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelAssignment {
    labels: BTreeMap<VertexId, bool>,
}

impl LabelAssignment {
    /// Validates that the labeled vertices exist in `g`, appear at most
    /// once, and that there is at least one of them.
    pub fn new(
        g: &WeightedGraph,
        pairs: impl IntoIterator<Item = (VertexId, bool)>,
    ) -> Result<Self> {
        let n = g.vertex_count();
        let mut labels = BTreeMap::new();
        for (v, y) in pairs {
            if v as usize >= n {
                return Err(Error::Domain(format!(
                    "labeled vertex {v} does not exist in a graph of order {n}"
                )));
            }
            if labels.insert(v, y).is_some() {
                return Err(Error::InvalidInput(format!(
                    "vertex {:?} labeled more than once",
                    g.id(v)
                )));
            }
        }
        if labels.is_empty() {
            return Err(Error::Domain("label set is empty".into()));
        }
        Ok(LabelAssignment { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, v: VertexId) -> Option<bool> {
        self.labels.get(&v).copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.labels.contains_key(&v)
    }

    /// Labeled vertices in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, bool)> + '_ {
        self.labels.iter().map(|(&v, &y)| (v, y))
    }

    /// The most common label; a tie yields `false`.
    pub fn majority(&self) -> bool {
        let ones = self.labels.values().filter(|&&y| y).count();
        2 * ones > self.labels.len()
    }

    pub fn positives(&self) -> usize {
        self.labels.values().filter(|&&y| y).count()
    }
}

/// Probability (of label one) for a single unlabeled vertex, together with
/// the number of bagging runs that contributed to it. Unbagged propagation
/// reports one contributing run; a bagged vertex never sampled reports
/// zero and carries the majority fallback.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub probability: f64,
    pub contributing_runs: u32,
}

/// Probabilities for every unlabeled vertex of the graph they were
/// computed on.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PredictionVector {
    preds: BTreeMap<VertexId, Prediction>,
}

impl PredictionVector {
    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn get(&self, v: VertexId) -> Option<Prediction> {
        self.preds.get(&v).copied()
    }

    /// Predictions in ascending vertex order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, Prediction)> + '_ {
        self.preds.iter().map(|(&v, &p)| (v, p))
    }
}

/// Bagging parameters: `runs` subsamples, each holding a `lambda` fraction
/// of the unlabeled vertices, all seeded from `master_seed`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BagConfig {
    pub runs: u32,
    pub lambda: f64,
    pub master_seed: u64,
}

impl BagConfig {
    pub fn new(runs: u32, lambda: f64, master_seed: u64) -> Result<Self> {
        let cfg = BagConfig {
            runs,
            lambda,
            master_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::InvalidConfig("bagging needs at least one run".into()));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sampling fraction must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Clusters each component of `g` (seeded per component by mixing `seed_value`
/// with the component index) and assigns every unlabeled vertex the label
/// mean of its cluster, or the majority label where no labeled vertex is in
/// reach. Probabilities are exact cluster means; `contributing_runs` is one
/// throughout.
pub fn propagate(
    g: &WeightedGraph,
    labels: &LabelAssignment,
    seed_value: u64,
) -> Result<PredictionVector> {
    let n = g.vertex_count();
    for (v, _) in labels.iter() {
        if v as usize >= n {
            return Err(Error::Domain(format!(
                "labeled vertex {v} does not exist in a graph of order {n}"
            )));
        }
    }
    if labels.is_empty() {
        return Err(Error::Domain("label set is empty".into()));
    }
    // One fixed point per component: each bag already diversifies the
    // ensemble, so propagation never multiplies starts.
    let clusters = cluster_graph(g, seed_value, 1)?;
    let cluster_count = clusters.iter().max().map_or(0, |&m| m as usize + 1);
    let mut ones = vec![0u64; cluster_count];
    let mut labeled = vec![0u64; cluster_count];
    for (v, y) in labels.iter() {
        let c = clusters[v as usize] as usize;
        ones[c] += u64::from(y);
        labeled[c] += 1;
    }

    let majority = f64::from(labels.majority() as u8);
    let preds = (0..n as VertexId)
        .filter(|&v| !labels.contains(v))
        .map(|v| {
            let c = clusters[v as usize] as usize;
            let probability = if labeled[c] == 0 {
                majority // no labeled vertex in reach of this cluster
            } else {
                ones[c] as f64 / labeled[c] as f64
            };
            (
                v,
                Prediction {
                    probability,
                    contributing_runs: 1,
                },
            )
        })
        .collect();
    Ok(PredictionVector { preds })
}

/// Runs [`propagate`] on `cfg.runs` bagged subgraphs and averages. Run `r`
/// uses the seed `derive(master_seed, r)` both to sample `floor(lambda * u)`
/// of the `u` unlabeled vertices (uniformly, without replacement) and to
/// seed propagation on the induced subgraph of the sample plus all labeled
/// vertices. Each vertex's probability is the mean over the runs that
/// sampled it; vertices sampled by no run keep the majority fallback with
/// zero contributing runs.
pub fn bagged_predict(
    g: &WeightedGraph,
    labels: &LabelAssignment,
    cfg: &BagConfig,
) -> Result<PredictionVector> {
    cfg.validate()?;
    let n = g.vertex_count();
    let unlabeled: Vec<VertexId> = (0..n as VertexId).filter(|&v| !labels.contains(v)).collect();
    let sample_size = (cfg.lambda * unlabeled.len() as f64).floor() as usize;

    let runs: Vec<Result<Vec<(VertexId, f64)>>> = (1..=cfg.runs as u64)
        .into_par_iter()
        .map(|r| {
            let run_seed = seed::derive(cfg.master_seed, r);
            let chosen = rand::seq::index::sample(
                &mut seed::rng(run_seed),
                unlabeled.len(),
                sample_size,
            );
            let mut bag: Vec<VertexId> = labels.iter().map(|(v, _)| v).collect();
            bag.extend(chosen.iter().map(|k| unlabeled[k]));
            bag.sort_unstable();
            let sub = g.induced_subgraph(&bag)?;
            let sub_labels = LabelAssignment::new(
                &sub,
                bag.iter()
                    .enumerate()
                    .filter_map(|(k, &v)| labels.get(v).map(|y| (k as VertexId, y))),
            )?;
            let pv = propagate(&sub, &sub_labels, run_seed)?;
            Ok(pv
                .iter()
                .map(|(local, pred)| (bag[local as usize], pred.probability))
                .collect())
        })
        .collect();

    let mut acc: BTreeMap<VertexId, (f64, u32)> = BTreeMap::new();
    for run in runs {
        for (v, p) in run? {
            let slot = acc.entry(v).or_insert((0.0, 0));
            slot.0 += p;
            slot.1 += 1;
        }
    }
    let majority = f64::from(labels.majority() as u8);
    let preds = unlabeled
        .iter()
        .map(|&v| {
            let pred = match acc.get(&v) {
                Some(&(sum, count)) => Prediction {
                    probability: sum / f64::from(count),
                    contributing_runs: count,
                },
                None => Prediction {
                    probability: majority,
                    contributing_runs: 0,
                },
            };
            (v, pred)
        })
        .collect();
    Ok(PredictionVector { preds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::weight::ParsedWeight;

    fn unit_graph(edges: &[(&str, &str)]) -> WeightedGraph {
        let mut b = GraphBuilder::new();
        for (u, v) in edges {
            b.add_edge(u, v, ParsedWeight::integer(1)).unwrap();
        }
        b.build().unwrap()
    }

    /// Two unit K4's {0..3} and {4..7} joined by the bridge 3-4.
    fn k4_barbell() -> WeightedGraph {
        let names = ["a", "b", "c", "d", "e", "f", "g", "h"];
        let mut edges = Vec::new();
        for block in [&names[..4], &names[4..]] {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    edges.push((block[i], block[j]));
                }
            }
        }
        edges.push(("d", "e"));
        unit_graph(&edges)
    }

    fn labels(g: &WeightedGraph, pairs: &[(&str, bool)]) -> LabelAssignment {
        LabelAssignment::new(
            g,
            pairs.iter().map(|&(id, y)| (g.lookup(id).unwrap(), y)),
        )
        .unwrap()
    }

    #[test]
    fn label_assignment_validates() {
        let g = unit_graph(&[("a", "b")]);
        assert!(LabelAssignment::new(&g, [(0, true)]).is_ok());
        assert!(LabelAssignment::new(&g, []).is_err());
        assert!(LabelAssignment::new(&g, [(5, true)]).is_err());
        assert!(LabelAssignment::new(&g, [(0, true), (0, true)]).is_err());
    }

    #[test]
    fn majority_ties_resolve_to_zero() {
        let g = unit_graph(&[("a", "b"), ("c", "d")]);
        let l = labels(&g, &[("a", true), ("c", false)]);
        assert!(!l.majority());
        let l2 = labels(&g, &[("a", true), ("c", true), ("b", false)]);
        assert!(l2.majority());
    }

    #[test]
    fn cluster_mean_of_three_labels() {
        // A unit K4 never splits (every profile is (3,4,3)), so the single
        // cluster holds labels {1,1,0} and the unlabeled vertex gets 2/3.
        let g = unit_graph(&[
            ("a", "b"),
            ("a", "c"),
            ("a", "d"),
            ("b", "c"),
            ("b", "d"),
            ("c", "d"),
        ]);
        let l = labels(&g, &[("a", true), ("b", true), ("c", false)]);
        for seed_value in [0u64, 1, 99] {
            let pv = propagate(&g, &l, seed_value).unwrap();
            let d = g.lookup("d").unwrap();
            assert_eq!(pv.get(d).unwrap().probability, 2.0 / 3.0);
            assert_eq!(pv.get(d).unwrap().contributing_runs, 1);
            assert_eq!(pv.len(), 1);
        }
    }

    #[test]
    fn single_labeled_vertex_propagates_its_value() {
        let g = unit_graph(&[("a", "b")]);
        let l = labels(&g, &[("a", true)]);
        let pv = propagate(&g, &l, 7).unwrap();
        assert_eq!(pv.get(g.lookup("b").unwrap()).unwrap().probability, 1.0);
    }

    #[test]
    fn barbell_blocks_get_their_own_label_means() {
        // K4 blocks are recovered at the fixed point; with labels {1,1} in
        // one block and {0} in the other, unlabeled vertices follow their
        // block. K4's are used instead of triangles to leave vertices
        // unlabeled in both blocks.
        let g = k4_barbell();
        let l = labels(&g, &[("a", true), ("b", true), ("e", false)]);
        let mut block_recovered = 0;
        for seed_value in 0..20u64 {
            let pv = propagate(&g, &l, seed_value).unwrap();
            let probs: Vec<f64> = ["c", "d", "f", "g", "h"]
                .iter()
                .map(|id| pv.get(g.lookup(id).unwrap()).unwrap().probability)
                .collect();
            if probs == vec![1.0, 1.0, 0.0, 0.0, 0.0] {
                block_recovered += 1;
            }
        }
        assert!(
            block_recovered >= 18,
            "only {block_recovered}/20 seeds recovered the block labels"
        );
    }

    #[test]
    fn unreachable_vertices_fall_back_to_majority() {
        // Components: a-b (a labeled 1), c-d (c labeled 0), isolated e.
        // Majority of {1, 0} ties to 0, so e gets 0.0.
        let mut b = GraphBuilder::new();
        b.add_edge("a", "b", ParsedWeight::integer(1)).unwrap();
        b.add_edge("c", "d", ParsedWeight::integer(1)).unwrap();
        b.vertex("e");
        let g = b.build().unwrap();
        let l = labels(&g, &[("a", true), ("c", false)]);
        let pv = propagate(&g, &l, 3).unwrap();
        let p = |id: &str| pv.get(g.lookup(id).unwrap()).unwrap().probability;
        assert_eq!(p("b"), 1.0);
        assert_eq!(p("d"), 0.0);
        assert_eq!(p("e"), 0.0);
    }

    #[test]
    fn all_same_label_predicts_that_label_everywhere() {
        let g = k4_barbell();
        let l = labels(&g, &[("a", true), ("f", true)]);
        let pv = propagate(&g, &l, 11).unwrap();
        assert!(pv.iter().all(|(_, p)| p.probability == 1.0));
        let cfg = BagConfig::new(5, 0.5, 42).unwrap();
        let bagged = bagged_predict(&g, &l, &cfg).unwrap();
        assert!(bagged.iter().all(|(_, p)| p.probability == 1.0));
    }

    #[test]
    fn bag_config_validates() {
        assert!(BagConfig::new(0, 0.5, 0).is_err());
        assert!(BagConfig::new(1, 0.0, 0).is_err());
        assert!(BagConfig::new(1, 1.5, 0).is_err());
        assert!(BagConfig::new(1, f64::NAN, 0).is_err());
        assert!(BagConfig::new(25, 0.5, 0).is_ok());
    }

    #[test]
    fn degenerate_bagging_equals_propagate() {
        let g = k4_barbell();
        let l = labels(&g, &[("a", true), ("b", true), ("e", false)]);
        for master in [0u64, 17, 0xfeed] {
            let cfg = BagConfig::new(1, 1.0, master).unwrap();
            let bagged = bagged_predict(&g, &l, &cfg).unwrap();
            let direct = propagate(&g, &l, seed::derive(master, 1)).unwrap();
            assert_eq!(bagged, direct);
        }
    }

    #[test]
    fn bagging_is_deterministic() {
        let g = k4_barbell();
        let l = labels(&g, &[("a", true), ("e", false)]);
        let cfg = BagConfig::new(8, 0.5, 31).unwrap();
        let one = bagged_predict(&g, &l, &cfg).unwrap();
        let two = bagged_predict(&g, &l, &cfg).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn full_lambda_gives_full_provenance() {
        let g = k4_barbell();
        let l = labels(&g, &[("a", true), ("e", false)]);
        let cfg = BagConfig::new(7, 1.0, 5).unwrap();
        let pv = bagged_predict(&g, &l, &cfg).unwrap();
        assert_eq!(pv.len(), 6);
        assert!(pv.iter().all(|(_, p)| p.contributing_runs == 7));
    }

    #[test]
    fn unsampled_vertices_get_majority_with_zero_runs() {
        // One unlabeled vertex and lambda small enough that the sample is
        // empty: floor(0.4 * 1) = 0.
        let g = unit_graph(&[("a", "b"), ("b", "c")]);
        let l = labels(&g, &[("a", true), ("c", true)]);
        let cfg = BagConfig::new(3, 0.4, 9).unwrap();
        let pv = bagged_predict(&g, &l, &cfg).unwrap();
        let b = g.lookup("b").unwrap();
        assert_eq!(
            pv.get(b).unwrap(),
            Prediction {
                probability: 1.0,
                contributing_runs: 0
            }
        );
    }

    #[test]
    fn bagging_matches_sequential_reference() {
        // Reference reimplementation: same derivation chain, explicitly
        // sequential, averaging over contributing runs only. Must agree
        // bit for bit with the (possibly parallel) implementation.
        let g = k4_barbell();
        let l = labels(&g, &[("a", true), ("b", false), ("e", true)]);
        let cfg = BagConfig::new(6, 0.4, 1234).unwrap();
        let fast = bagged_predict(&g, &l, &cfg).unwrap();

        let unlabeled: Vec<VertexId> =
            (0..g.vertex_count() as u32).filter(|&v| !l.contains(v)).collect();
        let m = (cfg.lambda * unlabeled.len() as f64).floor() as usize;
        let mut sums: BTreeMap<VertexId, (f64, u32)> = BTreeMap::new();
        for r in 1..=u64::from(cfg.runs) {
            let rs = seed::derive(cfg.master_seed, r);
            let chosen = rand::seq::index::sample(&mut seed::rng(rs), unlabeled.len(), m);
            let mut bag: Vec<VertexId> = l.iter().map(|(v, _)| v).collect();
            bag.extend(chosen.iter().map(|k| unlabeled[k]));
            bag.sort_unstable();
            let sub = g.induced_subgraph(&bag).unwrap();
            let sl = LabelAssignment::new(
                &sub,
                bag.iter()
                    .enumerate()
                    .filter_map(|(k, &v)| l.get(v).map(|y| (k as VertexId, y))),
            )
            .unwrap();
            let pv = propagate(&sub, &sl, rs).unwrap();
            for (local, pred) in pv.iter() {
                let e = sums.entry(bag[local as usize]).or_insert((0.0, 0));
                e.0 += pred.probability;
                e.1 += 1;
            }
        }
        for &v in &unlabeled {
            let expect = match sums.get(&v) {
                Some(&(s, c)) => (s / f64::from(c), c),
                None => (0.0, 0), // majority of {1,0,1} is 1... see below
            };
            let got = fast.get(v).unwrap();
            if sums.contains_key(&v) {
                assert_eq!(got.probability, expect.0, "vertex {v}");
                assert_eq!(got.contributing_runs, expect.1, "vertex {v}");
            } else {
                assert_eq!(got.contributing_runs, 0);
                assert_eq!(got.probability, 1.0); // majority of {1,0,1}
            }
        }
        // Sanity: some vertex must have mixed contributions for the mean
        // to be exercised (2 of 5 unlabeled sampled per run, 6 runs).
        assert!(fast.iter().any(|(_, p)| p.contributing_runs > 1));
    }
}
