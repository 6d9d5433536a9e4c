//! ROC scoring and repeated k-fold cross-validation.
//!
//! The area under the ROC curve is computed in its pair-counting form: the
//! fraction of (positive, negative) pairs where the positive outscores the
//! negative, ties counted half. Counting is integer-exact, so results match
//! a brute-force enumeration bit for bit.
//!
//! Cross-validation hides one fold of labeled vertices at a time, predicts
//! them from the rest with [`crate::predict::bagged_predict`], and scores
//! the hidden fold. Folds are dealt deterministically from a seed, round
//! robin per shuffled class (stratified) or over the whole labeled set
//! (fallback when a class is smaller than the fold count). Folds whose
//! hidden truth is single-class cannot be scored; they are skipped and
//! counted. Isolated vertices are excluded from scoring by default.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{VertexId, WeightedGraph};
use crate::predict::{bagged_predict, BagConfig, LabelAssignment};
use crate::seed;

/// Pair-counting ROC AUC over `(score, is_positive)` pairs.
pub fn roc_auc(pairs: &[(f64, bool)]) -> Result<f64> {
    let positives = pairs.iter().filter(|&&(_, y)| y).count() as u64;
    let negatives = pairs.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass(format!(
            "{positives} positives and {negatives} negatives"
        )));
    }
    if pairs.iter().any(|(s, _)| s.is_nan()) {
        return Err(Error::Domain("scores must not be NaN".into()));
    }
    let mut sorted: Vec<(f64, bool)> = pairs.to_vec();
    sorted.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN scores were rejected"));

    let mut wins = 0u64; // positive strictly above negative
    let mut ties = 0u64; // positive and negative with equal scores
    let mut neg_below = 0u64;
    let mut i = 0usize;
    while i < sorted.len() {
        let mut j = i;
        let mut group_pos = 0u64;
        let mut group_neg = 0u64;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 {
                group_pos += 1;
            } else {
                group_neg += 1;
            }
            j += 1;
        }
        wins += group_pos * neg_below;
        ties += group_pos * group_neg;
        neg_below += group_neg;
        i = j;
    }
    Ok((wins as f64 + 0.5 * ties as f64) / (positives * negatives) as f64)
}

/// Assignment of labeled vertices to folds, per repeat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    repeats: usize,
    seed: u64,
    stratified: bool,
    /// `folds[repeat][fold]` = hidden vertices, ascending.
    folds: Vec<Vec<Vec<VertexId>>>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn repeats(&self) -> usize {
        self.repeats
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Whether folds were stratified by class (false after degradation).
    pub fn stratified(&self) -> bool {
        self.stratified
    }

    pub fn folds(&self) -> &[Vec<Vec<VertexId>>] {
        &self.folds
    }
}

/// Deals the labeled vertices into `k` folds, `repeats` times.
///
/// Each repeat shuffles every class separately and deals round robin with a
/// cursor continuing across classes, so fold sizes differ by at most one
/// overall and per class. If some class has fewer than `k` members the plan
/// degrades to unstratified dealing over the whole labeled set (with a
/// warning logged).
pub fn make_folds(
    labels: &LabelAssignment,
    k: usize,
    repeats: usize,
    seed_value: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "cross-validation needs at least 2 folds, got {k}"
        )));
    }
    if repeats < 1 {
        return Err(Error::InvalidConfig("need at least one repeat".into()));
    }
    let negatives: Vec<VertexId> = labels.iter().filter(|&(_, y)| !y).map(|(v, _)| v).collect();
    let positives: Vec<VertexId> = labels.iter().filter(|&(_, y)| y).map(|(v, _)| v).collect();
    let stratified = negatives.len() >= k && positives.len() >= k;
    if !stratified {
        log::warn!(
            "class sizes {}/{} below fold count {k}; falling back to unstratified folds",
            negatives.len(),
            positives.len()
        );
    }
    let mut folds = Vec::with_capacity(repeats);
    for rep in 0..repeats {
        let mut rng = seed::rng(seed::derive(seed_value, rep as u64));
        let mut dealt: Vec<Vec<VertexId>> = vec![Vec::new(); k];
        let mut cursor = 0usize;
        let strata: Vec<Vec<VertexId>> = if stratified {
            vec![negatives.clone(), positives.clone()]
        } else {
            let mut all = negatives.clone();
            all.extend(&positives);
            all.sort_unstable();
            vec![all]
        };
        for mut stratum in strata {
            use rand::seq::SliceRandom;
            stratum.shuffle(&mut rng);
            for v in stratum {
                dealt[cursor % k].push(v);
                cursor += 1;
            }
        }
        for f in &mut dealt {
            f.sort_unstable();
        }
        folds.push(dealt);
    }
    Ok(FoldPlan {
        k,
        repeats,
        seed: seed_value,
        stratified,
        folds,
    })
}

/// Scores of one cross-validation, plus aggregates. The mean and `std_folds`
/// are over all scored folds pooled across repeats; `repeat_means` and
/// `std_repeats` aggregate per repeat first. Sample standard deviations use
/// the n-1 denominator and are zero when fewer than two values exist.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RocResult {
    /// AUC of each scored fold, per repeat, in dealing order.
    pub scores_by_repeat: Vec<Vec<f64>>,
    pub mean: f64,
    pub std_folds: f64,
    pub repeat_means: Vec<f64>,
    pub std_repeats: f64,
    /// Folds that could not be scored (single-class hidden truth or empty).
    pub skipped_folds: u32,
}

impl RocResult {
    pub fn fold_scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.scores_by_repeat.iter().flatten().copied()
    }

    pub fn scored_count(&self) -> usize {
        self.scores_by_repeat.iter().map(Vec::len).sum()
    }

    fn from_scores(scores_by_repeat: Vec<Vec<f64>>, skipped_folds: u32) -> Self {
        let flat: Vec<f64> = scores_by_repeat.iter().flatten().copied().collect();
        let fold_mean = mean(&flat);
        let std_folds = sample_std(&flat, fold_mean);
        let repeat_means: Vec<f64> = scores_by_repeat
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| mean(r))
            .collect();
        let rep_mean = mean(&repeat_means);
        let std_repeats = sample_std(&repeat_means, rep_mean);
        RocResult {
            scores_by_repeat,
            mean: fold_mean,
            std_folds,
            repeat_means,
            std_repeats,
            skipped_folds,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64], mean: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

/// Cross-validates label prediction on `g`: for every fold of `plan`, hides
/// that fold, trains on the remaining labels with bagging config `cfg`
/// (fold-specific master seed mixed from `cfg.master_seed`, the repeat and
/// the fold index), and scores the hidden vertices. Test vertices isolated
/// in `g` are excluded from scoring unless `score_isolated` is set. Folds
/// with single-class (or empty) hidden truth are skipped; if every fold is
/// skipped an evaluation error is returned.
pub fn cross_validate(
    g: &WeightedGraph,
    labels: &LabelAssignment,
    plan: &FoldPlan,
    cfg: &BagConfig,
    score_isolated: bool,
) -> Result<RocResult> {
    cfg.validate()?;
    let cells: Vec<(usize, usize, &Vec<VertexId>)> = plan
        .folds()
        .iter()
        .enumerate()
        .flat_map(|(rep, folds)| folds.iter().enumerate().map(move |(f, fold)| (rep, f, fold)))
        .collect();

    let outcomes: Vec<Result<Option<f64>>> = cells
        .par_iter()
        .map(|&(rep, fold_idx, fold)| {
            let hidden: std::collections::BTreeSet<VertexId> = fold.iter().copied().collect();
            let train: Vec<(VertexId, bool)> =
                labels.iter().filter(|(v, _)| !hidden.contains(v)).collect();
            if train.is_empty() {
                return Ok(None);
            }
            let train = LabelAssignment::new(g, train)?;
            let fold_cfg = BagConfig {
                runs: cfg.runs,
                lambda: cfg.lambda,
                master_seed: seed::mix(cfg.master_seed, &[rep as u64, fold_idx as u64]),
            };
            let pv = bagged_predict(g, &train, &fold_cfg)?;
            let pairs: Vec<(f64, bool)> = fold
                .iter()
                .filter(|&&v| score_isolated || !g.is_isolated(v))
                .map(|&v| {
                    let score = pv
                        .get(v)
                        .expect("hidden vertices are unlabeled during training")
                        .probability;
                    (score, labels.get(v).expect("folds hold labeled vertices"))
                })
                .collect();
            match roc_auc(&pairs) {
                Ok(auc) => Ok(Some(auc)),
                Err(Error::SingleClass(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut scores_by_repeat = vec![Vec::new(); plan.repeats()];
    let mut skipped = 0u32;
    for (&(rep, _, _), outcome) in cells.iter().zip(outcomes) {
        match outcome? {
            Some(auc) => scores_by_repeat[rep].push(auc),
            None => skipped += 1,
        }
    }
    if scores_by_repeat.iter().all(Vec::is_empty) {
        return Err(Error::Evaluation(
            "every fold was degenerate; nothing could be scored".into(),
        ));
    }
    Ok(RocResult::from_scores(scores_by_repeat, skipped))
}

/// A grid of cross-validation results: one row per label class, one column
/// per graph.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub graph_names: Vec<String>,
    pub class_names: Vec<String>,
    /// `cells[class][graph]`.
    pub cells: Vec<Vec<RocResult>>,
}

impl ExperimentReport {
    /// Tab-separated table, one row per class, cells `mean±std` with three
    /// decimals (std over pooled fold scores).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("class");
        for g in &self.graph_names {
            out.push('\t');
            out.push_str(g);
        }
        out.push('\n');
        for (ci, class) in self.class_names.iter().enumerate() {
            out.push_str(class);
            for cell in &self.cells[ci] {
                out.push_str(&format!("\t{:.3}±{:.3}", cell.mean, cell.std_folds));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Settings for one experiment grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub repeats: usize,
    /// Bagging runs per fold.
    pub runs: u32,
    /// Bagging sample fraction.
    pub lambda: f64,
    pub master_seed: u64,
    /// Score hidden vertices even when isolated in the evaluated graph.
    pub score_isolated: bool,
}

/// Runs the full grid: every class against every graph.
///
/// Per cell, folds are planned with seed `mix(master_seed, [1, graph,
/// class])` and bagging is seeded with `mix(master_seed, [2, graph,
/// class])`. Unless `score_isolated` is set, labels on vertices isolated in
/// the evaluated graph are dropped before folding — they could never be
/// scored there and would only dilute the folds. Cell failures abort the
/// run.
pub fn run_experiment(
    graphs: &[(String, &WeightedGraph)],
    classes: &[(String, LabelAssignment)],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if graphs.is_empty() || classes.is_empty() {
        return Err(Error::Domain("experiment needs at least one graph and one class".into()));
    }
    let cells: Vec<(usize, usize)> = (0..classes.len())
        .flat_map(|ci| (0..graphs.len()).map(move |gi| (ci, gi)))
        .collect();
    let results: Vec<Result<RocResult>> = cells
        .par_iter()
        .map(|&(ci, gi)| {
            let g = graphs[gi].1;
            // Re-validate the labels against this graph: the same class is
            // reused across columns.
            let full = LabelAssignment::new(g, classes[ci].1.iter())?;
            let kept: Vec<(VertexId, bool)> = full
                .iter()
                .filter(|&(v, _)| cfg.score_isolated || !g.is_isolated(v))
                .collect();
            if kept.is_empty() {
                return Err(Error::Evaluation(format!(
                    "class {:?} has no labels on non-isolated vertices of graph {:?}",
                    classes[ci].0, graphs[gi].0
                )));
            }
            let labels = LabelAssignment::new(g, kept)?;
            let plan = make_folds(
                &labels,
                cfg.folds,
                cfg.repeats,
                seed::mix(cfg.master_seed, &[1, gi as u64, ci as u64]),
            )?;
            let bag_cfg = BagConfig::new(
                cfg.runs,
                cfg.lambda,
                seed::mix(cfg.master_seed, &[2, gi as u64, ci as u64]),
            )?;
            let result = cross_validate(g, &labels, &plan, &bag_cfg, cfg.score_isolated)?;
            log::info!(
                "class {} on {}: mean AUC {:.3} over {} folds ({} skipped)",
                classes[ci].0,
                graphs[gi].0,
                result.mean,
                result.scored_count(),
                result.skipped_folds
            );
            Ok(result)
        })
        .collect();

    let mut iter = results.into_iter();
    let mut grid = Vec::with_capacity(classes.len());
    for _ in 0..classes.len() {
        let mut row = Vec::with_capacity(graphs.len());
        for _ in 0..graphs.len() {
            row.push(iter.next().expect("one result per cell")?);
        }
        grid.push(row);
    }
    Ok(ExperimentReport {
        graph_names: graphs.iter().map(|(n, _)| n.clone()).collect(),
        class_names: classes.iter().map(|(n, _)| n.clone()).collect(),
        cells: grid,
    })
}
