//! CART trees and the bagged random-forest classifier.
//!
//! Trees are grown to purity with no pruning: at each node a random draw of
//! `mtry` candidate features is searched exhaustively over midpoints between
//! consecutive distinct sorted values, and the split with the largest
//! weighted Gini decrease wins. Per-tree RNG streams are derived from the
//! master seed, so training is bit-reproducible for any worker count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, SeededRng};
use crate::scalar::Scalar;

/// A labeled feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    features: Vec<F>,
    labels: Vec<usize>,
    n: usize,
    p: usize,
    class_count: usize,
}

impl<F: Scalar> Dataset<F> {
    /// Builds a dataset from row-major features and 0-based labels.
    pub fn new(features: Vec<F>, p: usize, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs at least one example".into(),
            ));
        }
        if p == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs at least one feature".into(),
            ));
        }
        if features.len() != n * p {
            return Err(Error::DimensionMismatch(format!(
                "{} feature values for {n} rows of {p} columns",
                features.len()
            )));
        }
        if class_count == 0 {
            return Err(Error::InvalidArgument(
                "class count must be positive".into(),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside [0, {class_count})"
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset features".into()));
        }
        Ok(Self {
            features,
            labels,
            n,
            p,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false: construction rejects empty datasets.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn feature_count(&self) -> usize {
        self.p
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    /// New dataset holding the given rows (indices may repeat).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(rows.len() * self.p);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.n {
                return Err(Error::InvalidArgument(format!("row {r} out of range")));
            }
            features.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        Dataset::new(features, self.p, labels, self.class_count)
    }

    /// New dataset restricted to the given feature columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.p) {
            return Err(Error::InvalidArgument(format!("column {bad} out of range")));
        }
        let mut features = Vec::with_capacity(self.n * cols.len());
        for i in 0..self.n {
            let row = self.row(i);
            features.extend(cols.iter().map(|&c| row[c]));
        }
        Dataset::new(features, cols.len(), self.labels.clone(), self.class_count)
    }
}

/// How to resolve the number of candidate features per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtrySpec {
    /// `0.5 * sqrt(p)`, rounded to nearest, clamped to `[1, p]`.
    HalfSqrt,
    /// `sqrt(p)`, rounded to nearest (the default).
    Sqrt,
    /// `2 * sqrt(p)`, rounded to nearest, clamped to `[1, p]`.
    TwiceSqrt,
    Fixed(usize),
}

impl MtrySpec {
    pub fn resolve(self, p: usize) -> usize {
        let raw = match self {
            MtrySpec::HalfSqrt => (0.5 * (p as f64).sqrt()).round() as usize,
            MtrySpec::Sqrt => (p as f64).sqrt().round() as usize,
            MtrySpec::TwiceSqrt => (2.0 * (p as f64).sqrt()).round() as usize,
            MtrySpec::Fixed(m) => m,
        };
        raw.clamp(1, p)
    }
}

impl std::str::FromStr for MtrySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0.5sqrt" => Ok(MtrySpec::HalfSqrt),
            "sqrt" => Ok(MtrySpec::Sqrt),
            "2sqrt" => Ok(MtrySpec::TwiceSqrt),
            other => other.parse::<usize>().map(MtrySpec::Fixed).map_err(|_| {
                Error::Format(format!(
                    "mtry must be 0.5sqrt, sqrt, 2sqrt or an integer, got {other:?}"
                ))
            }),
        }
    }
}

/// Training parameters; `mtry` is the resolved per-split candidate count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub mtry: usize,
    pub seed: u64,
}

/// One tree node, stored in a flat preorder array.
#[derive(Debug, Clone, PartialEq)]
pub enum Node<F> {
    Split {
        feature: usize,
        threshold: F,
        left: u32,
        right: u32,
    },
    Leaf {
        histogram: Vec<u32>,
    },
}

/// A grown tree; `nodes[0]` is the root and children follow in preorder.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree<F> {
    nodes: Vec<Node<F>>,
}

impl<F: Scalar> Tree<F> {
    pub fn nodes(&self) -> &[Node<F>] {
        &self.nodes
    }

    /// Leaf histogram reached by `x`.
    fn leaf_for(&self, x: &[F]) -> &[u32] {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { histogram } => return histogram,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Class voted by this tree: argmax of the reached leaf histogram,
    /// ties toward the smaller class index.
    pub fn vote(&self, x: &[F]) -> usize {
        argmax_u32(self.leaf_for(x))
    }
}

/// Per-class vote counts for one example; the total equals the tree count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteTally {
    pub votes: Vec<u32>,
}

impl VoteTally {
    pub fn total(&self) -> u32 {
        self.votes.iter().sum()
    }
}

/// Gap between the largest and second-largest vote counts.
pub fn margin(tally: &VoteTally) -> u32 {
    if tally.votes.len() < 2 {
        return tally.votes.first().copied().unwrap_or(0);
    }
    let (mut top, mut second) = (0u32, 0u32);
    for &v in &tally.votes {
        if v > top {
            second = top;
            top = v;
        } else if v > second {
            second = v;
        }
    }
    top - second
}

/// A trained ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest<F> {
    trees: Vec<Tree<F>>,
    params: ForestParams,
    class_count: usize,
    n_features: usize,
    importances: Vec<f64>,
    /// Per-tree bootstrap index multisets; present only on freshly trained
    /// forests (models loaded from disk cannot provide out-of-bag errors).
    bootstrap_records: Option<Vec<Vec<u32>>>,
}

impl<F: Scalar> Forest<F> {
    pub fn trees(&self) -> &[Tree<F>] {
        &self.trees
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_count(&self) -> usize {
        self.n_features
    }

    /// Accumulated node-size-weighted Gini decrease per feature.
    pub fn importances(&self) -> &[f64] {
        &self.importances
    }

    pub fn bootstrap_records(&self) -> Option<&[Vec<u32>]> {
        self.bootstrap_records.as_deref()
    }

    /// Per-class votes for one example.
    pub fn predict_votes(&self, x: &[F]) -> Result<VoteTally> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch(format!(
                "example has {} features, forest expects {}",
                x.len(),
                self.n_features
            )));
        }
        let mut votes = vec![0u32; self.class_count];
        for tree in &self.trees {
            votes[tree.vote(x)] += 1;
        }
        Ok(VoteTally { votes })
    }

    /// Majority-vote class; ties toward the smaller class index.
    pub fn predict_class(&self, x: &[F]) -> Result<usize> {
        Ok(argmax_u32(&self.predict_votes(x)?.votes))
    }

    /// Fraction of rows whose predicted class differs from the label.
    pub fn error_on(&self, data: &Dataset<F>) -> Result<f64> {
        let mut wrong = 0usize;
        for i in 0..data.len() {
            if self.predict_class(data.row(i))? != data.labels()[i] {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / data.len() as f64)
    }
}

/// Gini impurity of a probability vector: `1 - sum(p_i^2)`.
///
/// The vector must be non-negative and sum to 1 within `1e-9`.
pub fn gini(p: &[f64]) -> Result<f64> {
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "probabilities must be non-negative".into(),
        ));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "probabilities sum to {sum}, expected 1"
        )));
    }
    Ok(1.0 - p.iter().map(|&x| x * x).sum::<f64>())
}

fn gini_counts(hist: &[u32], n: f64) -> f64 {
    let sumsq: f64 = hist.iter().map(|&c| (c as f64) * (c as f64)).sum();
    1.0 - sumsq / (n * n)
}

fn argmax_u32(values: &[u32]) -> usize {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Grows one unpruned CART tree on the bootstrap multiset `in_bag`.
///
/// Returns the tree and its per-feature importance contributions (already
/// weighted by node fraction). If no candidate among the `mtry` draw admits
/// an improving split, the search widens to the remaining features before
/// declaring a leaf, so a tree over distinct rows always reaches purity.
pub fn grow_tree<F: Scalar>(
    data: &Dataset<F>,
    in_bag: &[u32],
    mtry: usize,
    rng: &mut SeededRng,
) -> Result<(Tree<F>, Vec<f64>)> {
    if in_bag.is_empty() {
        return Err(Error::InvalidArgument("in-bag sample is empty".into()));
    }
    if mtry == 0 || mtry > data.feature_count() {
        return Err(Error::InvalidArgument(format!(
            "mtry {mtry} outside [1, {}]",
            data.feature_count()
        )));
    }
    let mut importances = vec![0.0; data.feature_count()];
    let mut builder = TreeBuilder {
        data,
        mtry,
        rng,
        nodes: Vec::new(),
        importances: &mut importances,
        inv_total: 1.0 / in_bag.len() as f64,
        feature_pool: (0..data.feature_count() as u32).collect(),
        scratch: Vec::new(),
    };
    builder.build(in_bag.to_vec());
    Ok((
        Tree {
            nodes: builder.nodes,
        },
        importances,
    ))
}

struct TreeBuilder<'a, F> {
    data: &'a Dataset<F>,
    mtry: usize,
    rng: &'a mut SeededRng,
    nodes: Vec<Node<F>>,
    importances: &'a mut Vec<f64>,
    inv_total: f64,
    feature_pool: Vec<u32>,
    scratch: Vec<(F, u32)>,
}

struct BestSplit<F> {
    feature: usize,
    threshold: F,
    decrease: f64,
}

impl<F: Scalar> TreeBuilder<'_, F> {
    fn build(&mut self, rows: Vec<u32>) -> u32 {
        let c = self.data.class_count();
        let mut hist = vec![0u32; c];
        for &r in &rows {
            hist[self.data.labels()[r as usize]] += 1;
        }
        let n_node = rows.len() as f64;
        let parent_gini = gini_counts(&hist, n_node);
        let pure = hist.iter().filter(|&&h| h > 0).count() <= 1;

        let best = if pure {
            None
        } else {
            self.find_split(&rows, &hist, parent_gini)
        };
        match best {
            None => {
                let idx = self.nodes.len() as u32;
                self.nodes.push(Node::Leaf { histogram: hist });
                idx
            }
            Some(split) => {
                self.importances[split.feature] += n_node * self.inv_total * split.decrease;
                let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
                for &r in &rows {
                    if self.data.row(r as usize)[split.feature] <= split.threshold {
                        left_rows.push(r);
                    } else {
                        right_rows.push(r);
                    }
                }
                drop(rows);
                let idx = self.nodes.len();
                self.nodes.push(Node::Leaf {
                    histogram: Vec::new(),
                }); // placeholder
                let left = self.build(left_rows);
                let right = self.build(right_rows);
                self.nodes[idx] = Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left,
                    right,
                };
                idx as u32
            }
        }
    }

    fn find_split(&mut self, rows: &[u32], hist: &[u32], parent_gini: f64) -> Option<BestSplit<F>> {
        let p = self.data.feature_count();
        let draw = self.mtry.min(p);
        for i in 0..draw {
            let j = self.rng.gen_range(i..p);
            self.feature_pool.swap(i, j);
        }
        let mut candidates: Vec<u32> = self.feature_pool[..draw].to_vec();
        candidates.sort_unstable();

        let mut best = self.best_over(&candidates, rows, hist, parent_gini, None);
        if best.is_none() && draw < p {
            // No improving split among the draw; widen to the rest so that
            // nodes with distinct rows always split.
            let mut rest: Vec<u32> = self.feature_pool[draw..].to_vec();
            rest.sort_unstable();
            best = self.best_over(&rest, rows, hist, parent_gini, None);
        }
        best
    }

    fn best_over(
        &mut self,
        candidates: &[u32],
        rows: &[u32],
        hist: &[u32],
        parent_gini: f64,
        mut best: Option<BestSplit<F>>,
    ) -> Option<BestSplit<F>> {
        let n_node = rows.len() as f64;
        let c = self.data.class_count();
        let mut left = vec![0u32; c];
        let mut right = vec![0u32; c];

        for &feature in candidates {
            let feature = feature as usize;
            self.scratch.clear();
            self.scratch.extend(rows.iter().map(|&r| {
                (
                    self.data.row(r as usize)[feature],
                    self.data.labels()[r as usize] as u32,
                )
            }));
            self.scratch
                .sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
            if self.scratch[0].0 == self.scratch[self.scratch.len() - 1].0 {
                continue;
            }
            left.iter_mut().for_each(|v| *v = 0);
            right.copy_from_slice(hist);
            let mut n_left = 0f64;
            for i in 0..self.scratch.len() - 1 {
                let (v, label) = self.scratch[i];
                left[label as usize] += 1;
                right[label as usize] -= 1;
                n_left += 1.0;
                let v_next = self.scratch[i + 1].0;
                if v < v_next {
                    let n_right = n_node - n_left;
                    let weighted = (n_left * gini_counts(&left, n_left)
                        + n_right * gini_counts(&right, n_right))
                        / n_node;
                    let decrease = parent_gini - weighted;
                    if decrease > 0.0 && best.as_ref().is_none_or(|b| decrease > b.decrease) {
                        let two = F::of_f64(2.0);
                        let mut threshold = v + (v_next - v) / two;
                        if threshold >= v_next {
                            threshold = v; // guard against rounding up
                        }
                        best = Some(BestSplit {
                            feature,
                            threshold,
                            decrease,
                        });
                    }
                }
            }
        }
        best
    }
}

/// Trains `params.n_trees` trees on bootstrap samples of `data`.
///
/// Tree `t` uses the RNG stream derived from `(seed, t)`, so the result is
/// identical for any worker count or scheduling order.
pub fn train_forest<F: Scalar>(data: &Dataset<F>, params: &ForestParams) -> Result<Forest<F>> {
    if params.n_trees == 0 {
        return Err(Error::InvalidArgument(
            "forest needs at least one tree".into(),
        ));
    }
    if params.mtry == 0 || params.mtry > data.feature_count() {
        return Err(Error::InvalidArgument(format!(
            "mtry {} outside [1, {}]",
            params.mtry,
            data.feature_count()
        )));
    }
    let n = data.len();
    let grown: Vec<(Tree<F>, Vec<u32>, Vec<f64>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded(derive_seed(params.seed, t as u64));
            let in_bag: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n as u32)).collect();
            let (tree, imps) = grow_tree(data, &in_bag, params.mtry, &mut rng)
                .expect("in-bag sample is non-empty and mtry validated");
            (tree, in_bag, imps)
        })
        .collect();

    let mut importances = vec![0.0; data.feature_count()];
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut records = Vec::with_capacity(params.n_trees);
    for (tree, in_bag, imps) in grown {
        for (acc, v) in importances.iter_mut().zip(&imps) {
            *acc += v;
        }
        trees.push(tree);
        records.push(in_bag);
    }
    Ok(Forest {
        trees,
        params: *params,
        class_count: data.class_count(),
        n_features: data.feature_count(),
        importances,
        bootstrap_records: Some(records),
    })
}

/// Out-of-bag error summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OobReport {
    /// Misclassification rate over evaluated examples.
    pub error_rate: f64,
    /// Examples with at least one out-of-bag tree.
    pub evaluated: usize,
    /// Examples excluded because every tree saw them in-bag.
    pub skipped: usize,
}

/// Out-of-bag error: each example is voted on only by trees whose bootstrap
/// excluded it.
pub fn oob_error<F: Scalar>(forest: &Forest<F>, data: &Dataset<F>) -> Result<OobReport> {
    let records = forest.bootstrap_records.as_ref().ok_or_else(|| {
        Error::InvalidArgument("forest carries no bootstrap records (loaded from file?)".into())
    })?;
    if data.len() != records[0].len() {
        return Err(Error::DimensionMismatch(format!(
            "dataset has {} rows but bootstrap records cover {}",
            data.len(),
            records[0].len()
        )));
    }
    let n = data.len();
    let mut in_bag_flags = vec![false; n];
    let mut votes = vec![vec![0u32; forest.class_count]; n];
    let mut has_vote = vec![false; n];
    for (tree, record) in forest.trees.iter().zip(records) {
        in_bag_flags.iter_mut().for_each(|f| *f = false);
        for &r in record {
            in_bag_flags[r as usize] = true;
        }
        for i in 0..n {
            if !in_bag_flags[i] {
                votes[i][tree.vote(data.row(i))] += 1;
                has_vote[i] = true;
            }
        }
    }
    let mut wrong = 0usize;
    let mut evaluated = 0usize;
    for i in 0..n {
        if has_vote[i] {
            evaluated += 1;
            if argmax_u32(&votes[i]) != data.labels()[i] {
                wrong += 1;
            }
        }
    }
    Ok(OobReport {
        error_rate: if evaluated == 0 {
            0.0
        } else {
            wrong as f64 / evaluated as f64
        },
        evaluated,
        skipped: n - evaluated,
    })
}

/// Features sorted by descending importance; ties by ascending index.
pub fn importance_ranking<F: Scalar>(forest: &Forest<F>) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = forest.importances.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite importances")
            .then(a.0.cmp(&b.0))
    });
    ranked
}

/// Euclidean 1-nearest-neighbor error of `test` against `train`.
///
/// Distance ties resolve to the smaller train index.
pub fn nn1_error<F: Scalar>(train: &Dataset<F>, test: &Dataset<F>) -> Result<f64> {
    if train.feature_count() != test.feature_count() {
        return Err(Error::DimensionMismatch(format!(
            "train has {} features, test has {}",
            train.feature_count(),
            test.feature_count()
        )));
    }
    let mut wrong = 0usize;
    for i in 0..test.len() {
        let x = test.row(i);
        let mut best = 0usize;
        let mut best_dist = F::infinity();
        for j in 0..train.len() {
            let dist = x
                .iter()
                .zip(train.row(j))
                .map(|(&a, &b)| (a - b) * (a - b))
                .fold(F::zero(), |acc, d| acc + d);
            if dist < best_dist {
                best_dist = dist;
                best = j;
            }
        }
        if train.labels()[best] != test.labels()[i] {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / test.len() as f64)
}

// ---------------------------------------------------------------------------
// Model persistence ("tacoma-forest-v1")
// ---------------------------------------------------------------------------

pub const MODEL_VERSION: &str = "tacoma-forest-v1";

/// Serializable forest: per-tree node arrays in preorder plus parameters and
/// importances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub version: String,
    pub params: ForestParams,
    pub class_count: usize,
    pub n_features: usize,
    pub trees: Vec<Vec<ModelNode>>,
    pub importances: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelNode {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        histogram: Vec<u32>,
    },
}

impl<F: Scalar> Forest<F> {
    pub fn to_model(&self) -> ForestModel {
        let trees = self
            .trees
            .iter()
            .map(|tree| {
                tree.nodes
                    .iter()
                    .map(|node| match node {
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => ModelNode::Split {
                            feature: *feature as u32,
                            threshold: threshold.as_f64(),
                            left: *left,
                            right: *right,
                        },
                        Node::Leaf { histogram } => ModelNode::Leaf {
                            histogram: histogram.clone(),
                        },
                    })
                    .collect()
            })
            .collect();
        ForestModel {
            version: MODEL_VERSION.to_string(),
            params: self.params,
            class_count: self.class_count,
            n_features: self.n_features,
            trees,
            importances: self.importances.clone(),
        }
    }

    pub fn from_model(model: &ForestModel) -> Result<Self> {
        if model.version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "model version {:?} unsupported, expected {MODEL_VERSION:?}",
                model.version
            )));
        }
        let trees = model
            .trees
            .iter()
            .map(|nodes| {
                let nodes = nodes
                    .iter()
                    .map(|node| match node {
                        ModelNode::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => Node::Split {
                            feature: *feature as usize,
                            threshold: F::of_f64(*threshold),
                            left: *left,
                            right: *right,
                        },
                        ModelNode::Leaf { histogram } => Node::Leaf {
                            histogram: histogram.clone(),
                        },
                    })
                    .collect();
                Tree { nodes }
            })
            .collect();
        Ok(Forest {
            trees,
            params: model.params,
            class_count: model.class_count,
            n_features: model.n_features,
            importances: model.importances.clone(),
            bootstrap_records: None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_model()).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ForestModel =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("model file: {e}")))?;
        Forest::from_model(&model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn tiny(feature_rows: &[&[f64]], labels: &[usize], classes: usize) -> Dataset<f64> {
        let p = feature_rows[0].len();
        let flat: Vec<f64> = feature_rows
            .iter()
            .flat_map(|r| r.iter().copied())
            .collect();
        Dataset::new(flat, p, labels.to_vec(), classes).unwrap()
    }

    /// Two well-separated 2-D Gaussian blobs.
    fn gaussian_blobs(n_per_class: usize, seed: u64, spread: f64) -> Dataset<f64> {
        let mut rng = seeded(seed);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2usize {
            let center = if class == 0 { -2.0 } else { 2.0 };
            for _ in 0..n_per_class {
                features.push(center + spread * gauss(&mut rng));
                features.push(center + spread * gauss(&mut rng));
                labels.push(class);
            }
        }
        Dataset::new(features, 2, labels, 2).unwrap()
    }

    fn gauss(rng: &mut SeededRng) -> f64 {
        // Box-Muller is enough for test fixtures.
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn gini_basic_values() {
        assert!((gini(&[0.5, 0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(gini(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        let er = [0.659, 0.029, 0.070, 0.242];
        assert!((gini(&er).unwrap() - 0.501414).abs() < 1e-12);
    }

    #[test]
    fn gini_rejects_unnormalized() {
        assert!(gini(&[0.5, 0.6]).is_err());
        assert!(gini(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn pure_node_is_leaf() {
        let data = tiny(&[&[1.0], &[2.0], &[3.0]], &[1, 1, 1], 2);
        let mut rng = seeded(0);
        let (tree, imps) = grow_tree(&data, &[0, 1, 2], 1, &mut rng).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        assert!(matches!(tree.nodes()[0], Node::Leaf { .. }));
        assert!(imps.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_point_split_at_midpoint() {
        let data = tiny(&[&[0.0], &[1.0]], &[0, 1], 2);
        let mut rng = seeded(0);
        let (tree, imps) = grow_tree(&data, &[0, 1], 1, &mut rng).unwrap();
        assert_eq!(tree.nodes().len(), 3);
        match &tree.nodes()[0] {
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.5);
                assert_eq!((*left, *right), (1, 2));
            }
            other => panic!("expected split at root, got {other:?}"),
        }
        assert!(matches!(tree.nodes()[1], Node::Leaf { .. }));
        assert!(matches!(tree.nodes()[2], Node::Leaf { .. }));
        // parent gini 0.5, both children pure, node fraction 1
        assert!((imps[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_features_give_mixed_leaf() {
        let data = tiny(&[&[3.0, 7.0], &[3.0, 7.0], &[3.0, 7.0]], &[0, 1, 0], 2);
        let mut rng = seeded(0);
        let (tree, _) = grow_tree(&data, &[0, 1, 2], 1, &mut rng).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        match &tree.nodes()[0] {
            Node::Leaf { histogram } => assert_eq!(histogram, &vec![2, 1]),
            other => panic!("expected leaf, got {other:?}"),
        }
    }

    #[test]
    fn empty_in_bag_is_rejected() {
        let data = tiny(&[&[0.0]], &[0], 1);
        let mut rng = seeded(0);
        assert!(grow_tree(&data, &[], 1, &mut rng).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let data = gaussian_blobs(30, 11, 0.7);
        let params = ForestParams {
            n_trees: 25,
            mtry: 1,
            seed: 99,
        };
        let a = train_forest(&data, &params).unwrap();
        let b = train_forest(&data, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn training_is_identical_across_worker_counts() {
        let data = gaussian_blobs(40, 5, 0.8);
        let params = ForestParams {
            n_trees: 16,
            mtry: 2,
            seed: 4,
        };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| train_forest(&data, &params).unwrap());
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| train_forest(&data, &params).unwrap());
        assert_eq!(single, multi);
    }

    #[test]
    fn single_tree_forest_votes_are_indicators() {
        let data = gaussian_blobs(10, 2, 0.5);
        let params = ForestParams {
            n_trees: 1,
            mtry: 2,
            seed: 7,
        };
        let forest = train_forest(&data, &params).unwrap();
        let tally = forest.predict_votes(data.row(0)).unwrap();
        assert_eq!(tally.total(), 1);
        assert!(tally.votes.iter().all(|&v| v <= 1));
    }

    #[test]
    fn votes_conserve_tree_count() {
        let data = gaussian_blobs(15, 3, 1.0);
        let params = ForestParams {
            n_trees: 33,
            mtry: 1,
            seed: 0,
        };
        let forest = train_forest(&data, &params).unwrap();
        for i in 0..data.len() {
            assert_eq!(forest.predict_votes(data.row(i)).unwrap().total(), 33);
        }
    }

    #[test]
    fn separable_blobs_classify_well() {
        let train = gaussian_blobs(60, 21, 0.6);
        let test = gaussian_blobs(40, 22, 0.6);
        let params = ForestParams {
            n_trees: 200,
            mtry: 1,
            seed: 77,
        };
        let forest = train_forest(&train, &params).unwrap();
        let err = forest.error_on(&test).unwrap();
        assert!(err <= 0.05, "test error {err}");
    }

    #[test]
    fn margin_examples() {
        assert_eq!(
            margin(&VoteTally {
                votes: vec![120, 50, 20, 10]
            }),
            70
        );
        assert_eq!(
            margin(&VoteTally {
                votes: vec![60, 60, 30]
            }),
            0
        );
        assert_eq!(
            margin(&VoteTally {
                votes: vec![200, 0, 0, 0]
            }),
            200
        );
    }

    #[test]
    fn prediction_tie_breaks_toward_smaller_class() {
        assert_eq!(argmax_u32(&[10, 5, 3, 2]), 0);
        assert_eq!(argmax_u32(&[5, 5, 0, 0]), 0);
        assert_eq!(argmax_u32(&[0, 4, 4, 0]), 1);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let data = gaussian_blobs(10, 2, 0.5);
        let params = ForestParams {
            n_trees: 3,
            mtry: 1,
            seed: 7,
        };
        let forest = train_forest(&data, &params).unwrap();
        assert!(forest.predict_votes(&[1.0]).is_err());
    }

    #[test]
    fn oob_single_tree_covers_excluded_examples() {
        let data = gaussian_blobs(50, 9, 0.5);
        let params = ForestParams {
            n_trees: 1,
            mtry: 2,
            seed: 13,
        };
        let forest = train_forest(&data, &params).unwrap();
        let record = &forest.bootstrap_records().unwrap()[0];
        let in_bag: std::collections::BTreeSet<u32> = record.iter().copied().collect();
        let excluded = data.len() - in_bag.len();
        let report = oob_error(&forest, &data).unwrap();
        assert_eq!(report.evaluated, excluded);
        assert_eq!(report.skipped, data.len() - excluded);
    }

    #[test]
    fn oob_tracks_holdout_on_separable_data() {
        let train = gaussian_blobs(100, 31, 0.8);
        let test = gaussian_blobs(100, 32, 0.8);
        let params = ForestParams {
            n_trees: 500,
            mtry: 1,
            seed: 8,
        };
        let forest = train_forest(&train, &params).unwrap();
        let oob = oob_error(&forest, &train).unwrap();
        let holdout = forest.error_on(&test).unwrap();
        assert!(
            (oob.error_rate - holdout).abs() <= 0.05,
            "oob {} vs holdout {}",
            oob.error_rate,
            holdout
        );
        assert_eq!(oob.skipped, 0);
    }

    #[test]
    fn loaded_forest_has_no_oob() {
        let data = gaussian_blobs(10, 2, 0.5);
        let params = ForestParams {
            n_trees: 3,
            mtry: 1,
            seed: 7,
        };
        let forest = train_forest(&data, &params).unwrap();
        let reloaded: Forest<f64> = Forest::from_json(&forest.to_json()).unwrap();
        assert!(oob_error(&reloaded, &data).is_err());
    }

    #[test]
    fn planted_signal_ranks_first() {
        // Feature 0 fully determines the label; features 1..4 are noise.
        let mut rng = seeded(44);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..80 {
            let class = i % 2;
            features.push(class as f64 + 0.05 * gauss(&mut rng));
            for _ in 0..3 {
                features.push(gauss(&mut rng));
            }
            labels.push(class);
        }
        let data = Dataset::new(features, 4, labels, 2).unwrap();
        let params = ForestParams {
            n_trees: 60,
            mtry: 2,
            seed: 5,
        };
        let forest = train_forest(&data, &params).unwrap();
        let ranking = importance_ranking(&forest);
        assert_eq!(ranking[0].0, 0, "ranking: {ranking:?}");
        assert!(ranking[0].1 > ranking[1].1 * 3.0);
    }

    #[test]
    fn constant_features_have_zero_importance() {
        let data = tiny(
            &[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]],
            &[0, 1, 0, 1],
            2,
        );
        let params = ForestParams {
            n_trees: 10,
            mtry: 2,
            seed: 3,
        };
        let forest = train_forest(&data, &params).unwrap();
        assert!(forest.importances().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn importance_invariant_under_monotone_feature_transform() {
        let base = gaussian_blobs(40, 17, 1.2);
        // exp() is strictly increasing; splits depend only on value order.
        let transformed: Vec<f64> = (0..base.len())
            .flat_map(|i| {
                let row = base.row(i);
                [row[0].exp(), row[1]]
            })
            .collect();
        let data2 = Dataset::new(transformed, 2, base.labels().to_vec(), 2).unwrap();
        let params = ForestParams {
            n_trees: 40,
            mtry: 1,
            seed: 29,
        };
        let f1 = train_forest(&base, &params).unwrap();
        let f2 = train_forest(&data2, &params).unwrap();
        for (a, b) in f1.importances().iter().zip(f2.importances()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(
            importance_ranking(&f1)
                .iter()
                .map(|r| r.0)
                .collect::<Vec<_>>(),
            importance_ranking(&f2)
                .iter()
                .map(|r| r.0)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn fully_grown_tree_memorizes_in_bag_distinct_rows() {
        let data = gaussian_blobs(40, 51, 1.5);
        let mut rng = seeded(123);
        let in_bag: Vec<u32> = (0..data.len())
            .map(|_| rng.gen_range(0..data.len() as u32))
            .collect();
        let (tree, _) = grow_tree(&data, &in_bag, 1, &mut rng).unwrap();
        for &r in &in_bag {
            assert_eq!(tree.vote(data.row(r as usize)), data.labels()[r as usize]);
        }
    }

    #[test]
    fn nn1_error_examples() {
        let train = gaussian_blobs(30, 61, 0.5);
        assert_eq!(nn1_error(&train, &train).unwrap(), 0.0);
        let test = gaussian_blobs(30, 62, 0.5);
        assert!(nn1_error(&train, &test).unwrap() <= 0.05);
    }

    #[test]
    fn nn1_null_labels_near_half() {
        let mut rng = seeded(71);
        let make = |rng: &mut SeededRng, n: usize| {
            let features: Vec<f64> = (0..n * 3).map(|_| gauss(rng)).collect();
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            Dataset::new(features, 3, labels, 2).unwrap()
        };
        let train = make(&mut rng, 300);
        let test = make(&mut rng, 300);
        let err = nn1_error(&train, &test).unwrap();
        assert!((err - 0.5).abs() <= 0.05, "null 1nn error {err}");
    }

    #[test]
    fn model_json_round_trips() {
        let data = gaussian_blobs(25, 83, 0.9);
        let params = ForestParams {
            n_trees: 12,
            mtry: 2,
            seed: 19,
        };
        let forest = train_forest(&data, &params).unwrap();
        let json = forest.to_json();
        let back: Forest<f64> = Forest::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
        for i in 0..data.len() {
            assert_eq!(
                back.predict_votes(data.row(i)).unwrap(),
                forest.predict_votes(data.row(i)).unwrap()
            );
        }
        assert!(json.contains(MODEL_VERSION));
    }

    #[test]
    fn mtry_spec_resolution() {
        assert_eq!(MtrySpec::Sqrt.resolve(100), 10);
        assert_eq!(MtrySpec::HalfSqrt.resolve(100), 5);
        assert_eq!(MtrySpec::TwiceSqrt.resolve(100), 20);
        assert_eq!(MtrySpec::Sqrt.resolve(1), 1);
        assert_eq!(MtrySpec::Fixed(7).resolve(3), 3);
        assert_eq!("sqrt".parse::<MtrySpec>().unwrap(), MtrySpec::Sqrt);
        assert_eq!("0.5sqrt".parse::<MtrySpec>().unwrap(), MtrySpec::HalfSqrt);
        assert_eq!("2sqrt".parse::<MtrySpec>().unwrap(), MtrySpec::TwiceSqrt);
        assert_eq!("12".parse::<MtrySpec>().unwrap(), MtrySpec::Fixed(12));
        assert!("bogus".parse::<MtrySpec>().is_err());
    }

    proptest! {
        #[test]
        fn gini_bounds(seed in any::<u64>(), classes in 2usize..6) {
            let mut rng = seeded(seed);
            let raw: Vec<f64> = (0..classes).map(|_| rng.gen_range(0.0..1.0f64).max(1e-12)).collect();
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let g = gini(&p).unwrap();
            prop_assert!(g >= 0.0);
            prop_assert!(g <= 1.0 - 1.0 / classes as f64 + 1e-12);
        }

        #[test]
        fn margin_bounds(seed in any::<u64>(), classes in 2usize..6, trees in 1u32..100) {
            let mut rng = seeded(seed);
            let mut votes = vec![0u32; classes];
            for _ in 0..trees {
                votes[rng.gen_range(0..classes)] += 1;
            }
            let tally = VoteTally { votes: votes.clone() };
            let m = margin(&tally);
            prop_assert!(m <= trees);
            let unanimous = votes.iter().filter(|&&v| v > 0).count() == 1;
            prop_assert_eq!(m == trees, unanimous);
        }
    }
}
