//! Margin-based co-training, the self-training baseline, and feature-split
//! construction (natural per-relationship blocks, random thinning).
//!
//! Each round trains one forest per feature subset on the labeled pool,
//! ranks the unlabeled pool by vote margin, and transfers the most confident
//! rows with their predicted labels. Transferred labels are frozen. The loop
//! ends when the unlabeled pool is empty; the returned classifier is the
//! first coupling classifier retrained on the terminal labeled pool.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::forest::{margin, train_forest, Dataset, Forest, ForestParams, MtrySpec};
use crate::rng::{seeded, sub_seed, SeededRng};
use crate::scalar::Scalar;

/// How a feature split was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitScheme {
    /// Per-relationship feature blocks.
    Natural,
    /// Uniform random partition into `j` near-equal slices.
    Thinning { j: usize, seed: u64 },
}

/// A partition of feature indices into disjoint subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSplit {
    subsets: Vec<Vec<usize>>,
    scheme: SplitScheme,
}

impl FeatureSplit {
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn scheme(&self) -> SplitScheme {
        self.scheme
    }

    /// Randomly keeps two of the subsets (for thinning with `j > 2`);
    /// the draw order decides which becomes the first coupling view.
    pub fn pick_two(&self, seed: u64) -> Result<FeatureSplit> {
        if self.subsets.len() < 2 {
            return Err(Error::InvalidArgument(
                "split has fewer than two subsets".into(),
            ));
        }
        let mut rng = seeded(seed);
        let a = rng.gen_range(0..self.subsets.len());
        let mut b = rng.gen_range(0..self.subsets.len() - 1);
        if b >= a {
            b += 1;
        }
        Ok(FeatureSplit {
            subsets: vec![self.subsets[a].clone(), self.subsets[b].clone()],
            scheme: self.scheme,
        })
    }
}

/// Uniformly random partition of `0..p` into `j` slices whose sizes differ
/// by at most one; deterministic given `seed`.
pub fn thin_split(p: usize, j: usize, seed: u64) -> Result<FeatureSplit> {
    if j < 2 || j > p {
        return Err(Error::InvalidArgument(format!(
            "partition count {j} outside [2, {p}]"
        )));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut seeded(seed));
    let base = p / j;
    let remainder = p % j;
    let mut subsets = Vec::with_capacity(j);
    let mut offset = 0;
    for slice in 0..j {
        let size = base + usize::from(slice < remainder);
        let mut subset: Vec<usize> = order[offset..offset + size].to_vec();
        subset.sort_unstable();
        subsets.push(subset);
        offset += size;
    }
    Ok(FeatureSplit {
        subsets,
        scheme: SplitScheme::Thinning { j, seed },
    })
}

/// Builds the natural split from contiguous per-relationship blocks.
pub fn natural_split(blocks: &[std::ops::Range<usize>]) -> Result<FeatureSplit> {
    if blocks.len() < 2 {
        return Err(Error::InvalidArgument(
            "natural split needs at least two blocks".into(),
        ));
    }
    let mut sorted: Vec<&std::ops::Range<usize>> = blocks.iter().collect();
    sorted.sort_by_key(|r| r.start);
    for pair in sorted.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(Error::InvalidArgument(format!(
                "blocks {:?} and {:?} overlap",
                pair[0], pair[1]
            )));
        }
    }
    if blocks.iter().any(|r| r.is_empty()) {
        return Err(Error::InvalidArgument(
            "natural split blocks must be non-empty".into(),
        ));
    }
    Ok(FeatureSplit {
        subsets: blocks.iter().map(|r| r.clone().collect()).collect(),
        scheme: SplitScheme::Natural,
    })
}

/// Feature rows without labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Unlabeled<F> {
    features: Vec<F>,
    n: usize,
    p: usize,
}

impl<F: Scalar> Unlabeled<F> {
    pub fn new(features: Vec<F>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument(
                "unlabeled rows need at least one feature".into(),
            ));
        }
        if !features.len().is_multiple_of(p) {
            return Err(Error::DimensionMismatch(format!(
                "{} values not divisible by {p} columns",
                features.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("unlabeled features".into()));
        }
        let n = features.len() / p;
        Ok(Self { features, n, p })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn feature_count(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.features[i * self.p..(i + 1) * self.p]
    }
}

/// Forest parameters for the coupling classifiers; sub-seeds per round and
/// per classifier are derived from `seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiParams {
    pub n_trees: usize,
    pub mtry: MtrySpec,
    pub seed: u64,
}

/// One transferred pseudo-label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferredLabel {
    /// Index into the original unlabeled pool.
    pub row: usize,
    pub label: usize,
    pub round: usize,
    /// Which coupling classifier produced the label (1 or 2).
    pub by: u8,
    pub margin: u32,
}

/// Per-round audit record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: usize,
    pub transfers: Vec<InferredLabel>,
    pub unlabeled_left: usize,
}

/// Outcome of a co-training or self-training run.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiResult<F> {
    /// First coupling classifier retrained on the terminal labeled pool.
    pub classifier: Forest<F>,
    /// Feature columns the classifier consumes.
    pub view: Vec<usize>,
    /// Pseudo-labels for the unlabeled pool, sorted by row; every row
    /// appears exactly once.
    pub inferred: Vec<InferredLabel>,
    pub rounds: Vec<RoundRecord>,
}

impl<F: Scalar> SemiResult<F> {
    /// Classifies a full-width feature row with the final classifier.
    pub fn predict(&self, row: &[F]) -> Result<usize> {
        let projected: Vec<F> = self.view.iter().map(|&c| row[c]).collect();
        self.classifier.predict_class(&projected)
    }

    /// Error of the final classifier against known labels for `rows`.
    pub fn error_against(&self, rows: &Unlabeled<F>, truth: &[usize]) -> Result<f64> {
        if rows.len() != truth.len() {
            return Err(Error::DimensionMismatch("truth length != row count".into()));
        }
        let mut wrong = 0usize;
        for (i, &expected) in truth.iter().enumerate() {
            if self.predict(rows.row(i))? != expected {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / rows.len().max(1) as f64)
    }
}

/// Co-training over a two-subset feature split.
pub fn cotrain<F: Scalar>(
    l0: &Dataset<F>,
    u0: &Unlabeled<F>,
    split: &FeatureSplit,
    params: &SemiParams,
    m1: usize,
    m2: usize,
) -> Result<SemiResult<F>> {
    if split.subsets.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "co-training consumes exactly 2 feature subsets, got {}",
            split.subsets.len()
        )));
    }
    if m1 == 0 || m2 == 0 {
        return Err(Error::InvalidArgument(
            "transfer sizes must be at least 1".into(),
        ));
    }
    run_rounds(l0, u0, &split.subsets, params, &[m1, m2])
}

/// Self-training: a single classifier over all features transfers its own
/// `m` most confident rows each round.
pub fn self_train<F: Scalar>(
    l0: &Dataset<F>,
    u0: &Unlabeled<F>,
    params: &SemiParams,
    m: usize,
) -> Result<SemiResult<F>> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "transfer size must be at least 1".into(),
        ));
    }
    let all: Vec<usize> = (0..l0.feature_count()).collect();
    run_rounds(l0, u0, &[all], params, &[m])
}

fn run_rounds<F: Scalar>(
    l0: &Dataset<F>,
    u0: &Unlabeled<F>,
    views: &[Vec<usize>],
    params: &SemiParams,
    transfer_sizes: &[usize],
) -> Result<SemiResult<F>> {
    let p = l0.feature_count();
    if !u0.is_empty() && u0.feature_count() != p {
        return Err(Error::DimensionMismatch(format!(
            "labeled pool has {p} features, unlabeled pool has {}",
            u0.feature_count()
        )));
    }
    for view in views {
        if view.is_empty() {
            return Err(Error::InvalidArgument("empty feature view".into()));
        }
        if let Some(&bad) = view.iter().find(|&&c| c >= p) {
            return Err(Error::InvalidArgument(format!(
                "view column {bad} out of range"
            )));
        }
    }

    let mut l_features: Vec<F> = Vec::new();
    let mut l_labels: Vec<usize> = Vec::new();
    for i in 0..l0.len() {
        l_features.extend_from_slice(l0.row(i));
        l_labels.push(l0.labels()[i]);
    }

    let mut remaining: Vec<usize> = (0..u0.len()).collect();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut inferred: Vec<InferredLabel> = Vec::new();
    let mut round = 0usize;

    while !remaining.is_empty() {
        round += 1;
        let labeled = Dataset::new(l_features.clone(), p, l_labels.clone(), l0.class_count())?;
        // Both classifiers rank the same unlabeled snapshot; a row picked by
        // both transfers once with the first classifier's label.
        let mut picks: BTreeMap<usize, InferredLabel> = BTreeMap::new();
        for (k, view) in views.iter().enumerate() {
            let classifier_no = (k + 1) as u8;
            let forest = train_view(&labeled, view, params, round as u64, classifier_no as u64)?;
            let mut ranked: Vec<(u32, usize, usize)> = Vec::with_capacity(remaining.len());
            for &r in &remaining {
                let x: Vec<F> = view.iter().map(|&c| u0.row(r)[c]).collect();
                let tally = forest.predict_votes(&x)?;
                let predicted = argmax(&tally.votes);
                ranked.push((margin(&tally), r, predicted));
            }
            // Largest margins first; margin ties resolve to the smaller row.
            ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            for &(mg, r, predicted) in ranked.iter().take(transfer_sizes[k].min(ranked.len())) {
                picks.entry(r).or_insert(InferredLabel {
                    row: r,
                    label: predicted,
                    round,
                    by: classifier_no,
                    margin: mg,
                });
            }
        }
        for rec in picks.values() {
            l_features.extend_from_slice(u0.row(rec.row));
            l_labels.push(rec.label);
            inferred.push(*rec);
        }
        remaining.retain(|r| !picks.contains_key(r));
        rounds.push(RoundRecord {
            round,
            transfers: picks.into_values().collect(),
            unlabeled_left: remaining.len(),
        });
    }

    let terminal = Dataset::new(l_features, p, l_labels, l0.class_count())?;
    let classifier = train_view(&terminal, &views[0], params, 0, 0)?;
    inferred.sort_by_key(|rec| rec.row);
    Ok(SemiResult {
        classifier,
        view: views[0].clone(),
        inferred,
        rounds,
    })
}

fn train_view<F: Scalar>(
    labeled: &Dataset<F>,
    view: &[usize],
    params: &SemiParams,
    round: u64,
    classifier: u64,
) -> Result<Forest<F>> {
    let projected = labeled.select_columns(view)?;
    let forest_params = ForestParams {
        n_trees: params.n_trees,
        mtry: params.mtry.resolve(projected.feature_count()),
        seed: sub_seed(params.seed, round, classifier),
    };
    train_forest(&projected, &forest_params)
}

fn argmax(votes: &[u32]) -> usize {
    let mut best = 0usize;
    for (i, &v) in votes.iter().enumerate().skip(1) {
        if v > votes[best] {
            best = i;
        }
    }
    best
}

/// Samples `k` distinct row indices with at least one example of every class
/// present in `labels`; the result is sorted ascending.
pub fn stratified_sample(labels: &[usize], k: usize, rng: &mut SeededRng) -> Result<Vec<usize>> {
    if k > labels.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot sample {k} of {} rows",
            labels.len()
        )));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &label) in labels.iter().enumerate() {
        by_class.entry(label).or_default().push(i);
    }
    if k < by_class.len() {
        return Err(Error::InvalidArgument(format!(
            "sample size {k} below class count {}",
            by_class.len()
        )));
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for rows in by_class.values() {
        chosen.push(rows[rng.gen_range(0..rows.len())]);
    }
    let taken: std::collections::BTreeSet<usize> = chosen.iter().copied().collect();
    let mut rest: Vec<usize> = (0..labels.len()).filter(|i| !taken.contains(i)).collect();
    let need = k - chosen.len();
    for i in 0..need {
        let j = rng.gen_range(i..rest.len());
        rest.swap(i, j);
    }
    chosen.extend_from_slice(&rest[..need]);
    chosen.sort_unstable();
    Ok(chosen)
}
