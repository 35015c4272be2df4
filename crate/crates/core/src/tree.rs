//! Regression trees: greedy squared-error splitting with constant-mean leaves.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Growth limits for a single tree.
///
/// Termination is structural (every split strictly shrinks both children),
/// so all limits may be unlimited at once; they exist to control tree size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Maximum leaf depth; `None` is unlimited. The root sits at depth 0.
    pub max_depth: Option<usize>,
    /// Minimum training rows on each side of every split.
    pub min_samples_leaf: usize,
    /// Cap on leaf count; finite values trigger best-first growth where the
    /// frontier node with the largest error reduction is expanded first.
    pub max_terminal_nodes: Option<usize>,
    /// Features drawn (uniformly, without replacement, fresh per node) for
    /// each split search; `None` searches all features.
    pub feature_subsample: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            max_terminal_nodes: None,
            feature_subsample: None,
        }
    }
}

impl TreeParams {
    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = Some(depth);
        self
    }

    pub fn with_min_samples_leaf(mut self, m: usize) -> Self {
        self.min_samples_leaf = m;
        self
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.min_samples_leaf < 1 {
            return Err(Error::invalid_param("min_samples_leaf must be >= 1"));
        }
        if let Some(t) = self.max_terminal_nodes {
            if t < 2 {
                return Err(Error::invalid_param("max_terminal_nodes must be >= 2"));
            }
        }
        if let Some(m) = self.feature_subsample {
            if m == 0 || m > n_features {
                return Err(Error::invalid_param(format!(
                    "feature_subsample {m} out of range [1, {n_features}]"
                )));
            }
        }
        Ok(())
    }
}

/// One node of a fitted tree; children are indices into the node array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node")]
pub enum Node {
    #[serde(rename = "split")]
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    #[serde(rename = "leaf")]
    Leaf { value: f64, count: usize },
}

/// A fitted binary regression tree.
///
/// Rows route left when `x[feature] <= threshold`. Leaves partition the
/// feature space and store the mean training response of the rows they
/// received.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    depth: usize,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Index of the leaf node that `x` routes to.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { .. } => return id,
            }
        }
    }

    /// Predicted value for one feature vector.
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { value, .. } => value,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    /// Replace leaf values, keyed by node index.
    pub(crate) fn with_leaf_values(&self, values: &[(usize, f64)]) -> RegressionTree {
        let mut tree = self.clone();
        for &(id, v) in values {
            if let Node::Leaf { value, .. } = &mut tree.nodes[id] {
                *value = v;
            }
        }
        tree
    }
}

/// A candidate split and the squared-error reduction it achieves.
///
/// `sse_reduction = SSE(parent) - SSE(left) - SSE(right)` on the node's
/// training rows. For the single-column [`best_split`] the `feature` field
/// is 0; multi-column searches fill in the column they scanned.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub sse_reduction: f64,
}

/// Best threshold for one column, maximizing squared-error reduction.
///
/// Thresholds are midpoints between consecutive distinct sorted values and
/// must leave `min_samples_leaf` rows on each side. Ties go to the smallest
/// threshold. Returns `None` when no legal split exists (all values equal,
/// or too few rows).
pub fn best_split(x_col: &[f64], y: &[f64], min_samples_leaf: usize) -> Result<Option<SplitCandidate>> {
    if x_col.len() != y.len() {
        return Err(Error::invalid_data(format!(
            "column length {} does not match target length {}",
            x_col.len(),
            y.len()
        )));
    }
    let n = x_col.len();
    if n < 2 * min_samples_leaf.max(1) {
        return Ok(None);
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let mut xy: Vec<(f64, f64)> = x_col
        .iter()
        .zip(y.iter())
        .map(|(&x, &yi)| (x, yi - mean))
        .collect();
    xy.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    Ok(scan_sorted(&xy, min_samples_leaf).map(|(threshold, sse_reduction)| SplitCandidate {
        feature: 0,
        threshold,
        sse_reduction,
    }))
}

/// Scan a sorted, mean-centered column for the gain-maximizing threshold.
///
/// Centering makes the gain formula
/// `sum_l^2/n_l + sum_r^2/n_r - sum^2/n` numerically stable for nearly
/// constant targets.
fn scan_sorted(xy: &[(f64, f64)], min_leaf: usize) -> Option<(f64, f64)> {
    let n = xy.len();
    let min_leaf = min_leaf.max(1);
    let total: f64 = xy.iter().map(|p| p.1).sum();
    let parent_term = total * total / n as f64;
    let mut sum_left = 0.0;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n - 1 {
        sum_left += xy[i].1;
        if xy[i + 1].0 <= xy[i].0 {
            continue; // not a boundary between distinct values
        }
        let n_l = i + 1;
        let n_r = n - n_l;
        if n_l < min_leaf || n_r < min_leaf {
            continue;
        }
        let sum_right = total - sum_left;
        let gain = (sum_left * sum_left / n_l as f64 + sum_right * sum_right / n_r as f64
            - parent_term)
            .max(0.0);
        let threshold = 0.5 * (xy[i].0 + xy[i + 1].0);
        // strict > keeps the smallest threshold on ties
        if best.map_or(true, |(_, g)| gain > g) {
            best = Some((threshold, gain));
        }
    }
    best
}

struct FrontierEntry {
    gain: f64,
    order: usize,
    node_id: usize,
    start: usize,
    end: usize,
    depth: usize,
    feature: usize,
    threshold: f64,
}

impl PartialEq for FrontierEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for FrontierEntry {}
impl PartialOrd for FrontierEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FrontierEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: largest gain first, earliest-created node on ties
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.order.cmp(&self.order))
    }
}

struct Grower<'a> {
    data: &'a Dataset,
    indices: &'a [usize],
    targets: &'a [f64],
    params: &'a TreeParams,
}

impl Grower<'_> {
    /// Best split over the node's (possibly subsampled) feature set.
    ///
    /// Features are searched in ascending index order and replaced only on
    /// strictly larger gain, so ties resolve to the smallest feature index
    /// and then the smallest threshold.
    fn node_candidate(
        &self,
        work: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> Option<(usize, f64, f64)> {
        let n = work.len();
        let p = self.data.n_features();
        if n < 2 * self.params.min_samples_leaf.max(1) {
            return None;
        }
        let mean = work.iter().map(|&w| self.targets[w]).sum::<f64>() / n as f64;
        if work
            .iter()
            .all(|&w| self.targets[w] == self.targets[work[0]])
        {
            return None;
        }
        let features: Vec<usize> = match self.params.feature_subsample {
            Some(m) if m < p => {
                let mut drawn: Vec<usize> =
                    rand::seq::index::sample(rng, p, m).into_iter().collect();
                drawn.sort_unstable();
                drawn
            }
            _ => (0..p).collect(),
        };

        let per_feature: Vec<Option<(f64, f64)>> = crate::exec::map_indexed(features.len(), |k| {
            let f = features[k];
            let mut xy: Vec<(f64, f64)> = work
                .iter()
                .map(|&w| (self.data.value(self.indices[w], f), self.targets[w] - mean))
                .collect();
            xy.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            scan_sorted(&xy, self.params.min_samples_leaf)
        });

        let mut best: Option<(usize, f64, f64)> = None;
        for (k, cand) in per_feature.iter().enumerate() {
            if let Some((thr, gain)) = cand {
                if best.map_or(true, |(_, _, g)| *gain > g) {
                    best = Some((features[k], *thr, *gain));
                }
            }
        }
        best.filter(|&(_, _, g)| g > 0.0)
    }
}

/// Fit a regression tree to `targets` over the given rows of `data`.
///
/// `targets[k]` is the training value for row `indices[k]`. Growth is
/// best-first (largest squared-error reduction expanded first) which makes
/// finite `max_terminal_nodes` budgets meaningful; with no budget the same
/// rule simply expands every improvable node. Feature subsets are drawn
/// freshly per node in node-creation order, so a given `(params, rng)` pair
/// always grows the same tree.
pub fn fit_tree(
    data: &Dataset,
    indices: &[usize],
    targets: &[f64],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> Result<RegressionTree> {
    if indices.is_empty() {
        return Err(Error::invalid_data("cannot fit a tree on an empty index list"));
    }
    if indices.len() != targets.len() {
        return Err(Error::invalid_data(
            "index list and target lengths do not match",
        ));
    }
    if let Some(bad) = targets.iter().find(|t| !t.is_finite()) {
        return Err(Error::invalid_data(format!("non-finite target {bad}")));
    }
    params.validate(data.n_features())?;

    let n = indices.len();
    let grower = Grower {
        data,
        indices,
        targets,
        params,
    };

    let mut work: Vec<usize> = (0..n).collect();
    let mut nodes = vec![leaf_for(&work, targets)];
    let mut depth = 0;
    let mut terminal_count = 1;
    let mut creation_counter = 0;
    let mut heap = BinaryHeap::new();

    let maybe_push = |heap: &mut BinaryHeap<FrontierEntry>,
                          work: &[usize],
                          node_id: usize,
                          start: usize,
                          end: usize,
                          node_depth: usize,
                          counter: &mut usize,
                          rng: &mut ChaCha8Rng| {
        if let Some(max_d) = params.max_depth {
            if node_depth >= max_d {
                return;
            }
        }
        if let Some((feature, threshold, gain)) =
            grower.node_candidate(&work[start..end], rng)
        {
            heap.push(FrontierEntry {
                gain,
                order: *counter,
                node_id,
                start,
                end,
                depth: node_depth,
                feature,
                threshold,
            });
            *counter += 1;
        }
    };

    maybe_push(&mut heap, &work, 0, 0, n, 0, &mut creation_counter, rng);

    while let Some(entry) = heap.pop() {
        if let Some(budget) = params.max_terminal_nodes {
            if terminal_count + 1 > budget {
                break;
            }
        }
        // stable partition of the node's range by the chosen split
        let range = &work[entry.start..entry.end];
        let mut left: Vec<usize> = Vec::with_capacity(range.len());
        let mut right: Vec<usize> = Vec::with_capacity(range.len());
        for &w in range {
            if data.value(indices[w], entry.feature) <= entry.threshold {
                left.push(w);
            } else {
                right.push(w);
            }
        }
        let mid = entry.start + left.len();
        work[entry.start..mid].copy_from_slice(&left);
        work[mid..entry.end].copy_from_slice(&right);

        let left_id = nodes.len();
        nodes.push(leaf_for(&work[entry.start..mid], targets));
        let right_id = nodes.len();
        nodes.push(leaf_for(&work[mid..entry.end], targets));
        nodes[entry.node_id] = Node::Split {
            feature: entry.feature,
            threshold: entry.threshold,
            left: left_id,
            right: right_id,
        };
        terminal_count += 1;
        depth = depth.max(entry.depth + 1);

        maybe_push(
            &mut heap,
            &work,
            left_id,
            entry.start,
            mid,
            entry.depth + 1,
            &mut creation_counter,
            rng,
        );
        maybe_push(
            &mut heap,
            &work,
            right_id,
            mid,
            entry.end,
            entry.depth + 1,
            &mut creation_counter,
            rng,
        );
    }

    Ok(RegressionTree { nodes, depth })
}

fn leaf_for(work: &[usize], targets: &[f64]) -> Node {
    let sum: f64 = work.iter().map(|&w| targets[w]).sum();
    Node::Leaf {
        value: sum / work.len() as f64,
        count: work.len(),
    }
}
