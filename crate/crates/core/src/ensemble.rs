//! Ensemble generation: subsampled tree fitting with shrinkage.
//!
//! One loop covers both modes. MART fits each tree to the pseudo-responses
//! (negative loss gradients) of the running fit and accumulates
//! `F_m = F_{m-1} + nu * b_m`; random-forest mode sets `nu = 0`, fits trees
//! to the raw response on row subsamples with per-node feature subsampling,
//! and predicts by plain averaging. Trees are stored with unshrunk leaf
//! values, so they double as the basis functions for penalized
//! post-processing.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::tree::{fit_tree, Node, RegressionTree, TreeParams};
use crate::Predictor;

/// Training loss. Squared error is the only supported loss; the enum keeps
/// the gradient plumbing explicit so further losses slot in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    #[serde(rename = "squared_error")]
    SquaredError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleMode {
    #[serde(rename = "mart")]
    Mart,
    #[serde(rename = "rf")]
    Rf,
}

/// Settings for one generated ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n_trees: usize,
    /// Shrinkage `nu`: (0,1] for MART, exactly 0 for RF mode.
    pub shrinkage: f64,
    /// Row fraction `eta` in (0,1] drawn without replacement per tree.
    pub subsample_fraction: f64,
    pub tree_params: TreeParams,
    pub loss: Loss,
    pub mode: EnsembleMode,
    pub seed: u64,
}

/// Default tree count by data size.
pub fn default_n_trees(n_rows: usize) -> usize {
    if n_rows < 350 {
        100
    } else if n_rows < 1000 {
        300
    } else {
        500
    }
}

/// `round(p/3)` feature subsample, clamped to at least 1.
pub fn rf_feature_subsample(n_features: usize) -> usize {
    ((n_features as f64 / 3.0).round() as usize).clamp(1, n_features)
}

impl EnsembleParams {
    /// Random-forest-style generation: shrinkage 0, subsample fraction 0.4,
    /// `round(p/3)` features per node, four-terminal-node trees with leaves
    /// of at least 5 rows (small trees keep the basis diverse).
    pub fn isle_rf(n_rows: usize, n_features: usize, seed: u64) -> Self {
        EnsembleParams {
            n_trees: default_n_trees(n_rows),
            shrinkage: 0.0,
            subsample_fraction: 0.4,
            tree_params: TreeParams {
                max_depth: None,
                min_samples_leaf: 5,
                max_terminal_nodes: Some(4),
                feature_subsample: Some(rf_feature_subsample(n_features)),
            },
            loss: Loss::SquaredError,
            mode: EnsembleMode::Rf,
            seed,
        }
    }

    /// MART-style generation with depth 2, subsample fraction 0.2, and
    /// shrinkage 0.01.
    pub fn isle_mart(n_rows: usize, seed: u64) -> Self {
        EnsembleParams {
            n_trees: default_n_trees(n_rows),
            shrinkage: 0.01,
            subsample_fraction: 0.2,
            tree_params: TreeParams {
                max_depth: Some(2),
                min_samples_leaf: 1,
                max_terminal_nodes: None,
                feature_subsample: None,
            },
            loss: Loss::SquaredError,
            mode: EnsembleMode::Mart,
            seed,
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::invalid_param("n_trees must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.subsample_fraction) || self.subsample_fraction == 0.0 {
            return Err(Error::invalid_param(format!(
                "subsample_fraction must lie in (0,1], got {}",
                self.subsample_fraction
            )));
        }
        match self.mode {
            EnsembleMode::Mart => {
                if !(0.0..=1.0).contains(&self.shrinkage) || self.shrinkage == 0.0 {
                    return Err(Error::invalid_param(format!(
                        "MART shrinkage must lie in (0,1], got {}",
                        self.shrinkage
                    )));
                }
            }
            EnsembleMode::Rf => {
                if self.shrinkage != 0.0 {
                    return Err(Error::invalid_param(
                        "RF mode requires shrinkage exactly 0",
                    ));
                }
            }
        }
        self.tree_params.validate(n_features)
    }
}

/// A fitted tree ensemble.
///
/// `trees[m]` stores the raw (unshrunk) leaf values of the m-th tree;
/// shrinkage is applied at prediction time, so each tree is exactly one
/// post-processing basis function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    f0: f64,
    trees: Vec<RegressionTree>,
    shrinkage: f64,
    mode: EnsembleMode,
}

impl Ensemble {
    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    pub fn mode(&self) -> EnsembleMode {
        self.mode
    }

    /// Predict one row: `f0 + nu * sum_m b_m(x)` for MART, the plain tree
    /// average for RF mode.
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self.mode {
            EnsembleMode::Mart => {
                let sum: f64 = self.trees.iter().map(|t| t.predict_row(x)).sum();
                self.f0 + self.shrinkage * sum
            }
            EnsembleMode::Rf => {
                if self.trees.is_empty() {
                    return self.f0;
                }
                let sum: f64 = self.trees.iter().map(|t| t.predict_row(x)).sum();
                sum / self.trees.len() as f64
            }
        }
    }

    pub fn predict_rows(&self, data: &Dataset, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.predict_row(data.row(i))).collect()
    }
}

impl Predictor for Ensemble {
    fn predict_row(&self, x: &[f64]) -> f64 {
        Ensemble::predict_row(self, x)
    }
}

/// Raw per-tree predictions over a dataset, stored column-major:
/// column `m` holds tree `m` evaluated on every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl Basis {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Basis {
        let n_cols = columns.len();
        let n_rows = columns.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for col in &columns {
            assert_eq!(col.len(), n_rows, "ragged basis columns");
            values.extend_from_slice(col);
        }
        Basis {
            values,
            n_rows,
            n_cols,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn column(&self, m: usize) -> &[f64] {
        &self.values[m * self.n_rows..(m + 1) * self.n_rows]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[col * self.n_rows + row]
    }

    /// New basis keeping only the given rows, in order.
    pub fn gather_rows(&self, rows: &[usize]) -> Basis {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        for m in 0..self.n_cols {
            let col = self.column(m);
            values.extend(rows.iter().map(|&r| col[r]));
        }
        Basis {
            values,
            n_rows: rows.len(),
            n_cols: self.n_cols,
        }
    }
}

/// Loss-minimizing constant fit: the response mean for squared error.
pub fn fit_f0(y: &[f64], loss: Loss) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::invalid_data("cannot fit a constant to no data"));
    }
    match loss {
        Loss::SquaredError => Ok(y.iter().sum::<f64>() / y.len() as f64),
    }
}

/// Elementwise negative loss gradient at the current fit: `y - f` for
/// squared error `L = (y-F)^2 / 2`.
pub fn negative_gradient(y: &[f64], f: &[f64], loss: Loss) -> Result<Vec<f64>> {
    if y.len() != f.len() {
        return Err(Error::invalid_data("gradient length mismatch"));
    }
    match loss {
        Loss::SquaredError => Ok(y.iter().zip(f.iter()).map(|(yi, fi)| yi - fi).collect()),
    }
}

/// Uniform row subsample of size `max(1, round(n * eta))` without
/// replacement, drawn as a random permutation prefix.
pub fn subsample(n: usize, eta: f64, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&eta) || eta == 0.0 {
        return Err(Error::invalid_param(format!(
            "subsample fraction must lie in (0,1], got {eta}"
        )));
    }
    let size = ((n as f64 * eta).round() as usize).clamp(1, n);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm.truncate(size);
    Ok(perm)
}

/// Pseudo-response state for one boosting iteration.
struct LossGradientState {
    current_fit: Vec<f64>,
    pseudo_response: Vec<f64>,
}

impl LossGradientState {
    fn at(full_fit: &[f64], y_sub: &[f64], rows: &[usize], loss: Loss) -> Result<Self> {
        let current_fit: Vec<f64> = rows.iter().map(|&i| full_fit[i]).collect();
        let pseudo_response = negative_gradient(y_sub, &current_fit, loss)?;
        Ok(LossGradientState {
            current_fit,
            pseudo_response,
        })
    }
}

/// Replace each leaf value with the loss-optimal constant for the rows the
/// leaf received: for squared error, the leaf mean of `y - f_prev`.
///
/// When the tree was grown on those same residuals this is an identity up
/// to rounding; it is applied explicitly so other losses can reuse the
/// machinery.
pub fn fit_terminal_gammas(
    tree: &RegressionTree,
    data: &Dataset,
    indices: &[usize],
    y: &[f64],
    f_prev: &[f64],
    loss: Loss,
) -> Result<RegressionTree> {
    if indices.len() != y.len() || y.len() != f_prev.len() {
        return Err(Error::invalid_data("terminal gamma input length mismatch"));
    }
    match loss {
        Loss::SquaredError => {}
    }
    let mut sums: Vec<f64> = vec![0.0; tree.nodes().len()];
    let mut counts: Vec<usize> = vec![0; tree.nodes().len()];
    for (k, &row) in indices.iter().enumerate() {
        let leaf = tree.leaf_index(data.row(row));
        sums[leaf] += y[k] - f_prev[k];
        counts[leaf] += 1;
    }
    let mut replacements = Vec::new();
    for (id, node) in tree.nodes().iter().enumerate() {
        if let Node::Leaf { .. } = node {
            if counts[id] == 0 {
                return Err(Error::invalid_data(format!(
                    "leaf {id} received no rows from the fitting subsample"
                )));
            }
            replacements.push((id, sums[id] / counts[id] as f64));
        }
    }
    Ok(tree.with_leaf_values(&replacements))
}

/// Generate an ensemble from `data` according to `params`.
///
/// Per-tree generator streams are derived from `params.seed` with
/// [`crate::rng::mix_seed`] keyed by the tree index; in RF mode each tree
/// depends only on its own stream, so trees are independent and fit in
/// parallel. MART iterations are sequential by construction; the running
/// fit is accumulated in row order.
pub fn generate_ensemble(data: &Dataset, params: &EnsembleParams) -> Result<Ensemble> {
    params.validate(data.n_features())?;
    let n = data.n_rows();
    let y = data.response();
    let f0 = fit_f0(y, params.loss)?;

    let trees = match params.mode {
        EnsembleMode::Rf => crate::exec::try_map_indexed(params.n_trees, |m| {
            let mut tree_rng = rng::stream(params.seed, m as u64);
            let rows = subsample(n, params.subsample_fraction, &mut tree_rng)?;
            let targets = data.gather_response(&rows);
            fit_tree(data, &rows, &targets, &params.tree_params, &mut tree_rng)
        })?,
        EnsembleMode::Mart => {
            let mut full_fit = vec![f0; n];
            let mut trees = Vec::with_capacity(params.n_trees);
            for m in 0..params.n_trees {
                let mut tree_rng = rng::stream(params.seed, m as u64);
                let rows = subsample(n, params.subsample_fraction, &mut tree_rng)?;
                let y_sub = data.gather_response(&rows);
                let state = LossGradientState::at(&full_fit, &y_sub, &rows, params.loss)?;
                let grown = fit_tree(
                    data,
                    &rows,
                    &state.pseudo_response,
                    &params.tree_params,
                    &mut tree_rng,
                )?;
                let tree =
                    fit_terminal_gammas(&grown, data, &rows, &y_sub, &state.current_fit, params.loss)?;
                for i in 0..n {
                    full_fit[i] += params.shrinkage * tree.predict_row(data.row(i));
                }
                trees.push(tree);
            }
            trees
        }
    };

    Ok(Ensemble {
        f0,
        trees,
        shrinkage: params.shrinkage,
        mode: params.mode,
    })
}

/// Evaluate every tree on every row of `data`: the basis matrix whose
/// column `m` is tree `m`'s raw predictions.
pub fn predict_basis(ensemble: &Ensemble, data: &Dataset) -> Basis {
    let n = data.n_rows();
    let columns = crate::exec::map_indexed(ensemble.n_trees(), |m| {
        (0..n)
            .map(|i| ensemble.trees()[m].predict_row(data.row(i)))
            .collect::<Vec<f64>>()
    });
    Basis::from_columns(columns)
}
