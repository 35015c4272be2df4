//! Regression tree ensembles with penalized post-processing and adaptive
//! model mixing.
//!
//! The pipeline has three stages:
//!
//! 1. [`ensemble`] generates a basis of regression trees quickly, either
//!    MART-style boosting or a random-forest parameterization (shrinkage 0
//!    with row and feature subsampling).
//! 2. [`postprocess`] refits the response on the tree basis with a
//!    coordinate-descent solver for lasso, elastic net, and their adaptive
//!    variants, selecting hyperparameters by cross-validation. This prunes
//!    and reweights the trees.
//! 3. [`arm`] combines fitted pipelines by adaptive regression by mixing:
//!    convex weights from held-out Gaussian likelihoods over repeated
//!    2:1:1 data splits.
//!
//! [`tuner`] grid-tunes the conventional baselines and [`bench`] runs the
//! full model roster over repeated train/test splits, reporting test MSE
//! and fit time per model.
//!
//! All randomness flows through explicit seeds (see [`rng`]); with the
//! default `parallel` feature, independent work is distributed with rayon
//! without changing any result.

pub mod arm;
pub mod bench;
pub mod dataset;
pub mod ensemble;
mod error;
mod exec;
pub mod model_io;
pub mod postprocess;
pub mod rng;
pub mod tree;
pub mod tuner;

pub use error::{Error, Result};

/// A fitted regression model that scores single feature vectors.
pub trait Predictor: Send + Sync {
    fn predict_row(&self, x: &[f64]) -> f64;

    fn predict_rows(&self, data: &dataset::Dataset, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.predict_row(data.row(i))).collect()
    }
}

impl Predictor for Box<dyn Predictor> {
    fn predict_row(&self, x: &[f64]) -> f64 {
        self.as_ref().predict_row(x)
    }
}

/// Mean squared error between a response slice and predictions.
pub fn mean_squared_error(y: &[f64], predictions: &[f64]) -> f64 {
    assert_eq!(y.len(), predictions.len());
    let n = y.len().max(1);
    y.iter()
        .zip(predictions.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n as f64
}
