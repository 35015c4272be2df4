//! Penalized linear post-processing of a tree basis.
//!
//! The generated ensemble is treated as a dictionary: each tree's raw
//! predictions form one column of a design matrix, and the response is
//! refit on those columns under a lasso, elastic-net, or adaptive penalty.
//! The selected coefficients reweight (and mostly prune) the trees.

mod cv;
mod solver;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::ensemble::{predict_basis, Ensemble};
use crate::error::Result;
use crate::Predictor;

pub use cv::{cv_select, cv_table_csv, fit_adaptive, AdaptiveFit, CvConfig, CvRecord};
pub use solver::{
    adaptive_weights, coordinate_descent, coordinate_descent_traced, lambda_path, soft_threshold,
    standardize_basis, PenaltyKind, PenaltySpec, PenalizedFit, Standardization,
};

/// An ensemble together with the penalized fit over its basis.
///
/// Predictions are `intercept + sum_m coefficients[m] * b_m(x)` with the
/// coefficients on the original (unstandardized) basis scale; trees with a
/// zero coefficient are skipped entirely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostProcessedModel {
    pub ensemble: Ensemble,
    pub fit: PenalizedFit,
}

impl PostProcessedModel {
    pub fn new(ensemble: Ensemble, fit: PenalizedFit) -> Self {
        assert_eq!(
            ensemble.n_trees(),
            fit.coefficients.len(),
            "coefficient count must match tree count"
        );
        PostProcessedModel { ensemble, fit }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut acc = self.fit.intercept;
        for (m, c) in self.fit.coefficients.iter().enumerate() {
            if *c != 0.0 {
                acc += c * self.ensemble.trees()[m].predict_row(x);
            }
        }
        acc
    }
}

impl Predictor for PostProcessedModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        PostProcessedModel::predict_row(self, x)
    }
}

/// Everything produced by [`post_process`]: the model, the winning CV MSE,
/// and the CV tables (pilot table as well for adaptive kinds).
#[derive(Debug, Clone)]
pub struct PostProcessOutput {
    pub model: PostProcessedModel,
    pub cv_mse: f64,
    pub cv_records: Vec<CvRecord>,
    pub pilot: Option<PenalizedFit>,
    pub pilot_records: Vec<CvRecord>,
}

/// Post-process a fitted ensemble: evaluate its basis on `data`,
/// standardize, select the penalty by cross-validation, and refit.
pub fn post_process(
    ensemble: Ensemble,
    data: &Dataset,
    kind: PenaltyKind,
    cfg: &CvConfig,
    seed: u64,
) -> Result<PostProcessOutput> {
    let basis = predict_basis(&ensemble, data);
    let (std_basis, std) = standardize_basis(&basis);
    let y = data.response();

    let (fit, cv_records, pilot, pilot_records) = if kind.is_adaptive() {
        let adaptive = fit_adaptive(&std_basis, &std, y, kind, cfg, seed)?;
        (
            adaptive.fit,
            adaptive.records,
            Some(adaptive.pilot),
            adaptive.pilot_records,
        )
    } else {
        let (fit, records) = cv_select(&std_basis, &std, y, kind, None, cfg, seed)?;
        (fit, records, None, Vec::new())
    };

    let cv_mse = cv_records
        .iter()
        .find(|r| {
            r.lambda == fit.spec.lambda && r.alpha == fit.spec.alpha && r.gamma == fit.spec.gamma
        })
        .map(|r| r.mean_mse)
        .unwrap_or(f64::NAN);

    Ok(PostProcessOutput {
        model: PostProcessedModel::new(ensemble, fit),
        cv_mse,
        cv_records,
        pilot,
        pilot_records,
    })
}

/// Hyperparameters frozen from a previous cross-validated fit, enough to
/// refit the same penalty on new data without re-running CV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenPenalty {
    pub kind: PenaltyKind,
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub pilot_lambda: Option<f64>,
    pub pilot_alpha: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl FrozenPenalty {
    pub fn from_fit(fit: &PenalizedFit, pilot: Option<&PenalizedFit>, cfg: &CvConfig) -> Self {
        FrozenPenalty {
            kind: fit.spec.kind,
            lambda: fit.spec.lambda,
            alpha: fit.spec.alpha,
            gamma: fit.spec.gamma,
            pilot_lambda: pilot.map(|p| p.spec.lambda),
            pilot_alpha: pilot.map(|p| p.spec.alpha),
            tol: cfg.tol,
            max_iter: cfg.max_iter,
        }
    }
}

/// Refit a post-processed model at frozen hyperparameters.
///
/// For adaptive kinds the pilot is refit first at its frozen (lambda,
/// alpha) to produce the weights on the new basis; no cross-validation
/// happens here.
pub fn post_process_frozen(
    ensemble: Ensemble,
    data: &Dataset,
    frozen: &FrozenPenalty,
) -> Result<PostProcessedModel> {
    let basis = predict_basis(&ensemble, data);
    let (std_basis, std) = standardize_basis(&basis);
    let y = data.response();

    // frozen refits happen inside mixing loops; take the fast convergence
    // path rather than the tight stationarity polish
    let spec = if frozen.kind.is_adaptive() {
        let pilot_kind = frozen
            .kind
            .pilot_kind()
            .expect("adaptive kind has a pilot");
        let pilot_spec = PenaltySpec::plain(
            pilot_kind,
            frozen.pilot_lambda.unwrap_or(frozen.lambda),
            frozen.pilot_alpha.unwrap_or(0.0),
        );
        let pilot = solver::coordinate_descent_with_slack(
            &std_basis,
            &std,
            y,
            &pilot_spec,
            None,
            frozen.tol,
            frozen.max_iter,
            None,
        )?;
        let weights = adaptive_weights(&pilot.standardized_coefficients(), frozen.gamma);
        PenaltySpec {
            kind: frozen.kind,
            lambda: frozen.lambda,
            alpha: frozen.alpha,
            gamma: frozen.gamma,
            adaptive_weights: Some(weights),
        }
    } else {
        PenaltySpec::plain(frozen.kind, frozen.lambda, frozen.alpha)
    };

    let fit = solver::coordinate_descent_with_slack(
        &std_basis,
        &std,
        y,
        &spec,
        None,
        frozen.tol,
        frozen.max_iter,
        None,
    )?;
    Ok(PostProcessedModel::new(ensemble, fit))
}
