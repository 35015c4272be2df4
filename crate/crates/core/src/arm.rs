//! Adaptive regression by mixing: convex model-combination weights from
//! held-out Gaussian likelihoods.
//!
//! Each outer iteration permutes the rows into three parts in ratio 2:1:1,
//! fits every candidate on the first part, estimates its residual scale on
//! the second, and scores the third under a Gaussian density at that scale.
//! Scores are combined in log space; a literal product of densities
//! underflows once the third part has more than a few hundred rows, so the
//! per-iteration shares come from a log-sum-exp normalization instead.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::{three_way_split, Dataset};
use crate::error::{Error, Result};
use crate::rng;
use crate::Predictor;

/// A procedure that fits a predictor on a row subset of a dataset.
///
/// Must be deterministic given `(indices, seed)`; hyperparameters are
/// expected to be frozen inside the closure (tuning inside the mixing loop
/// would multiply its cost by the grid size).
pub type FitProcedure =
    Arc<dyn Fn(&Dataset, &[usize], u64) -> Result<Box<dyn Predictor>> + Send + Sync>;

/// A labelled candidate for model combination.
#[derive(Clone)]
pub struct CandidateModel {
    pub label: String,
    pub fit: FitProcedure,
}

impl CandidateModel {
    pub fn new(
        label: impl Into<String>,
        fit: impl Fn(&Dataset, &[usize], u64) -> Result<Box<dyn Predictor>> + Send + Sync + 'static,
    ) -> Self {
        CandidateModel {
            label: label.into(),
            fit: Arc::new(fit),
        }
    }
}

/// Mixing loop settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    /// Outer iterations (data splits) to average over.
    pub n_outer: usize,
    /// Floor for the estimated residual scale, guarding against candidates
    /// that interpolate the variance part.
    pub min_sigma: f64,
}

impl ArmConfig {
    /// Default configuration: 20 iterations, sigma floored at `1e-8` times
    /// the response standard deviation.
    pub fn for_response(y: &[f64]) -> ArmConfig {
        let n = y.len().max(1) as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        ArmConfig {
            n_outer: 20,
            min_sigma: (1e-8 * var.sqrt()).max(1e-12),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_outer == 0 {
            return Err(Error::invalid_param("need at least one mixing iteration"));
        }
        if !(self.min_sigma > 0.0) {
            return Err(Error::invalid_param("min_sigma must be positive"));
        }
        Ok(())
    }
}

/// Convex weights per candidate, plus the per-iteration shares they
/// averaged from. Every share row sums to one; so do the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmWeights {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
    pub per_iteration_shares: Vec<Vec<f64>>,
}

impl ArmWeights {
    /// CSV report: one row per candidate with its weight and shares.
    pub fn to_csv(&self) -> String {
        let iters = self.per_iteration_shares.len();
        let mut out = String::from("label,weight");
        for it in 0..iters {
            out.push_str(&format!(",share_{it}"));
        }
        out.push('\n');
        for (j, label) in self.labels.iter().enumerate() {
            out.push_str(&format!("{label},{}", self.weights[j]));
            for row in &self.per_iteration_shares {
                out.push_str(&format!(",{}", row[j]));
            }
            out.push('\n');
        }
        out
    }
}

/// Residual scale on the variance split: root mean squared validation
/// residual, floored at `min_sigma`.
pub fn arm_variance(y_val: &[f64], pred_val: &[f64], min_sigma: f64) -> f64 {
    assert_eq!(y_val.len(), pred_val.len());
    let n = y_val.len().max(1) as f64;
    let msr = y_val
        .iter()
        .zip(pred_val.iter())
        .map(|(y, p)| (y - p) * (y - p))
        .sum::<f64>()
        / n;
    msr.sqrt().max(min_sigma)
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Log likelihood score of the evaluation split under a Gaussian density
/// with scale `sigma`: `sum_i [log phi((y_i - pred_i)/sigma) - log sigma]`.
pub fn arm_log_score(y_eval: &[f64], pred_eval: &[f64], sigma: f64) -> f64 {
    assert_eq!(y_eval.len(), pred_eval.len());
    assert!(sigma > 0.0);
    let log_sigma = sigma.ln();
    y_eval
        .iter()
        .zip(pred_eval.iter())
        .map(|(y, p)| {
            let z = (y - p) / sigma;
            -0.5 * z * z - LN_SQRT_2PI - log_sigma
        })
        .sum()
}

/// Shares proportional to `exp(log_score_j)`, computed stably and
/// normalized so identical scores split exactly evenly.
pub(crate) fn log_scores_to_shares(log_scores: &[f64]) -> Vec<f64> {
    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = log_scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Run the mixing loop and return the averaged convex weights.
///
/// Iteration `it` draws its split from substream `it` of `seed`; every
/// candidate within the iteration fits with the same derived seed, so
/// byte-identical candidates receive exactly equal shares. Iterations are
/// independent and run in parallel; the final average is accumulated in
/// iteration order.
pub fn arm_weights(
    models: &[CandidateModel],
    data: &Dataset,
    config: &ArmConfig,
    seed: u64,
) -> Result<ArmWeights> {
    if models.is_empty() {
        return Err(Error::invalid_param("need at least one candidate model"));
    }
    config.validate()?;
    let n = data.n_rows();
    let j_count = models.len();

    let per_iteration_shares: Vec<Vec<f64>> = crate::exec::try_map_indexed(config.n_outer, |it| {
        let it_seed = rng::mix_seed(seed, it as u64);
        let split = three_way_split(n, &mut rng::rng_from_seed(it_seed))?;
        let fit_seed = rng::mix_seed(it_seed, 1);
        let y_var = data.gather_response(&split.z2);
        let y_eval = data.gather_response(&split.z3);

        let mut log_scores = Vec::with_capacity(j_count);
        for model in models {
            let predictor = (model.fit)(data, &split.z1, fit_seed)
                .map_err(|e| Error::for_label(&model.label, e))?;
            let pred_var = predictor.predict_rows(data, &split.z2);
            let sigma = arm_variance(&y_var, &pred_var, config.min_sigma);
            let pred_eval = predictor.predict_rows(data, &split.z3);
            log_scores.push(arm_log_score(&y_eval, &pred_eval, sigma));
        }
        Ok(log_scores_to_shares(&log_scores))
    })?;

    let mut weights = vec![0.0; j_count];
    for row in &per_iteration_shares {
        for (w, s) in weights.iter_mut().zip(row.iter()) {
            *w += s;
        }
    }
    for w in weights.iter_mut() {
        *w /= config.n_outer as f64;
    }

    Ok(ArmWeights {
        labels: models.iter().map(|m| m.label.clone()).collect(),
        weights,
        per_iteration_shares,
    })
}

/// The mixed predictor: candidates refit on all rows, combined with the
/// estimated weights.
pub struct ArmModel {
    pub weights: ArmWeights,
    pub components: Vec<Box<dyn Predictor>>,
}

impl ArmModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.weights
            .weights
            .iter()
            .zip(self.components.iter())
            .map(|(w, c)| w * c.predict_row(x))
            .sum()
    }
}

impl Predictor for ArmModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        ArmModel::predict_row(self, x)
    }
}

/// Estimate weights, then refit every candidate on the full data (substream
/// `n_outer` of `seed`) to build the mixed predictor.
pub fn arm_fit(
    models: &[CandidateModel],
    data: &Dataset,
    config: &ArmConfig,
    seed: u64,
) -> Result<ArmModel> {
    let weights = arm_weights(models, data, config, seed)?;
    let all_rows: Vec<usize> = (0..data.n_rows()).collect();
    let refit_seed = rng::mix_seed(seed, config.n_outer as u64);
    let components = models
        .iter()
        .map(|m| (m.fit)(data, &all_rows, refit_seed).map_err(|e| Error::for_label(&m.label, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ArmModel {
        weights,
        components,
    })
}

/// Combine already fitted predictors under externally computed weights.
pub fn arm_model_from_parts(weights: ArmWeights, components: Vec<Box<dyn Predictor>>) -> ArmModel {
    assert_eq!(weights.weights.len(), components.len());
    ArmModel {
        weights,
        components,
    }
}
