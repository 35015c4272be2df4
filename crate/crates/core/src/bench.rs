//! Benchmark harness: fits a roster of model pipelines over repeated
//! train/test splits and reports test MSE and fit seconds per model.
//!
//! The seventeen pipelines combine four building blocks: grid-tuned
//! baselines (RF1, MART1), fixed-setting generated ensembles (RF2, MART2),
//! penalized post-processing of the generated ensembles (`*_lasso`,
//! `*_alasso`, `*_enet`, `*_aenet`), and mixing of matched pairs by
//! held-out likelihood weights (`ARM_*`).
//!
//! Pipelines run sequentially within a repeat so wall-clock timings stay
//! meaningful; parallelism lives inside each pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::arm::{arm_model_from_parts, arm_weights, ArmConfig, CandidateModel};
use crate::dataset::{shuffle_split, Dataset, SplitIndices};
use crate::ensemble::{generate_ensemble, EnsembleMode, EnsembleParams};
use crate::error::{Error, Result};
use crate::postprocess::{post_process, post_process_frozen, CvConfig, FrozenPenalty, PenaltyKind};
use crate::rng;
use crate::tuner::{tune, TuningGrid};
use crate::Predictor;

/// The canonical model roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelLabel {
    #[serde(rename = "RF1")]
    Rf1,
    #[serde(rename = "RF2")]
    Rf2,
    #[serde(rename = "RF_lasso")]
    RfLasso,
    #[serde(rename = "RF_alasso")]
    RfAlasso,
    #[serde(rename = "RF_enet")]
    RfEnet,
    #[serde(rename = "RF_aenet")]
    RfAenet,
    #[serde(rename = "MART1")]
    Mart1,
    #[serde(rename = "MART2")]
    Mart2,
    #[serde(rename = "MART_lasso")]
    MartLasso,
    #[serde(rename = "MART_alasso")]
    MartAlasso,
    #[serde(rename = "MART_enet")]
    MartEnet,
    #[serde(rename = "MART_aenet")]
    MartAenet,
    #[serde(rename = "ARM_tree")]
    ArmTree,
    #[serde(rename = "ARM_lasso")]
    ArmLasso,
    #[serde(rename = "ARM_alasso")]
    ArmAlasso,
    #[serde(rename = "ARM_enet")]
    ArmEnet,
    #[serde(rename = "ARM_aenet")]
    ArmAenet,
}

impl ModelLabel {
    pub const ALL: [ModelLabel; 17] = [
        ModelLabel::Rf1,
        ModelLabel::Rf2,
        ModelLabel::RfLasso,
        ModelLabel::RfAlasso,
        ModelLabel::RfEnet,
        ModelLabel::RfAenet,
        ModelLabel::Mart1,
        ModelLabel::Mart2,
        ModelLabel::MartLasso,
        ModelLabel::MartAlasso,
        ModelLabel::MartEnet,
        ModelLabel::MartAenet,
        ModelLabel::ArmTree,
        ModelLabel::ArmLasso,
        ModelLabel::ArmAlasso,
        ModelLabel::ArmEnet,
        ModelLabel::ArmAenet,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelLabel::Rf1 => "RF1",
            ModelLabel::Rf2 => "RF2",
            ModelLabel::RfLasso => "RF_lasso",
            ModelLabel::RfAlasso => "RF_alasso",
            ModelLabel::RfEnet => "RF_enet",
            ModelLabel::RfAenet => "RF_aenet",
            ModelLabel::Mart1 => "MART1",
            ModelLabel::Mart2 => "MART2",
            ModelLabel::MartLasso => "MART_lasso",
            ModelLabel::MartAlasso => "MART_alasso",
            ModelLabel::MartEnet => "MART_enet",
            ModelLabel::MartAenet => "MART_aenet",
            ModelLabel::ArmTree => "ARM_tree",
            ModelLabel::ArmLasso => "ARM_lasso",
            ModelLabel::ArmAlasso => "ARM_alasso",
            ModelLabel::ArmEnet => "ARM_enet",
            ModelLabel::ArmAenet => "ARM_aenet",
        }
    }

    /// Position in the canonical roster; also keys the per-pipeline seed
    /// substream, so a model's numbers are identical whether it runs alone
    /// or inside a larger roster.
    fn canonical_index(self) -> u64 {
        ModelLabel::ALL.iter().position(|l| *l == self).unwrap() as u64
    }

    /// The penalty applied on top of the generated ensemble, if any.
    fn penalty(self) -> Option<(EnsembleMode, PenaltyKind)> {
        use ModelLabel::*;
        match self {
            RfLasso => Some((EnsembleMode::Rf, PenaltyKind::Lasso)),
            RfAlasso => Some((EnsembleMode::Rf, PenaltyKind::AdaptiveLasso)),
            RfEnet => Some((EnsembleMode::Rf, PenaltyKind::ElasticNet)),
            RfAenet => Some((EnsembleMode::Rf, PenaltyKind::AdaptiveElasticNet)),
            MartLasso => Some((EnsembleMode::Mart, PenaltyKind::Lasso)),
            MartAlasso => Some((EnsembleMode::Mart, PenaltyKind::AdaptiveLasso)),
            MartEnet => Some((EnsembleMode::Mart, PenaltyKind::ElasticNet)),
            MartAenet => Some((EnsembleMode::Mart, PenaltyKind::AdaptiveElasticNet)),
            _ => None,
        }
    }

    /// Component pipelines of a mixing model.
    fn arm_components(self) -> Option<[ModelLabel; 2]> {
        use ModelLabel::*;
        match self {
            ArmTree => Some([Rf1, Mart1]),
            ArmLasso => Some([RfLasso, MartLasso]),
            ArmAlasso => Some([RfAlasso, MartAlasso]),
            ArmEnet => Some([RfEnet, MartEnet]),
            ArmAenet => Some([RfAenet, MartAenet]),
            _ => None,
        }
    }
}

impl fmt::Display for ModelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::invalid_param(format!("unknown model label {s:?}")))
    }
}

/// Per-model parameter overrides for a benchmark run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOverrides {
    pub n_trees: Option<usize>,
    pub max_depth: Option<usize>,
    /// Leaf budget per tree; 0 lifts the cap.
    pub max_terminal_nodes: Option<usize>,
    pub eta: Option<f64>,
    pub nu: Option<f64>,
    pub feature_subsample: Option<usize>,
    pub n_lambdas: Option<usize>,
    pub n_folds: Option<usize>,
    pub arm_iters: Option<usize>,
}

pub type OverrideMap = BTreeMap<String, ModelOverrides>;

fn default_header() -> bool {
    true
}
fn default_test_fraction() -> f64 {
    0.25
}
fn default_n_repeats() -> usize {
    10
}
fn default_timing() -> bool {
    true
}

/// A benchmark run configuration, loadable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub data: PathBuf,
    pub target: String,
    #[serde(default = "default_header")]
    pub header: bool,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "default_n_repeats")]
    pub n_repeats: usize,
    #[serde(default)]
    pub seed: u64,
    pub roster: Vec<ModelLabel>,
    #[serde(default)]
    pub overrides: OverrideMap,
    /// When false, fit seconds are recorded as 0 so report files are
    /// byte-identical across runs.
    #[serde(default = "default_timing")]
    pub timing: bool,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.roster.is_empty() {
            return Err(Error::invalid_param("empty model roster"));
        }
        if self.n_repeats == 0 {
            return Err(Error::invalid_param("n_repeats must be >= 1"));
        }
        Ok(())
    }
}

/// One fitted-and-scored pipeline instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub model: ModelLabel,
    pub repeat: usize,
    pub mse: f64,
    pub seconds: f64,
}

/// Per-model means over repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub model: ModelLabel,
    pub mean_mse: f64,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub dataset_label: String,
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<BenchSummary>,
}

impl BenchReport {
    /// Assemble a report from per-repeat rows; summaries are the arithmetic
    /// means per model, in canonical label order.
    pub fn from_rows(dataset_label: String, rows: Vec<BenchRow>) -> BenchReport {
        let mut summaries = Vec::new();
        for label in ModelLabel::ALL {
            let model_rows: Vec<&BenchRow> = rows.iter().filter(|r| r.model == label).collect();
            if model_rows.is_empty() {
                continue;
            }
            let k = model_rows.len() as f64;
            summaries.push(BenchSummary {
                model: label,
                mean_mse: model_rows.iter().map(|r| r.mse).sum::<f64>() / k,
                mean_seconds: model_rows.iter().map(|r| r.seconds).sum::<f64>() / k,
            });
        }
        BenchReport {
            dataset_label,
            rows,
            summaries,
        }
    }

    pub fn summary_for(&self, label: ModelLabel) -> Option<&BenchSummary> {
        self.summaries.iter().find(|s| s.model == label)
    }
}

fn overrides_for(map: &OverrideMap, label: ModelLabel) -> ModelOverrides {
    map.get(label.as_str()).cloned().unwrap_or_default()
}

fn rf2_params(train: &Dataset, ov: &ModelOverrides, seed: u64) -> EnsembleParams {
    let mut p = EnsembleParams::isle_rf(train.n_rows(), train.n_features(), seed);
    apply_ensemble_overrides(&mut p, ov);
    p
}

fn mart2_params(train: &Dataset, ov: &ModelOverrides, seed: u64) -> EnsembleParams {
    let mut p = EnsembleParams::isle_mart(train.n_rows(), seed);
    apply_ensemble_overrides(&mut p, ov);
    p
}

fn apply_ensemble_overrides(p: &mut EnsembleParams, ov: &ModelOverrides) {
    if let Some(n) = ov.n_trees {
        p.n_trees = n;
    }
    if let Some(d) = ov.max_depth {
        p.tree_params.max_depth = Some(d);
    }
    if let Some(t) = ov.max_terminal_nodes {
        p.tree_params.max_terminal_nodes = if t == 0 { None } else { Some(t) };
    }
    if let Some(eta) = ov.eta {
        p.subsample_fraction = eta;
    }
    if let Some(nu) = ov.nu {
        p.shrinkage = nu;
    }
    if let Some(m) = ov.feature_subsample {
        p.tree_params.feature_subsample = Some(m);
    }
}

fn cv_config(ov: &ModelOverrides) -> CvConfig {
    let mut cfg = CvConfig::default();
    if let Some(n) = ov.n_lambdas {
        cfg.n_lambdas = n;
    }
    if let Some(k) = ov.n_folds {
        cfg.n_folds = k;
    }
    cfg
}

/// Tuned baseline parameters, frozen for reuse by the mixing pipelines.
fn tune_baseline(
    train: &Dataset,
    mode: EnsembleMode,
    ov: &ModelOverrides,
    seed: u64,
) -> Result<EnsembleParams> {
    let grid = TuningGrid::default_for(train.n_features());
    let k = ov.n_folds.unwrap_or(5);
    let result = tune(train, mode, &grid, k, rng::mix_seed(seed, 0))?;
    Ok(result.best_params)
}

/// A fitted penalized pipeline plus everything needed to refit it at frozen
/// hyperparameters on other data.
struct FrozenComponent {
    label: ModelLabel,
    model: Box<dyn Predictor>,
    base_params: EnsembleParams,
    frozen: Option<FrozenPenalty>,
}

impl FrozenComponent {
    fn candidate(&self) -> CandidateModel {
        let base = self.base_params.clone();
        let frozen = self.frozen.clone();
        CandidateModel::new(self.label.as_str(), move |data, rows, seed| {
            let sub = data.subset(rows);
            let params = EnsembleParams {
                seed,
                ..base.clone()
            };
            let ensemble = generate_ensemble(&sub, &params)?;
            match &frozen {
                Some(f) => Ok(Box::new(post_process_frozen(ensemble, &sub, f)?) as Box<dyn Predictor>),
                None => Ok(Box::new(ensemble) as Box<dyn Predictor>),
            }
        })
    }
}

/// Fit one component pipeline on the full training data and capture its
/// frozen hyperparameters.
fn fit_component(
    label: ModelLabel,
    train: &Dataset,
    repeat_seed: u64,
    overrides: &OverrideMap,
) -> Result<FrozenComponent> {
    let ov = overrides_for(overrides, label);
    let seed = rng::mix_seed(repeat_seed, 1 + label.canonical_index());
    match label {
        ModelLabel::Rf1 | ModelLabel::Mart1 => {
            let mode = if label == ModelLabel::Rf1 {
                EnsembleMode::Rf
            } else {
                EnsembleMode::Mart
            };
            let mut best = tune_baseline(train, mode, &ov, seed)?;
            best.seed = rng::mix_seed(seed, 1);
            let ensemble = generate_ensemble(train, &best)?;
            Ok(FrozenComponent {
                label,
                model: Box::new(ensemble),
                base_params: best,
                frozen: None,
            })
        }
        ModelLabel::Rf2 | ModelLabel::Mart2 => {
            let params = if label == ModelLabel::Rf2 {
                rf2_params(train, &ov, rng::mix_seed(seed, 0))
            } else {
                mart2_params(train, &ov, rng::mix_seed(seed, 0))
            };
            let ensemble = generate_ensemble(train, &params)?;
            Ok(FrozenComponent {
                label,
                model: Box::new(ensemble),
                base_params: params,
                frozen: None,
            })
        }
        _ => {
            let (mode, kind) = label
                .penalty()
                .ok_or_else(|| Error::invalid_param(format!("{label} is not a component pipeline")))?;
            let params = match mode {
                EnsembleMode::Rf => rf2_params(train, &ov, rng::mix_seed(seed, 0)),
                EnsembleMode::Mart => mart2_params(train, &ov, rng::mix_seed(seed, 0)),
            };
            let cfg = cv_config(&ov);
            let ensemble = generate_ensemble(train, &params)?;
            let out = post_process(ensemble, train, kind, &cfg, rng::mix_seed(seed, 1))?;
            let frozen = FrozenPenalty::from_fit(&out.model.fit, out.pilot.as_ref(), &cfg);
            Ok(FrozenComponent {
                label,
                model: Box::new(out.model),
                base_params: params,
                frozen: Some(frozen),
            })
        }
    }
}

/// Fit the pipeline for `label` on the training data.
///
/// `repeat_seed` is the repeat's master seed; the pipeline derives its own
/// substream from its canonical index, and mixing pipelines derive their
/// components' substreams the same way, so a component pipeline produces
/// the same model whether it runs standalone or inside a mixer.
pub fn fit_pipeline(
    label: ModelLabel,
    train: &Dataset,
    repeat_seed: u64,
    overrides: &OverrideMap,
) -> Result<Box<dyn Predictor>> {
    match label.arm_components() {
        None => Ok(fit_component(label, train, repeat_seed, overrides)?.model),
        Some(components) => {
            let ov = overrides_for(overrides, label);
            let seed = rng::mix_seed(repeat_seed, 1 + label.canonical_index());
            let fitted: Vec<FrozenComponent> = components
                .iter()
                .map(|c| fit_component(*c, train, repeat_seed, overrides))
                .collect::<Result<_>>()?;
            let candidates: Vec<CandidateModel> = fitted.iter().map(|c| c.candidate()).collect();
            let config = ArmConfig {
                n_outer: ov.arm_iters.unwrap_or(20),
                ..ArmConfig::for_response(train.response())
            };
            let weights = arm_weights(&candidates, train, &config, rng::mix_seed(seed, 0))?;
            let models: Vec<Box<dyn Predictor>> =
                fitted.into_iter().map(|c| c.model).collect();
            Ok(Box::new(arm_model_from_parts(weights, models)))
        }
    }
}

/// A named, overridable pipeline; thin wrapper over [`fit_pipeline`].
pub struct Pipeline {
    pub label: ModelLabel,
    overrides: OverrideMap,
}

impl Pipeline {
    pub fn fit(&self, train: &Dataset, repeat_seed: u64) -> Result<Box<dyn Predictor>> {
        fit_pipeline(self.label, train, repeat_seed, &self.overrides)
    }
}

/// Look up a pipeline by label and attach overrides.
pub fn build_pipeline(label: ModelLabel, overrides: &OverrideMap) -> Pipeline {
    Pipeline {
        label,
        overrides: overrides.clone(),
    }
}

/// Fit every roster pipeline for one repeat, sequentially, timing each fit.
/// Returns the fitted predictors with their fit seconds and the split used.
pub fn fit_repeat(
    data: &Dataset,
    config: &BenchConfig,
    repeat: usize,
) -> Result<(Vec<(ModelLabel, Box<dyn Predictor>, f64)>, SplitIndices)> {
    let repeat_seed = rng::mix_seed(config.seed, repeat as u64);
    let split = shuffle_split(
        data.n_rows(),
        config.test_fraction,
        &mut rng::rng_from_seed(rng::mix_seed(repeat_seed, 0)),
    )?;
    let train = data.subset(&split.train);

    let mut fitted = Vec::with_capacity(config.roster.len());
    for &label in &config.roster {
        let start = Instant::now();
        let model = fit_pipeline(label, &train, repeat_seed, &config.overrides)
            .map_err(|e| Error::for_label(label.as_str(), e))?;
        let seconds = if config.timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        fitted.push((label, model, seconds));
    }
    Ok((fitted, split))
}

/// Run the full benchmark: repeats of split, fit, and test scoring.
pub fn run_bench_on(data: &Dataset, config: &BenchConfig, dataset_label: &str) -> Result<BenchReport> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.n_repeats * config.roster.len());
    for repeat in 0..config.n_repeats {
        let (fitted, split) = fit_repeat(data, config, repeat)?;
        let y_test = data.gather_response(&split.test);
        for (label, model, seconds) in fitted {
            let preds = model.predict_rows(data, &split.test);
            rows.push(BenchRow {
                model: label,
                repeat,
                mse: crate::mean_squared_error(&y_test, &preds),
                seconds,
            });
        }
    }
    Ok(BenchReport::from_rows(dataset_label.to_string(), rows))
}

/// Load the configured dataset and run the benchmark.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    let data = Dataset::load_csv(&config.data, &config.target, config.header)?;
    let label = config
        .data
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    run_bench_on(&data, config, &label)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

/// Render a report: a text table with seconds in parentheses, or a CSV of
/// the per-repeat rows (full float precision, parseable by [`parse_csv`]).
pub fn emit_report(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "{:<14} {} mse (seconds)\n",
                "Model", report.dataset_label
            ));
            for s in &report.summaries {
                out.push_str(&format!(
                    "{:<14} {:.4} ({:.2})\n",
                    s.model.as_str(),
                    s.mean_mse,
                    s.mean_seconds
                ));
            }
            out
        }
        ReportFormat::Csv => {
            let mut out = String::from("model,repeat,mse,seconds\n");
            for r in &report.rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.model.as_str(),
                    r.repeat,
                    r.mse,
                    r.seconds
                ));
            }
            out
        }
    }
}

/// Parse rows emitted by [`emit_report`] in CSV format.
pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "model,repeat,mse,seconds" {
                return Err(Error::invalid_data("unexpected report CSV header"));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::invalid_data(format!("bad report row {i}")));
        }
        rows.push(BenchRow {
            model: fields[0].parse()?,
            repeat: fields[1]
                .parse()
                .map_err(|_| Error::invalid_data(format!("bad repeat in row {i}")))?,
            mse: fields[2]
                .parse()
                .map_err(|_| Error::invalid_data(format!("bad mse in row {i}")))?,
            seconds: fields[3]
                .parse()
                .map_err(|_| Error::invalid_data(format!("bad seconds in row {i}")))?,
        });
    }
    Ok(rows)
}
