//! Versioned JSON model files.
//!
//! Every file carries a `format_version` and a `kind` tag. Fitted models
//! serialize with enough of their generating parameters (ensemble settings,
//! frozen penalty hyperparameters) that they can be both reloaded for
//! prediction bit-exactly and refit on new rows, which is what the mixing
//! command needs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arm::{arm_model_from_parts, ArmWeights, CandidateModel};
use crate::ensemble::{generate_ensemble, Ensemble, EnsembleParams};
use crate::error::{Error, Result};
use crate::postprocess::{post_process_frozen, FrozenPenalty, PostProcessedModel};
use crate::Predictor;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModelFile {
    pub label: String,
    pub feature_names: Vec<String>,
    pub params: EnsembleParams,
    pub ensemble: Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostModelFile {
    pub label: String,
    pub feature_names: Vec<String>,
    pub base_params: EnsembleParams,
    pub frozen: FrozenPenalty,
    pub model: PostProcessedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmModelFile {
    pub label: String,
    pub weights: ArmWeights,
    pub components: Vec<ModelKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelKind {
    #[serde(rename = "ensemble")]
    Ensemble(EnsembleModelFile),
    #[serde(rename = "post")]
    Post(PostModelFile),
    #[serde(rename = "arm")]
    Arm(ArmModelFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEnvelope {
    pub format_version: u32,
    #[serde(flatten)]
    pub model: ModelKind,
}

impl ModelEnvelope {
    pub fn new(model: ModelKind) -> ModelEnvelope {
        ModelEnvelope {
            format_version: FORMAT_VERSION,
            model,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path.as_ref(), text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelEnvelope> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let envelope: ModelEnvelope = serde_json::from_str(&text)?;
        if envelope.format_version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                envelope.format_version
            )));
        }
        Ok(envelope)
    }

    pub fn label(&self) -> &str {
        match &self.model {
            ModelKind::Ensemble(m) => &m.label,
            ModelKind::Post(m) => &m.label,
            ModelKind::Arm(m) => &m.label,
        }
    }

    /// Feature names of the training data, when the model carries them.
    pub fn feature_names(&self) -> Option<&[String]> {
        match &self.model {
            ModelKind::Ensemble(m) => Some(&m.feature_names),
            ModelKind::Post(m) => Some(&m.feature_names),
            ModelKind::Arm(m) => m.components.first().and_then(|c| match c {
                ModelKind::Ensemble(e) => Some(e.feature_names.as_slice()),
                ModelKind::Post(p) => Some(p.feature_names.as_slice()),
                ModelKind::Arm(_) => None,
            }),
        }
    }

    /// Reconstruct the fitted predictor stored in the file.
    pub fn predictor(&self) -> Box<dyn Predictor> {
        kind_predictor(&self.model)
    }

    /// A refit procedure for model mixing: regenerates the stored pipeline
    /// (ensemble generation plus any frozen penalty) on a row subset.
    pub fn candidate(&self) -> Result<CandidateModel> {
        match &self.model {
            ModelKind::Ensemble(m) => {
                let base = m.params.clone();
                Ok(CandidateModel::new(m.label.clone(), move |data, rows, seed| {
                    let sub = data.subset(rows);
                    let params = EnsembleParams { seed, ..base.clone() };
                    Ok(Box::new(generate_ensemble(&sub, &params)?) as Box<dyn Predictor>)
                }))
            }
            ModelKind::Post(m) => {
                let base = m.base_params.clone();
                let frozen = m.frozen.clone();
                Ok(CandidateModel::new(m.label.clone(), move |data, rows, seed| {
                    let sub = data.subset(rows);
                    let params = EnsembleParams { seed, ..base.clone() };
                    let ensemble = generate_ensemble(&sub, &params)?;
                    Ok(Box::new(post_process_frozen(ensemble, &sub, &frozen)?) as Box<dyn Predictor>)
                }))
            }
            ModelKind::Arm(_) => Err(Error::ModelFormat(
                "a mixed model cannot itself be a mixing candidate".to_string(),
            )),
        }
    }
}

fn kind_predictor(kind: &ModelKind) -> Box<dyn Predictor> {
    match kind {
        ModelKind::Ensemble(m) => Box::new(m.ensemble.clone()),
        ModelKind::Post(m) => Box::new(m.model.clone()),
        ModelKind::Arm(m) => {
            let components: Vec<Box<dyn Predictor>> =
                m.components.iter().map(kind_predictor).collect();
            Box::new(arm_model_from_parts(m.weights.clone(), components))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::friedman1;
    use crate::ensemble::EnsembleParams;

    fn ensemble_file(seed: u64) -> (ModelEnvelope, crate::dataset::Dataset) {
        let ds = friedman1(60, 1.0, seed);
        let params = EnsembleParams {
            n_trees: 10,
            ..EnsembleParams::isle_rf(60, 10, seed)
        };
        let ensemble = generate_ensemble(&ds, &params).unwrap();
        let envelope = ModelEnvelope::new(ModelKind::Ensemble(EnsembleModelFile {
            label: "rf_isle".into(),
            feature_names: ds.feature_names().to_vec(),
            params,
            ensemble,
        }));
        (envelope, ds)
    }

    #[test]
    fn save_load_round_trips_predictions() {
        let (envelope, ds) = ensemble_file(3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        envelope.save(&path).unwrap();
        let back = ModelEnvelope::load(&path).unwrap();
        assert_eq!(envelope, back);
        let a = envelope.predictor();
        let b = back.predictor();
        for i in 0..ds.n_rows() {
            assert_eq!(a.predict_row(ds.row(i)), b.predict_row(ds.row(i)));
        }
    }

    #[test]
    fn unknown_format_version_is_rejected() {
        let (mut envelope, _) = ensemble_file(4);
        envelope.format_version = 99;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let mut text = serde_json::to_string_pretty(&envelope).unwrap();
        text.push('\n');
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            ModelEnvelope::load(&path),
            Err(Error::ModelFormat(_))
        ));
    }

    #[test]
    fn candidate_refits_deterministically() {
        let (envelope, ds) = ensemble_file(5);
        let candidate = envelope.candidate().unwrap();
        let rows: Vec<usize> = (0..30).collect();
        let a = (candidate.fit)(&ds, &rows, 7).unwrap();
        let b = (candidate.fit)(&ds, &rows, 7).unwrap();
        for i in 0..ds.n_rows() {
            assert_eq!(a.predict_row(ds.row(i)), b.predict_row(ds.row(i)));
        }
    }

    #[test]
    fn arm_files_cannot_nest_as_candidates() {
        let (inner, _) = ensemble_file(6);
        let arm = ModelEnvelope::new(ModelKind::Arm(ArmModelFile {
            label: "mix".into(),
            weights: ArmWeights {
                labels: vec!["rf_isle".into()],
                weights: vec![1.0],
                per_iteration_shares: vec![vec![1.0]],
            },
            components: vec![inner.model],
        }));
        assert!(arm.candidate().is_err());
        assert!(arm.feature_names().is_some());
    }
}
