use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::FeatureConfig;
use super::metrics::{per_class_f1, PerClassF1};
use super::model::{train, ClassifierError, Model, TrainConfig};
use crate::corpus::{Dataset, Label};

/// Evaluation report shared with external harnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub macro_f1_runs: Vec<f64>,
    pub mean: f64,
    /// Per-class F1 averaged over runs.
    pub per_class: PerClassF1,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible") + "\n"
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EvalReport, ClassifierError> {
        let path = path.as_ref();
        let io = |message: String| ClassifierError::Io { path: path.to_path_buf(), message };
        let text = fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| io(e.to_string()))
    }
}

pub fn evaluate_model(model: &Model, test_set: &Dataset) -> Result<PerClassF1, ClassifierError> {
    if test_set.is_empty() {
        return Err(ClassifierError::EmptyTestSet);
    }
    let gold: Vec<Label> = test_set.posts.iter().map(|p| p.label).collect();
    Ok(per_class_f1(&model.predict_all(test_set), &gold)?)
}

/// Trains `config.runs` models with seeds `rng_seed + run` and scores each on
/// the test set.
pub fn evaluate_runs(
    train_set: &Dataset,
    test_set: &Dataset,
    features: &FeatureConfig,
    config: &TrainConfig,
) -> Result<EvalReport, ClassifierError> {
    config.validate().map_err(ClassifierError::Config)?;
    let mut runs = Vec::with_capacity(config.runs);
    for run in 0..config.runs {
        let run_config = TrainConfig { rng_seed: config.rng_seed.wrapping_add(run as u64), ..config.clone() };
        let model = train(train_set, features, &run_config)?;
        runs.push(evaluate_model(&model, test_set)?);
    }
    let n = runs.len() as f64;
    let macro_f1_runs: Vec<f64> = runs.iter().map(|r| (r.hateful + r.non_hateful) / 2.0).collect();
    Ok(EvalReport {
        mean: macro_f1_runs.iter().sum::<f64>() / n,
        macro_f1_runs,
        per_class: PerClassF1 {
            hateful: runs.iter().map(|r| r.hateful).sum::<f64>() / n,
            non_hateful: runs.iter().map(|r| r.non_hateful).sum::<f64>() / n,
        },
    })
}
