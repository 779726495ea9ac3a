use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::features::{featurize, FeatureConfig, SparseVector};
use crate::corpus::{Dataset, Label};
use crate::seed::{derive_seed, rng_from_seed, shuffle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    /// Share of the training data held out for validation.
    pub val_fraction: f64,
    /// Independent runs averaged by evaluation.
    pub runs: usize,
    pub batch_size: usize,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            learning_rate: 0.1,
            l2: 1e-4,
            val_fraction: 0.1,
            runs: 3,
            batch_size: 16,
            rng_seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.epochs == 0 {
            return Err("epochs must be at least 1".into());
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(format!("val_fraction must be in (0, 1), got {}", self.val_fraction));
        }
        if self.runs == 0 {
            return Err("runs must be at least 1".into());
        }
        if self.batch_size == 0 {
            return Err("batch_size must be at least 1".into());
        }
        if !(self.learning_rate > 0.0) {
            return Err(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.l2 < 0.0 {
            return Err(format!("l2 must be non-negative, got {}", self.l2));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training data needs both classes (hateful: {hateful}, non_hateful: {non_hateful})")]
    SingleClass { hateful: usize, non_hateful: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty test set")]
    EmptyTestSet,
    #[error("cannot access {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Metric(#[from] super::metrics::MetricError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Regularized objective on the training split.
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub features: FeatureConfig,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub train_config: TrainConfig,
    pub history: Vec<EpochStats>,
}

/// Labeled example: features and target (1 for hateful).
pub type Example = (SparseVector, f64);

fn target(label: Label) -> f64 {
    match label {
        Label::Hateful => 1.0,
        Label::NonHateful => 0.0,
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn log_loss(z: f64, y: f64) -> f64 {
    y * softplus(-z) + (1.0 - y) * softplus(z)
}

/// Mean log loss plus `l2 / 2 * |w|^2`, with its gradient in the weights
/// and the bias.
pub fn objective_and_gradient(weights: &[f64], bias: f64, examples: &[Example], l2: f64) -> (f64, Vec<f64>, f64) {
    let n = examples.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad: Vec<f64> = weights.iter().map(|w| l2 * w).collect();
    let mut grad_bias = 0.0;
    for (x, y) in examples {
        let z = x.dot(weights) + bias;
        loss += log_loss(z, *y);
        let residual = sigmoid(z) - y;
        for &(i, v) in &x.entries {
            grad[i as usize] += residual * v / n;
        }
        grad_bias += residual / n;
    }
    let penalty = 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss / n + penalty, grad, grad_bias)
}

fn objective(weights: &[f64], bias: f64, examples: &[Example], l2: f64) -> f64 {
    let n = examples.len().max(1) as f64;
    let data: f64 = examples.iter().map(|(x, y)| log_loss(x.dot(weights) + bias, *y)).sum();
    data / n + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

impl Model {
    pub fn score(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn probability(&self, text: &str) -> f64 {
        sigmoid(self.score(&featurize(text, &self.features)))
    }

    pub fn predict(&self, text: &str) -> Label {
        if self.probability(text) >= 0.5 {
            Label::Hateful
        } else {
            Label::NonHateful
        }
    }

    pub fn predict_all(&self, dataset: &Dataset) -> Vec<Label> {
        dataset.posts.iter().map(|p| self.predict(&p.text)).collect()
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            features: self.features.clone(),
            bias: self.bias,
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (i as u32, *w))
                .collect(),
            train_config: self.train_config.clone(),
            history: self.history.clone(),
        };
        serde_json::to_string(&file).expect("model serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Model, String> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(format!("unsupported model format version {}", file.format_version));
        }
        file.features.validate()?;
        let mut weights = vec![0.0; file.features.hash_buckets];
        for (i, w) in file.weights {
            *weights
                .get_mut(i as usize)
                .ok_or_else(|| format!("weight index {i} out of range"))? = w;
        }
        Ok(Model {
            features: file.features,
            weights,
            bias: file.bias,
            train_config: file.train_config,
            history: file.history,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| ClassifierError::Io { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model, ClassifierError> {
        let path = path.as_ref();
        let io = |message: String| ClassifierError::Io { path: path.to_path_buf(), message };
        let text = fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
        Model::from_json(&text).map_err(io)
    }
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    features: FeatureConfig,
    bias: f64,
    /// Non-zero weights as `[bucket, weight]`.
    weights: Vec<(u32, f64)>,
    train_config: TrainConfig,
    history: Vec<EpochStats>,
}

/// Trains logistic regression by mini-batch gradient descent on a seeded
/// split of `dataset`, holding out `val_fraction` for validation.
pub fn train(dataset: &Dataset, features: &FeatureConfig, config: &TrainConfig) -> Result<Model, ClassifierError> {
    features.validate().map_err(ClassifierError::Config)?;
    config.validate().map_err(ClassifierError::Config)?;
    let counts = dataset.counts();
    if counts.hateful == 0 || counts.non_hateful == 0 {
        return Err(ClassifierError::SingleClass { hateful: counts.hateful, non_hateful: counts.non_hateful });
    }

    let examples: Vec<Example> = dataset
        .posts
        .iter()
        .map(|p| (featurize(&p.text, features), target(p.label)))
        .collect();

    let mut order: Vec<usize> = (0..examples.len()).collect();
    shuffle(&mut rng_from_seed(derive_seed(config.rng_seed, &["split"])), &mut order);
    let n_val = ((examples.len() as f64 * config.val_fraction).round() as usize).clamp(1, examples.len() - 1);
    let val: Vec<Example> = order[..n_val].iter().map(|&i| examples[i].clone()).collect();
    let mut train_idx: Vec<usize> = order[n_val..].to_vec();
    let train_set: Vec<Example> = train_idx.iter().map(|&i| examples[i].clone()).collect();

    // Weights are stored as `scale * stored` so that L2 decay is one
    // multiplication per batch instead of one per bucket.
    let mut stored = vec![0.0; features.hash_buckets];
    let mut scale = 1.0;
    let mut bias = 0.0;
    let mut history = Vec::with_capacity(config.epochs);
    let lr = config.learning_rate;
    let mut weights = stored.clone();
    for epoch in 0..config.epochs {
        shuffle(&mut rng_from_seed(derive_seed(config.rng_seed, &["epoch", &epoch.to_string()])), &mut train_idx);
        // Each step moves along the batch's mean objective gradient scaled
        // by `learning_rate * batch_len`, so the rate is per example.
        for batch in train_idx.chunks(config.batch_size) {
            let n = batch.len() as f64;
            let mut grad: Vec<(u32, f64)> = Vec::new();
            let mut grad_bias = 0.0;
            for &i in batch {
                let (x, y) = &examples[i];
                let residual = sigmoid(scale * x.dot(&stored) + bias) - y;
                grad.extend(x.entries.iter().map(|&(j, v)| (j, residual * v)));
                grad_bias += residual;
            }
            if config.l2 > 0.0 {
                scale *= 1.0 - lr * config.l2 * n;
                if scale < 1e-6 {
                    stored.iter_mut().for_each(|w| *w *= scale);
                    scale = 1.0;
                }
            }
            for (j, g) in grad {
                stored[j as usize] -= lr * g / scale;
            }
            bias -= lr * grad_bias;
        }
        weights = stored.iter().map(|w| w * scale).collect();

        let val_loss = objective(&weights, bias, &val, 0.0);
        let correct = val
            .iter()
            .filter(|(x, y)| (sigmoid(x.dot(&weights) + bias) >= 0.5) == (*y == 1.0))
            .count();
        history.push(EpochStats {
            epoch: epoch + 1,
            train_loss: objective(&weights, bias, &train_set, config.l2),
            val_loss,
            val_accuracy: correct as f64 / val.len() as f64,
        });
    }

    Ok(Model {
        features: features.clone(),
        weights,
        bias,
        train_config: config.clone(),
        history,
    })
}
