use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("{predictions} predictions for {gold} gold labels")]
    LengthMismatch { predictions: usize, gold: usize },
    #[error("no labels to score")]
    Empty,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerClassF1 {
    pub hateful: f64,
    pub non_hateful: f64,
}

fn f1_for(class: Label, predictions: &[Label], gold: &[Label]) -> f64 {
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&p, &g) in predictions.iter().zip(gold) {
        match (p == class, g == class) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    // 2tp / (2tp + fp + fn); zero when the class never occurs on either side
    let denom = 2 * tp + fp + fneg;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

pub fn per_class_f1(predictions: &[Label], gold: &[Label]) -> Result<PerClassF1, MetricError> {
    if predictions.len() != gold.len() {
        return Err(MetricError::LengthMismatch { predictions: predictions.len(), gold: gold.len() });
    }
    if gold.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(PerClassF1 {
        hateful: f1_for(Label::Hateful, predictions, gold),
        non_hateful: f1_for(Label::NonHateful, predictions, gold),
    })
}

/// Unweighted mean of the two per-class F1 scores. A class absent from both
/// lists scores 0.
pub fn macro_f1(predictions: &[Label], gold: &[Label]) -> Result<f64, MetricError> {
    let per_class = per_class_f1(predictions, gold)?;
    Ok((per_class.hateful + per_class.non_hateful) / 2.0)
}
