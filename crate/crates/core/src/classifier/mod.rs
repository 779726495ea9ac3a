//! Hashed character n-gram logistic regression, macro F1 and word
//! attribution.

mod attribution;
mod eval;
mod features;
mod metrics;
mod model;

pub use attribution::{attribute, post_contributions, AttributionReport, TokenContribution};
pub use eval::{evaluate_model, evaluate_runs, EvalReport};
pub use features::{featurize, FeatureConfig, SparseVector};
pub use metrics::{macro_f1, per_class_f1, MetricError, PerClassF1};
pub use model::{objective_and_gradient, sigmoid, train, ClassifierError, EpochStats, Example, Model, TrainConfig};
