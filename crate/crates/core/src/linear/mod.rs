//! TF-IDF features, seeded SGD linear models and positive-class metrics.

mod classifier;
mod metrics;
mod model;
mod tfidf;

pub use classifier::{
    holdout_split, load_labeled, parse_label, TextClassifier, MODEL_FORMAT, MODEL_VERSION,
};
pub use metrics::{compute_metrics, Metrics};
pub use model::{
    predict, predict_proba, sigmoid, train, train_with_history, LinearModel, LossKind, TrainConfig,
};
pub use tfidf::{fit_vocabulary, vectorize, SparseVector, Vocabulary};
