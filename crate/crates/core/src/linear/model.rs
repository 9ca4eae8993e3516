use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tfidf::SparseVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Log loss; probabilities are calibrated in the usual logistic sense.
    Logistic,
    /// Hinge loss (linear SVM); probabilities are the sigmoid of the margin.
    Hinge,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Logistic => "logistic",
            LossKind::Hinge => "hinge",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(LossKind::Logistic),
            "hinge" | "svm" => Ok(LossKind::Hinge),
            other => Err(Error::parse(
                "model kind",
                format!("unknown kind `{other}`"),
            )),
        }
    }
}

/// Hyper-parameters for seeded stochastic (sub)gradient descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            learning_rate: 0.1,
            l2: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub kind: LossKind,
    pub config: TrainConfig,
}

impl LinearModel {
    pub fn zeros(dim: usize, kind: LossKind) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
            kind,
            config: TrainConfig::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn training_seed(&self) -> u64 {
        self.config.seed
    }

    /// Raw decision score `w·v + b`.
    pub fn margin(&self, v: &SparseVector) -> Result<f64> {
        if v.dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.dim,
            });
        }
        Ok(v.dot_dense(&self.weights) + self.bias)
    }

    /// Regularized mean training loss.
    pub fn objective(&self, data: &[(SparseVector, bool)]) -> Result<f64> {
        let mut total = 0.0;
        for (x, y) in data {
            total += loss(self.kind, self.margin(x)?, *y);
        }
        let reg = 0.5 * self.config.l2 * self.weights.iter().map(|w| w * w).sum::<f64>();
        Ok(total / data.len() as f64 + reg)
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

fn signed(y: bool) -> f64 {
    if y {
        1.0
    } else {
        -1.0
    }
}

fn loss(kind: LossKind, z: f64, y: bool) -> f64 {
    let yz = signed(y) * z;
    match kind {
        // ln(1 + e^{-yz}), stable for large |yz|
        LossKind::Logistic => {
            if yz > 0.0 {
                (-yz).exp().ln_1p()
            } else {
                -yz + yz.exp().ln_1p()
            }
        }
        LossKind::Hinge => (1.0 - yz).max(0.0),
    }
}

/// Derivative of the loss with respect to the decision score.
fn loss_slope(kind: LossKind, z: f64, y: bool) -> f64 {
    let s = signed(y);
    match kind {
        LossKind::Logistic => -s * sigmoid(-s * z),
        LossKind::Hinge => {
            if s * z < 1.0 {
                -s
            } else {
                0.0
            }
        }
    }
}

fn check_training_data(data: &[(SparseVector, bool)]) -> Result<usize> {
    let Some((first, _)) = data.first() else {
        return Err(Error::DegenerateTraining("no training examples".into()));
    };
    let dim = first.dim;
    if let Some((x, _)) = data.iter().find(|(x, _)| x.dim != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.dim,
        });
    }
    let positives = data.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == data.len() {
        return Err(Error::DegenerateTraining(format!(
            "all {} examples share one label",
            data.len()
        )));
    }
    Ok(dim)
}

/// Trains a linear model by seeded SGD with L2 shrinkage. The visiting order
/// is reshuffled each epoch from `config.seed`; the step size decays as
/// `lr / (1 + lr * l2 * t)` over update steps `t`.
pub fn train(
    data: &[(SparseVector, bool)],
    kind: LossKind,
    config: &TrainConfig,
) -> Result<LinearModel> {
    train_with_history(data, kind, config).map(|(m, _)| m)
}

/// Like [`train`], also returning the regularized objective after each epoch.
pub fn train_with_history(
    data: &[(SparseVector, bool)],
    kind: LossKind,
    config: &TrainConfig,
) -> Result<(LinearModel, Vec<f64>)> {
    let dim = check_training_data(data)?;
    let valid = config.learning_rate > 0.0 && config.l2 >= 0.0;
    if !valid {
        return Err(Error::Config(
            "learning rate must be > 0 and l2 >= 0".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    // weights are stored as scale * v so the L2 shrinkage is O(1) per step
    let mut v = vec![0.0; dim];
    let mut scale = 1.0_f64;
    let mut bias = 0.0;
    let mut step: u64 = 0;
    let mut history = Vec::with_capacity(config.epochs);

    let snapshot = |v: &[f64], scale: f64, bias: f64| LinearModel {
        weights: v.iter().map(|x| x * scale).collect(),
        bias,
        kind,
        config: *config,
    };

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, y) = &data[i];
            let eta = config.learning_rate / (1.0 + config.learning_rate * config.l2 * step as f64);
            let z = scale * x.dot_dense(&v) + bias;
            let g = loss_slope(kind, z, *y);

            scale *= 1.0 - eta * config.l2;
            if g != 0.0 {
                let update = eta * g / scale;
                for &(j, xj) in &x.entries {
                    v[j] -= update * xj;
                }
                bias -= eta * g;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
            step += 1;
        }
        history.push(snapshot(&v, scale, bias).objective(data)?);
    }
    Ok((snapshot(&v, scale, bias), history))
}

/// `sigmoid(w·v + b)`, for both kinds.
pub fn predict_proba(model: &LinearModel, v: &SparseVector) -> Result<f64> {
    model.margin(v).map(sigmoid)
}

/// Positive when the probability is at least 0.5.
pub fn predict(model: &LinearModel, v: &SparseVector) -> Result<bool> {
    predict_proba(model, v).map(|p| p >= 0.5)
}
