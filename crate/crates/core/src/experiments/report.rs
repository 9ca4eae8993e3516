use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::linear::{
    compute_metrics, holdout_split, LossKind, Metrics, TextClassifier, TrainConfig,
};
use crate::stats::MeanStd;
use crate::weaklabel::WeakDataset;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: LossKind,
    pub runs: usize,
    pub base_seed: u64,
    /// Share of the training set held out for validation in every run.
    pub validation_fraction: f64,
    pub min_df: usize,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: LossKind::Hinge,
            runs: 5,
            base_seed: 0,
            validation_fraction: 0.1,
            min_df: 1,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub metrics: Metrics,
    pub validation: Option<Metrics>,
}

/// Per-run evaluation metrics plus their mean and population standard
/// deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunResult>,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    pub train_fingerprint: String,
    pub eval_fingerprint: String,
}

fn aggregate(runs: &[RunResult], f: impl Fn(&Metrics) -> f64) -> MeanStd {
    MeanStd::of(&runs.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>()).expect("at least one run")
}

impl EvalReport {
    fn from_runs(
        model: &str,
        config: &ExperimentConfig,
        runs: Vec<RunResult>,
        train: &WeakDataset,
        eval: &WeakDataset,
    ) -> Self {
        Self {
            model: model.to_string(),
            config: config.clone(),
            precision: aggregate(&runs, |m| m.precision),
            recall: aggregate(&runs, |m| m.recall),
            f1: aggregate(&runs, |m| m.f1),
            runs,
            train_fingerprint: train.fingerprint(),
            eval_fingerprint: eval.fingerprint(),
        }
    }

    /// Recomputes the aggregates from the stored runs.
    pub fn is_consistent(&self) -> bool {
        !self.runs.is_empty()
            && self.runs.len() == self.config.runs
            && aggregate(&self.runs, |m| m.precision) == self.precision
            && aggregate(&self.runs, |m| m.recall) == self.recall
            && aggregate(&self.runs, |m| m.f1) == self.f1
    }

    /// Summary row in percent: model, P, R, F1 as `mean ± std`.
    pub fn summary_row(&self) -> String {
        let pct = |m: &MeanStd| format!("{:.2} ± {:.2}", 100.0 * m.mean, 100.0 * m.std);
        format!(
            "{}\t{}\t{}\t{}",
            self.model,
            pct(&self.precision),
            pct(&self.recall),
            pct(&self.f1)
        )
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("model\trun\tseed\tprecision\trecall\tf1\ttp\tfp\tfn\ttn\n");
        for (i, r) in self.runs.iter().enumerate() {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}",
                self.model, i, r.seed, m.precision, m.recall, m.f1, m.tp, m.fp, m.fn_, m.tn
            );
        }
        for (name, ms) in [
            ("precision", &self.precision),
            ("recall", &self.recall),
            ("f1", &self.f1),
        ] {
            let _ = writeln!(out, "# {name} mean={:.6} std={:.6}", ms.mean, ms.std);
        }
        out
    }

    /// One provenance line, then one line per run.
    pub fn to_jsonl(&self) -> String {
        let mut out = json!({
            "provenance": {
                "model": self.model,
                "config": self.config,
                "train_fingerprint": self.train_fingerprint,
                "eval_fingerprint": self.eval_fingerprint,
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
            }
        })
        .to_string();
        out.push('\n');
        for r in &self.runs {
            out.push_str(&serde_json::to_string(r).expect("run serializes"));
            out.push('\n');
        }
        out
    }
}

/// Trains `runs` models with seeds `base_seed + i` and scores each on the
/// fixed, fully labeled `eval` set.
pub fn run_experiment(
    model: &str,
    train: &WeakDataset,
    eval: &WeakDataset,
    config: &ExperimentConfig,
) -> Result<EvalReport> {
    if config.runs < 1 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&config.validation_fraction) {
        return Err(Error::Config(format!(
            "validation_fraction {} is not in [0, 1)",
            config.validation_fraction
        )));
    }
    let eval_rows = eval.labeled()?;
    let train_rows = train.labeled()?;
    if train_rows.is_empty() {
        return Err(Error::InsufficientData("training set is empty".into()));
    }
    let gold: Vec<bool> = eval_rows.iter().map(|(_, y)| *y).collect();

    let runs: Vec<RunResult> = (0..config.runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = config.base_seed.wrapping_add(i);
            let (fit_rows, val_rows) = if config.validation_fraction > 0.0 {
                holdout_split(&train_rows, 1.0 - config.validation_fraction, seed)
            } else {
                (train_rows.clone(), Vec::new())
            };
            let clf = TextClassifier::fit(
                &fit_rows,
                config.kind,
                &config.train.with_seed(seed),
                config.min_df,
            )?;
            let pred: Vec<bool> = eval_rows.iter().map(|(t, _)| clf.predict(t)).collect();
            let validation = if val_rows.is_empty() {
                None
            } else {
                let vp: Vec<bool> = val_rows.iter().map(|(t, _)| clf.predict(t)).collect();
                let vg: Vec<bool> = val_rows.iter().map(|(_, y)| *y).collect();
                Some(compute_metrics(&vp, &vg)?)
            };
            Ok(RunResult {
                seed,
                metrics: compute_metrics(&pred, &gold)?,
                validation,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EvalReport::from_runs(model, config, runs, train, eval))
}
