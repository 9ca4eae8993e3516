use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use supportive::corpus::FieldMapping;
use supportive::fingerprint::sha256_hex;
use supportive::linear::{LossKind, TrainConfig};
use supportive::weaklabel::InformedConfig;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub train: f64,
    pub validation: f64,
}

impl Default for Split {
    fn default() -> Self {
        Self {
            train: 0.9,
            validation: 0.1,
        }
    }
}

/// Stage seeds are `master + offset`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub master: u64,
}

#[derive(Debug, Clone, Copy)]
pub enum Stage {
    TrainScorer,
    Eval,
    Informed,
    Hashtag,
    PairRate,
    Experiment,
    Annotation,
    Final,
}

impl Seeds {
    pub fn stage(&self, s: Stage) -> u64 {
        let offset = match s {
            Stage::TrainScorer => 1000,
            Stage::Eval => 2000,
            Stage::Informed => 3000,
            Stage::Hashtag => 4000,
            Stage::PairRate => 5000,
            Stage::Experiment => 6000,
            Stage::Annotation => 7000,
            Stage::Final => 8000,
        };
        self.master.wrapping_add(offset)
    }
}

/// A built-in scorer trained from a labeled file, or an external process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    /// Program and arguments; `{self}` expands to this executable and
    /// `{output_dir}` to the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Vec<String>>,
    #[serde(default = "logistic")]
    pub kind: LossKind,
    #[serde(default = "sixty")]
    pub timeout_secs: u64,
    #[serde(default = "batch")]
    pub batch_size: usize,
    #[serde(default = "one")]
    pub workers: usize,
}

fn logistic() -> LossKind {
    LossKind::Logistic
}
fn sixty() -> u64 {
    60
}
fn batch() -> usize {
    256
}
fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    /// Hashtag group file; the three built-in groups when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<PathBuf>,
    pub fields: FieldMapping,
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub min_tokens: usize,
    pub top_k: usize,
    pub neg_per_list: usize,
    pub bottom_frac: f64,
    pub informed_scorers: Vec<String>,
    pub n_pairs: u64,
    pub runs: usize,
    pub split: Split,
    pub eval_size: usize,
    pub exclude_eval: bool,
    pub annotators: usize,
    pub model_kind: LossKind,
    pub min_df: usize,
    pub train: TrainConfig,
    pub termfreq_top_n: usize,
    pub seeds: Seeds,
    pub scorers: Vec<ScorerDef>,
    /// Gold-labeled `{"text","label"}` file for the supervised model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supervised_train: Option<PathBuf>,
    /// `id<TAB>0|1` ground truth used by `simulate-annotation`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    pub annotator_accuracy: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let informed = InformedConfig::default();
        Self {
            corpus: PathBuf::from("corpus.jsonl"),
            groups: None,
            fields: FieldMapping::default(),
            output_dir: PathBuf::from("out"),
            min_tokens: 10,
            top_k: informed.top_k,
            neg_per_list: informed.neg_per_list,
            bottom_frac: informed.bottom_frac,
            informed_scorers: informed.scorers,
            n_pairs: 100_000,
            runs: 5,
            split: Split::default(),
            eval_size: 1000,
            exclude_eval: true,
            annotators: 3,
            model_kind: LossKind::Hinge,
            min_df: 1,
            train: TrainConfig::default(),
            termfreq_top_n: 50,
            seeds: Seeds::default(),
            scorers: Vec::new(),
            supervised_train: None,
            truth: None,
            annotator_accuracy: 0.94,
        }
    }
}

/// A validated config with paths resolved against the config file's
/// directory.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: PipelineConfig,
    pub base: PathBuf,
    /// Command-line overrides, recorded in provenance headers.
    pub overrides: Vec<(String, String)>,
}

impl Loaded {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self {
            config,
            base,
            overrides: Vec::new(),
        })
    }

    pub fn override_seed(&mut self, seed: u64) {
        self.config.seeds.master = seed;
        self.overrides.push(("seed".into(), seed.to_string()));
    }

    pub fn override_output(&mut self, dir: PathBuf) {
        // relative to the working directory, unlike config paths
        self.config.output_dir = std::path::absolute(&dir).unwrap_or(dir);
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output_dir)
    }

    /// Hash of the effective config; the output directory is left out so
    /// that two runs into different directories compare equal.
    pub fn fingerprint(&self) -> String {
        sha256_hex(serde_json::to_vec(&self.config).expect("config serializes"))
    }

    pub fn informed(&self) -> InformedConfig {
        InformedConfig {
            top_k: self.config.top_k,
            neg_per_list: self.config.neg_per_list,
            bottom_frac: self.config.bottom_frac,
            scorers: self.config.informed_scorers.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.config;
        let bad = |m: String| Err(CliError::Config(m));
        for (name, v) in [
            ("min_tokens", c.min_tokens),
            ("top_k", c.top_k),
            ("neg_per_list", c.neg_per_list),
            ("runs", c.runs),
            ("eval_size", c.eval_size),
            ("min_df", c.min_df),
            ("termfreq_top_n", c.termfreq_top_n),
            ("train.epochs", c.train.epochs),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if c.n_pairs == 0 {
            return bad("n_pairs must be positive".into());
        }
        if c.annotators < 2 {
            return bad("annotators must be at least 2".into());
        }
        if !(c.bottom_frac > 0.0 && c.bottom_frac < 1.0) {
            return bad(format!("bottom_frac {} is not in (0, 1)", c.bottom_frac));
        }
        if !(c.split.train > 0.0 && c.split.validation >= 0.0)
            || (c.split.train + c.split.validation - 1.0).abs() > 1e-9
        {
            return bad(format!(
                "split fractions {} + {} must be positive and sum to 1",
                c.split.train, c.split.validation
            ));
        }
        if !(c.train.learning_rate > 0.0 && c.train.l2 >= 0.0) {
            return bad("train.learning_rate must be positive and train.l2 non-negative".into());
        }
        if !(0.0..=1.0).contains(&c.annotator_accuracy) {
            return bad(format!(
                "annotator_accuracy {} is not in [0, 1]",
                c.annotator_accuracy
            ));
        }
        let mut names = BTreeSet::new();
        for s in &c.scorers {
            if !names.insert(s.name.as_str()) {
                return bad(format!("scorer `{}` is defined twice", s.name));
            }
            if s.name.is_empty()
                || !s
                    .name
                    .chars()
                    .all(|ch| ch.is_ascii_alphanumeric() || "-_".contains(ch))
            {
                return bad(format!(
                    "scorer name `{}` must be ASCII letters, digits, `-` or `_`",
                    s.name
                ));
            }
            match (&s.train, &s.command) {
                (Some(_), None) => {}
                (None, Some(cmd)) if !cmd.is_empty() => {}
                _ => {
                    return bad(format!(
                        "scorer `{}` needs exactly one of `train` or `command`",
                        s.name
                    ))
                }
            }
            if s.timeout_secs == 0 || s.batch_size == 0 || s.workers == 0 {
                return bad(format!(
                    "scorer `{}`: timeout_secs, batch_size and workers must be positive",
                    s.name
                ));
            }
        }
        if c.informed_scorers.is_empty() {
            return bad("informed_scorers is empty".into());
        }
        for s in &c.informed_scorers {
            if !names.contains(s.as_str()) {
                return bad(format!(
                    "informed scorer `{s}` is not among the defined scorers"
                ));
            }
        }
        Ok(())
    }
}
