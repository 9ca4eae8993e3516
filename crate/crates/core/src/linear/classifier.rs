use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::model::{predict_proba, train, LinearModel, LossKind, TrainConfig};
use super::tfidf::{fit_vocabulary, vectorize, SparseVector, Vocabulary};
use crate::corpus::{clean, CleanText};
use crate::fingerprint::sha256_hex;
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "supportive-linear";
pub const MODEL_VERSION: &str = "v1";

/// A fitted vocabulary together with the linear model trained on it.
#[derive(Debug, Clone, PartialEq)]
pub struct TextClassifier {
    pub vocabulary: Vocabulary,
    pub model: LinearModel,
    pub min_df: usize,
}

impl TextClassifier {
    pub fn fit(
        docs: &[(CleanText, bool)],
        kind: LossKind,
        config: &TrainConfig,
        min_df: usize,
    ) -> Result<Self> {
        let texts: Vec<CleanText> = docs.iter().map(|(t, _)| t.clone()).collect();
        let vocabulary = fit_vocabulary(&texts, min_df)?;
        let data: Vec<(SparseVector, bool)> = docs
            .iter()
            .map(|(t, y)| (vectorize(t, &vocabulary), *y))
            .collect();
        let model = train(&data, kind, config)?;
        Ok(Self {
            vocabulary,
            model,
            min_df,
        })
    }

    pub fn features(&self, text: &CleanText) -> SparseVector {
        vectorize(text, &self.vocabulary)
    }

    pub fn predict_proba(&self, text: &CleanText) -> f64 {
        predict_proba(&self.model, &self.features(text))
            .expect("vocabulary and model dimensions agree")
    }

    pub fn predict(&self, text: &CleanText) -> bool {
        self.predict_proba(text) >= 0.5
    }

    /// Flat text serialization; floats use the shortest round-trip form.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_FORMAT} {MODEL_VERSION}");
        let _ = writeln!(out, "kind\t{}", m.kind);
        let _ = writeln!(out, "seed\t{}", m.config.seed);
        let _ = writeln!(out, "epochs\t{}", m.config.epochs);
        let _ = writeln!(out, "learning_rate\t{:?}", m.config.learning_rate);
        let _ = writeln!(out, "l2\t{:?}", m.config.l2);
        let _ = writeln!(out, "min_df\t{}", self.min_df);
        let _ = writeln!(out, "n_documents\t{}", self.vocabulary.n_documents());
        let _ = writeln!(out, "bias\t{:?}", m.bias);
        let _ = writeln!(out, "terms\t{}", self.vocabulary.len());
        for ((term, df), w) in self
            .vocabulary
            .terms()
            .iter()
            .zip(self.vocabulary.dfs())
            .zip(&m.weights)
        {
            let _ = writeln!(out, "{term}\t{df}\t{w:?}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let ctx = "model file";
        let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
        let header = lines.next().unwrap_or_default();
        match header.split_once(' ') {
            Some((MODEL_FORMAT, MODEL_VERSION)) => {}
            Some((MODEL_FORMAT, other)) => {
                return Err(Error::VersionMismatch {
                    expected: MODEL_VERSION.into(),
                    found: other.into(),
                })
            }
            _ => return Err(Error::parse(ctx, format!("bad header `{header}`"))),
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::parse(ctx, format!("missing `{name}`")))?;
            match line.split_once('\t') {
                Some((k, v)) if k == name => Ok(v.to_string()),
                _ => Err(Error::parse(
                    ctx,
                    format!("expected `{name}`, found `{line}`"),
                )),
            }
        };
        fn num<T: std::str::FromStr>(s: String, name: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            s.parse()
                .map_err(|e| Error::parse("model file", format!("{name}: {e}")))
        }
        let kind: LossKind = field("kind")?.parse()?;
        let seed: u64 = num(field("seed")?, "seed")?;
        let epochs: usize = num(field("epochs")?, "epochs")?;
        let learning_rate: f64 = num(field("learning_rate")?, "learning_rate")?;
        let l2: f64 = num(field("l2")?, "l2")?;
        let min_df: usize = num(field("min_df")?, "min_df")?;
        let n_documents: usize = num(field("n_documents")?, "n_documents")?;
        let bias: f64 = num(field("bias")?, "bias")?;
        let n_terms: usize = num(field("terms")?, "terms")?;

        let mut terms = Vec::with_capacity(n_terms);
        let mut dfs = Vec::with_capacity(n_terms);
        let mut weights = Vec::with_capacity(n_terms);
        for line in lines.by_ref().take(n_terms) {
            let mut cols = line.split('\t');
            let (Some(t), Some(df), Some(w), None) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(Error::parse(ctx, format!("bad term line `{line}`")));
            };
            terms.push(t.to_string());
            dfs.push(num(df.to_string(), "df")?);
            weights.push(num(w.to_string(), "weight")?);
        }
        if terms.len() != n_terms || lines.next().is_some() {
            return Err(Error::parse(ctx, "term count does not match the header"));
        }
        Ok(Self {
            vocabulary: Vocabulary::from_parts(terms, dfs, n_documents)?,
            model: LinearModel {
                weights,
                bias,
                kind,
                config: TrainConfig {
                    epochs,
                    learning_rate,
                    l2,
                    seed,
                },
            },
            min_df,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn fingerprint(&self) -> String {
        sha256_hex(self.to_text())
    }
}

/// Parses a binary label cell: booleans, 0/1, or the words used by the
/// dataset files.
pub fn parse_label(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::Number(n) => match n.as_u64() {
            Some(1) => Some(true),
            Some(0) => Some(false),
            _ => None,
        },
        Value::String(s) => match s.trim().to_ascii_lowercase().as_str() {
            "1" | "true" | "positive" | "supportive" | "pos" => Some(true),
            "0" | "false" | "negative" | "not-supportive" | "not_supportive" | "neg" => Some(false),
            _ => None,
        },
        _ => None,
    }
}

/// Reads a line-delimited `{"text": ..., "label": ...}` file, cleaning each
/// text. Lines that are not objects with both fields are errors.
pub fn load_labeled(path: impl AsRef<Path>) -> Result<Vec<(CleanText, bool)>> {
    let path = path.as_ref();
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in body.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let ctx = || format!("{}:{}", path.display(), n + 1);
        let v: Value = serde_json::from_str(line).map_err(|e| Error::parse(ctx(), e))?;
        if v.get("provenance").is_some_and(Value::is_object) {
            continue;
        }
        let text = v
            .get("text")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::parse(ctx(), "missing `text`"))?;
        let label = v
            .get("label")
            .and_then(parse_label)
            .ok_or_else(|| Error::parse(ctx(), "missing or unreadable `label`"))?;
        out.push((clean(text), label));
    }
    Ok(out)
}

/// Seeded shuffle then split: the first `round(train_fraction * n)` items
/// train, the rest test.
pub fn holdout_split<T: Clone>(items: &[T], train_fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    let mut shuffled = items.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((items.len() as f64) * train_fraction).round() as usize;
    let test = shuffled.split_off(cut.min(items.len()));
    (shuffled, test)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<(CleanText, bool)> {
        [
            ("prayers for our neighbours stay strong", true),
            ("we pray for india humanity first", true),
            ("karma kashmir deserves this", false),
            ("kashmir revenge war now", false),
        ]
        .iter()
        .map(|(t, y)| (CleanText::from_normalized(t), *y))
        .collect()
    }

    #[test]
    fn serialization_round_trip_is_exact() {
        let c = TextClassifier::fit(
            &sample(),
            LossKind::Logistic,
            &TrainConfig::default().with_seed(3),
            1,
        )
        .unwrap();
        let back = TextClassifier::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.fingerprint(), c.fingerprint());
        let t = CleanText::from_normalized("pray for humanity");
        assert_eq!(
            back.predict_proba(&t).to_bits(),
            c.predict_proba(&t).to_bits()
        );
        assert!(c.predict(&t));
        let commented = format!("# provenance {{}}\n{}", c.to_text());
        assert_eq!(TextClassifier::from_text(&commented).unwrap(), c);
    }

    #[test]
    fn other_version_fails_loudly() {
        let c =
            TextClassifier::fit(&sample(), LossKind::Hinge, &TrainConfig::default(), 1).unwrap();
        let text = c
            .to_text()
            .replacen("supportive-linear v1", "supportive-linear v2", 1);
        assert!(matches!(
            TextClassifier::from_text(&text),
            Err(Error::VersionMismatch { .. })
        ));
        assert!(matches!(
            TextClassifier::from_text("junk"),
            Err(Error::Parse { .. })
        ));
        let truncated: String = c.to_text().lines().take(12).collect::<Vec<_>>().join("\n");
        assert!(TextClassifier::from_text(&truncated).is_err());
    }

    #[test]
    fn labeled_file_reading() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("seed.jsonl");
        std::fs::write(
            &p,
            "{\"text\":\"Pray for India!\",\"label\":1}\n{\"text\":\"war\",\"label\":\"not-supportive\"}\n\n",
        )
        .unwrap();
        let rows = load_labeled(&p).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].0.text, "pray for india");
        assert!(rows[0].1 && !rows[1].1);

        std::fs::write(&p, "{\"text\":\"x\",\"label\":7}\n").unwrap();
        assert!(load_labeled(&p).is_err());
    }

    #[test]
    fn split_is_seeded_and_complete() {
        let items: Vec<u32> = (0..100).collect();
        let (a, b) = holdout_split(&items, 0.9, 5);
        assert_eq!((a.len(), b.len()), (90, 10));
        let (a2, _) = holdout_split(&items, 0.9, 5);
        assert_eq!(a, a2);
        let mut all: Vec<u32> = a.into_iter().chain(b).collect();
        all.sort();
        assert_eq!(all, items);
    }
}
