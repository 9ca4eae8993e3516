use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::{CleanText, Polarity};
use crate::fingerprint::Fingerprinter;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "informed+")]
    InformedPositive,
    #[serde(rename = "informed-")]
    InformedNegative,
    #[serde(rename = "hashtag+")]
    HashtagPositive,
    #[serde(rename = "hashtag-")]
    HashtagNegative,
    #[serde(rename = "gold")]
    Gold,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::InformedPositive => "informed+",
            Provenance::InformedNegative => "informed-",
            Provenance::HashtagPositive => "hashtag+",
            Provenance::HashtagNegative => "hashtag-",
            Provenance::Gold => "gold",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    /// Cleaned text.
    pub text: String,
    #[serde(with = "label_serde")]
    pub label: Option<Polarity>,
    pub provenance: Provenance,
    /// Ranked lists the example was drawn from (informed builds only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub via: Vec<String>,
}

mod label_serde {
    use super::Polarity;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(l: &Option<Polarity>, s: S) -> Result<S::Ok, S::Error> {
        match l {
            Some(p) => s.serialize_str(p.as_str()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Polarity>, D::Error> {
        match Option::<String>::deserialize(d)? {
            None => Ok(None),
            Some(s) => Polarity::parse(&s)
                .map(Some)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown label `{s}`"))),
        }
    }
}

impl Example {
    pub fn clean_text(&self) -> CleanText {
        CleanText::from_normalized(&self.text)
    }

    pub fn is_positive(&self) -> Option<bool> {
        self.label.map(|l| l == Polarity::Supportive)
    }
}

/// Labeled (or to-be-labeled) examples plus the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakDataset {
    /// `informed`, `hashtag` or `eval`.
    pub kind: String,
    pub examples: Vec<Example>,
    /// Construction settings, recorded verbatim in the file header.
    pub config: BTreeMap<String, String>,
    pub seed: u64,
}

impl WeakDataset {
    pub fn new(kind: &str, seed: u64, config: BTreeMap<String, String>) -> Self {
        Self {
            kind: kind.to_string(),
            examples: Vec::new(),
            config,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn config_fingerprint(&self) -> String {
        let mut fp = Fingerprinter::new();
        fp.field(&self.kind).field(self.seed.to_string());
        for (k, v) in &self.config {
            fp.field(k).field(v);
        }
        fp.finish()
    }

    /// Covers settings and content.
    pub fn fingerprint(&self) -> String {
        crate::fingerprint::sha256_hex(self.to_jsonl())
    }

    pub fn ids(&self) -> BTreeSet<String> {
        self.examples.iter().map(|e| e.id.clone()).collect()
    }

    pub fn positives(&self) -> impl Iterator<Item = &Example> {
        self.examples
            .iter()
            .filter(|e| e.label == Some(Polarity::Supportive))
    }

    pub fn negatives(&self) -> impl Iterator<Item = &Example> {
        self.examples
            .iter()
            .filter(|e| e.label == Some(Polarity::NotSupportive))
    }

    pub fn count_by_label(&self) -> (usize, usize) {
        (self.positives().count(), self.negatives().count())
    }

    /// `(text, label)` pairs; errors listing every unlabeled id.
    pub fn labeled(&self) -> Result<Vec<(CleanText, bool)>> {
        let missing: Vec<String> = self
            .examples
            .iter()
            .filter(|e| e.label.is_none())
            .map(|e| e.id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Unlabeled(missing));
        }
        Ok(self
            .examples
            .iter()
            .map(|e| (e.clean_text(), e.label == Some(Polarity::Supportive)))
            .collect())
    }

    /// Fills labels from `gold`, keyed by id. Ids absent from `gold` stay
    /// unlabeled.
    pub fn with_labels(&self, gold: &BTreeMap<String, Polarity>) -> Self {
        let mut out = self.clone();
        for e in &mut out.examples {
            if let Some(l) = gold.get(&e.id) {
                e.label = Some(*l);
            }
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        let cfp = self.config_fingerprint();
        let header = json!({
            "provenance": {
                "kind": self.kind,
                "seed": self.seed,
                "config": self.config,
                "config_fingerprint": cfp,
                "examples": self.examples.len(),
            }
        });
        let mut out = header.to_string();
        out.push('\n');
        for e in &self.examples {
            let mut v = serde_json::to_value(e).expect("example serializes");
            v["config_fingerprint"] = Value::String(cfp.clone());
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let ctx = "dataset file";
        let mut lines = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header: Value = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| Error::parse(ctx, "empty file"))?,
        )
        .map_err(|e| Error::parse(ctx, e))?;
        let p = header
            .get("provenance")
            .ok_or_else(|| Error::parse(ctx, "first line is not a provenance record"))?;
        let kind = p["kind"]
            .as_str()
            .ok_or_else(|| Error::parse(ctx, "missing kind"))?;
        let seed = p["seed"]
            .as_u64()
            .ok_or_else(|| Error::parse(ctx, "missing seed"))?;
        let config: BTreeMap<String, String> =
            serde_json::from_value(p["config"].clone()).map_err(|e| Error::parse(ctx, e))?;
        let mut ds = Self::new(kind, seed, config);
        let cfp = ds.config_fingerprint();
        for line in lines {
            let v: Value = serde_json::from_str(line).map_err(|e| Error::parse(ctx, e))?;
            if v.get("config_fingerprint").and_then(Value::as_str) != Some(cfp.as_str()) {
                return Err(Error::parse(
                    ctx,
                    format!("record does not match the header fingerprint: {line}"),
                ));
            }
            ds.examples
                .push(serde_json::from_value(v).map_err(|e| Error::parse(ctx, e))?);
        }
        Ok(ds)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }
}
