use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::CleanText;
use crate::{Error, Result};

/// Term index with document frequencies. Indices follow lexicographic term
/// order so a refit on the same documents is byte-for-byte identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    document_frequency: Vec<usize>,
    index: HashMap<String, usize>,
    n_documents: usize,
}

impl Vocabulary {
    pub(crate) fn from_parts(
        terms: Vec<String>,
        document_frequency: Vec<usize>,
        n_documents: usize,
    ) -> Result<Self> {
        if terms.len() != document_frequency.len() {
            return Err(Error::LengthMismatch {
                left: terms.len(),
                right: document_frequency.len(),
            });
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::parse("vocabulary", "terms are not strictly sorted"));
        }
        if document_frequency
            .iter()
            .any(|&df| df == 0 || df > n_documents)
        {
            return Err(Error::parse(
                "vocabulary",
                "document frequency out of range",
            ));
        }
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self {
            terms,
            document_frequency,
            index,
            n_documents,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn document_frequency(&self, term: &str) -> Option<usize> {
        self.index_of(term).map(|i| self.document_frequency[i])
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub(crate) fn dfs(&self) -> &[usize] {
        &self.document_frequency
    }

    /// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, index: usize) -> f64 {
        let n = self.n_documents as f64;
        let df = self.document_frequency[index] as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Builds from arbitrary `(index, value)` pairs; duplicate indices are summed
    /// and zero entries dropped.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, v) in pairs {
            if i >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: i + 1,
                });
            }
            *acc.entry(i).or_default() += v;
        }
        Ok(Self {
            dim,
            entries: acc.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        })
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| dense[i] * v).sum()
    }
}

/// Fits a vocabulary over `docs`, keeping terms that appear in at least
/// `min_df` documents.
pub fn fit_vocabulary(docs: &[CleanText], min_df: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::InsufficientData(
            "cannot fit a vocabulary on zero documents".into(),
        ));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let mut seen: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    let (terms, dfs): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, c)| c >= min_df.max(1))
        .map(|(t, c)| (t.to_string(), c))
        .unzip();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary { min_df });
    }
    Vocabulary::from_parts(terms, dfs, docs.len())
}

/// Raw term counts times smoothed IDF, L2-normalized. Out-of-vocabulary terms
/// are ignored; a document without known terms maps to the zero vector.
pub fn vectorize(doc: &CleanText, vocab: &Vocabulary) -> SparseVector {
    let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
    for t in &doc.tokens {
        if let Some(i) = vocab.index_of(t) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let mut entries: Vec<(usize, f64)> = counts
        .into_iter()
        .map(|(i, c)| (i, c as f64 * vocab.idf(i)))
        .collect();
    let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in &mut entries {
            *w /= norm;
        }
    }
    SparseVector {
        dim: vocab.len(),
        entries,
    }
}
