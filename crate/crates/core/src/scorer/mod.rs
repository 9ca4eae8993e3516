//! Scorer registry and corpus-wide scoring.
//!
//! A scorer maps cleaned text to a probability. Built-in scorers are linear
//! models (or a constant, for tests); anything else runs as an external
//! process speaking the line protocol in [`external`].

pub mod cache;
pub mod external;
pub mod serve;
mod table;

use std::sync::Arc;

use rayon::prelude::*;

pub use cache::ScoreCache;
pub use external::{score_external, ExternalCommand, PROTOCOL_VERSION};
pub use table::{rank, tweets_fingerprint, Direction, ScoreTable};

use crate::corpus::CleanText;
use crate::fingerprint::sha256_hex;
use crate::linear::TextClassifier;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum Backend {
    Linear(Arc<TextClassifier>),
    Constant(f64),
    External(ExternalCommand),
}

#[derive(Debug, Clone)]
pub struct ScorerHandle {
    pub name: String,
    pub backend: Backend,
}

impl ScorerHandle {
    pub fn linear(name: impl Into<String>, model: TextClassifier) -> Self {
        Self {
            name: name.into(),
            backend: Backend::Linear(Arc::new(model)),
        }
    }

    pub fn constant(name: impl Into<String>, p: f64) -> Self {
        Self {
            name: name.into(),
            backend: Backend::Constant(p),
        }
    }

    pub fn external(name: impl Into<String>, cmd: ExternalCommand) -> Self {
        Self {
            name: name.into(),
            backend: Backend::External(cmd),
        }
    }

    /// Changes whenever the scorer could produce different numbers.
    pub fn version(&self) -> String {
        match &self.backend {
            Backend::Linear(m) => format!("linear:{}", m.fingerprint()),
            Backend::Constant(p) => format!("constant:{p:?}"),
            Backend::External(c) => format!("external:{}", sha256_hex(c.command_line())),
        }
    }

    pub fn score_all(&self, tweets: &[(String, CleanText)]) -> Result<Vec<f64>> {
        match &self.backend {
            Backend::Linear(m) => Ok(tweets.par_iter().map(|(_, t)| m.predict_proba(t)).collect()),
            Backend::Constant(p) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Protocol {
                        scorer: self.name.clone(),
                        detail: format!("constant {p} is outside [0, 1]"),
                    });
                }
                Ok(vec![*p; tweets.len()])
            }
            Backend::External(c) => score_external(&self.name, c, tweets),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScorerHub {
    handles: Vec<ScorerHandle>,
}

impl ScorerHub {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, handle: ScorerHandle) -> Result<()> {
        if handle.name.is_empty() || handle.name.contains(['\t', '\n']) {
            return Err(Error::Config(format!(
                "invalid scorer name `{}`",
                handle.name
            )));
        }
        if self.handles.iter().any(|h| h.name == handle.name) {
            return Err(Error::Config(format!(
                "scorer `{}` registered twice",
                handle.name
            )));
        }
        self.handles.push(handle);
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.handles.iter().map(|h| h.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&ScorerHandle> {
        self.handles
            .iter()
            .find(|h| h.name == name)
            .ok_or_else(|| Error::UnknownScorer(name.to_string()))
    }

    /// Scores every post with every registered scorer.
    pub fn score_corpus(&self, tweets: &[(String, CleanText)]) -> Result<ScoreTable> {
        self.score_corpus_cached(tweets, None)
    }

    pub fn score_corpus_cached(
        &self,
        tweets: &[(String, CleanText)],
        cache: Option<&ScoreCache>,
    ) -> Result<ScoreTable> {
        if self.handles.is_empty() {
            return Err(Error::Config("no scorers registered".into()));
        }
        let fp = tweets_fingerprint(tweets);
        let ids: Vec<String> = tweets.iter().map(|(id, _)| id.clone()).collect();
        let mut columns = Vec::with_capacity(self.handles.len());
        for h in &self.handles {
            let version = h.version();
            let cached = cache.and_then(|c| c.get(&fp, &h.name, &version, &ids));
            let column = match cached {
                Some(col) => col,
                None => {
                    let col = h.score_all(tweets)?;
                    if let Some(c) = cache {
                        c.put(&fp, &h.name, &version, &ids, &col)?;
                    }
                    col
                }
            };
            columns.push(column);
        }
        ScoreTable::from_columns(
            self.handles.iter().map(|h| h.name.clone()).collect(),
            &ids,
            columns,
            fp,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tweets(n: usize) -> Vec<(String, CleanText)> {
        (0..n)
            .map(|i| {
                (
                    format!("t{i}"),
                    CleanText::from_normalized(&format!("word{i} pray")),
                )
            })
            .collect()
    }

    #[test]
    fn names_are_unique() {
        let mut hub = ScorerHub::new();
        hub.register(ScorerHandle::constant("hope", 0.5)).unwrap();
        assert!(hub.register(ScorerHandle::constant("hope", 0.1)).is_err());
        assert!(hub.register(ScorerHandle::constant("a\tb", 0.1)).is_err());
        assert!(matches!(hub.get("empathy"), Err(Error::UnknownScorer(_))));
    }

    #[test]
    fn table_has_one_entry_per_post_and_scorer() {
        let mut hub = ScorerHub::new();
        hub.register(ScorerHandle::constant("hope", 0.5)).unwrap();
        hub.register(ScorerHandle::constant("empathy", 0.25))
            .unwrap();
        let t = hub.score_corpus(&tweets(10)).unwrap();
        assert_eq!(t.entries(), 20);
        assert_eq!(t.get("t3", "empathy"), Some(0.25));
    }

    #[test]
    fn bad_constant_is_protocol_error() {
        let mut hub = ScorerHub::new();
        hub.register(ScorerHandle::constant("hope", 1.5)).unwrap();
        assert!(matches!(
            hub.score_corpus(&tweets(3)),
            Err(Error::Protocol { .. })
        ));
    }

    #[test]
    fn fingerprint_ignores_order() {
        let mut a = tweets(5);
        let fa = tweets_fingerprint(&a);
        a.reverse();
        assert_eq!(tweets_fingerprint(&a), fa);
        a[0].1 = CleanText::from_normalized("changed");
        assert_ne!(tweets_fingerprint(&a), fa);
    }

    #[test]
    fn cache_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ScoreCache::new(dir.path());
        let mut hub = ScorerHub::new();
        hub.register(ScorerHandle::constant("hope", 0.5)).unwrap();
        let t1 = hub.score_corpus_cached(&tweets(4), Some(&cache)).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let t2 = hub.score_corpus_cached(&tweets(4), Some(&cache)).unwrap();
        assert_eq!(t1, t2);
    }
}
