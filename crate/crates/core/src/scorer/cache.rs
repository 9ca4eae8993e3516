use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::fingerprint::Fingerprinter;
use crate::{Error, Result};

/// Score columns on disk, keyed by corpus fingerprint, scorer name and
/// scorer version.
#[derive(Debug, Clone)]
pub struct ScoreCache {
    dir: PathBuf,
}

impl ScoreCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, corpus_fp: &str, scorer: &str, version: &str) -> PathBuf {
        let mut fp = Fingerprinter::new();
        fp.field(corpus_fp).field(scorer).field(version);
        let key = fp.finish();
        self.dir.join(format!("{scorer}.{}.tsv", &key[..24]))
    }

    /// The cached column in `ids` order, or `None` on a miss or a stale entry.
    pub fn get(
        &self,
        corpus_fp: &str,
        scorer: &str,
        version: &str,
        ids: &[String],
    ) -> Option<Vec<f64>> {
        let text = std::fs::read_to_string(self.path(corpus_fp, scorer, version)).ok()?;
        let mut map = HashMap::with_capacity(ids.len());
        for line in text.lines() {
            let (id, p) = line.split_once('\t')?;
            map.insert(id, p.parse::<f64>().ok()?);
        }
        if map.len() != ids.len() {
            return None;
        }
        ids.iter().map(|id| map.get(id.as_str()).copied()).collect()
    }

    pub fn put(
        &self,
        corpus_fp: &str,
        scorer: &str,
        version: &str,
        ids: &[String],
        column: &[f64],
    ) -> Result<()> {
        if ids.len() != column.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: column.len(),
            });
        }
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let mut body = String::new();
        for (id, p) in ids.iter().zip(column) {
            let _ = writeln!(body, "{id}\t{p:?}");
        }
        let path = self.path(corpus_fp, scorer, version);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyed_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = ScoreCache::new(dir.path());
        let ids = vec!["b".to_string(), "a".to_string()];
        assert!(c.get("fp", "hope", "v1", &ids).is_none());
        c.put("fp", "hope", "v1", &ids, &[0.25, 0.75]).unwrap();
        let rev = vec!["a".to_string(), "b".to_string()];
        assert_eq!(c.get("fp", "hope", "v1", &rev), Some(vec![0.75, 0.25]));
        assert!(c.get("fp2", "hope", "v1", &ids).is_none());
        assert!(c.get("fp", "hope", "v2", &ids).is_none());
        assert!(c.get("fp", "hope", "v1", &ids[..1]).is_none());
    }
}
