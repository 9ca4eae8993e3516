use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use supportive::fingerprint::sha256_hex;

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.tsv";
const CACHE: &str = "cache";

/// File locations inside the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn corpus(&self) -> PathBuf {
        self.root.join("corpus.jsonl")
    }
    pub fn ingest_report(&self) -> PathBuf {
        self.root.join("ingest.tsv")
    }
    pub fn partition(&self) -> PathBuf {
        self.root.join("partition.tsv")
    }
    pub fn model(&self, scorer: &str) -> PathBuf {
        self.root.join("scorers").join(format!("{scorer}.model"))
    }
    pub fn scores(&self) -> PathBuf {
        self.root.join("scores.tsv")
    }
    pub fn cache(&self) -> PathBuf {
        self.root.join(CACHE)
    }
    pub fn dataset(&self, name: &str) -> PathBuf {
        self.root.join("datasets").join(format!("{name}.jsonl"))
    }
    pub fn annotation(&self) -> PathBuf {
        self.root.join("annotation")
    }
    pub fn gold(&self) -> PathBuf {
        self.annotation().join("gold.tsv")
    }
    pub fn agreement(&self) -> PathBuf {
        self.annotation().join("agreement.tsv")
    }
    pub fn report(&self, name: &str) -> PathBuf {
        self.root.join("reports").join(name)
    }
    pub fn manifest(&self) -> PathBuf {
        self.root.join(MANIFEST)
    }
}

pub fn require(path: &Path, producer: &'static str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Missing {
            artifact: path.display().to_string(),
            producer,
            detail: "is missing".into(),
        })
    }
}

pub fn read(path: &Path, producer: &'static str) -> Result<String, CliError> {
    require(path, producer)?;
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

pub fn write(path: &Path, body: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, body)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

/// Provenance block shared by every output file.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub config_fingerprint: String,
    pub master_seed: u64,
    pub overrides: Vec<(String, String)>,
}

impl Provenance {
    pub fn value(&self, stage: &str, extra: Value) -> Value {
        let overrides: BTreeMap<&str, &str> = self
            .overrides
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        let mut v = json!({
            "stage": stage,
            "config_fingerprint": self.config_fingerprint,
            "master_seed": self.master_seed,
            "overrides": overrides,
            "std": "population",
        });
        if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
            m.extend(e);
        }
        v
    }

    /// `# provenance {...}` line for text formats.
    pub fn comment(&self, stage: &str, extra: Value) -> String {
        format!("# provenance {}\n", self.value(stage, extra))
    }
}

/// Files under `root` except the manifest and the score cache, as sorted
/// `/`-separated relative paths.
fn tracked_files(root: &Path) -> Result<Vec<String>, CliError> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> std::io::Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            let rel: Vec<String> = path
                .strip_prefix(root)
                .expect("walk stays under root")
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect();
            let rel = rel.join("/");
            if path.is_dir() {
                if rel != CACHE {
                    walk(root, &path, out)?;
                }
            } else if rel != MANIFEST {
                out.push(rel);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, root, &mut out)
        .map_err(|e| CliError::Data(format!("cannot list {}: {e}", root.display())))?;
    out.sort();
    Ok(out)
}

fn hash_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(sha256_hex(bytes))
}

pub fn write_manifest(layout: &Layout, prov: &Provenance) -> Result<(), CliError> {
    let mut body = prov.comment("manifest", json!({}));
    body.push_str("path\tsha256\n");
    for rel in tracked_files(&layout.root)? {
        body.push_str(&format!("{rel}\t{}\n", hash_file(&layout.root.join(&rel))?));
    }
    write(&layout.manifest(), &body)
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Drift {
    pub changed: Vec<String>,
    pub missing: Vec<String>,
    pub untracked: Vec<String>,
}

impl Drift {
    pub fn is_clean(&self) -> bool {
        self.changed.is_empty() && self.missing.is_empty() && self.untracked.is_empty()
    }
}

/// Re-hashes every file listed in the manifest.
pub fn verify(root: &Path) -> Result<Drift, CliError> {
    let layout = Layout {
        root: root.to_path_buf(),
    };
    let text = read(&layout.manifest(), "pipeline")?;
    let mut listed = BTreeMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let (p, h) = line
            .split_once('\t')
            .ok_or_else(|| CliError::Data(format!("bad manifest row `{line}`")))?;
        listed.insert(p.to_string(), h.to_string());
    }
    let mut drift = Drift::default();
    for (rel, h) in &listed {
        let path = root.join(rel);
        if !path.exists() {
            drift.missing.push(rel.clone());
        } else if &hash_file(&path)? != h {
            drift.changed.push(rel.clone());
        }
    }
    drift.untracked = tracked_files(root)?
        .into_iter()
        .filter(|f| !listed.contains_key(f))
        .collect();
    Ok(drift)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_detects_drift() {
        let dir = tempfile::tempdir().unwrap();
        let layout = Layout {
            root: dir.path().to_path_buf(),
        };
        let prov = Provenance {
            config_fingerprint: "fp".into(),
            master_seed: 0,
            overrides: Vec::new(),
        };
        write(&layout.scores(), "a").unwrap();
        write(&layout.dataset("eval"), "b").unwrap();
        write(&layout.cache().join("x.tsv"), "c").unwrap();
        write_manifest(&layout, &prov).unwrap();
        let text = std::fs::read_to_string(layout.manifest()).unwrap();
        assert!(text.contains("datasets/eval.jsonl\t"));
        assert!(!text.contains("cache"));
        assert!(verify(dir.path()).unwrap().is_clean());

        write(&layout.scores(), "tampered").unwrap();
        std::fs::remove_file(layout.dataset("eval")).unwrap();
        write(&layout.partition(), "new").unwrap();
        let d = verify(dir.path()).unwrap();
        assert_eq!(d.changed, ["scores.tsv"]);
        assert_eq!(d.missing, ["datasets/eval.jsonl"]);
        assert_eq!(d.untracked, ["partition.tsv"]);
    }
}
