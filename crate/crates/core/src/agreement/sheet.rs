use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedItem {
    pub id: String,
    pub text: String,
    /// One cell per annotator; `None` is a missing label.
    pub labels: Vec<Option<String>>,
}

/// Per-item labels from `k` annotators for one annotation round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationMatrix {
    pub round: u32,
    pub annotators: Vec<String>,
    pub items: Vec<AnnotatedItem>,
}

fn cell(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

impl AnnotationMatrix {
    /// A blank sheet over `(id, text)` rows.
    pub fn blank(round: u32, k: usize, rows: impl IntoIterator<Item = (String, String)>) -> Self {
        Self {
            round,
            annotators: (1..=k).map(|i| format!("annotator_{i}")).collect(),
            items: rows
                .into_iter()
                .map(|(id, text)| AnnotatedItem {
                    id,
                    text,
                    labels: vec![None; k],
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.annotators.len() < 2 {
            return Err(Error::Annotation(format!(
                "need at least 2 annotators, sheet has {}",
                self.annotators.len()
            )));
        }
        if self.items.is_empty() {
            return Err(Error::Annotation("sheet has no items".into()));
        }
        let mut seen = HashSet::new();
        for it in &self.items {
            if it.labels.len() != self.annotators.len() {
                return Err(Error::Annotation(format!(
                    "item `{}` has {} label cells for {} annotators",
                    it.id,
                    it.labels.len(),
                    self.annotators.len()
                )));
            }
            if !seen.insert(it.id.as_str()) {
                return Err(Error::Annotation(format!("item `{}` appears twice", it.id)));
            }
        }
        Ok(())
    }

    pub fn item(&self, id: &str) -> Option<&AnnotatedItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("id\ttext\t{}\n", self.annotators.join("\t"));
        for it in &self.items {
            out.push_str(&cell(&it.id));
            out.push('\t');
            out.push_str(&cell(&it.text));
            for l in &it.labels {
                out.push('\t');
                out.push_str(l.as_deref().map(cell).as_deref().unwrap_or(""));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str, round: u32) -> Result<Self> {
        let mut lines = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Annotation("empty sheet".into()))?
            .split('\t')
            .collect();
        if header.len() < 2 || header[0] != "id" || header[1] != "text" {
            return Err(Error::Annotation(
                "sheet header must start with `id<TAB>text`".into(),
            ));
        }
        let annotators: Vec<String> = header[2..].iter().map(|s| s.trim().to_string()).collect();
        let mut items = Vec::new();
        for (n, line) in lines.enumerate() {
            let mut cols: Vec<&str> = line.split('\t').collect();
            // trailing empty cells may be trimmed by spreadsheet tools
            if cols.len() < 2 || cols.len() > header.len() {
                return Err(Error::Annotation(format!(
                    "row {} has {} cells, header has {}",
                    n + 2,
                    cols.len(),
                    header.len()
                )));
            }
            cols.resize(header.len(), "");
            items.push(AnnotatedItem {
                id: cols[0].to_string(),
                text: cols[1].to_string(),
                labels: cols[2..]
                    .iter()
                    .map(|c| {
                        let c = c.trim();
                        (!c.is_empty()).then(|| c.to_string())
                    })
                    .collect(),
            });
        }
        let m = Self {
            round,
            annotators,
            items,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, dir: impl AsRef<Path>, name: &str) -> Result<PathBuf> {
        let path = sheet_path(dir, name, self.round);
        std::fs::write(&path, self.to_tsv()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Reads a sheet; the round comes from the `.roundN.tsv` file name suffix.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let round = round_from_path(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text, round)
    }
}

pub fn sheet_path(dir: impl AsRef<Path>, name: &str, round: u32) -> PathBuf {
    dir.as_ref().join(format!("{name}.round{round}.tsv"))
}

pub fn round_from_path(path: &Path) -> Result<u32> {
    path.file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_suffix(".tsv"))
        .and_then(|n| n.rsplit_once(".round"))
        .and_then(|(_, r)| r.parse().ok())
        .ok_or_else(|| {
            Error::Annotation(format!(
                "sheet file name `{}` lacks a `.roundN.tsv` suffix",
                path.display()
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_missing_cells() {
        let text = "id\ttext\ta\tb\tc\n1\thello\tsupportive\t\tnot-supportive\n2\tbye\tsupportive\tsupportive\n";
        let m = AnnotationMatrix::from_tsv(text, 1).unwrap();
        assert_eq!(m.items[0].labels[1], None);
        assert_eq!(m.items[1].labels[2], None);
        let again = AnnotationMatrix::from_tsv(&m.to_tsv(), 1).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn invalid_sheets() {
        assert!(AnnotationMatrix::from_tsv("id\ttext\ta\n1\tx\tpos\n", 1).is_err());
        assert!(AnnotationMatrix::from_tsv("id\ttext\ta\tb\n", 1).is_err());
        assert!(AnnotationMatrix::from_tsv("id\ttext\ta\tb\n1\tx\n1\ty\n", 1).is_err());
        assert!(AnnotationMatrix::from_tsv("x\ty\n", 1).is_err());
    }

    #[test]
    fn round_suffix() {
        let dir = tempfile::tempdir().unwrap();
        let m = AnnotationMatrix::blank(2, 3, [("7".to_string(), "t\tab".to_string())]);
        let p = m.save(dir.path(), "eval").unwrap();
        assert!(p.ends_with("eval.round2.tsv"));
        let back = AnnotationMatrix::load(&p).unwrap();
        assert_eq!(back.round, 2);
        assert_eq!(back.items[0].text, "t ab");
        assert!(round_from_path(Path::new("eval.tsv")).is_err());
    }
}
