use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::corpus::CleanText;
use crate::fingerprint::Fingerprinter;
use crate::{Error, Result};

/// Per-post probabilities from every registered scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    scorers: Vec<String>,
    rows: BTreeMap<String, Vec<f64>>,
    corpus_fingerprint: String,
}

/// Fingerprint of `(id, cleaned text)` pairs, independent of input order.
pub fn tweets_fingerprint(tweets: &[(String, CleanText)]) -> String {
    let mut sorted: Vec<&(String, CleanText)> = tweets.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut fp = Fingerprinter::new();
    for (id, t) in sorted {
        fp.field(id).field(&t.text);
    }
    fp.finish()
}

impl ScoreTable {
    /// `columns[k][i]` is scorer `k`'s probability for `ids[i]`.
    pub fn from_columns(
        scorers: Vec<String>,
        ids: &[String],
        columns: Vec<Vec<f64>>,
        corpus_fingerprint: String,
    ) -> Result<Self> {
        if columns.len() != scorers.len() {
            return Err(Error::LengthMismatch {
                left: scorers.len(),
                right: columns.len(),
            });
        }
        let mut rows: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            let mut row = Vec::with_capacity(scorers.len());
            for (k, col) in columns.iter().enumerate() {
                let p = *col.get(i).ok_or(Error::LengthMismatch {
                    left: ids.len(),
                    right: col.len(),
                })?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Protocol {
                        scorer: scorers[k].clone(),
                        detail: format!("probability {p} for `{id}` is outside [0, 1]"),
                    });
                }
                row.push(p);
            }
            if rows.insert(id.clone(), row).is_some() {
                return Err(Error::Config(format!(
                    "duplicate tweet id `{id}` in score input"
                )));
            }
        }
        Ok(Self {
            scorers,
            rows,
            corpus_fingerprint,
        })
    }

    pub fn scorers(&self) -> &[String] {
        &self.scorers
    }

    pub fn corpus_fingerprint(&self) -> &str {
        &self.corpus_fingerprint
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.rows.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    pub fn scorer_index(&self, scorer: &str) -> Result<usize> {
        self.scorers
            .iter()
            .position(|s| s == scorer)
            .ok_or_else(|| Error::UnknownScorer(scorer.to_string()))
    }

    pub fn get(&self, id: &str, scorer: &str) -> Option<f64> {
        let k = self.scorer_index(scorer).ok()?;
        self.rows.get(id).map(|r| r[k])
    }

    /// Probability lookup that reports the missing id.
    pub fn score(&self, id: &str, scorer_index: usize) -> Result<f64> {
        self.rows
            .get(id)
            .map(|r| r[scorer_index])
            .ok_or_else(|| Error::InsufficientData(format!("no score for tweet `{id}`")))
    }

    /// Total entry count, `len() * scorers().len()`.
    pub fn entries(&self) -> usize {
        self.rows.values().map(Vec::len).sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# corpus_fingerprint={}", self.corpus_fingerprint);
        let _ = writeln!(out, "id\t{}", self.scorers.join("\t"));
        for (id, row) in &self.rows {
            out.push_str(id);
            for p in row {
                let _ = write!(out, "\t{p:?}");
            }
            out.push('\n');
        }
        out
    }

    /// Reads [`to_tsv`](Self::to_tsv) output; other `#` lines are ignored.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let ctx = "score table";
        let mut fingerprint = String::new();
        let mut header: Option<Vec<String>> = None;
        let mut ids = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(fp) = rest.trim().strip_prefix("corpus_fingerprint=") {
                    fingerprint = fp.to_string();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            match &header {
                None => {
                    if cols.first() != Some(&"id") {
                        return Err(Error::parse(ctx, "missing `id` header"));
                    }
                    let names: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();
                    columns = vec![Vec::new(); names.len()];
                    header = Some(names);
                }
                Some(names) => {
                    if cols.len() != names.len() + 1 {
                        return Err(Error::parse(ctx, format!("wrong column count in `{line}`")));
                    }
                    ids.push(cols[0].to_string());
                    for (k, c) in cols[1..].iter().enumerate() {
                        columns[k].push(c.parse().map_err(|e| Error::parse(ctx, e))?);
                    }
                }
            }
        }
        let scorers = header.ok_or_else(|| Error::parse(ctx, "empty file"))?;
        Self::from_columns(scorers, &ids, columns, fingerprint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Descending,
    Ascending,
}

/// Orders `ids` by one scorer's probability; ties go to the smaller id.
pub fn rank<'a>(
    table: &ScoreTable,
    scorer: &str,
    ids: impl IntoIterator<Item = &'a str>,
    direction: Direction,
) -> Result<Vec<String>> {
    let k = table.scorer_index(scorer)?;
    let mut scored: Vec<(f64, &str)> = ids
        .into_iter()
        .map(|id| table.score(id, k).map(|p| (p, id)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| {
        let by_score = match direction {
            Direction::Descending => b.0.total_cmp(&a.0),
            Direction::Ascending => a.0.total_cmp(&b.0),
        };
        by_score.then_with(|| a.1.cmp(b.1))
    });
    Ok(scored.into_iter().map(|(_, id)| id.to_string()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(scores: &[(&str, f64)]) -> ScoreTable {
        let ids: Vec<String> = scores.iter().map(|(i, _)| i.to_string()).collect();
        let col = scores.iter().map(|(_, p)| *p).collect();
        ScoreTable::from_columns(vec!["hope".into()], &ids, vec![col], "fp".into()).unwrap()
    }

    #[test]
    fn two_element_rank() {
        let t = table(&[("a", 0.9), ("b", 0.1)]);
        assert_eq!(
            rank(&t, "hope", ["b", "a"], Direction::Descending).unwrap(),
            ["a", "b"]
        );
        assert_eq!(
            rank(&t, "hope", ["a", "b"], Direction::Ascending).unwrap(),
            ["b", "a"]
        );
    }

    #[test]
    fn ties_go_to_smaller_id() {
        let t = table(&[("c", 0.5), ("a", 0.5), ("b", 0.5)]);
        assert_eq!(
            rank(&t, "hope", ["c", "b", "a"], Direction::Descending).unwrap(),
            ["a", "b", "c"]
        );
    }

    #[test]
    fn unknown_scorer_and_missing_id() {
        let t = table(&[("a", 0.5)]);
        assert!(matches!(
            rank(&t, "empathy", ["a"], Direction::Descending),
            Err(Error::UnknownScorer(_))
        ));
        assert!(rank(&t, "hope", ["zz"], Direction::Descending).is_err());
    }

    #[test]
    fn matches_sort_oracle_on_random_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        // coarse scores so ties actually occur
        let scores: Vec<(String, f64)> = (0..1000)
            .map(|i| (format!("t{i:04}"), (rng.gen_range(0..50) as f64) / 50.0))
            .collect();
        let ids: Vec<String> = scores.iter().map(|s| s.0.clone()).collect();
        let t = ScoreTable::from_columns(
            vec!["hope".into()],
            &ids,
            vec![scores.iter().map(|s| s.1).collect()],
            String::new(),
        )
        .unwrap();
        let got = rank(
            &t,
            "hope",
            ids.iter().map(String::as_str),
            Direction::Descending,
        )
        .unwrap();

        // oracle: repeated selection of the best remaining element
        let mut remaining = scores.clone();
        let mut expected = Vec::new();
        while !remaining.is_empty() {
            let mut best = 0;
            for i in 1..remaining.len() {
                let (bi, bp) = (&remaining[best].0, remaining[best].1);
                let (ci, cp) = (&remaining[i].0, remaining[i].1);
                if cp > bp || (cp == bp && ci < bi) {
                    best = i;
                }
            }
            expected.push(remaining.swap_remove(best).0);
        }
        assert_eq!(got, expected);
    }

    #[test]
    fn tsv_round_trip_and_validation() {
        let t = table(&[("a", 0.1 + 0.2), ("b", 1.0)]);
        let back = ScoreTable::from_tsv(&format!("# provenance x\n{}", t.to_tsv())).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.entries(), 2);
        assert!(ScoreTable::from_tsv("id\thope\na\t1.5\n").is_err());
        assert!(ScoreTable::from_tsv("id\thope\na\t0.5\na\t0.5\n").is_err());
    }
}
