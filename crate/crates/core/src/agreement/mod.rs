//! Inter-annotator agreement and gold-label resolution.

mod sheet;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

pub use sheet::{round_from_path, sheet_path, AnnotatedItem, AnnotationMatrix};

use crate::corpus::Polarity;
use crate::{Error, Result};

/// Fleiss' κ with each item's own rater count. Items need at least two
/// labels. When every label falls in one category the chance term is 1 and
/// κ is reported as 1.
pub fn fleiss_kappa(m: &AnnotationMatrix) -> Result<f64> {
    m.validate()?;
    let categories: BTreeSet<&str> = m
        .items
        .iter()
        .flat_map(|it| it.labels.iter().flatten().map(String::as_str))
        .collect();
    let index: HashMap<&str, usize> = categories
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, i))
        .collect();

    let mut totals = vec![0u64; categories.len()];
    let mut assignments = 0u64;
    let mut p_sum = 0.0;
    for it in &m.items {
        let mut counts = vec![0u64; categories.len()];
        for l in it.labels.iter().flatten() {
            counts[index[l.as_str()]] += 1;
        }
        let n: u64 = counts.iter().sum();
        if n < 2 {
            return Err(Error::Annotation(format!(
                "item `{}` has {n} label(s); agreement needs at least 2",
                it.id
            )));
        }
        let agree: u64 = counts.iter().map(|&c| c * c.saturating_sub(1)).sum();
        p_sum += agree as f64 / (n * (n - 1)) as f64;
        for (t, c) in totals.iter_mut().zip(&counts) {
            *t += c;
        }
        assignments += n;
    }
    if categories.len() == 1 {
        return Ok(1.0);
    }
    let p_bar = p_sum / m.items.len() as f64;
    let p_e: f64 = totals
        .iter()
        .map(|&t| {
            let p = t as f64 / assignments as f64;
            p * p
        })
        .sum();
    Ok((p_bar - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Unanimous,
    Majority,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldLabel {
    pub label: Option<String>,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldLabels {
    pub labels: BTreeMap<String, GoldLabel>,
}

impl GoldLabels {
    pub fn unresolved(&self) -> Vec<&str> {
        self.labels
            .iter()
            .filter(|(_, g)| g.resolution == Resolution::Unresolved)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn count(&self, r: Resolution) -> usize {
        self.labels.values().filter(|g| g.resolution == r).count()
    }

    /// Resolved labels read as polarities; unknown label strings are errors.
    pub fn polarities(&self) -> Result<BTreeMap<String, Polarity>> {
        let mut out = BTreeMap::new();
        for (id, g) in &self.labels {
            if let Some(l) = &g.label {
                let p = Polarity::parse(l).ok_or_else(|| {
                    Error::Annotation(format!("item `{id}` has unknown label `{l}`"))
                })?;
                out.insert(id.clone(), p);
            }
        }
        Ok(out)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("id\tlabel\tresolution\n");
        for (id, g) in &self.labels {
            let r = match g.resolution {
                Resolution::Unanimous => "unanimous",
                Resolution::Majority => "majority",
                Resolution::Unresolved => "unresolved",
            };
            out.push_str(&format!(
                "{id}\t{}\t{r}\n",
                g.label.as_deref().unwrap_or("")
            ));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut labels = BTreeMap::new();
        for line in text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .skip(1)
        {
            let cols: Vec<&str> = line.split('\t').collect();
            let [id, label, r] = cols[..] else {
                return Err(Error::parse("gold labels", format!("bad row `{line}`")));
            };
            let resolution = match r {
                "unanimous" => Resolution::Unanimous,
                "majority" => Resolution::Majority,
                "unresolved" => Resolution::Unresolved,
                _ => return Err(Error::parse("gold labels", format!("bad resolution `{r}`"))),
            };
            let label = (!label.is_empty()).then(|| label.to_string());
            labels.insert(id.to_string(), GoldLabel { label, resolution });
        }
        Ok(Self { labels })
    }
}

/// Unanimous, strict-plurality or unresolved label per item.
pub fn majority_gold(m: &AnnotationMatrix) -> Result<GoldLabels> {
    m.validate()?;
    let mut labels = BTreeMap::new();
    for it in &m.items {
        let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
        for l in it.labels.iter().flatten() {
            *votes.entry(l.as_str()).or_default() += 1;
        }
        let mut ranked: Vec<(&str, usize)> = votes.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let gold = match ranked.as_slice() {
            [] => GoldLabel {
                label: None,
                resolution: Resolution::Unresolved,
            },
            [(l, _)] => GoldLabel {
                label: Some(l.to_string()),
                resolution: Resolution::Unanimous,
            },
            [(l, a), (_, b), ..] if a > b => GoldLabel {
                label: Some(l.to_string()),
                resolution: Resolution::Majority,
            },
            _ => GoldLabel {
                label: None,
                resolution: Resolution::Unresolved,
            },
        };
        labels.insert(it.id.clone(), gold);
    }
    Ok(GoldLabels { labels })
}

/// Applies a later round's labels on top of `base`. Filled cells overwrite,
/// blank cells keep the earlier label.
pub fn merge_adjudication(
    base: &AnnotationMatrix,
    revisions: &AnnotationMatrix,
) -> Result<AnnotationMatrix> {
    base.validate()?;
    if revisions.round != base.round + 1 && revisions.round != base.round {
        return Err(Error::Annotation(format!(
            "revision round {} does not follow base round {}",
            revisions.round, base.round
        )));
    }
    if revisions.annotators != base.annotators {
        return Err(Error::Annotation(
            "revision sheet has different annotator columns".into(),
        ));
    }
    let index: HashMap<&str, usize> = base
        .items
        .iter()
        .enumerate()
        .map(|(i, it)| (it.id.as_str(), i))
        .collect();
    let mut merged = base.clone();
    merged.round = revisions.round;
    for rev in &revisions.items {
        let &i = index
            .get(rev.id.as_str())
            .ok_or_else(|| Error::Annotation(format!("revision for unknown item `{}`", rev.id)))?;
        if rev.labels.len() != base.annotators.len() {
            return Err(Error::Annotation(format!(
                "revision row `{}` has the wrong width",
                rev.id
            )));
        }
        for (cell, new) in merged.items[i].labels.iter_mut().zip(&rev.labels) {
            if new.is_some() {
                cell.clone_from(new);
            }
        }
    }
    Ok(merged)
}

/// Blank next-round sheet holding the items `gold` left unresolved.
pub fn adjudication_sheet(m: &AnnotationMatrix, gold: &GoldLabels) -> AnnotationMatrix {
    let tied: BTreeSet<&str> = gold.unresolved().into_iter().collect();
    let mut next = AnnotationMatrix::blank(
        m.round + 1,
        m.annotators.len(),
        m.items
            .iter()
            .filter(|it| tied.contains(it.id.as_str()))
            .map(|it| (it.id.clone(), it.text.clone())),
    );
    next.annotators.clone_from(&m.annotators);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: &[&[&str]]) -> AnnotationMatrix {
        let k = rows[0].len();
        let mut m = AnnotationMatrix::blank(
            1,
            k,
            (0..rows.len()).map(|i| (format!("i{i}"), String::new())),
        );
        for (it, row) in m.items.iter_mut().zip(rows) {
            it.labels = row
                .iter()
                .map(|l| (!l.is_empty()).then(|| l.to_string()))
                .collect();
        }
        m
    }

    /// Fleiss' κ evaluated by enumerating ordered rater pairs.
    fn kappa_oracle(m: &AnnotationMatrix) -> f64 {
        let mut p_bar = 0.0;
        let mut pool: Vec<&str> = Vec::new();
        for it in &m.items {
            let ls: Vec<&str> = it.labels.iter().flatten().map(String::as_str).collect();
            let (mut agree, mut pairs) = (0.0, 0.0);
            for a in 0..ls.len() {
                for b in 0..ls.len() {
                    if a != b {
                        pairs += 1.0;
                        if ls[a] == ls[b] {
                            agree += 1.0;
                        }
                    }
                }
            }
            p_bar += agree / pairs;
            pool.extend(ls);
        }
        p_bar /= m.items.len() as f64;
        let mut same = 0.0;
        for a in &pool {
            for b in &pool {
                if a == b {
                    same += 1.0;
                }
            }
        }
        let p_e = same / (pool.len() * pool.len()) as f64;
        (p_bar - p_e) / (1.0 - p_e)
    }

    #[test]
    fn hand_case_is_one_third() {
        let m = matrix(&[
            &["p", "p", "p"],
            &["p", "p", "n"],
            &["p", "n", "n"],
            &["n", "n", "n"],
        ]);
        assert!((fleiss_kappa(&m).unwrap() - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn perfect_agreement_and_single_category() {
        let m = matrix(&[&["p", "p"], &["n", "n"]]);
        assert_eq!(fleiss_kappa(&m).unwrap(), 1.0);
        let m = matrix(&[&["p", "p"], &["p", "p"]]);
        assert_eq!(fleiss_kappa(&m).unwrap(), 1.0);
    }

    #[test]
    fn too_few_labels_is_an_error() {
        let m = matrix(&[&["p", "p", ""], &["p", "", ""]]);
        assert!(matches!(fleiss_kappa(&m), Err(Error::Annotation(_))));
    }

    #[test]
    fn missing_annotator_uses_item_n() {
        let m = matrix(&[&["p", "p", ""], &["p", "n", "n"], &["n", "n", "n"]]);
        assert!((fleiss_kappa(&m).unwrap() - kappa_oracle(&m)).abs() < 1e-12);
    }

    #[test]
    fn gold_resolution() {
        let m = matrix(&[
            &["pos", "pos", "pos"],
            &["pos", "pos", "neg"],
            &["pos", "neg", ""],
        ]);
        let g = majority_gold(&m).unwrap();
        assert_eq!(g.labels["i0"].resolution, Resolution::Unanimous);
        assert_eq!(
            g.labels["i1"],
            GoldLabel {
                label: Some("pos".into()),
                resolution: Resolution::Majority
            }
        );
        assert_eq!(g.labels["i2"].resolution, Resolution::Unresolved);
        assert_eq!(g.unresolved(), ["i2"]);
        assert_eq!(GoldLabels::from_tsv(&g.to_tsv()).unwrap(), g);
    }

    #[test]
    fn adjudication_round_trip() {
        let base = matrix(&[&["p", "p", "n"], &["p", "n", "n"], &["n", "n", "n"]]);
        let empty = AnnotationMatrix {
            round: 2,
            annotators: base.annotators.clone(),
            items: vec![],
        };
        let same = merge_adjudication(&base, &empty).unwrap();
        assert_eq!(same.items, base.items);

        let mut rev = AnnotationMatrix::blank(
            2,
            3,
            [
                ("i0".to_string(), String::new()),
                ("i1".to_string(), String::new()),
            ],
        );
        rev.items[0].labels[2] = Some("p".into());
        rev.items[1].labels[0] = Some("n".into());
        let merged = merge_adjudication(&base, &rev).unwrap();
        assert_eq!(fleiss_kappa(&merged).unwrap(), 1.0);
        assert_eq!(merged.round, 2);
        assert_eq!(merge_adjudication(&merged, &rev).unwrap(), merged);

        let mut partial = rev.clone();
        partial.items.truncate(1);
        let m2 = merge_adjudication(&base, &partial).unwrap();
        assert!((fleiss_kappa(&m2).unwrap() - kappa_oracle(&m2)).abs() < 1e-12);

        let mut unknown = rev.clone();
        unknown.items[0].id = "zz".into();
        assert!(merge_adjudication(&base, &unknown).is_err());
        let mut late = rev.clone();
        late.round = 5;
        assert!(merge_adjudication(&base, &late).is_err());
    }

    #[test]
    fn ties_go_to_next_sheet() {
        let m = matrix(&[&["p", "n"], &["p", "p"]]);
        let g = majority_gold(&m).unwrap();
        let next = adjudication_sheet(&m, &g);
        assert_eq!(next.round, 2);
        assert_eq!(next.items.len(), 1);
        assert_eq!(next.items[0].id, "i0");
        assert!(next.items[0].labels.iter().all(Option::is_none));
    }

    fn arb_matrix() -> impl Strategy<Value = AnnotationMatrix> {
        (2usize..5, 1usize..30).prop_flat_map(|(k, n)| {
            proptest::collection::vec(proptest::collection::vec(0u8..3, k), n).prop_map(
                move |rows| {
                    let mut m = AnnotationMatrix::blank(
                        1,
                        k,
                        (0..rows.len()).map(|i| (format!("i{i}"), String::new())),
                    );
                    for (it, row) in m.items.iter_mut().zip(&rows) {
                        it.labels = row.iter().map(|c| Some(format!("c{c}"))).collect();
                    }
                    m
                },
            )
        })
    }

    proptest! {
        #[test]
        fn kappa_matches_oracle_and_bounds(m in arb_matrix()) {
            let k = fleiss_kappa(&m).unwrap();
            let cats: BTreeSet<&String> = m.items.iter().flat_map(|i| i.labels.iter().flatten()).collect();
            if cats.len() > 1 {
                prop_assert!((k - kappa_oracle(&m)).abs() < 1e-9);
            }
            prop_assert!((-1.0..=1.0).contains(&k));
            let unanimous = m.items.iter().all(|i| i.labels.windows(2).all(|w| w[0] == w[1]));
            prop_assert_eq!(k == 1.0, unanimous);
        }

        #[test]
        fn kappa_ignores_relabeling_and_order(m in arb_matrix()) {
            let mut relabeled = m.clone();
            for it in &mut relabeled.items {
                for l in it.labels.iter_mut().flatten() {
                    *l = match l.as_str() { "c0" => "c2", "c1" => "c0", _ => "c1" }.to_string();
                }
            }
            relabeled.items.reverse();
            prop_assert!((fleiss_kappa(&m).unwrap() - fleiss_kappa(&relabeled).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn gold_matches_vote_count_oracle(m in arb_matrix()) {
            let g = majority_gold(&m).unwrap();
            for it in &m.items {
                let mut best: Option<&String> = None;
                let mut best_n = 0;
                let mut tied = false;
                for c in it.labels.iter().flatten() {
                    let n = it.labels.iter().flatten().filter(|x| *x == c).count();
                    if n > best_n { best = Some(c); best_n = n; tied = false; }
                    else if n == best_n && best != Some(c) { tied = true; }
                }
                let got = &g.labels[&it.id];
                if tied {
                    prop_assert_eq!(got.resolution, Resolution::Unresolved);
                } else {
                    prop_assert_eq!(got.label.as_ref(), best);
                }
            }
        }
    }
}
