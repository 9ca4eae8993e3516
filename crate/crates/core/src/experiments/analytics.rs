use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    group_id_sets, infer_country, jaccard, CleanText, Corpus, Country, HashtagGroup, JaccardIndex,
    TweetRecord,
};
use crate::stats::MeanStd;
use crate::{Error, Result};

/// Country bucket used by the engagement tables; unknown origin counts as
/// `Other`.
pub fn location_bucket(c: Country) -> &'static str {
    match c {
        Country::India => "India",
        Country::Pakistan => "Pakistan",
        Country::Other | Country::Unknown => "Other",
    }
}

pub const LOCATIONS: [&str; 3] = ["India", "Pakistan", "Other"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementRow {
    pub block: String,
    pub key: String,
    pub count: u64,
    /// `count` over the block total; 0 when the block is empty.
    pub share: f64,
    /// Absent for an empty row.
    pub likes: Option<MeanStd>,
    pub retweets: Option<MeanStd>,
}

/// Rows are emitted in `layout` order; every membership must name a declared
/// `(block, key)`.
pub fn engagement_stats<'a>(
    corpus: &Corpus,
    layout: &[(String, Vec<String>)],
    memberships: impl IntoIterator<Item = (&'a str, String, String)>,
) -> Result<Vec<EngagementRow>> {
    let by_id: HashMap<&str, &TweetRecord> =
        corpus.records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut cells: BTreeMap<(String, String), (Vec<u64>, Vec<u64>)> = BTreeMap::new();
    for (block, keys) in layout {
        for k in keys {
            cells.insert((block.clone(), k.clone()), Default::default());
        }
    }
    for (id, block, key) in memberships {
        let r = by_id
            .get(id)
            .ok_or_else(|| Error::InsufficientData(format!("tweet `{id}` is not in the corpus")))?;
        let cell = cells
            .get_mut(&(block.clone(), key.clone()))
            .ok_or_else(|| Error::Config(format!("undeclared engagement row {block}/{key}")))?;
        cell.0.push(r.like_count);
        cell.1.push(r.retweet_count);
    }
    let mut rows = Vec::new();
    for (block, keys) in layout {
        let total: usize = keys
            .iter()
            .map(|k| cells[&(block.clone(), k.clone())].0.len())
            .sum();
        for k in keys {
            let (likes, retweets) = &cells[&(block.clone(), k.clone())];
            rows.push(EngagementRow {
                block: block.clone(),
                key: k.clone(),
                count: likes.len() as u64,
                share: if total == 0 {
                    0.0
                } else {
                    likes.len() as f64 / total as f64
                },
                likes: MeanStd::of_counts(likes.iter().copied()),
                retweets: MeanStd::of_counts(retweets.iter().copied()),
            });
        }
    }
    Ok(rows)
}

/// Hashtag group by origin. A post carrying several groups counts once in
/// each.
pub fn group_location_engagement(
    corpus: &Corpus,
    groups: &[HashtagGroup],
) -> Result<Vec<EngagementRow>> {
    let layout: Vec<(String, Vec<String>)> = groups
        .iter()
        .map(|g| {
            (
                g.group_id.clone(),
                LOCATIONS.iter().map(|s| s.to_string()).collect(),
            )
        })
        .collect();
    let mut members = Vec::new();
    for r in &corpus.records {
        let loc = location_bucket(infer_country(r).value);
        for g in groups {
            if r.hashtags.iter().any(|h| g.matches(h)) {
                members.push((r.id.as_str(), g.group_id.clone(), loc.to_string()));
            }
        }
    }
    engagement_stats(corpus, &layout, members)
}

/// Predicted label by origin over the posts in `predictions`.
pub fn label_location_engagement(
    corpus: &Corpus,
    predictions: &BTreeMap<String, bool>,
) -> Result<Vec<EngagementRow>> {
    let keys = vec!["supportive".to_string(), "not-supportive".to_string()];
    let layout: Vec<(String, Vec<String>)> = LOCATIONS
        .iter()
        .map(|l| (l.to_string(), keys.clone()))
        .collect();
    let by_id: HashMap<&str, &TweetRecord> =
        corpus.records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut members = Vec::new();
    for (id, &p) in predictions {
        let r = by_id
            .get(id.as_str())
            .ok_or_else(|| Error::InsufficientData(format!("tweet `{id}` is not in the corpus")))?;
        let loc = location_bucket(infer_country(r).value);
        members.push((id.as_str(), loc.to_string(), keys[usize::from(!p)].clone()));
    }
    engagement_stats(corpus, &layout, members)
}

pub fn engagement_tsv(rows: &[EngagementRow]) -> String {
    let mut out =
        String::from("block\tkey\tcount\tshare\tlike_mean\tlike_std\tretweet_mean\tretweet_std\n");
    let ms = |m: &Option<MeanStd>| match m {
        Some(m) => format!("{:.4}\t{:.4}", m.mean, m.std),
        None => "NA\tNA".to_string(),
    };
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{}\t{}",
            r.block,
            r.key,
            r.count,
            r.share,
            ms(&r.likes),
            ms(&r.retweets)
        );
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationCounts {
    pub total: u64,
    pub india: u64,
    pub pakistan: u64,
}

impl LocationCounts {
    fn add(&mut self, c: Country) {
        self.total += 1;
        match c {
            Country::India => self.india += 1,
            Country::Pakistan => self.pakistan += 1,
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashtagCounts {
    /// `(group id, variant, counts)` in group then variant order.
    pub rows: Vec<(String, String, LocationCounts)>,
    /// Column sums over the variant rows; a post with two variants counts twice.
    pub all_rows: LocationCounts,
    /// Posts carrying at least one listed variant.
    pub all_posts: LocationCounts,
}

/// Posts per hashtag spelling (case-insensitive) and origin.
pub fn hashtag_counts(corpus: &Corpus, groups: &[HashtagGroup]) -> HashtagCounts {
    let variants: Vec<(String, String)> = groups
        .iter()
        .flat_map(|g| {
            g.variants
                .iter()
                .map(move |v| (g.group_id.clone(), v.clone()))
        })
        .collect();
    let mut counts = vec![LocationCounts::default(); variants.len()];
    let mut all_posts = LocationCounts::default();
    for r in &corpus.records {
        let country = infer_country(r).value;
        let mut any = false;
        for (i, (_, v)) in variants.iter().enumerate() {
            if r.hashtags
                .iter()
                .any(|h| h.to_lowercase() == v.to_lowercase())
            {
                counts[i].add(country);
                any = true;
            }
        }
        if any {
            all_posts.add(country);
        }
    }
    let mut all_rows = LocationCounts::default();
    for c in &counts {
        all_rows.total += c.total;
        all_rows.india += c.india;
        all_rows.pakistan += c.pakistan;
    }
    HashtagCounts {
        rows: variants
            .into_iter()
            .zip(counts)
            .map(|((g, v), c)| (g, v, c))
            .collect(),
        all_rows,
        all_posts,
    }
}

impl HashtagCounts {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("group\thashtag\ttotal\tindia\tpakistan\n");
        for (g, v, c) in &self.rows {
            let _ = writeln!(out, "{g}\t#{v}\t{}\t{}\t{}", c.total, c.india, c.pakistan);
        }
        let a = &self.all_rows;
        let _ = writeln!(
            out,
            "all\tsum of rows\t{}\t{}\t{}",
            a.total, a.india, a.pakistan
        );
        let a = &self.all_posts;
        let _ = writeln!(
            out,
            "all\tdistinct posts\t{}\t{}\t{}",
            a.total, a.india, a.pakistan
        );
        out
    }
}

/// Jaccard index of the post sets of every pair of groups, upper triangle in
/// group order.
pub fn group_jaccard(
    corpus: &Corpus,
    groups: &[HashtagGroup],
) -> Vec<(String, String, Option<JaccardIndex>)> {
    let sets: BTreeMap<String, BTreeSet<String>> = group_id_sets(corpus, groups);
    let mut out = Vec::new();
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            let j = jaccard(&sets[&a.group_id], &sets[&b.group_id]).ok();
            out.push((a.group_id.clone(), b.group_id.clone(), j));
        }
    }
    out
}

/// Token counts, most frequent first, ties in lexicographic order.
pub fn term_frequencies(texts: &[CleanText], top_n: usize) -> Result<Vec<(String, u64)>> {
    if top_n < 1 {
        return Err(Error::Config("top_n must be at least 1".into()));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in texts {
        for tok in &t.tokens {
            *counts.entry(tok.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, u64)> = counts
        .into_iter()
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_n);
    Ok(ranked)
}
