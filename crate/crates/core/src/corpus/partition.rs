use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, TweetRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    Supportive,
    NotSupportive,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Supportive => "supportive",
            Polarity::NotSupportive => "not-supportive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "supportive" => Some(Polarity::Supportive),
            "not-supportive" | "not_supportive" => Some(Polarity::NotSupportive),
            _ => None,
        }
    }
}

/// A named set of hashtag spellings sharing one polarity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashtagGroup {
    pub group_id: String,
    /// Spellings as configured, without `#`. Matching ignores case.
    pub variants: Vec<String>,
    pub polarity: Polarity,
}

impl HashtagGroup {
    pub fn new(group_id: &str, polarity: Polarity, variants: &[&str]) -> Self {
        Self {
            group_id: group_id.to_string(),
            variants: variants
                .iter()
                .map(|v| v.trim_start_matches('#').to_string())
                .collect(),
            polarity,
        }
    }

    pub fn matches(&self, hashtag: &str) -> bool {
        self.variants.iter().any(|v| same_tag(v, hashtag))
    }
}

pub(crate) fn same_tag(a: &str, b: &str) -> bool {
    if a.is_ascii() && b.is_ascii() {
        a.eq_ignore_ascii_case(b)
    } else {
        a.to_lowercase() == b.to_lowercase()
    }
}

/// The three hashtag families of the oxygen-crisis corpus.
pub fn default_groups() -> Vec<HashtagGroup> {
    vec![
        HashtagGroup::new(
            "IndiaNeedsOxygen",
            Polarity::Supportive,
            &["IndiaNeedsOxygen", "IndiaNeedOxygen"],
        ),
        HashtagGroup::new(
            "PakistanStandsWithIndia",
            Polarity::Supportive,
            &["PakistanStandsWithIndia", "PakistanStandWithIndia"],
        ),
        HashtagGroup::new(
            "EndiaSaySorryToKashmir",
            Polarity::NotSupportive,
            &["EndiaSaySorryToKashmir", "IndiaSaySorryToKashmir"],
        ),
    ]
}

/// Parses the plain-text group config: one group per line,
/// `group_id <ws> polarity <ws> variant[,variant...]`; blank lines and lines
/// starting with `#` are ignored.
pub fn parse_groups(text: &str) -> Result<Vec<HashtagGroup>> {
    let mut groups = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ctx = || format!("hashtag groups line {}", n + 1);
        let mut cols = line.split_whitespace();
        let (Some(id), Some(pol), Some(vars), None) =
            (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            return Err(Error::parse(
                ctx(),
                "expected `group_id polarity variant,variant`",
            ));
        };
        let polarity = Polarity::parse(pol)
            .ok_or_else(|| Error::parse(ctx(), format!("unknown polarity `{pol}`")))?;
        let variants: Vec<String> = vars
            .split(',')
            .map(|v| v.trim().trim_start_matches(['#', '＃']).to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if variants.is_empty() {
            return Err(Error::parse(ctx(), "no variants"));
        }
        groups.push(HashtagGroup {
            group_id: id.to_string(),
            variants,
            polarity,
        });
    }
    validate_groups(&groups)?;
    Ok(groups)
}

pub fn load_groups(path: impl AsRef<Path>) -> Result<Vec<HashtagGroup>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_groups(&text)
}

fn validate_groups(groups: &[HashtagGroup]) -> Result<()> {
    if groups.is_empty() {
        return Err(Error::Config("no hashtag groups defined".into()));
    }
    let mut ids = BTreeSet::new();
    let mut owner: HashMap<String, &str> = HashMap::new();
    for g in groups {
        if !ids.insert(g.group_id.as_str()) {
            return Err(Error::Config(format!(
                "duplicate group id `{}`",
                g.group_id
            )));
        }
        for v in &g.variants {
            if let Some(prev) = owner.insert(v.to_lowercase(), &g.group_id) {
                if prev != g.group_id {
                    return Err(Error::Config(format!(
                        "hashtag variant `{v}` belongs to both `{prev}` and `{}`",
                        g.group_id
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Which subset a post falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Supportive,
    NotSupportive,
    Discarded,
    Unmatched,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Supportive => "supportive",
            Side::NotSupportive => "not-supportive",
            Side::Discarded => "discarded",
            Side::Unmatched => "unmatched",
        })
    }
}

impl Side {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "supportive" => Side::Supportive,
            "not-supportive" => Side::NotSupportive,
            "discarded" => Side::Discarded,
            "unmatched" => Side::Unmatched,
            _ => return None,
        })
    }
}

/// Disjoint, exhaustive split of corpus ids by hashtag polarity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusPartition {
    pub supportive: BTreeSet<String>,
    pub not_supportive: BTreeSet<String>,
    /// Posts carrying hashtags of both polarities.
    pub discarded: BTreeSet<String>,
    pub unmatched: BTreeSet<String>,
}

impl CorpusPartition {
    pub fn side_of(&self, id: &str) -> Option<Side> {
        if self.supportive.contains(id) {
            Some(Side::Supportive)
        } else if self.not_supportive.contains(id) {
            Some(Side::NotSupportive)
        } else if self.discarded.contains(id) {
            Some(Side::Discarded)
        } else if self.unmatched.contains(id) {
            Some(Side::Unmatched)
        } else {
            None
        }
    }

    pub fn insert(&mut self, id: String, side: Side) {
        match side {
            Side::Supportive => self.supportive.insert(id),
            Side::NotSupportive => self.not_supportive.insert(id),
            Side::Discarded => self.discarded.insert(id),
            Side::Unmatched => self.unmatched.insert(id),
        };
    }

    pub fn len(&self) -> usize {
        self.supportive.len()
            + self.not_supportive.len()
            + self.discarded.len()
            + self.unmatched.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every id with its side, sorted by id.
    pub fn assignments(&self) -> Vec<(&str, Side)> {
        let mut all: Vec<(&str, Side)> = [
            (&self.supportive, Side::Supportive),
            (&self.not_supportive, Side::NotSupportive),
            (&self.discarded, Side::Discarded),
            (&self.unmatched, Side::Unmatched),
        ]
        .into_iter()
        .flat_map(|(set, side)| set.iter().map(move |id| (id.as_str(), side)))
        .collect();
        all.sort();
        all
    }

    /// Keeps only ids satisfying `keep` (e.g. posts passing the length filter).
    pub fn restrict(&self, keep: impl Fn(&str) -> bool) -> Self {
        let f = |s: &BTreeSet<String>| s.iter().filter(|id| keep(id)).cloned().collect();
        Self {
            supportive: f(&self.supportive),
            not_supportive: f(&self.not_supportive),
            discarded: f(&self.discarded),
            unmatched: f(&self.unmatched),
        }
    }

    /// Removes the given ids from every side.
    pub fn without(&self, excluded: &BTreeSet<String>) -> Self {
        self.restrict(|id| !excluded.contains(id))
    }
}

fn polarities(record: &TweetRecord, groups: &[HashtagGroup]) -> (bool, bool) {
    let mut sup = false;
    let mut not = false;
    for g in groups {
        if record.hashtags.iter().any(|h| g.matches(h)) {
            match g.polarity {
                Polarity::Supportive => sup = true,
                Polarity::NotSupportive => not = true,
            }
        }
    }
    (sup, not)
}

pub fn partition(corpus: &Corpus, groups: &[HashtagGroup]) -> Result<CorpusPartition> {
    validate_groups(groups)?;
    let mut part = CorpusPartition::default();
    for r in &corpus.records {
        let side = match polarities(r, groups) {
            (true, false) => Side::Supportive,
            (false, true) => Side::NotSupportive,
            (true, true) => Side::Discarded,
            (false, false) => Side::Unmatched,
        };
        part.insert(r.id.clone(), side);
    }
    Ok(part)
}

/// Ids of posts carrying any spelling of each group, keyed by group id.
/// Unlike [`partition`], a post can belong to several groups.
pub fn group_id_sets(
    corpus: &Corpus,
    groups: &[HashtagGroup],
) -> BTreeMap<String, BTreeSet<String>> {
    groups
        .iter()
        .map(|g| {
            let ids = corpus
                .records
                .iter()
                .filter(|r| r.hashtags.iter().any(|h| g.matches(h)))
                .map(|r| r.id.clone())
                .collect();
            (g.group_id.clone(), ids)
        })
        .collect()
}

/// Exact Jaccard index as intersection and union sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JaccardIndex {
    pub intersection: usize,
    pub union: usize,
}

impl JaccardIndex {
    pub fn value(&self) -> f64 {
        self.intersection as f64 / self.union as f64
    }
}

pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Result<JaccardIndex> {
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    if union == 0 {
        return Err(Error::UndefinedInput(
            "Jaccard index of two empty sets".into(),
        ));
    }
    Ok(JaccardIndex {
        intersection,
        union,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn tweet(id: &str, tags: &[&str]) -> TweetRecord {
        TweetRecord {
            id: id.into(),
            raw_text: String::new(),
            hashtags: tags.iter().map(|s| s.to_string()).collect(),
            mentions: vec![],
            urls: vec![],
            like_count: 0,
            retweet_count: 0,
            geo_country: None,
            profile_flags: vec![],
            timestamp: chrono::Utc.with_ymd_and_hms(2021, 4, 22, 0, 0, 0).unwrap(),
        }
    }

    fn side(tags: &[&str]) -> Side {
        let c = Corpus::from_records(vec![tweet("t", tags)]).unwrap();
        partition(&c, &default_groups())
            .unwrap()
            .side_of("t")
            .unwrap()
    }

    #[test]
    fn partition_rules() {
        assert_eq!(side(&["IndiaNeedsOxygen"]), Side::Supportive);
        assert_eq!(side(&["indianeedoxygen"]), Side::Supportive);
        assert_eq!(side(&["PakistanstandswithIndia"]), Side::Supportive);
        assert_eq!(side(&["IndiaSaySorryToKashmir"]), Side::NotSupportive);
        assert_eq!(
            side(&["IndiaNeedsOxygen", "EndiaSaySorryToKashmir"]),
            Side::Discarded
        );
        assert_eq!(side(&["COVID19"]), Side::Unmatched);
        assert_eq!(side(&[]), Side::Unmatched);
    }

    #[test]
    fn overlapping_variants_rejected() {
        let groups = vec![
            HashtagGroup::new("a", Polarity::Supportive, &["X"]),
            HashtagGroup::new("b", Polarity::NotSupportive, &["x"]),
        ];
        let c = Corpus::from_records(vec![tweet("t", &[])]).unwrap();
        assert!(matches!(partition(&c, &groups), Err(Error::Config(_))));
        assert!(matches!(partition(&c, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn group_config_parsing() {
        let text = "# id polarity variants\n\
                    oxygen supportive #IndiaNeedsOxygen,IndiaNeedOxygen\n\n\
                    kashmir not-supportive EndiaSaySorryToKashmir\n";
        let g = parse_groups(text).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].variants, vec!["IndiaNeedsOxygen", "IndiaNeedOxygen"]);
        assert_eq!(g[1].polarity, Polarity::NotSupportive);
        assert!(parse_groups("a maybe X").is_err());
        assert!(parse_groups("a supportive").is_err());
        assert!(parse_groups("a supportive X\nb supportive x").is_err());
    }

    #[test]
    fn jaccard_cases() {
        let s = |v: &[u32]| v.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(jaccard(&s(&[1, 2]), &s(&[1, 2])).unwrap().value(), 1.0);
        let j = jaccard(&s(&[1, 2]), &s(&[2, 3])).unwrap();
        assert_eq!((j.intersection, j.union), (1, 3));
        assert_eq!(jaccard(&s(&[1]), &s(&[2])).unwrap().value(), 0.0);
        assert!(matches!(
            jaccard(&s(&[]), &s(&[])),
            Err(Error::UndefinedInput(_))
        ));
    }

    #[test]
    fn group_sets_overlap() {
        let c = Corpus::from_records(vec![
            tweet("1", &["IndiaNeedsOxygen", "PakistanStandsWithIndia"]),
            tweet("2", &["IndiaNeedOxygen"]),
        ])
        .unwrap();
        let sets = group_id_sets(&c, &default_groups());
        assert_eq!(sets["IndiaNeedsOxygen"].len(), 2);
        assert_eq!(sets["PakistanStandsWithIndia"].len(), 1);
        let j = jaccard(&sets["IndiaNeedsOxygen"], &sets["PakistanStandsWithIndia"]).unwrap();
        assert_eq!(j.value(), 0.5);
    }

    #[test]
    fn restrict_and_assignments() {
        let c = Corpus::from_records(vec![
            tweet("1", &["IndiaNeedsOxygen"]),
            tweet("2", &["EndiaSaySorryToKashmir"]),
            tweet("3", &[]),
        ])
        .unwrap();
        let p = partition(&c, &default_groups()).unwrap();
        assert_eq!(p.len(), 3);
        let r = p.restrict(|id| id != "1");
        assert!(r.supportive.is_empty());
        assert_eq!(r.len(), 2);
        let a = p.assignments();
        assert_eq!(a[1], ("2", Side::NotSupportive));
    }
}
