//! Corpus ingestion, country inference, text cleaning and hashtag partitioning.

mod clean;
mod country;
mod partition;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::fingerprint::Fingerprinter;
use crate::{Error, Result};

pub use clean::{clean, passes_length_filter, CleanText, DEFAULT_MIN_TOKENS};
pub use country::{flags_in, infer_country, Country, CountryLabel, EvidenceSource};
pub use partition::{
    default_groups, group_id_sets, jaccard, load_groups, parse_groups, partition, CorpusPartition,
    HashtagGroup, JaccardIndex, Polarity, Side,
};

/// One ingested post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    #[serde(rename = "text")]
    pub raw_text: String,
    /// Without the leading `#`, casing preserved.
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
    pub urls: Vec<String>,
    pub like_count: u64,
    pub retweet_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geo_country: Option<String>,
    /// ISO country codes decoded from flag emoji in the author's handle or
    /// display name.
    pub profile_flags: Vec<String>,
    #[serde(with = "rfc3339")]
    pub timestamp: DateTime<Utc>,
}

mod rfc3339 {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

/// Source key for each record field. Defaults to the canonical names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMapping {
    pub id: String,
    pub text: String,
    pub hashtags: String,
    pub mentions: String,
    pub urls: String,
    pub like_count: String,
    pub retweet_count: String,
    pub geo_country: String,
    pub profile_flags: String,
    pub timestamp: String,
}

impl Default for FieldMapping {
    fn default() -> Self {
        Self {
            id: "id".into(),
            text: "text".into(),
            hashtags: "hashtags".into(),
            mentions: "mentions".into(),
            urls: "urls".into(),
            like_count: "like_count".into(),
            retweet_count: "retweet_count".into(),
            geo_country: "geo_country".into(),
            profile_flags: "profile_flags".into(),
            timestamp: "timestamp".into(),
        }
    }
}

/// A loaded corpus plus the bookkeeping from ingestion.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub records: Vec<TweetRecord>,
    /// 1-based line numbers of skipped lines (malformed or duplicate id).
    pub skipped_lines: Vec<usize>,
}

impl Corpus {
    pub fn from_records(records: Vec<TweetRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Config(format!("duplicate tweet id `{}`", r.id)));
            }
        }
        Ok(Self {
            records,
            skipped_lines: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn skipped(&self) -> usize {
        self.skipped_lines.len()
    }

    pub fn get(&self, id: &str) -> Option<&TweetRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// Fingerprint over every record in file order.
    pub fn fingerprint(&self) -> String {
        let mut fp = Fingerprinter::new();
        for r in &self.records {
            fp.field(serde_json::to_vec(r).expect("record serializes"));
        }
        fp.finish()
    }
}

/// Reads a line-delimited corpus. Malformed lines and repeated ids are skipped
/// and counted; a file with no well-formed record is an error.
pub fn load_corpus(path: impl AsRef<Path>, schema: &FieldMapping) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let corpus = read_corpus(BufReader::new(file), schema).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus {
            path: path.to_path_buf(),
            skipped: corpus.skipped(),
        });
    }
    Ok(corpus)
}

/// Parses records from any reader. Unlike [`load_corpus`], an empty result is
/// not an error here.
pub fn read_corpus(reader: impl BufRead, schema: &FieldMapping) -> Result<Corpus> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }

    let parsed: Vec<(usize, Option<TweetRecord>)> = lines
        .par_iter()
        .map(|(n, line)| (*n, parse_record(line, schema)))
        .collect();

    let mut corpus = Corpus::default();
    let mut seen = HashSet::new();
    for (n, rec) in parsed {
        match rec {
            Some(r) if seen.insert(r.id.clone()) => corpus.records.push(r),
            _ => corpus.skipped_lines.push(n),
        }
    }
    Ok(corpus)
}

pub fn write_corpus(path: impl AsRef<Path>, records: &[TweetRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for r in records {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn parse_record(line: &str, m: &FieldMapping) -> Option<TweetRecord> {
    let v: Value = serde_json::from_str(line).ok()?;
    let obj = v.as_object()?;

    let id = match obj.get(&m.id)? {
        Value::String(s) if !s.is_empty() => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return None,
    };
    let raw_text = obj.get(&m.text)?.as_str()?.to_string();
    let hashtags = string_list(obj.get(&m.hashtags))?
        .into_iter()
        .map(|h| h.trim_start_matches(['#', '＃']).to_string())
        .filter(|h| !h.is_empty())
        .collect();
    let mentions = string_list(obj.get(&m.mentions))?;
    let urls = string_list(obj.get(&m.urls))?;
    let like_count = obj.get(&m.like_count)?.as_u64()?;
    let retweet_count = obj.get(&m.retweet_count)?.as_u64()?;
    let geo_country = match obj.get(&m.geo_country) {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if s.trim().is_empty() => None,
        Some(Value::String(s)) => Some(s.trim().to_ascii_uppercase()),
        Some(_) => return None,
    };
    let profile_flags = string_list(obj.get(&m.profile_flags))?
        .iter()
        .flat_map(|f| normalize_flag(f))
        .collect();
    let timestamp = DateTime::parse_from_rfc3339(obj.get(&m.timestamp)?.as_str()?)
        .ok()?
        .with_timezone(&Utc);

    Some(TweetRecord {
        id,
        raw_text,
        hashtags,
        mentions,
        urls,
        like_count,
        retweet_count,
        geo_country,
        profile_flags,
        timestamp,
    })
}

/// Missing list fields read as empty; a present field of the wrong type
/// makes the record malformed.
fn string_list(v: Option<&Value>) -> Option<Vec<String>> {
    match v {
        None | Some(Value::Null) => Some(Vec::new()),
        Some(Value::Array(items)) => items.iter().map(|i| i.as_str().map(String::from)).collect(),
        Some(_) => None,
    }
}

/// A flag entry is either an ISO code ("PK") or text containing flag emoji.
fn normalize_flag(entry: &str) -> Vec<String> {
    let decoded = flags_in(entry);
    if !decoded.is_empty() {
        return decoded;
    }
    let code = entry.trim();
    if code.len() == 2 && code.chars().all(|c| c.is_ascii_alphabetic()) {
        vec![code.to_ascii_uppercase()]
    } else {
        Vec::new()
    }
}

/// Canonical timestamp rendering used by the writers.
pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    const GOOD: &str = r##"{"id":"1","text":"hello","hashtags":["#IndiaNeedsOxygen"],"mentions":[],"urls":[],"like_count":3,"retweet_count":1,"geo_country":"in","profile_flags":[],"timestamp":"2021-04-22T10:00:00Z"}"##;

    fn line(id: &str) -> String {
        GOOD.replace(r#""id":"1""#, &format!(r#""id":"{id}""#))
    }

    #[test]
    fn three_valid_lines() {
        let text = [line("1"), line("2"), line("3")].join("\n");
        let c = read_corpus(Cursor::new(text), &FieldMapping::default()).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.skipped(), 0);
        assert_eq!(c.records[0].hashtags, vec!["IndiaNeedsOxygen"]);
        assert_eq!(c.records[0].geo_country.as_deref(), Some("IN"));
    }

    #[test]
    fn malformed_line_is_skipped_and_counted() {
        let text = [line("1"), "{not json".to_string(), line("2")].join("\n");
        let c = read_corpus(Cursor::new(text), &FieldMapping::default()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.skipped_lines, vec![2]);
    }

    #[test]
    fn negative_counts_and_duplicate_ids_are_malformed() {
        let neg = GOOD.replace(r#""like_count":3"#, r#""like_count":-3"#);
        let text = [line("1"), neg, line("1")].join("\n");
        let c = read_corpus(Cursor::new(text), &FieldMapping::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.skipped(), 2);
    }

    #[test]
    fn custom_field_mapping() {
        let renamed = line("9").replace(r#""text""#, r#""full_text""#);
        let mapping = FieldMapping {
            text: "full_text".into(),
            ..FieldMapping::default()
        };
        let c = read_corpus(Cursor::new(renamed.clone()), &mapping).unwrap();
        assert_eq!(c.records[0].raw_text, "hello");
        let c = read_corpus(Cursor::new(renamed), &FieldMapping::default()).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn flag_emoji_entries_are_decoded() {
        let with_flag = GOOD.replace(
            r#""profile_flags":[]"#,
            r#""profile_flags":["Ali 🇵🇰", "in"]"#,
        );
        let c = read_corpus(Cursor::new(with_flag), &FieldMapping::default()).unwrap();
        assert_eq!(c.records[0].profile_flags, vec!["PK", "IN"]);
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        std::fs::write(&p, "garbage\n").unwrap();
        assert!(matches!(
            load_corpus(&p, &FieldMapping::default()),
            Err(Error::EmptyCorpus { skipped: 1, .. })
        ));
        assert!(matches!(
            load_corpus(dir.path().join("missing"), &FieldMapping::default()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn write_then_read_round_trips() {
        let c = read_corpus(Cursor::new(line("1")), &FieldMapping::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        write_corpus(&p, &c.records).unwrap();
        let back = load_corpus(&p, &FieldMapping::default()).unwrap();
        assert_eq!(back.records, c.records);
        assert_eq!(back.fingerprint(), c.fingerprint());
    }
}
