//! Planted-signal corpora with known ground truth.
//!
//! Posts carry hashtags from the three default groups. Whether a post is truly
//! supportive depends on its hashtag side with fixed probabilities, and the
//! body mixes a label lexicon, label-neutral topic words tied to the hashtag
//! and filler. The seed datasets for the two built-in scorers only use the
//! lexicons, so scorer rankings carry the label signal and hashtags carry
//! the noise.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::agreement::AnnotationMatrix;
use crate::corpus::{Polarity, TweetRecord};
use crate::{Error, Result};

pub const HOPE: &[&str] = &[
    "peace",
    "hope",
    "together",
    "unity",
    "humanity",
    "brotherhood",
    "harmony",
    "pray",
    "prayers",
    "blessings",
    "kindness",
    "friendship",
    "heal",
    "solidarity",
    "compassion",
    "forgive",
    "neighbours",
    "support",
    "care",
    "wishes",
];

pub const EMPATHY: &[&str] = &[
    "heartbroken",
    "sad",
    "pain",
    "suffering",
    "grief",
    "tragic",
    "helpless",
    "devastating",
    "sorrow",
    "tears",
    "painful",
    "heartbreaking",
    "condolences",
    "loss",
    "mourning",
    "crying",
    "anguish",
    "terrible",
    "hurts",
    "feel",
];

pub const HOSTILE: &[&str] = &[
    "karma",
    "revenge",
    "deserve",
    "hate",
    "shame",
    "enemy",
    "propaganda",
    "blame",
    "lies",
    "fake",
    "hypocrisy",
    "arrogant",
    "mock",
    "laugh",
    "payback",
    "traitor",
    "oppression",
    "brutal",
    "fascist",
    "criminal",
];

const NEWS: &[&str] = &[
    "report",
    "government",
    "minister",
    "statement",
    "official",
    "data",
    "cases",
    "covid",
    "vaccine",
    "update",
    "numbers",
    "policy",
    "meeting",
    "announced",
    "decision",
    "media",
    "officials",
    "statistics",
    "second",
    "wave",
];

const FILLER: &[&str] = &[
    "the", "a", "is", "to", "of", "and", "in", "for", "this", "that", "we", "our", "all", "people",
    "today", "now", "they", "it", "be", "with", "on", "are", "just", "time", "from", "after",
    "about", "what", "more", "their", "every", "day", "country", "world", "still", "very", "one",
    "here", "there", "these",
];

const TOPIC_OXYGEN: &[&str] = &[
    "oxygen",
    "cylinders",
    "beds",
    "hospitals",
    "shortage",
    "delhi",
    "supply",
    "icu",
];
const TOPIC_PAKISTAN: &[&str] = &[
    "pakistani",
    "indian",
    "cricket",
    "edhi",
    "foundation",
    "ambulances",
    "offer",
    "across",
];
const TOPIC_KASHMIR: &[&str] = &[
    "kashmiri",
    "valley",
    "army",
    "curfew",
    "lockdown",
    "militants",
    "srinagar",
    "august",
];

const EMOJI: &[&str] = &["🙏", "💔", "😢", "❤️", "😡", "🇮🇳", "🇵🇰", "🤲"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_tweets: usize,
    /// Probability that a post with a supportive hashtag is truly supportive.
    pub p_true_supportive: f64,
    /// Probability that a post with the not-supportive hashtag is truly
    /// supportive.
    pub p_true_not_supportive: f64,
    /// Same for posts with both or neither side.
    pub p_true_other: f64,
    /// Share of posts repeating an earlier body.
    pub dup_rate: f64,
    /// Share of posts below the length filter.
    pub short_rate: f64,
    pub id_prefix: String,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_tweets: 5000,
            p_true_supportive: 0.444,
            p_true_not_supportive: 0.147,
            p_true_other: 0.3,
            dup_rate: 0.03,
            short_rate: 0.05,
            id_prefix: "t".into(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub records: Vec<TweetRecord>,
    /// Ground truth: truly supportive or not.
    pub truth: BTreeMap<String, bool>,
}

#[derive(Clone, Copy)]
enum Tag {
    Oxygen,
    Pakistan,
    Kashmir,
}

fn pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str], n: usize) -> Vec<&'a str> {
    (0..n)
        .map(|_| *words.choose(rng).expect("non-empty lexicon"))
        .collect()
}

/// Lowercase body tokens for a post.
fn body(
    rng: &mut ChaCha8Rng,
    truth: bool,
    topic: &[&'static str],
    short: bool,
) -> Vec<&'static str> {
    let mut words = Vec::new();
    if truth {
        let lex: Vec<&str> = HOPE.iter().chain(EMPATHY).copied().collect();
        let n = rng.gen_range(2..=5);
        words.extend(pick(rng, &lex, n));
        if rng.gen_bool(0.2) {
            let lex = if rng.gen_bool(0.5) { HOSTILE } else { NEWS };
            words.extend(pick(rng, lex, 1));
        }
    } else {
        if rng.gen_bool(0.6) {
            let n = rng.gen_range(1..=4);
            words.extend(pick(rng, HOSTILE, n));
        } else {
            let n = rng.gen_range(2..=4);
            words.extend(pick(rng, NEWS, n));
        }
        // sarcasm borrows several supportive words
        let n_cross = if rng.gen_bool(0.05) {
            rng.gen_range(3..=5)
        } else {
            usize::from(rng.gen_bool(0.2))
        };
        let lex: Vec<&str> = HOPE.iter().chain(EMPATHY).copied().collect();
        words.extend(pick(rng, &lex, n_cross));
    }
    let n_topic = rng.gen_range(1..=3);
    words.extend(pick(rng, topic, n_topic));
    let len = if short {
        rng.gen_range(4..=9)
    } else {
        rng.gen_range(10..=22)
    };
    if short {
        words.truncate(len.min(words.len()));
    }
    while words.len() < len {
        words.extend(pick(rng, FILLER, 1));
    }
    words.shuffle(rng);
    words
}

fn render(rng: &mut ChaCha8Rng, words: &[&str], hashtags: &[String]) -> String {
    let mut s = String::new();
    if rng.gen_bool(0.3) {
        s.push_str(&format!("@user{} ", rng.gen_range(1..500)));
    }
    for (i, w) in words.iter().enumerate() {
        if i == 0 {
            let mut c = w.chars();
            let first = c
                .next()
                .map(|f| f.to_uppercase().collect::<String>())
                .unwrap_or_default();
            s.push_str(&first);
            s.push_str(c.as_str());
        } else {
            s.push_str(if rng.gen_bool(0.05) { ", " } else { " " });
            s.push_str(w);
        }
    }
    s.push(if rng.gen_bool(0.3) { '!' } else { '.' });
    for h in hashtags {
        s.push_str(" #");
        s.push_str(h);
    }
    if rng.gen_bool(0.3) {
        s.push_str(&format!(" https://t.co/{:08x}", rng.gen::<u32>()));
    }
    if rng.gen_bool(0.4) {
        s.push(' ');
        s.push_str(EMOJI.choose(rng).expect("non-empty"));
    }
    s
}

fn tag_spelling(rng: &mut ChaCha8Rng, tag: Tag) -> String {
    let variants: &[&str] = match tag {
        Tag::Oxygen => &["IndiaNeedsOxygen", "IndiaNeedOxygen", "indianeedsoxygen"],
        Tag::Pakistan => &[
            "PakistanStandsWithIndia",
            "PakistanStandWithIndia",
            "pakistanstandswithindia",
        ],
        Tag::Kashmir => &[
            "EndiaSaySorryToKashmir",
            "IndiaSaySorryToKashmir",
            "endiasaysorrytokashmir",
        ],
    };
    let r: f64 = rng.gen();
    let i = if r < 0.85 {
        0
    } else if r < 0.95 {
        1
    } else {
        2
    };
    variants[i].to_string()
}

fn topic_of(tag: Tag) -> &'static [&'static str] {
    match tag {
        Tag::Oxygen => TOPIC_OXYGEN,
        Tag::Pakistan => TOPIC_PAKISTAN,
        Tag::Kashmir => TOPIC_KASHMIR,
    }
}

/// Generates a corpus. Each post draws from its own RNG stream, so the
/// first `n` posts do not depend on `n_tweets`.
pub fn generate_corpus(cfg: &SynthConfig) -> SynthCorpus {
    let likes = Normal::<f64>::new(1.5, 1.5).expect("valid normal");
    let retweets = Normal::<f64>::new(0.5, 1.5).expect("valid normal");
    let start = Utc
        .with_ymd_and_hms(2021, 4, 21, 0, 0, 0)
        .single()
        .expect("valid date");
    let span_secs = 14 * 24 * 3600;

    let mut records = Vec::with_capacity(cfg.n_tweets);
    let mut truth = BTreeMap::new();
    let mut bodies: Vec<(Vec<&'static str>, Vec<Tag>, bool)> = Vec::new();
    let width = cfg.n_tweets.max(1).to_string().len().max(5);
    for i in 0..cfg.n_tweets {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let id = format!("{}{:0width$}", cfg.id_prefix, i);

        let (words, tags, t) = if !bodies.is_empty() && rng.gen_bool(cfg.dup_rate) {
            bodies[rng.gen_range(0..bodies.len())].clone()
        } else {
            let r: f64 = rng.gen();
            let tags = if r < 0.80 {
                vec![if rng.gen_bool(0.6) {
                    Tag::Oxygen
                } else {
                    Tag::Pakistan
                }]
            } else if r < 0.95 {
                vec![Tag::Kashmir]
            } else if r < 0.96 {
                vec![Tag::Oxygen, Tag::Kashmir]
            } else {
                Vec::new()
            };
            let p = match tags.as_slice() {
                [Tag::Kashmir] => cfg.p_true_not_supportive,
                [_] => cfg.p_true_supportive,
                _ => cfg.p_true_other,
            };
            let t = rng.gen_bool(p);
            let topic = match tags.first() {
                Some(&tag) => topic_of(tag),
                None => topic_of(
                    *[Tag::Oxygen, Tag::Pakistan, Tag::Kashmir]
                        .choose(&mut rng)
                        .expect("non-empty"),
                ),
            };
            let short = rng.gen_bool(cfg.short_rate);
            let words = body(&mut rng, t, topic, short);
            bodies.push((words.clone(), tags.clone(), t));
            (words, tags, t)
        };

        let hashtags: Vec<String> = tags
            .iter()
            .map(|&tag| tag_spelling(&mut rng, tag))
            .collect();
        let raw_text = render(&mut rng, &words, &hashtags);
        let geo_country = rng.gen_bool(0.25).then(|| {
            let r: f64 = rng.gen();
            if r < 0.4 {
                "IN"
            } else if r < 0.8 {
                "PK"
            } else {
                ["US", "GB", "AE", "CA"]
                    .choose(&mut rng)
                    .expect("non-empty")
            }
            .to_string()
        });
        let profile_flags = if rng.gen_bool(0.3) {
            vec![if rng.gen_bool(0.5) { "IN" } else { "PK" }.to_string()]
        } else {
            Vec::new()
        };
        let mentions = raw_text
            .split_whitespace()
            .filter_map(|w| w.strip_prefix('@'))
            .map(String::from)
            .collect();
        let urls = raw_text
            .split_whitespace()
            .filter(|w| w.starts_with("https://"))
            .map(String::from)
            .collect();
        records.push(TweetRecord {
            id: id.clone(),
            raw_text,
            hashtags,
            mentions,
            urls,
            like_count: likes.sample(&mut rng).exp().floor() as u64,
            retweet_count: retweets.sample(&mut rng).exp().floor() as u64,
            geo_country,
            profile_flags,
            timestamp: start + Duration::seconds(rng.gen_range(0..span_secs)),
        });
        truth.insert(id, t);
    }
    SynthCorpus { records, truth }
}

/// Raw post text with its true label, from an independent batch of posts.
pub fn gold_training_set(n: usize, seed: u64) -> Vec<(String, bool)> {
    let cfg = SynthConfig {
        n_tweets: n,
        id_prefix: "g".into(),
        seed,
        ..SynthConfig::default()
    };
    let c = generate_corpus(&cfg);
    c.records
        .into_iter()
        .map(|r| (r.raw_text, c.truth[&r.id]))
        .collect()
}

fn seed_rows(
    n_per_class: usize,
    seed: u64,
    positive: &[&str],
    negative: &[&[&str]],
) -> Vec<(String, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(2 * n_per_class);
    for _ in 0..n_per_class {
        for label in [true, false] {
            let mut words = if label {
                let n = rng.gen_range(3..=6);
                pick(&mut rng, positive, n)
            } else {
                let lex = *negative.choose(&mut rng).expect("non-empty");
                let n = rng.gen_range(2..=4);
                pick(&mut rng, lex, n)
            };
            let n = rng.gen_range(6..=12);
            words.extend(pick(&mut rng, FILLER, n));
            words.shuffle(&mut rng);
            rows.push((words.join(" "), label));
        }
    }
    rows
}

/// Stand-in for a hope-speech dataset: hope words against hostile or news
/// words.
pub fn hope_seed(n_per_class: usize, seed: u64) -> Vec<(String, bool)> {
    seed_rows(n_per_class, seed, HOPE, &[HOSTILE, NEWS])
}

/// Stand-in for an empathy dataset: empathy words against news or hostile
/// words.
pub fn empathy_seed(n_per_class: usize, seed: u64) -> Vec<(String, bool)> {
    seed_rows(n_per_class, seed, EMPATHY, &[NEWS, HOSTILE])
}

/// Writes `{"text", "label"}` lines.
pub fn write_labeled(path: impl AsRef<Path>, rows: &[(String, bool)]) -> Result<()> {
    let path = path.as_ref();
    let mut out =
        std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    for (text, label) in rows {
        let line = serde_json::json!({ "text": text, "label": u8::from(*label) });
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Fills every cell of `sheet` with the true label, flipped with probability
/// `1 - accuracy` independently per cell.
pub fn simulate_annotations(
    sheet: &AnnotationMatrix,
    truth: &BTreeMap<String, bool>,
    accuracy: f64,
    seed: u64,
) -> Result<AnnotationMatrix> {
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::Config(format!(
            "accuracy {accuracy} is not in [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = sheet.clone();
    for it in &mut out.items {
        let t = *truth
            .get(&it.id)
            .ok_or_else(|| Error::Annotation(format!("no ground truth for item `{}`", it.id)))?;
        for cell in &mut it.labels {
            let l = if rng.gen_bool(accuracy) { t } else { !t };
            let p = if l {
                Polarity::Supportive
            } else {
                Polarity::NotSupportive
            };
            *cell = Some(p.as_str().to_string());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{clean, default_groups, partition, passes_length_filter, Corpus};

    #[test]
    fn planted_rates() {
        let c = generate_corpus(&SynthConfig {
            n_tweets: 20_000,
            dup_rate: 0.0,
            ..SynthConfig::default()
        });
        let corpus = Corpus::from_records(c.records.clone()).unwrap();
        let part = partition(&corpus, &default_groups()).unwrap();
        let rate = |ids: &std::collections::BTreeSet<String>| {
            ids.iter().filter(|id| c.truth[*id]).count() as f64 / ids.len() as f64
        };
        assert!((rate(&part.supportive) - 0.444).abs() < 0.015);
        assert!((rate(&part.not_supportive) - 0.147).abs() < 0.03);
        assert!(!part.discarded.is_empty() && !part.unmatched.is_empty());
    }

    #[test]
    fn bodies_survive_cleaning() {
        let c = generate_corpus(&SynthConfig {
            n_tweets: 500,
            short_rate: 0.0,
            ..SynthConfig::default()
        });
        for r in &c.records {
            let t = clean(&r.raw_text);
            assert!(passes_length_filter(&t, 10), "{}", r.raw_text);
            assert!(
                t.tokens
                    .iter()
                    .all(|w| w.chars().all(|ch| ch.is_ascii_lowercase())),
                "{}",
                t.text
            );
        }
    }

    #[test]
    fn prefix_is_stable() {
        let a = generate_corpus(&SynthConfig {
            n_tweets: 50,
            seed: 9,
            ..SynthConfig::default()
        });
        let b = generate_corpus(&SynthConfig {
            n_tweets: 80,
            seed: 9,
            ..SynthConfig::default()
        });
        assert_eq!(a.records[..], b.records[..50]);
    }

    #[test]
    fn seeds_are_balanced() {
        let h = hope_seed(100, 1);
        assert_eq!(h.iter().filter(|r| r.1).count(), 100);
        assert_eq!(h.len(), 200);
        assert_ne!(h, empathy_seed(100, 1));
    }

    #[test]
    fn annotations_follow_truth() {
        let sheet =
            AnnotationMatrix::blank(1, 3, (0..200).map(|i| (format!("{i}"), String::new())));
        let truth: BTreeMap<String, bool> =
            (0..200).map(|i| (format!("{i}"), i % 2 == 0)).collect();
        let perfect = simulate_annotations(&sheet, &truth, 1.0, 0).unwrap();
        assert!(perfect.items.iter().all(|it| {
            let want = if truth[&it.id] {
                "supportive"
            } else {
                "not-supportive"
            };
            it.labels.iter().all(|l| l.as_deref() == Some(want))
        }));
        let noisy = simulate_annotations(&sheet, &truth, 0.9, 0).unwrap();
        assert_ne!(noisy, perfect);
        let mut missing = truth.clone();
        missing.remove("3");
        assert!(simulate_annotations(&sheet, &missing, 0.9, 0).is_err());
    }
}
